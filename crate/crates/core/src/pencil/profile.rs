use serde::Serialize;

use super::Samples;
use crate::config::Tolerances;
use crate::error::{Error, HypothesisViolation};
use crate::linalg::{det_unsnapped, poly_roots_with, rank, interpolate_poly, LinalgError, Mat, RealPoly};

/// Coefficients of `det(A + λB)` in λ, recovered from `n + 1` Chebyshev samples on
/// `[-R, R]` with `R = 1 + ||A|| / ||B||`.
///
/// When every sampled determinant is negligible against the natural scale
/// `(||A|| + R ||B||)^n` the result is the zero polynomial.
pub fn char_poly_at(a: &Mat, b: &Mat, tol: &Tolerances) -> Result<RealPoly, LinalgError> {
    let n = a.rows();
    let (na, nb) = (a.norm_fro(), b.norm_fro());
    let radius = if nb > 0.0 { 1.0 + na / nb } else { 1.0 };
    let scale = (na + radius * nb).powi(n as i32);
    let mut largest = 0.0f64;
    let poly = interpolate_poly(n, radius, tol.snap, |lam| {
        let d = det_unsnapped(&(a + &b.scale(lam)))?;
        largest = largest.max(d.abs());
        Ok::<f64, LinalgError>(d)
    })?;
    if largest <= tol.rank_tol(n) * scale {
        return Ok(RealPoly::new(vec![0.0]));
    }
    Ok(poly)
}

/// Root structure of `det(A(x) + λB(x))` over the grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumProfile {
    pub n: usize,
    /// Multiplicity of the zero root.
    pub l: usize,
    /// Degree of the nonzero part.
    pub d: usize,
    /// `n - l - d`.
    pub lhat: usize,
    /// Multiplicities `p_i` of the nonzero branches, in ascending order of branch value.
    pub multiplicities: Vec<usize>,
    /// `branches[i][k]` is the value of branch `i` at point `k`.
    pub branches: Vec<Vec<f64>>,
    /// `s_coeffs[k]` holds `S_l..S_{l+d}` at point `k`.
    pub s_coeffs: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl SpectrumProfile {
    /// Nonzero branches at point `k` as `(value, multiplicity)`.
    pub fn branches_at(&self, k: usize) -> Vec<(f64, usize)> {
        self.branches.iter().zip(&self.multiplicities).map(|(b, &p)| (b[k], p)).collect()
    }
}

struct PointRoots {
    l: usize,
    d: usize,
    nonzero: Vec<(f64, usize)>,
    coeffs: Vec<f64>,
}

impl PointRoots {
    fn pattern(&self) -> String {
        let ps: Vec<String> = self.nonzero.iter().map(|(_, p)| p.to_string()).collect();
        format!("l={}, d={}, p=[{}]", self.l, self.d, ps.join(","))
    }
}

fn analyze_point(a: &Mat, b: &Mat, x: &[f64], tol: &Tolerances) -> Result<PointRoots, Error> {
    let poly = char_poly_at(a, b, tol)?;
    if poly.is_zero() {
        return Err(HypothesisViolation::SingularPencil { point: x.to_vec() }.into());
    }
    let l = poly.lowest_nonzero().unwrap_or(0);
    let deg = poly.degree();
    let roots = poly_roots_with(&poly, tol.root_tolerances()).map_err(|e| match e {
        LinalgError::ComplexRoots { re, im } => {
            Error::from(HypothesisViolation::ComplexRoots { point: x.to_vec(), re, im })
        }
        other => Error::from(other),
    })?;
    let nonzero: Vec<(f64, usize)> = roots.into_iter().filter(|(r, _)| *r != 0.0).collect();
    if let Some(&(value, _)) = nonzero.iter().find(|(r, _)| r.abs() <= tol.cluster) {
        return Err(HypothesisViolation::RootCollision { point: x.to_vec(), value }.into());
    }
    Ok(PointRoots { l, d: deg - l, nonzero, coeffs: poly.coeffs()[l..=deg].to_vec() })
}

/// Checks that the roots of `det(A(x) + λB(x))` are real, of constant multiplicity, and
/// include 0 with constant multiplicity, at every sample.
pub fn spectrum_profile(s: &Samples, tol: &Tolerances) -> Result<SpectrumProfile, Error> {
    let n = s.n();
    let mut per_point: Vec<PointRoots> = Vec::with_capacity(s.len());
    for k in 0..s.len() {
        let pr = analyze_point(&s.a[k], &s.b[k], &s.points[k], tol)?;
        let reference = s.parents[k].unwrap_or(0);
        if k > 0 {
            let r = &per_point[reference];
            let same_shape = r.l == pr.l && r.d == pr.d;
            let same_mults =
                r.nonzero.iter().map(|p| p.1).eq(pr.nonzero.iter().map(|p| p.1));
            if !same_shape || !same_mults {
                if same_shape && r.nonzero.len() != pr.nonzero.len() {
                    // Fewer distinct roots with the same degree means two branches merged.
                    let (fewer, fewer_k) =
                        if pr.nonzero.len() < r.nonzero.len() { (&pr, k) } else { (r, reference) };
                    let value = fewer.nonzero.iter().find(|(_, p)| *p > 1).map_or(0.0, |v| v.0);
                    return Err(HypothesisViolation::RootCollision { point: s.points[fewer_k].clone(), value }.into());
                }
                return Err(HypothesisViolation::MultiplicityChange {
                    point_a: s.points[reference].clone(),
                    pattern_a: r.pattern(),
                    point_b: s.points[k].clone(),
                    pattern_b: pr.pattern(),
                }
                .into());
            }
        }
        per_point.push(pr);
    }
    let first = &per_point[0];
    let (l, d) = (first.l, first.d);
    if l == 0 {
        return Err(HypothesisViolation::NoZeroRoot.into());
    }
    if l + d == n {
        return Err(HypothesisViolation::NoInfinitePart.into());
    }
    let multiplicities: Vec<usize> = first.nonzero.iter().map(|r| r.1).collect();
    let branches: Vec<Vec<f64>> =
        (0..multiplicities.len()).map(|i| per_point.iter().map(|p| p.nonzero[i].0).collect()).collect();

    let mut warnings = Vec::new();
    // Sorted order is the matching; confirm it agrees with nearest-value pairing.
    for k in 0..s.len() {
        let Some(par) = s.parents[k] else { continue };
        for (i, br) in branches.iter().enumerate() {
            let nearest = (0..branches.len())
                .min_by(|&u, &v| {
                    (branches[u][par] - br[k]).abs().total_cmp(&(branches[v][par] - br[k]).abs())
                })
                .unwrap();
            if nearest != i {
                warnings.push(format!(
                    "branch {} at x = {:?} is closer to branch {} at the neighbouring point; grid may be too coarse",
                    i + 1,
                    s.points[k],
                    nearest + 1
                ));
            }
        }
    }
    if let Some(grid) = &s.grid {
        for (i, br) in branches.iter().enumerate() {
            for axis in 0..grid.dim() {
                for [p, q, r] in grid.axis_triples(axis) {
                    let (j1, j2) = ((br[q] - br[p]).abs(), (br[r] - br[q]).abs());
                    let slack = 1e-6 * (1.0 + br[q].abs());
                    if j2 > 4.0 * j1 + slack || j1 > 4.0 * j2 + slack {
                        warnings.push(format!(
                            "branch {} jumps irregularly along axis {} near x = {:?} (diagnostic)",
                            i + 1,
                            axis + 1,
                            s.points[q]
                        ));
                    }
                }
            }
        }
    }
    Ok(SpectrumProfile {
        n,
        l,
        d,
        lhat: n - l - d,
        multiplicities,
        branches,
        s_coeffs: per_point.into_iter().map(|p| p.coeffs).collect(),
        warnings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RankProfile {
    pub rank_a: usize,
    pub rank_b: usize,
}

fn constant_rank(s: &Samples, mats: &[Mat], name: &str, tol: f64) -> Result<usize, HypothesisViolation> {
    let ranks: Vec<usize> = mats.iter().map(|m| rank(m, tol)).collect();
    for k in 1..ranks.len() {
        let r = s.parents[k].unwrap_or(0);
        if ranks[k] != ranks[r] {
            return Err(HypothesisViolation::RankChange {
                matrix: name.into(),
                point_a: s.points[r].clone(),
                rank_a: ranks[r],
                point_b: s.points[k].clone(),
                rank_b: ranks[k],
            });
        }
    }
    let n = s.n();
    if ranks[0] == n {
        return Err(HypothesisViolation::FullRank { matrix: name.into(), rank: n });
    }
    Ok(ranks[0])
}

/// Ranks of `A(x)` and `B(x)`; both must be constant on the grid and below `n`.
pub fn rank_profile(s: &Samples, tol: &Tolerances) -> Result<RankProfile, HypothesisViolation> {
    let t = tol.rank_tol(s.n());
    let rank_a = constant_rank(s, &s.a, "A", t)?;
    let rank_b = constant_rank(s, &s.b, "B", t)?;
    Ok(RankProfile { rank_a, rank_b })
}
