use serde::Serialize;

use super::{Samples, SpectrumProfile};
use crate::config::Tolerances;
use crate::error::HypothesisViolation;
use crate::linalg::{det_unsnapped, norm2, Mat};

/// `|det M| / prod_j ||col_j(M)||`, a scale-free nonsingularity measure in `[0, 1]`.
pub fn hadamard_ratio(m: &Mat) -> f64 {
    let mut denom = 1.0;
    for j in 0..m.cols() {
        let c = norm2(&m.col(j));
        if c == 0.0 {
            return 0.0;
        }
        denom *= c;
    }
    det_unsnapped(m).map_or(0.0, |d| d.abs() / denom)
}

/// Sampled shift `c(x)` used to regularize the pencil as `A + cB`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftFunction {
    pub values: Vec<f64>,
    /// The common value when the shift is constant.
    pub constant: Option<f64>,
    /// `"forced"`, `"constant"` or `"pointwise_mean"`.
    pub strategy: String,
    /// Smallest `|c - λ|` over the grid and all roots, 0 included.
    pub min_root_distance: f64,
    /// Smallest Hadamard ratio of `A + cB` over the grid.
    pub min_regularity: f64,
    pub warnings: Vec<String>,
}

/// Relative root distance at which a constant shift is taken without looking further.
const COMFORT: f64 = 0.05;

struct Margins {
    root_distance: f64,
    regularity: f64,
}

fn margins(s: &Samples, sp: &SpectrumProfile, c: impl Fn(usize) -> f64) -> Margins {
    let mut root_distance = f64::INFINITY;
    let mut regularity = f64::INFINITY;
    for k in 0..s.len() {
        let ck = c(k);
        root_distance = root_distance.min(ck.abs());
        for br in &sp.branches {
            root_distance = root_distance.min((ck - br[k]).abs());
        }
        regularity = regularity.min(hadamard_ratio(&(&s.a[k] + &s.b[k].scale(ck))));
    }
    Margins { root_distance, regularity }
}

fn acceptable(m: &Margins, tol: &Tolerances) -> bool {
    m.root_distance > tol.separation && m.regularity > tol.regularity
}

/// Picks a shift that avoids every root of `det(A + λB)` and keeps `A + cB` nonsingular.
///
/// Constants are tried first (1, -1, then gaps between the ranges of the root
/// branches); otherwise, at each point, the mean of 0 and its nearest nonzero root.
pub fn choose_shift(
    s: &Samples,
    sp: &SpectrumProfile,
    tol: &Tolerances,
    forced: Option<f64>,
) -> Result<ShiftFunction, HypothesisViolation> {
    let constant_result = |c: f64, strategy: &str, m: Margins| ShiftFunction {
        values: vec![c; s.len()],
        constant: Some(c),
        strategy: strategy.into(),
        min_root_distance: m.root_distance,
        min_regularity: m.regularity,
        warnings: Vec::new(),
    };
    if let Some(c) = forced {
        let m = margins(s, sp, |_| c);
        if !acceptable(&m, tol) {
            return Err(HypothesisViolation::NoShiftFound {
                detail: format!(
                    "forced shift {c} rejected: root distance {:e}, regularity {:e}",
                    m.root_distance, m.regularity
                ),
            });
        }
        return Ok(constant_result(c, "forced", m));
    }

    let mut ranges: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for br in &sp.branches {
        let lo = br.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = br.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ranges.push((lo, hi));
    }
    ranges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut candidates = vec![1.0, -1.0];
    for w in ranges.windows(2) {
        if w[0].1 < w[1].0 {
            candidates.push(0.5 * (w[0].1 + w[1].0));
        }
    }
    let lowest = ranges.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let highest = ranges.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    candidates.push(highest + 1.0);
    candidates.push(lowest - 1.0);

    // The first candidate that keeps a comfortable distance from every root wins; failing
    // that, the admissible candidate farthest from the roots.
    let mut tried = Vec::new();
    let mut fallback: Option<(f64, Margins)> = None;
    for &c in &candidates {
        let m = margins(s, sp, |_| c);
        if acceptable(&m, tol) {
            if m.root_distance >= COMFORT * (1.0 + c.abs()) {
                return Ok(constant_result(c, "constant", m));
            }
            if fallback.as_ref().is_none_or(|(_, f)| m.root_distance > f.root_distance) {
                fallback = Some((c, m));
                continue;
            }
        }
        tried.push(format!("{c}: distance {:e}, regularity {:e}", m.root_distance, m.regularity));
    }
    if let Some((c, m)) = fallback {
        return Ok(constant_result(c, "constant", m));
    }

    let values: Vec<f64> = (0..s.len())
        .map(|k| {
            sp.branches
                .iter()
                .map(|b| b[k])
                .min_by(|a, b| a.abs().total_cmp(&b.abs()))
                .map_or(1.0, |r| 0.5 * r)
        })
        .collect();
    let m = margins(s, sp, |k| values[k]);
    if !acceptable(&m, tol) {
        tried.push(format!("pointwise mean: distance {:e}, regularity {:e}", m.root_distance, m.regularity));
        return Err(HypothesisViolation::NoShiftFound { detail: tried.join("; ") });
    }
    let mut warnings = Vec::new();
    for k in 0..s.len() {
        if let Some(p) = s.parents[k] {
            if values[k].signum() != values[p].signum() {
                warnings.push(format!(
                    "pointwise shift changes side of 0 between x = {:?} and x = {:?}; c(x) is discontinuous there",
                    s.points[p], s.points[k]
                ));
            }
        }
    }
    Ok(ShiftFunction {
        values,
        constant: None,
        strategy: "pointwise_mean".into(),
        min_root_distance: m.root_distance,
        min_regularity: m.regularity,
        warnings,
    })
}
