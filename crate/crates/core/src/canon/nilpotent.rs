use crate::config::Tolerances;
use crate::error::PipelineError;
use crate::linalg::{gram_schmidt, norm2, null_space, rank_normal_form, rank_with_floor, Mat};

/// Orthogonal `U(x)` and strictly upper triangular `N(x) = Uᵀ(x) M(x) U(x)` per sample.
#[derive(Clone, Debug)]
pub struct NilpotentReduction {
    pub u: Vec<Mat>,
    pub n: Vec<Mat>,
    pub rank: usize,
    /// Largest discarded entry on or below the diagonal of `Uᵀ M U`, per sample.
    pub residuals: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Triangularizes nilpotent samples by repeated kernel deflation.
///
/// At each level a kernel vector `X = Q e_s` of the rank normal form `P M Q = diag(E_r, 0)`
/// is completed to an orthonormal basis with the remaining columns of `Q`; the first
/// column of `Lᵀ M L` then vanishes and the trailing block is reduced the same way.
/// Samples are processed in order, each aligned with the bases of its parent sample.
///
/// `floor` is a lower bound for the natural scale of the samples, so that blocks of pure
/// round-off are recognized as zero.
pub fn nilpotent_reduce(
    samples: &[Mat],
    parents: &[Option<usize>],
    tol: &Tolerances,
    floor: f64,
) -> Result<NilpotentReduction, PipelineError> {
    let mut levels: Vec<Vec<Mat>> = Vec::with_capacity(samples.len());
    let mut ranks: Vec<usize> = Vec::with_capacity(samples.len());
    let mut out = NilpotentReduction {
        u: Vec::with_capacity(samples.len()),
        n: Vec::with_capacity(samples.len()),
        rank: 0,
        residuals: Vec::with_capacity(samples.len()),
        warnings: Vec::new(),
    };
    for (k, m) in samples.iter().enumerate() {
        let s = m.rows();
        let scale = m.norm_fro().max(floor);
        if s > 0 && m.pow(s as u32).norm_fro() > tol.nilpotent * scale.powi(s as i32) {
            return Err(PipelineError::NonzeroEigenvalue { point: k });
        }
        let r = rank_with_floor(m, tol.block_rank, floor);
        let parent = parents.get(k).copied().flatten();
        if let Some(p) = parent.or(if k > 0 { Some(0) } else { None }) {
            if ranks[p] != r {
                return Err(PipelineError::RankChange { point_a: p, rank_a: ranks[p], point_b: k, rank_b: r });
            }
        }
        ranks.push(r);

        let reference = parent.map(|p| levels[p].as_slice());
        let lv = reduce_levels(m, reference, tol.block_rank, floor)
            .map_err(|source| PipelineError::Numerical { point: k, source })?;
        let u = compose(&lv, s);
        let full = &(&u.transpose() * m) * &u;
        let n = full.strict_upper();
        out.residuals.push(full.max_abs_diff(&n));
        if let Some(p) = parent {
            let jump = (&u - &out.u[p]).norm_fro();
            if jump > tol.continuity {
                out.warnings.push(format!(
                    "LostContinuity: reduction basis moves by {jump:.3} between samples {p} and {k}; refine the grid"
                ));
            }
        }
        out.u.push(u);
        out.n.push(n);
        levels.push(lv);
    }
    out.rank = ranks.first().copied().unwrap_or(0);
    Ok(out)
}

fn compose(levels: &[Mat], s: usize) -> Mat {
    let mut u = Mat::identity(s);
    for (k, l) in levels.iter().enumerate() {
        let mut emb = Mat::identity(s);
        emb.set_block(k, k, l);
        u = &u * &emb;
    }
    u
}

/// Orthonormal basis per deflation level: level `k` is `(s-k) x (s-k)`.
fn reduce_levels(
    a: &Mat,
    reference: Option<&[Mat]>,
    tol: f64,
    floor: f64,
) -> Result<Vec<Mat>, crate::linalg::LinalgError> {
    let s = a.rows();
    if s == 0 {
        return Ok(Vec::new());
    }
    if s == 1 {
        return Ok(vec![Mat::identity(1)]);
    }
    let rnf = rank_normal_form(a, tol, floor)?;
    let r = rnf.rank.min(s - 1);
    let kernel_cols: Vec<Vec<f64>> = (r..s).map(|j| rnf.q.col(j)).collect();
    let kernel = gram_schmidt(&kernel_cols).unwrap_or_else(|_| null_space(a, s - r));

    let from_q = || -> Vec<Vec<f64>> {
        let x = rnf.q.col(s - 1);
        std::iter::once(x).chain((1..s).map(|i| rnf.q.col(s - 1 - i))).collect()
    };
    let z: Vec<Vec<f64>> = match reference {
        Some(refs) => {
            let v = refs[0].col(0);
            let coef = &kernel.transpose().mul_vec(&v);
            let proj = kernel.mul_vec(coef);
            if norm2(&proj) > 0.5 {
                std::iter::once(proj).chain((1..s).map(|j| refs[0].col(j))).collect()
            } else {
                from_q()
            }
        }
        None => from_q(),
    };
    let basis = gram_schmidt(&z).or_else(|_| gram_schmidt(&from_q()))?;
    let b = &(&basis.transpose() * a) * &basis;
    let trailing = b.block(1, 1, s - 1, s - 1);
    let mut levels = vec![basis];
    levels.extend(reduce_levels(&trailing, reference.map(|r| &r[1..]), tol, floor)?);
    Ok(levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_is_left_alone() {
        let z = Mat::zeros(3, 3);
        let r = nilpotent_reduce(&[z], &[None], &Tolerances::default(), 1.0).unwrap();
        assert_eq!(r.n[0], Mat::zeros(3, 3));
        assert!((&(&r.u[0].transpose() * &r.u[0]) - &Mat::identity(3)).norm_max() < 1e-15);
        assert_eq!(r.rank, 0);
    }

    #[test]
    fn rejects_nonzero_eigenvalue() {
        let err = nilpotent_reduce(&[Mat::diag(&[1.0, 0.0])], &[None], &Tolerances::default(), 1.0).unwrap_err();
        assert!(matches!(err, PipelineError::NonzeroEigenvalue { point: 0 }));
    }

    #[test]
    fn similarity_of_rotated_jordan_block() {
        let j = Mat::from_rows(&[[0.0, 2.0, 1.0], [0.0, 0.0, 3.0], [0.0, 0.0, 0.0]]);
        let c = 0.3f64;
        let g = Mat::from_rows(&[[c.cos(), -c.sin(), 0.0], [c.sin(), c.cos(), 0.0], [0.0, 0.0, 1.0]]);
        let m = &(&g * &j) * &g.transpose();
        let r = nilpotent_reduce(&[m.clone()], &[None], &Tolerances::default(), 0.0).unwrap();
        let back = &(&r.u[0] * &r.n[0]) * &r.u[0].transpose();
        assert!(back.max_abs_diff(&m) < 1e-13);
        assert!(r.residuals[0] < 1e-13);
        assert_eq!(r.rank, 2);
    }

    #[test]
    fn rank_change_is_reported() {
        let a = Mat::from_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        let err = nilpotent_reduce(&[a, Mat::zeros(2, 2)], &[None, Some(0)], &Tolerances::default(), 1.0)
            .unwrap_err();
        assert!(matches!(err, PipelineError::RankChange { rank_a: 1, rank_b: 0, .. }));
    }
}
