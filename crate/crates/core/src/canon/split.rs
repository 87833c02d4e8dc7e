use serde::Serialize;

use crate::config::Tolerances;
use crate::error::PipelineError;
use crate::linalg::{char_poly_of, gram_schmidt, inverse, null_space, sylvester_solve, Mat, RealPoly};

/// Predicted eigenvalue `value` of multiplicity `size`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cluster {
    pub value: f64,
    pub size: usize,
}

/// Block diagonalization `T⁻¹ G T = diag(blocks)` per sample.
#[derive(Clone, Debug)]
pub struct SpectralSplit {
    pub t: Vec<Mat>,
    pub blocks: Vec<Vec<Mat>>,
    /// Largest off-block entry of `T⁻¹ G T` before it is discarded.
    pub residuals: Vec<f64>,
}

fn offsets(clusters: &[Cluster]) -> Vec<usize> {
    let mut off = Vec::with_capacity(clusters.len() + 1);
    let mut acc = 0;
    off.push(0);
    for c in clusters {
        acc += c.size;
        off.push(acc);
    }
    off
}

fn off_block_max(h: &Mat, off: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for bi in 0..off.len() - 1 {
        for bj in 0..off.len() - 1 {
            if bi != bj {
                let blk = h.block(off[bi], off[bj], off[bi + 1] - off[bi], off[bj + 1] - off[bj]);
                worst = worst.max(blk.norm_max());
            }
        }
    }
    worst
}

/// Splits one sample. `reference` is the parent sample's `T`, used to align bases.
pub fn split_point(
    g: &Mat,
    clusters: &[Cluster],
    reference: Option<&Mat>,
    tol: &Tolerances,
    point: usize,
) -> Result<(Mat, Vec<Mat>, f64), PipelineError> {
    let n = g.rows();
    let numerical = |source| PipelineError::Numerical { point, source };
    let mismatch = |detail: String| PipelineError::ClusterMismatch { point, detail };

    let biggest = clusters.iter().fold(1.0f64, |a, c| a.max(c.value.abs()));
    for (i, a) in clusters.iter().enumerate() {
        for b in &clusters[i + 1..] {
            let gap = (a.value - b.value).abs();
            if gap <= tol.spectral_gap * biggest {
                return Err(PipelineError::GapTooSmall { point, gap });
            }
        }
    }
    if clusters.iter().map(|c| c.size).sum::<usize>() != n {
        return Err(mismatch(format!("cluster sizes do not add up to {n}")));
    }

    // The characteristic polynomial must factor exactly as predicted.
    let observed = char_poly_of(g, 0.0).map_err(numerical)?;
    let predicted = RealPoly::from_roots(&clusters.iter().map(|c| (c.value, c.size)).collect::<Vec<_>>());
    // Compared in the variable ξ / R used by the interpolation, R = 1 + ||G||.
    let radius = 1.0 + g.norm_fro();
    let scaled = |c: &RealPoly, i: usize| c.coeffs().get(i).copied().unwrap_or(0.0) * radius.powi(i as i32);
    let scale = (0..=n).fold(1.0f64, |a, i| a.max(scaled(&predicted, i).abs()));
    for i in 0..=n {
        let (o, p) = (scaled(&observed, i), scaled(&predicted, i));
        if (o - p).abs() > tol.cluster * scale {
            return Err(mismatch(format!(
                "characteristic polynomial coefficient {i} is {:e}, factorization predicts {:e}",
                o / radius.powi(i as i32),
                p / radius.powi(i as i32)
            )));
        }
    }

    let off = offsets(clusters);
    let mut t = Mat::zeros(n, n);
    for (ci, c) in clusters.iter().enumerate() {
        let shifted = Mat::from_fn(n, n, |i, j| g[(i, j)] - if i == j { c.value } else { 0.0 });
        let mut v = null_space(&shifted.pow(c.size as u32), c.size);
        if let Some(r) = reference {
            let rb = r.block(0, off[ci], n, c.size);
            let proj = &v * &(&v.transpose() * &rb);
            let cols: Vec<Vec<f64>> = (0..c.size).map(|j| proj.col(j)).collect();
            if let Ok(aligned) = gram_schmidt(&cols) {
                v = aligned;
            }
        }
        t.set_block(0, off[ci], &v);
    }

    let gnorm = g.norm_fro().max(1.0);
    let mut h = &(&inverse(&t).map_err(numerical)? * g) * &t;
    let mut resid = off_block_max(&h, &off);
    for _ in 0..12 {
        if resid <= 1e-14 * gnorm {
            break;
        }
        let mut y = Mat::identity(n);
        for bi in 0..clusters.len() {
            for bj in 0..clusters.len() {
                if bi == bj {
                    continue;
                }
                let (pi, pj) = (clusters[bi].size, clusters[bj].size);
                let dii = h.block(off[bi], off[bi], pi, pi);
                let djj = h.block(off[bj], off[bj], pj, pj);
                let fij = h.block(off[bi], off[bj], pi, pj);
                let gap = 0.5 * tol.spectral_gap * biggest;
                let yij = sylvester_solve(&dii, &djj, &fij.scale(-1.0), gap).map_err(numerical)?;
                y.set_block(off[bi], off[bj], &yij);
            }
        }
        t = &t * &y;
        h = &(&inverse(&t).map_err(numerical)? * g) * &t;
        let next = off_block_max(&h, &off);
        if next >= resid {
            resid = next;
            break;
        }
        resid = next;
    }
    if resid > 1e-9 * gnorm {
        return Err(mismatch(format!("invariant subspaces do not decouple (off-block {resid:e})")));
    }

    let mut blocks = Vec::with_capacity(clusters.len());
    for (ci, c) in clusters.iter().enumerate() {
        let blk = h.block(off[ci], off[ci], c.size, c.size);
        let mean = blk.trace() / c.size as f64;
        if (mean - c.value).abs() > tol.eig * (1.0 + c.value.abs()) * gnorm {
            return Err(mismatch(format!("block {} has mean eigenvalue {mean}, expected {}", ci + 1, c.value)));
        }
        blocks.push(blk);
    }
    Ok((t, blocks, resid))
}

/// Block-diagonalizes every sample against its predicted clusters.
pub fn spectral_split(
    gs: &[Mat],
    clusters: &[Vec<Cluster>],
    parents: &[Option<usize>],
    tol: &Tolerances,
) -> Result<SpectralSplit, PipelineError> {
    let mut out = SpectralSplit { t: Vec::new(), blocks: Vec::new(), residuals: Vec::new() };
    for (k, g) in gs.iter().enumerate() {
        let reference = parents.get(k).copied().flatten().map(|p| &out.t[p]);
        let (t, blocks, r) = split_point(g, &clusters[k], reference, tol, k)?;
        out.t.push(t);
        out.blocks.push(blocks);
        out.residuals.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cl(v: &[(f64, usize)]) -> Vec<Cluster> {
        v.iter().map(|&(value, size)| Cluster { value, size }).collect()
    }

    #[test]
    fn block_diagonal_input_stays_put() {
        let g = Mat::block_diag(&[&Mat::from_rows(&[[2.0, 1.0], [0.0, 2.0]]), &Mat::diag(&[-1.0])]);
        let (t, blocks, _) = split_point(&g, &cl(&[(2.0, 2), (-1.0, 1)]), None, &Tolerances::default(), 0).unwrap();
        let back = &(&t * &Mat::block_diag(&[&blocks[0], &blocks[1]])) * &inverse(&t).unwrap();
        assert!(back.max_abs_diff(&g) < 1e-12);
        assert!(t.block(2, 0, 1, 2).norm_max() < 1e-12);
    }

    #[test]
    fn close_clusters_are_rejected() {
        let g = Mat::diag(&[0.5, 0.5001, 0.0]);
        let err = split_point(&g, &cl(&[(0.5, 1), (0.5001, 1), (0.0, 1)]), None, &Tolerances::default(), 0)
            .unwrap_err();
        assert!(matches!(err, PipelineError::GapTooSmall { .. }));
    }

    #[test]
    fn wrong_prediction_is_a_mismatch() {
        let g = Mat::diag(&[1.0, 2.0]);
        let err = split_point(&g, &cl(&[(1.0, 1), (3.0, 1)]), None, &Tolerances::default(), 0).unwrap_err();
        assert!(matches!(err, PipelineError::ClusterMismatch { .. }));
    }

    #[test]
    fn coupled_jordan_and_simple() {
        let d = Mat::from_rows(&[[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -0.5]]);
        let s = Mat::from_rows(&[[1.0, 0.2, -0.3], [0.1, 1.0, 0.4], [0.5, -0.2, 1.0]]);
        let g = &(&s * &d) * &inverse(&s).unwrap();
        let (t, blocks, r) = split_point(&g, &cl(&[(1.0, 2), (-0.5, 1)]), None, &Tolerances::default(), 0).unwrap();
        assert!(r < 1e-12);
        let h = &(&inverse(&t).unwrap() * &g) * &t;
        assert!(h.block(0, 2, 2, 1).norm_max() < 1e-12 && h.block(2, 0, 1, 2).norm_max() < 1e-12);
        assert!((blocks[1][(0, 0)] + 0.5).abs() < 1e-12);
    }
}
