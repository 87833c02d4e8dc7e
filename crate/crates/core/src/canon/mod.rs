//! Pointwise construction of the canonical form and the transforms `P(x)`, `Q(x)`.

mod nilpotent;
mod split;

pub use nilpotent::{nilpotent_reduce, NilpotentReduction};
pub use split::{spectral_split, split_point, Cluster, SpectralSplit};

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, PipelineError, Stage};
use crate::linalg::{cond, inverse, LinalgError, Mat};
use crate::pencil::{Samples, ShiftFunction, SpectrumProfile};

/// `diag{E_d, M, E_l̂} + λ diag{J_1, ..., J_k, E_l, N}` sampled on the grid.
#[derive(Clone, Debug, Serialize)]
pub struct CanonicalForm {
    pub d: usize,
    pub l: usize,
    pub lhat: usize,
    pub multiplicities: Vec<usize>,
    /// `j_blocks[k][i]` is `J_i` at sample `k`.
    pub j_blocks: Vec<Vec<Mat>>,
    pub m_block: Vec<Mat>,
    pub n_block: Vec<Mat>,
}

impl CanonicalForm {
    pub fn len(&self) -> usize {
        self.m_block.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m_block.is_empty()
    }

    /// Coefficient of λ⁰ at sample `k`.
    pub fn left(&self, k: usize) -> Mat {
        Mat::block_diag(&[&Mat::identity(self.d), &self.m_block[k], &Mat::identity(self.lhat)])
    }

    /// Coefficient of λ¹ at sample `k`.
    pub fn right(&self, k: usize) -> Mat {
        let e = Mat::identity(self.l);
        let mut parts: Vec<&Mat> = self.j_blocks[k].iter().collect();
        parts.push(&e);
        parts.push(&self.n_block[k]);
        Mat::block_diag(&parts)
    }
}

/// Sampled `P(x)`, `Q(x)` with their condition numbers.
#[derive(Clone, Debug, Serialize)]
pub struct EquivalencePair {
    pub p: Vec<Mat>,
    pub q: Vec<Mat>,
    pub cond_p: Vec<f64>,
    pub cond_q: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Canonization {
    pub form: CanonicalForm,
    pub pair: EquivalencePair,
    /// `max |P A Q - left|` per sample.
    pub residual_a: Vec<f64>,
    /// `max |P B Q - right|` per sample.
    pub residual_b: Vec<f64>,
    /// Residual bound per sample.
    pub bound: Vec<f64>,
    pub pass: bool,
    pub warnings: Vec<String>,
}

fn stage_err(stage: Stage) -> impl Fn(PipelineError) -> Error {
    move |source| Error::Pipeline { stage, source }
}

fn numerical(stage: Stage, point: usize) -> impl Fn(LinalgError) -> Error {
    move |source| Error::Pipeline { stage, source: PipelineError::Numerical { point, source } }
}

/// Runs the full reduction on profiled samples.
pub fn canonize(
    s: &Samples,
    sp: &SpectrumProfile,
    shift: &ShiftFunction,
    tol: &Tolerances,
) -> Result<Canonization, Error> {
    let (d, l, lhat) = (sp.d, sp.l, sp.lhat);
    let count = s.len();
    let mut warnings = Vec::new();

    // Regularize: A1 = A + cB, G = A1⁻¹ B.
    let mut a1_inv = Vec::with_capacity(count);
    let mut gs = Vec::with_capacity(count);
    let mut clusters = Vec::with_capacity(count);
    for k in 0..count {
        let c = shift.values[k];
        let inv = inverse(&(&s.a[k] + &s.b[k].scale(c))).map_err(numerical(Stage::Shift, k))?;
        gs.push(&inv * &s.b[k]);
        a1_inv.push(inv);
        let mut cl: Vec<Cluster> =
            sp.branches_at(k).into_iter().map(|(lam, p)| Cluster { value: 1.0 / (c - lam), size: p }).collect();
        cl.push(Cluster { value: 1.0 / c, size: l });
        cl.push(Cluster { value: 0.0, size: lhat });
        clusters.push(cl);
    }
    let floor = gs.iter().fold(1.0f64, |a, g| a.max(g.norm_fro()));

    let split = spectral_split(&gs, &clusters, &s.parents, tol).map_err(stage_err(Stage::SpectralSplit))?;
    let k_branches = sp.multiplicities.len();

    let n_raw: Vec<Mat> = split.blocks.iter().map(|b| b[k_branches + 1].clone()).collect();
    let n_red = nilpotent_reduce(&n_raw, &s.parents, tol, floor).map_err(stage_err(Stage::ReduceN))?;
    warnings.extend(n_red.warnings.iter().cloned());

    let mut j_cal = Vec::with_capacity(count);
    let mut j_bar = Vec::with_capacity(count);
    let mut n_cal = Vec::with_capacity(count);
    let mut m_inv = Vec::with_capacity(count);
    let mut m_hat = Vec::with_capacity(count);
    for k in 0..count {
        let c = shift.values[k];
        let err = numerical(Stage::InvertBlocks, k);
        let mut jc = Vec::with_capacity(k_branches);
        let mut jb = Vec::with_capacity(k_branches + 2);
        for (i, (lam, p)) in sp.branches_at(k).into_iter().enumerate() {
            let ji = &split.blocks[k][i];
            let bar = inverse(&(&Mat::identity(p) - &ji.scale(c))).map_err(&err)?;
            let cal = &bar * ji;
            let expected = -1.0 / lam;
            let mean = cal.trace() / p as f64;
            if (mean - expected).abs() > tol.eig * (1.0 + expected.abs()) {
                return Err(Error::Pipeline {
                    stage: Stage::InvertBlocks,
                    source: PipelineError::ClusterMismatch {
                        point: k,
                        detail: format!("J block {} has eigenvalue {mean}, expected {expected}", i + 1),
                    },
                });
            }
            jc.push(cal);
            jb.push(bar);
        }
        let nh = &n_red.n[k];
        let nbar = inverse(&(&Mat::identity(lhat) - &nh.scale(c))).map_err(&err)?;
        n_cal.push((&nbar * nh).strict_upper());
        jb.push(Mat::identity(l));
        jb.push(nbar);
        j_cal.push(jc);
        j_bar.push(jb);

        let mi = inverse(&split.blocks[k][k_branches]).map_err(&err)?;
        m_hat.push(&mi - &Mat::identity(l).scale(c));
        m_inv.push(mi);
    }
    let m_floor = m_hat.iter().zip(&shift.values).fold(1.0f64, |a, (m, c)| a.max(m.norm_fro() + c.abs()));
    let m_red = nilpotent_reduce(&m_hat, &s.parents, tol, m_floor).map_err(stage_err(Stage::ReduceM))?;
    warnings.extend(m_red.warnings.iter().cloned());

    let form = CanonicalForm {
        d,
        l,
        lhat,
        multiplicities: sp.multiplicities.clone(),
        j_blocks: j_cal,
        m_block: m_red.n.clone(),
        n_block: n_cal,
    };

    let mut pair = EquivalencePair {
        p: Vec::with_capacity(count),
        q: Vec::with_capacity(count),
        cond_p: Vec::with_capacity(count),
        cond_q: Vec::with_capacity(count),
    };
    let (mut residual_a, mut residual_b, mut bound) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..count {
        let u_tilde = Mat::block_diag(&[&Mat::identity(d + l), &n_red.u[k]]);
        let u_hat = Mat::block_diag(&[&Mat::identity(d), &m_red.u[k], &Mat::identity(lhat)]);
        let m_bar = Mat::block_diag(&[&Mat::identity(d), &m_inv[k], &Mat::identity(lhat)]);
        let jb: Vec<&Mat> = j_bar[k].iter().collect();
        let j_bar_full = Mat::block_diag(&jb);
        let t_inv = inverse(&split.t[k]).map_err(numerical(Stage::Assemble, k))?;
        let p = &(&(&(&(&u_hat.transpose() * &m_bar) * &j_bar_full) * &u_tilde.transpose()) * &t_inv) * &a1_inv[k];
        let q = &(&split.t[k] * &u_tilde) * &u_hat;
        let (cp, cq) = (cond(&p), cond(&q));
        if !(cp <= tol.cond_limit && cq <= tol.cond_limit) {
            return Err(Error::ConditioningBlowup { point: s.points[k].clone(), cond_p: cp, cond_q: cq });
        }
        let ra = (&(&p * &s.a[k]) * &q).max_abs_diff(&form.left(k));
        let rb = (&(&p * &s.b[k]) * &q).max_abs_diff(&form.right(k));
        residual_a.push(ra);
        residual_b.push(rb);
        bound.push(tol.canon * (1.0 + s.a[k].norm_fro() + s.b[k].norm_fro()));
        pair.p.push(p);
        pair.q.push(q);
        pair.cond_p.push(cp);
        pair.cond_q.push(cq);
    }
    let pass = (0..count).all(|k| residual_a[k] <= bound[k] && residual_b[k] <= bound[k]);
    Ok(Canonization { form, pair, residual_a, residual_b, bound, pass, warnings })
}
