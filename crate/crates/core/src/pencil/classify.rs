use serde::Serialize;

use super::{char_poly_at, RankProfile, Samples, SpectrumProfile};
use crate::config::Tolerances;
use crate::linalg::LinalgError;

/// Rank-degree criterion: `rank B = deg_λ det(A + λB)` and `rank A = deg_μ det(μA + B)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub rank_a: usize,
    pub rank_b: usize,
    pub deg_lambda: usize,
    /// `None` when the μ-degree is not the same at every point.
    pub deg_mu: Option<usize>,
    pub rank_degree_lambda: bool,
    pub rank_degree_mu: bool,
    pub rank_degree: bool,
    /// Rank-degree holds, 0 is a simple root and every nonzero root is simple.
    pub simple_roots: bool,
}

pub fn rank_degree_classify(
    s: &Samples,
    sp: &SpectrumProfile,
    ranks: RankProfile,
    tol: &Tolerances,
) -> Result<Classification, LinalgError> {
    let deg_lambda = sp.l + sp.d;
    let mut deg_mu = None;
    let mut constant = true;
    for k in 0..s.len() {
        let deg = char_poly_at(&s.b[k], &s.a[k], tol)?.degree();
        match deg_mu {
            None => deg_mu = Some(deg),
            Some(d) if d != deg => constant = false,
            _ => {}
        }
    }
    let deg_mu = if constant { deg_mu } else { None };
    let rank_degree_lambda = ranks.rank_b == deg_lambda;
    let rank_degree_mu = deg_mu == Some(ranks.rank_a);
    let rank_degree = rank_degree_lambda && rank_degree_mu;
    Ok(Classification {
        rank_a: ranks.rank_a,
        rank_b: ranks.rank_b,
        deg_lambda,
        deg_mu,
        rank_degree_lambda,
        rank_degree_mu,
        rank_degree,
        simple_roots: rank_degree && sp.l == 1 && sp.multiplicities.iter().all(|&p| p == 1),
    })
}
