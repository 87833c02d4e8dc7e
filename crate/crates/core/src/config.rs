use serde::{Deserialize, Serialize};

use crate::linalg::default_rank_tol;

/// Numerical tolerances. Every report echoes the values it was produced with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative rank tolerance for A(x), B(x); `None` means `n * 2^-40`.
    pub rank: Option<f64>,
    /// Characteristic-polynomial coefficients below `snap * max|coeff|` are zero.
    pub snap: f64,
    /// Roots closer than `cluster * (1 + |root|)` are one root.
    pub cluster: f64,
    /// Admissible imaginary part of a real root, relative to `1 + |root|`.
    pub imag: f64,
    /// Minimum distance between a shift and 0 or any root branch.
    pub separation: f64,
    /// Minimum `|det M| / prod ||col_j(M)||` for a matrix to count as nonsingular.
    pub regularity: f64,
    /// Per-point equivalence residual bound, relative to `1 + ||A|| + ||B||`.
    pub canon: f64,
    /// Eigenvalue agreement for the J blocks and spectral clusters.
    pub eig: f64,
    /// Largest admissible condition number of P(x), Q(x).
    pub cond_limit: f64,
    /// Minimum separation of predicted spectral clusters, relative to `max(1, max|σ|)`.
    pub spectral_gap: f64,
    /// Adjacent-point distance above which a transform is flagged as discontinuous.
    pub continuity: f64,
    /// Relative rank tolerance for computed blocks (nilpotent reduction).
    pub block_rank: f64,
    /// `||M^k|| <= nilpotent * ||M||^k` counts as zero.
    pub nilpotent: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: None,
            snap: 1e-9,
            cluster: 1e-6,
            imag: 1e-7,
            separation: 1e-4,
            regularity: 1e-10,
            canon: 1e-8,
            eig: 1e-7,
            cond_limit: 1e8,
            spectral_gap: 1e-3,
            continuity: 0.5,
            block_rank: 1e-8,
            nilpotent: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn rank_tol(&self, n: usize) -> f64 {
        self.rank.unwrap_or_else(|| default_rank_tol(n))
    }

    pub fn root_tolerances(&self) -> crate::linalg::RootTolerances {
        crate::linalg::RootTolerances { cluster: self.cluster, imag: self.imag, ..Default::default() }
    }
}
