//! Small dense real linear algebra (n up to about 12).

mod decomp;
mod hqr;
mod mat;
mod poly;
mod sylvester;

use thiserror::Error;

pub use decomp::{
    cond, default_rank_tol, det, det_unsnapped, gram_schmidt, inverse, nilpotency_index, null_space,
    pivoted_qr, rank, rank_normal_form, rank_with_floor, solve, Nilpotency, PivotedQr, RankNormalForm,
};
pub use hqr::{hessenberg_eigenvalues, Complex};
pub use mat::{dot, norm2, Mat};
pub use poly::{
    char_poly_of, interpolate_poly, poly_roots, poly_roots_with, raw_roots, RealPoly, RootTolerances,
};
pub use sylvester::{spectral_gap, sylvester_solve};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is singular to working tolerance (pivot {pivot:.3e} in column {col})")]
    Singular { col: usize, pivot: f64 },
    #[error("column {index} is linearly dependent on the preceding columns")]
    DependentColumns { index: usize },
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("complex root {re:.6e} {im:+.6e}i")]
    ComplexRoots { re: f64, im: f64 },
    #[error("spectra overlap (gap {gap:.3e})")]
    SpectraOverlap { gap: f64 },
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}

pub(crate) fn require_square(m: &Mat) -> Result<usize, LinalgError> {
    if m.is_square() {
        Ok(m.rows())
    } else {
        Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() })
    }
}
