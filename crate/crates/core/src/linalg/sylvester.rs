use super::decomp::solve;
use super::mat::Mat;
use super::poly::{char_poly_of, raw_roots};
use super::{require_square, LinalgError};

/// Smallest distance between an eigenvalue of `f` and one of `g`.
pub fn spectral_gap(f: &Mat, g: &Mat) -> Result<f64, LinalgError> {
    let ef = raw_roots(&char_poly_of(f, 0.0)?)?;
    let eg = raw_roots(&char_poly_of(g, 0.0)?)?;
    let mut gap = f64::INFINITY;
    for a in &ef {
        for b in &eg {
            gap = gap.min(a.sub(*b).abs());
        }
    }
    Ok(gap)
}

/// Solves `F X - X G = C` through the Kronecker form
/// `(E ⊗ F - Gᵀ ⊗ E) vec(X) = vec(C)`.
///
/// Fails with [`LinalgError::SpectraOverlap`] when the spectra of `F` and `G` are
/// closer than `gap_tol`.
pub fn sylvester_solve(f: &Mat, g: &Mat, c: &Mat, gap_tol: f64) -> Result<Mat, LinalgError> {
    let p = require_square(f)?;
    let q = require_square(g)?;
    if c.rows() != p || c.cols() != q {
        return Err(LinalgError::Shape(format!("C is {}x{}, expected {p}x{q}", c.rows(), c.cols())));
    }
    let gap = spectral_gap(f, g)?;
    if gap <= gap_tol {
        return Err(LinalgError::SpectraOverlap { gap });
    }
    // vec is column-major: index of X[i][j] is j * p + i.
    let n = p * q;
    let mut k = Mat::zeros(n, n);
    for j in 0..q {
        for i in 0..p {
            let row = j * p + i;
            for l in 0..p {
                k[(row, j * p + l)] += f[(i, l)];
            }
            for l in 0..q {
                k[(row, l * p + i)] -= g[(l, j)];
            }
        }
    }
    let rhs: Vec<f64> = (0..n).map(|idx| c[(idx % p, idx / p)]).collect();
    let x = solve(&k, &rhs).map_err(|_| LinalgError::SpectraOverlap { gap })?;
    Ok(Mat::from_fn(p, q, |i, j| x[j * p + i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar() {
        let x = sylvester_solve(&Mat::diag(&[2.0]), &Mat::diag(&[0.0]), &Mat::diag(&[4.0]), 1e-9).unwrap();
        assert_eq!(x, Mat::diag(&[2.0]));
    }

    #[test]
    fn decoupled() {
        let c = Mat::from_rows(&[[1.0], [1.0]]);
        let x = sylvester_solve(&Mat::diag(&[1.0, 2.0]), &Mat::diag(&[0.0]), &c, 1e-9).unwrap();
        assert!(x.max_abs_diff(&Mat::from_rows(&[[1.0], [0.5]])) < 1e-15);
    }

    #[test]
    fn residual_substitution() {
        let f = Mat::from_rows(&[[3.0, 1.0, 0.5], [0.0, 4.0, -1.0], [0.2, 0.0, 5.0]]);
        let g = Mat::from_rows(&[[-1.0, 2.0], [0.0, 0.5]]);
        let c = Mat::from_fn(3, 2, |i, j| (i as f64 - j as f64).sin() + 0.3);
        let x = sylvester_solve(&f, &g, &c, 1e-9).unwrap();
        let resid = (&(&f * &x) - &(&x * &g)).max_abs_diff(&c);
        assert!(resid <= 1e-9 * (f.norm_fro() + g.norm_fro()) * x.norm_fro());
    }

    #[test]
    fn overlapping_spectra() {
        let err = sylvester_solve(&Mat::diag(&[1.0]), &Mat::diag(&[1.0]), &Mat::diag(&[1.0]), 1e-9).unwrap_err();
        assert!(matches!(err, LinalgError::SpectraOverlap { .. }));
    }
}
