//! Randomized invariant suites for the dense kernels and the pencil profile.

mod common;

use mfpencil::canon::split_point;
use mfpencil::linalg::{char_poly_of, det, gram_schmidt, inverse, null_space, rank, Mat, RealPoly};
use mfpencil::pencil::char_poly_at;
use mfpencil::{PipelineError, Tolerances};
use proptest::prelude::*;

use common::oracles::*;

const CASES: u32 = 256;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn gram_schmidt_is_orthonormal_and_keeps_spans(
        cols in (2usize..=6).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-1.0f64..1.0, n), 1..=n))
    ) {
        let q = match gram_schmidt(&cols) {
            Ok(q) => q,
            Err(_) => return Err(TestCaseError::reject("dependent columns")),
        };
        let k = cols.len();
        let gram = &q.transpose() * &q;
        prop_assert!(gram.max_abs_diff(&Mat::identity(k)) <= 1e-12);
        // Z = Q R with R = Qᵀ Z upper triangular.
        let z = Mat::from_cols(&cols);
        let r = &q.transpose() * &z;
        prop_assert!((&q * &r).max_abs_diff(&z) <= 1e-12);
        for i in 0..k {
            for j in 0..i {
                prop_assert!(r[(i, j)].abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn null_space_basis_is_orthonormal_and_annihilated(m in low_rank()) {
        let a = to_mat(&m);
        let r = rank_by_minors(&m);
        let n = m.len();
        let ns = null_space(&a, n - r);
        prop_assert!((&ns.transpose() * &ns).max_abs_diff(&Mat::identity(n - r)) <= 1e-12);
        prop_assert!((&a * &ns).norm_max() <= 1e-10 * (1.0 + a.norm_fro()));
    }

    #[test]
    fn numerical_rank_matches_minors(m in low_rank()) {
        let a = to_mat(&m);
        let tol = Tolerances::default().rank_tol(m.len()) * (1.0 + a.norm_fro());
        prop_assert_eq!(rank(&a, tol), rank_by_minors(&m));
    }

    #[test]
    fn char_poly_matches_leverrier(m in (2usize..=6).prop_flat_map(|n| int_matrix(n, -4, 4))) {
        let a = to_mat(&m);
        let got = char_poly_of(&a, 0.0).unwrap();
        let want = leverrier(&m);
        let radius = 1.0 + a.norm_fro();
        let n = m.len();
        for (i, w) in want.iter().enumerate() {
            let g = got.coeffs().get(i).copied().unwrap_or(0.0);
            // Interpolation error is uniform in the scaled variable ξ / R.
            let allowed = 1e-11 * radius.powi((n - i) as i32);
            prop_assert!((g - *w as f64).abs() <= allowed, "coefficient {}: {} vs {}", i, g, w);
        }
    }

    #[test]
    fn pencil_polynomial_matches_determinants(
        (ma, mb, lams) in (2usize..=5).prop_flat_map(|n| (int_matrix(n, -3, 3), int_matrix(n, -3, 3), prop::collection::vec(-3.0f64..3.0, 4)))
    ) {
        let (a, b) = (to_mat(&ma), to_mat(&mb));
        let p = char_poly_at(&a, &b, &Tolerances::default()).unwrap();
        let n = ma.len();
        for lam in lams {
            let exact = exact_det(
                &(0..n).map(|i| (0..n).map(|j| ma[i][j] * 1000 + (lam * 1000.0).round() as i64 * mb[i][j]).collect()).collect::<Vec<_>>(),
            ) as f64 / 1000f64.powi(n as i32);
            let lam = (lam * 1000.0).round() / 1000.0;
            let scale = (1.0 + a.norm_fro() + lam.abs() * b.norm_fro()).powi(n as i32);
            prop_assert!((p.eval(lam) - exact).abs() <= 1e-10 * scale, "λ = {}: {} vs {}", lam, p.eval(lam), exact);
        }
    }

    #[test]
    fn determinant_matches_exact_expansion(m in (1usize..=6).prop_flat_map(|n| int_matrix(n, -5, 5))) {
        let a = to_mat(&m);
        let exact = exact_det(&m) as f64;
        let d = det(&a).unwrap_or(0.0);
        prop_assert!((d - exact).abs() <= 1e-9 * (1.0 + a.norm_fro()).powi(m.len() as i32));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    /// The predicted factorization of the characteristic polynomial is accepted, and the
    /// split exposes blocks with the predicted single eigenvalues.
    #[test]
    fn correct_factorization_is_accepted((g, clusters) in hidden_clusters()) {
        let tol = Tolerances::default();
        let (t, blocks, _) = split_point(&g, &clusters, None, &tol, 0).unwrap();
        let h = &(&inverse(&t).unwrap() * &g) * &t;
        let mut at = 0;
        for (c, blk) in clusters.iter().zip(&blocks) {
            prop_assert!(blk.max_abs_diff(&h.block(at, at, c.size, c.size)) <= 1e-12);
            let got = char_poly_of(blk, 0.0).unwrap();
            let want = RealPoly::from_roots(&[(c.value, c.size)]);
            for i in 0..=c.size {
                let radius = 1.0 + blk.norm_fro();
                let diff = got.coeffs().get(i).copied().unwrap_or(0.0) - want.coeffs()[i];
                prop_assert!(diff.abs() <= 1e-7 * radius.powi((c.size - i) as i32));
            }
            at += c.size;
        }
        let n = g.rows();
        let rebuilt = &(&t * &Mat::block_diag(&blocks.iter().collect::<Vec<_>>())) * &inverse(&t).unwrap();
        prop_assert!(rebuilt.max_abs_diff(&g) <= 1e-9 * (1.0 + g.norm_fro()) * n as f64);
    }

    /// Moving one predicted value breaks `ε ≡ 1` and is reported as a mismatch.
    #[test]
    fn wrong_factorization_is_rejected((g, mut clusters) in hidden_clusters(), which in 0usize..3) {
        let i = which % clusters.len();
        clusters[i].value += 0.25;
        let err = split_point(&g, &clusters, None, &Tolerances::default(), 0).unwrap_err();
        prop_assert!(matches!(err, PipelineError::ClusterMismatch { .. }), "{:?}", err);
    }
}
