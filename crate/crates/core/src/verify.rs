//! Numerical certification of claimed equivalences and similarities.

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::Error;
use crate::grid::Grid;
use crate::linalg::{inverse, nilpotency_index, Mat, Nilpotency};
use crate::pencil::{hadamard_ratio, MatrixFunction};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointCheck {
    pub x: Vec<f64>,
    pub residual_a: f64,
    pub residual_b: f64,
    pub bound: f64,
    /// Hadamard ratios of the two transforms.
    pub det_margin_p: f64,
    pub det_margin_q: f64,
}

/// Adjacent-sample jumps of one sampled matrix along one axis. Diagnostic only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityDiagnostic {
    pub matrix: String,
    pub axis: usize,
    pub max_jump: f64,
    /// Largest ratio between consecutive jumps along the axis.
    pub max_ratio: f64,
    pub suspect: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub kind: String,
    pub points: Vec<PointCheck>,
    pub max_residual: f64,
    pub min_det_margin: f64,
    /// Nilpotency index of each sampled nilpotent block, when relevant.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub nilpotency: Vec<Option<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unitarity: Option<f64>,
    pub continuity: Vec<ContinuityDiagnostic>,
    pub continuity_note: String,
    pub failures: Vec<String>,
    pub pass: bool,
}

const CONTINUITY_NOTE: &str = "continuity diagnostics compare adjacent grid samples; they are not a proof of smoothness";

/// Evaluates a matrix function at each point.
pub fn sample_matrix_function(f: &MatrixFunction, name: &str, points: &[Vec<f64>]) -> Result<Vec<Mat>, Error> {
    points.iter().map(|x| f.eval(name, x)).collect()
}

/// Jump statistics for each sampled matrix along each grid axis.
pub fn continuity_diagnostics(grid: &Grid, named: &[(&str, &[Mat])]) -> Vec<ContinuityDiagnostic> {
    let mut out = Vec::new();
    for (name, mats) in named {
        for axis in 0..grid.dim() {
            let max_jump = grid
                .axis_pairs(axis)
                .iter()
                .map(|[a, b]| (&mats[*b] - &mats[*a]).norm_fro())
                .fold(0.0, f64::max);
            let mut max_ratio: f64 = 0.0;
            let mut suspect = false;
            for [a, b, c] in grid.axis_triples(axis) {
                let j1 = (&mats[b] - &mats[a]).norm_fro();
                let j2 = (&mats[c] - &mats[b]).norm_fro();
                let scale = 1e-9 * (1.0 + mats[b].norm_fro());
                if j1.max(j2) > scale {
                    let ratio = j1.max(j2) / j1.min(j2).max(scale);
                    max_ratio = max_ratio.max(ratio);
                    suspect |= ratio > 4.0 && j1.max(j2) > 1e-6 * (1.0 + mats[b].norm_fro());
                }
            }
            out.push(ContinuityDiagnostic { matrix: name.to_string(), axis: axis + 1, max_jump, max_ratio, suspect });
        }
    }
    out
}

fn check_lengths(len: usize, others: &[(&str, usize)]) -> Result<(), Error> {
    for (name, l) in others {
        if *l != len {
            return Err(Error::Input(format!("{name} has {l} samples, expected {len}")));
        }
    }
    Ok(())
}

fn check_dims(n: usize, named: &[(&str, &[Mat])]) -> Result<(), Error> {
    for (name, mats) in named {
        if let Some(m) = mats.iter().find(|m| m.rows() != n || m.cols() != n) {
            return Err(Error::Input(format!("dimension mismatch: {name} is {}x{}, expected {n}x{n}", m.rows(), m.cols())));
        }
    }
    Ok(())
}

/// Checks `P A Q = target_A` and `P B Q = target_B` at every sample, and that `P`, `Q`
/// are nonsingular.
#[allow(clippy::too_many_arguments)]
pub fn verify_equivalence(
    points: &[Vec<f64>],
    a: &[Mat],
    b: &[Mat],
    p: &[Mat],
    q: &[Mat],
    target_a: &[Mat],
    target_b: &[Mat],
    grid: Option<&Grid>,
    tol: &Tolerances,
) -> Result<VerificationReport, Error> {
    let len = points.len();
    check_lengths(len, &[("A", a.len()), ("B", b.len()), ("P", p.len()), ("Q", q.len()), ("target_A", target_a.len()), ("target_B", target_b.len())])?;
    let n = a.first().map_or(0, Mat::rows);
    check_dims(n, &[("A", a), ("B", b), ("P", p), ("Q", q), ("target_A", target_a), ("target_B", target_b)])?;

    let mut checks = Vec::with_capacity(len);
    let mut failures = Vec::new();
    for k in 0..len {
        let residual_a = (&(&p[k] * &a[k]) * &q[k]).max_abs_diff(&target_a[k]);
        let residual_b = (&(&p[k] * &b[k]) * &q[k]).max_abs_diff(&target_b[k]);
        let bound = tol.canon * (1.0 + a[k].norm_fro() + b[k].norm_fro());
        let det_margin_p = hadamard_ratio(&p[k]);
        let det_margin_q = hadamard_ratio(&q[k]);
        if !(residual_a <= bound && residual_b <= bound) {
            failures.push(format!(
                "residual {:e} exceeds {bound:e} at x = {:?}",
                residual_a.max(residual_b),
                points[k]
            ));
        }
        if !(det_margin_p > tol.regularity && det_margin_q > tol.regularity) {
            failures.push(format!("transform is numerically singular at x = {:?}", points[k]));
        }
        checks.push(PointCheck { x: points[k].clone(), residual_a, residual_b, bound, det_margin_p, det_margin_q });
    }
    let continuity = match grid {
        Some(g) if g.len() == len => continuity_diagnostics(g, &[("P", p), ("Q", q)]),
        _ => Vec::new(),
    };
    Ok(VerificationReport {
        kind: "equivalence".into(),
        max_residual: checks.iter().map(|c| c.residual_a.max(c.residual_b)).fold(0.0, f64::max),
        min_det_margin: checks.iter().map(|c| c.det_margin_p.min(c.det_margin_q)).fold(f64::INFINITY, f64::min),
        points: checks,
        nilpotency: Vec::new(),
        unitarity: None,
        continuity,
        continuity_note: CONTINUITY_NOTE.into(),
        pass: failures.is_empty(),
        failures,
    })
}

/// Checks that `U` is orthogonal, `U⁻¹ A U = N`, and `N` is strictly upper triangular
/// and nilpotent at every sample.
pub fn verify_similarity(
    points: &[Vec<f64>],
    a: &[Mat],
    u: &[Mat],
    nmat: &[Mat],
    tol: &Tolerances,
) -> Result<VerificationReport, Error> {
    let len = points.len();
    check_lengths(len, &[("A", a.len()), ("U", u.len()), ("N", nmat.len())])?;
    let n = a.first().map_or(0, Mat::rows);
    check_dims(n, &[("A", a), ("U", u), ("N", nmat)])?;

    let mut checks = Vec::with_capacity(len);
    let mut failures = Vec::new();
    let mut unitarity: f64 = 0.0;
    let mut nilpotency = Vec::with_capacity(len);
    for k in 0..len {
        let x = &points[k];
        let orth = (&(&u[k].transpose() * &u[k]) - &Mat::identity(n)).norm_max();
        unitarity = unitarity.max(orth);
        if !(orth <= 1e-10) {
            failures.push(format!("U is not orthogonal at x = {x:?} (deviation {orth:e})"));
        }
        let (residual, margin) = match inverse(&u[k]) {
            Ok(ui) => ((&(&ui * &a[k]) * &u[k]).max_abs_diff(&nmat[k]), hadamard_ratio(&u[k])),
            Err(_) => (f64::INFINITY, 0.0),
        };
        let bound = 1e-9 * (1.0 + a[k].norm_fro());
        if !(residual <= bound) {
            failures.push(format!("similarity residual {residual:e} exceeds {bound:e} at x = {x:?}"));
        }
        let lower = nmat[k].lower_max();
        if lower > 1e-9 * (1.0 + nmat[k].norm_fro()) {
            failures.push(format!("N is not strictly upper triangular at x = {x:?}"));
        }
        let index = match nilpotency_index(&nmat[k], tol.nilpotent)? {
            Nilpotency::Index(i) => Some(i),
            Nilpotency::NotNilpotent => {
                failures.push(format!("N is not nilpotent at x = {x:?}"));
                None
            }
        };
        nilpotency.push(index);
        checks.push(PointCheck {
            x: x.clone(),
            residual_a: residual,
            residual_b: 0.0,
            bound,
            det_margin_p: margin,
            det_margin_q: margin,
        });
    }
    Ok(VerificationReport {
        kind: "similarity".into(),
        max_residual: checks.iter().map(|c| c.residual_a).fold(0.0, f64::max),
        min_det_margin: checks.iter().map(|c| c.det_margin_p).fold(f64::INFINITY, f64::min),
        points: checks,
        nilpotency,
        unitarity: Some(unitarity),
        continuity: Vec::new(),
        continuity_note: CONTINUITY_NOTE.into(),
        pass: failures.is_empty(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_transform_of_itself() {
        let a = vec![Mat::diag(&[1.0, 0.0])];
        let b = vec![Mat::diag(&[0.0, 1.0])];
        let e = vec![Mat::identity(2)];
        let r = verify_equivalence(&[vec![0.0]], &a, &b, &e, &e, &a, &b, None, &Tolerances::default()).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn similarity_trivial_cases() {
        let e = vec![Mat::identity(2)];
        let z = vec![Mat::zeros(2, 2)];
        let tol = Tolerances::default();
        assert!(verify_similarity(&[vec![0.0]], &z, &e, &z, &tol).unwrap().pass);
        let r = verify_similarity(&[vec![0.0]], &e, &e, &e, &tol).unwrap();
        assert!(!r.pass);
        assert_eq!(r.nilpotency, vec![None]);
    }

    #[test]
    fn dimension_mismatch_is_an_input_error() {
        let a = vec![Mat::identity(2)];
        let p = vec![Mat::identity(3)];
        let err = verify_equivalence(&[vec![0.0]], &a, &a, &p, &a, &a, &a, None, &Tolerances::default()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
