//! WebAssembly bindings for the browser demo.
//!
//! Each exported function takes TOML text and returns a JSON string. Failures come back
//! as `{"error": {...}}` objects so the page never has to catch exceptions.

use mfpencil::analysis::{analyze as run_analyze, analyze_and_canonize};
use mfpencil::io::{LoadedPencil, PencilFile, Transforms};
use mfpencil::verify::{sample_matrix_function, verify_equivalence};
use mfpencil::Error;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Bundled example inputs: `(name, pencil, transforms)`.
pub const EXAMPLES: &[(&str, &str, &str)] = &[
    ("Example 1", include_str!("../../../fixtures/ex1.pencil"), include_str!("../../../fixtures/ex1.transforms")),
    ("Example 2", include_str!("../../../fixtures/ex2.pencil"), include_str!("../../../fixtures/ex2.transforms")),
    ("Complex roots", include_str!("../../../fixtures/complex.pencil"), ""),
    ("Rank change", include_str!("../../../fixtures/rank_change.pencil"), ""),
];

fn load(pencil: &str, grid: u32) -> Result<LoadedPencil, Error> {
    PencilFile::parse(pencil)?.resolve((grid > 0).then_some(grid as usize))
}

fn error_json(e: &Error) -> Value {
    json!({ "error": { "kind": e.kind(), "exit_code": e.exit_code(), "message": e.to_string() } })
}

fn finish(r: Result<Value, Error>) -> String {
    r.unwrap_or_else(|e| error_json(&e)).to_string()
}

/// Structure, root branches over the grid and the chosen shift.
pub fn analyze_json(pencil: &str, grid: u32) -> String {
    finish((|| {
        let lp = load(pencil, grid)?;
        let an = run_analyze(&lp.pencil, &lp.tolerances, lp.shift)?;
        let sp = &an.spectrum;
        Ok(json!({
            "n": sp.n, "l": sp.l, "d": sp.d, "lhat": sp.lhat,
            "multiplicities": sp.multiplicities,
            "counts": lp.pencil.grid.counts(),
            "points": an.samples.points,
            "branches": sp.branches,
            "rank_a": an.ranks.rank_a, "rank_b": an.ranks.rank_b,
            "rank_degree": an.classification.rank_degree,
            "shift": an.shift.constant,
            "shift_strategy": an.shift.strategy,
            "warnings": sp.warnings,
        }))
    })())
}

/// Canonical blocks at each grid point with the residuals of `P A Q` and `P B Q`.
pub fn canonize_json(pencil: &str, grid: u32) -> String {
    finish((|| {
        let lp = load(pencil, grid)?;
        let (an, c) = analyze_and_canonize(&lp.pencil, &lp.tolerances, lp.shift)?;
        let f = &c.form;
        let residual: Vec<f64> = c.residual_a.iter().zip(&c.residual_b).map(|(a, b)| a.max(*b)).collect();
        Ok(json!({
            "pass": c.pass,
            "counts": lp.pencil.grid.counts(),
            "points": an.samples.points,
            "residual": residual,
            "bound": c.bound,
            "cond_p": c.pair.cond_p,
            "cond_q": c.pair.cond_q,
            "canonical_a": (0..f.len()).map(|k| f.left(k)).collect::<Vec<_>>(),
            "canonical_b": (0..f.len()).map(|k| f.right(k)).collect::<Vec<_>>(),
            "warnings": c.warnings,
        }))
    })())
}

/// Checks closed-form transforms against the pencil on its grid.
pub fn verify_json(pencil: &str, transforms: &str, grid: u32) -> String {
    finish((|| {
        let lp = load(pencil, grid)?;
        let s = lp.pencil.sample()?;
        let report = match Transforms::parse(transforms, lp.pencil.n(), lp.pencil.m())? {
            Transforms::Closed { p, q, target_a, target_b } => {
                let pts = &s.points;
                verify_equivalence(
                    pts,
                    &s.a,
                    &s.b,
                    &sample_matrix_function(&p, "P", pts)?,
                    &sample_matrix_function(&q, "Q", pts)?,
                    &sample_matrix_function(&target_a, "target_A", pts)?,
                    &sample_matrix_function(&target_b, "target_B", pts)?,
                    Some(&lp.pencil.grid),
                    &lp.tolerances,
                )?
            }
            Transforms::Sampled { points, p, q, target_a, target_b } => {
                let s = mfpencil::pencil::Samples::at_points(&lp.pencil.a, &lp.pencil.b, points.clone())?;
                verify_equivalence(&points, &s.a, &s.b, &p, &q, &target_a, &target_b, None, &lp.tolerances)?
            }
        };
        let residual: Vec<f64> = report.points.iter().map(|c| c.residual_a.max(c.residual_b)).collect();
        Ok(json!({
            "pass": report.pass,
            "counts": lp.pencil.grid.counts(),
            "points": report.points.iter().map(|c| c.x.clone()).collect::<Vec<_>>(),
            "residual": residual,
            "max_residual": report.max_residual,
            "min_det_margin": report.min_det_margin,
            "failures": report.failures,
        }))
    })())
}

/// `[{name, pencil, transforms}]`.
pub fn examples_json() -> String {
    Value::Array(EXAMPLES.iter().map(|(n, p, t)| json!({ "name": n, "pencil": p, "transforms": t })).collect())
        .to_string()
}

#[wasm_bindgen]
pub fn analyze(pencil: &str, grid: u32) -> String {
    analyze_json(pencil, grid)
}

#[wasm_bindgen]
pub fn canonize(pencil: &str, grid: u32) -> String {
    canonize_json(pencil, grid)
}

#[wasm_bindgen]
pub fn verify(pencil: &str, transforms: &str, grid: u32) -> String {
    verify_json(pencil, transforms, grid)
}

#[wasm_bindgen]
pub fn examples() -> String {
    examples_json()
}
