//! Generator round trips: build a pencil with known structure, then recover it.

use mfpencil::generate::{generate, random_spec};
use mfpencil::{analyze_and_canonize, Tolerances};

pub struct Outcome {
    pub structure_ok: bool,
    pub branch_err: f64,
    pub residual: f64,
}

pub fn run_instance(seed: u64) -> Result<Outcome, String> {
    let (n, m) = shape(seed);
    let spec = random_spec(seed, n, m);
    let g = generate(&spec, seed).map_err(|e| e.to_string())?;
    let tol = Tolerances::default();
    let (an, c) = analyze_and_canonize(&g.pencil, &tol, None).map_err(|e| format!("{spec:?}: {e}"))?;
    let sp = &an.spectrum;
    let mut want: Vec<(f64, usize)> = Vec::new();
    let points = g.pencil.grid.points();
    let mut branch_err: f64 = 0.0;
    for (k, x) in points.iter().enumerate() {
        want.clear();
        for (b, &p) in g.branches.iter().zip(&spec.p) {
            want.push((b.eval(x).unwrap(), p));
        }
        want.sort_by(|a, b| a.0.total_cmp(&b.0));
        let got = sp.branches_at(k);
        if got.len() != want.len() {
            return Err(format!("seed {seed}: branch count {} vs {}", got.len(), want.len()));
        }
        for (g, w) in got.iter().zip(&want) {
            branch_err = branch_err.max((g.0 - w.0).abs());
        }
    }
    let mut got_p = sp.multiplicities.clone();
    got_p.sort();
    let mut want_p = spec.p.clone();
    want_p.sort();
    let structure_ok = (sp.d, sp.l, sp.lhat) == (spec.d, spec.l, spec.lhat) && got_p == want_p;
    let residual = c.residual_a.iter().chain(&c.residual_b).fold(0.0f64, |a, b| a.max(*b));
    Ok(Outcome { structure_ok, branch_err, residual })
}

/// Instance parameters used by the suite: n in 3..=6 and m in 1..=3, cycling with the seed.
pub fn shape(seed: u64) -> (usize, usize) {
    (3 + (seed % 4) as usize, 1 + (seed / 4 % 3) as usize)
}

/// Runs seeds `0..count`; returns failure descriptions and elapsed seconds.
pub fn run_suite(count: u64) -> (Vec<String>, f64) {
    let start = std::time::Instant::now();
    let mut failures = Vec::new();
    for seed in 0..count {
        match run_instance(seed) {
            Ok(o) if o.structure_ok && o.branch_err <= 1e-6 && o.residual <= 1e-6 => {}
            Ok(o) => failures.push(format!(
                "seed {seed}: structure_ok={} branch_err={:e} residual={:e}",
                o.structure_ok, o.branch_err, o.residual
            )),
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    (failures, start.elapsed().as_secs_f64())
}
