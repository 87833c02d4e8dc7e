//! Command-line front end. Every command emits one JSON report.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{analyze, analyze_and_canonize, Analysis};
use crate::canon::Canonization;
use crate::config::Tolerances;
use crate::error::Error;
use crate::generate::{generate, GroundTruth, StructureSpec};
use crate::io::{load_pencil, read_text, write_atomic, LoadedPencil, PencilFile, Transforms};
use crate::linalg::Mat;
use crate::pencil::Samples;
use crate::verify::{sample_matrix_function, verify_equivalence, VerificationReport};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "mfpencil";

#[derive(Debug, Parser)]
#[command(name = "mfpencil", version, about = "Canonical forms of parameter-dependent matrix pencils A(x) + λB(x)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Points per axis, overriding the pencil file.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Absolute rank threshold (default n·2⁻⁴⁰).
    #[arg(long)]
    pub tol_rank: Option<f64>,
    /// Relative residual tolerance for the canonical form.
    #[arg(long)]
    pub tol_canon: Option<f64>,
    /// Force a constant regularizing shift c.
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the hypotheses and report the spectral structure.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compute the canonical form and the transforms P(x), Q(x) on the grid.
    Canonize {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Ground-truth sidecar written by `gen`; the report then states whether the structure matches.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Check claimed transforms P, Q against a target pencil.
    Verify {
        file: PathBuf,
        transforms: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a pencil with known canonical structure.
    Gen {
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Path of the pencil file; the ground truth goes next to it as `<stem>.truth.toml`.
        #[arg(long)]
        out: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze { .. } => "analyze",
            Command::Canonize { .. } => "canonize",
            Command::Verify { .. } => "verify",
            Command::Gen { .. } => "gen",
        }
    }
}

/// The outcome of one command before it is rendered.
pub struct Outcome {
    pub exit_code: i32,
    pub report: Value,
}

fn tolerances_with(base: Tolerances, c: &Common) -> Tolerances {
    Tolerances { rank: c.tol_rank.or(base.rank), canon: c.tol_canon.unwrap_or(base.canon), ..base }
}

fn load(file: &Path, c: &Common) -> Result<(LoadedPencil, Tolerances), Error> {
    let lp = load_pencil(file, c.grid)?;
    let tol = tolerances_with(lp.tolerances.clone(), c);
    Ok((lp, tol))
}

fn envelope(command: &str, exit_code: i32, tol: Option<&Tolerances>) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "tool": TOOL,
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "status": match exit_code { 0 => "pass", 4 => "fail", _ => "error" },
        "exit_code": exit_code,
        "tolerances": tol.map(|t| serde_json::to_value(t).expect("tolerances serialize")),
    })
}

fn error_value(e: &Error) -> Value {
    json!({ "kind": e.kind(), "stage": e.stage().map(|s| s.to_string()), "message": e.to_string() })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn analysis_value(an: &Analysis) -> Value {
    let sp = &an.spectrum;
    json!({
        "points": an.samples.points,
        "structure": { "n": sp.n, "d": sp.d, "l": sp.l, "lhat": sp.lhat, "multiplicities": sp.multiplicities },
        "spectrum": to_value(sp),
        "ranks": to_value(&an.ranks),
        "classification": to_value(&an.classification),
        "shift": to_value(&an.shift),
    })
}

fn canonization_value(c: &Canonization) -> Value {
    let f = &c.form;
    let left: Vec<Mat> = (0..f.len()).map(|k| f.left(k)).collect();
    let right: Vec<Mat> = (0..f.len()).map(|k| f.right(k)).collect();
    json!({
        "pass": c.pass,
        "P": c.pair.p,
        "Q": c.pair.q,
        "cond_P": c.pair.cond_p,
        "cond_Q": c.pair.cond_q,
        "canonical_A": left,
        "canonical_B": right,
        "J_blocks": f.j_blocks,
        "M_block": f.m_block,
        "N_block": f.n_block,
        "residual_A": c.residual_a,
        "residual_B": c.residual_b,
        "bound": c.bound,
        "max_residual": c.residual_a.iter().chain(&c.residual_b).copied().fold(0.0, f64::max),
        "warnings": c.warnings,
    })
}

/// Compares the recovered structure and root branches against a generator sidecar.
fn truth_match(truth: &GroundTruth, an: &Analysis) -> Result<Value, Error> {
    let spec = &truth.spec;
    let sp = &an.spectrum;
    let mut want = spec.p.clone();
    want.sort_unstable();
    let mut got = sp.multiplicities.clone();
    got.sort_unstable();
    let structure = spec.d == sp.d && spec.l == sp.l && spec.lhat == sp.lhat && want == got;
    let branches = spec.validate()?;
    let mut branch_error: f64 = 0.0;
    for (k, x) in an.samples.points.iter().enumerate() {
        for (i, b) in branches.iter().enumerate() {
            let v = b.eval(x).map_err(|source| Error::Eval { location: format!("branch {}", i + 1), point: x.clone(), source })?;
            let nearest = sp.branches.iter().map(|br| (br[k] - v).abs()).fold(f64::INFINITY, f64::min);
            branch_error = branch_error.max(nearest);
        }
    }
    Ok(json!({
        "seed": truth.seed,
        "expected": { "d": spec.d, "l": spec.l, "lhat": spec.lhat, "p": want },
        "structure_match": structure,
        "max_branch_error": branch_error,
    }))
}

fn cmd_analyze(file: &Path, c: &Common) -> Result<(Value, Tolerances), (Error, Option<Tolerances>)> {
    let (lp, tol) = load(file, c).map_err(|e| (e, None))?;
    let an = analyze(&lp.pencil, &tol, c.shift.or(lp.shift)).map_err(|e| (e, Some(tol.clone())))?;
    Ok((analysis_value(&an), tol))
}

fn cmd_canonize(file: &Path, c: &Common, truth: Option<&Path>) -> Result<(Value, Tolerances, bool), (Error, Option<Tolerances>)> {
    let (lp, tol) = load(file, c).map_err(|e| (e, None))?;
    let fail = |e| (e, Some(tol.clone()));
    let truth = match truth {
        Some(p) => Some(toml::from_str::<GroundTruth>(&read_text(p).map_err(fail)?).map_err(|e| fail(Error::Input(format!("truth file: {e}"))))?),
        None => None,
    };
    let (an, canon) = analyze_and_canonize(&lp.pencil, &tol, c.shift.or(lp.shift)).map_err(fail)?;
    let mut v = analysis_value(&an);
    v["canonical"] = canonization_value(&canon);
    let mut pass = canon.pass;
    if let Some(t) = &truth {
        let m = truth_match(t, &an).map_err(fail)?;
        pass &= m["structure_match"] == json!(true);
        v["truth"] = m;
    }
    Ok((v, tol, pass))
}

fn sampled_at(lp: &LoadedPencil, points: &[Vec<f64>]) -> Result<Samples, Error> {
    Samples::at_points(&lp.pencil.a, &lp.pencil.b, points.to_vec())
}

fn cmd_verify(file: &Path, transforms: &Path, c: &Common) -> Result<(VerificationReport, Tolerances), (Error, Option<Tolerances>)> {
    let (lp, tol) = load(file, c).map_err(|e| (e, None))?;
    let fail = |e| (e, Some(tol.clone()));
    let t = Transforms::parse(&read_text(transforms).map_err(fail)?, lp.pencil.n(), lp.pencil.m()).map_err(fail)?;
    let report = match t {
        Transforms::Closed { p, q, target_a, target_b } => {
            let s = lp.pencil.sample().map_err(fail)?;
            let pts = &s.points;
            let ps = sample_matrix_function(&p, "P", pts).map_err(fail)?;
            let qs = sample_matrix_function(&q, "Q", pts).map_err(fail)?;
            let ta = sample_matrix_function(&target_a, "target_A", pts).map_err(fail)?;
            let tb = sample_matrix_function(&target_b, "target_B", pts).map_err(fail)?;
            verify_equivalence(pts, &s.a, &s.b, &ps, &qs, &ta, &tb, Some(&lp.pencil.grid), &tol)
        }
        Transforms::Sampled { points, p, q, target_a, target_b } => {
            let s = sampled_at(&lp, &points).map_err(fail)?;
            verify_equivalence(&points, &s.a, &s.b, &p, &q, &target_a, &target_b, None, &tol)
        }
    }
    .map_err(fail)?;
    Ok((report, tol))
}

/// `foo.pencil` → `foo.truth.toml`.
pub fn truth_path(pencil: &Path) -> PathBuf {
    let stem = pencil.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "pencil".into());
    pencil.with_file_name(format!("{stem}.truth.toml"))
}

fn cmd_gen(spec: &Path, seed: u64, out: &Path) -> Result<Value, Error> {
    let spec = StructureSpec::parse(&read_text(spec)?)?;
    let g = generate(&spec, seed)?;
    let truth = truth_path(out);
    write_atomic(out, &PencilFile::from_pencil(&g.pencil).to_toml())?;
    let text = toml::to_string(&g.truth).map_err(|e| Error::Input(format!("truth file: {e}")))?;
    write_atomic(&truth, &text)?;
    Ok(json!({
        "seed": seed,
        "pencil": out.display().to_string(),
        "truth": truth.display().to_string(),
        "structure": { "n": spec.n, "d": spec.d, "l": spec.l, "lhat": spec.lhat, "p": spec.p },
    }))
}

/// Runs one parsed command and builds its report.
pub fn execute(cli: &Cli) -> Outcome {
    let name = cli.command.name();
    let (code, tol, body, error) = match &cli.command {
        Command::Analyze { file, common } => match cmd_analyze(file, common) {
            Ok((v, t)) => (0, Some(t), Some(v), None),
            Err((e, t)) => (e.exit_code(), t, None, Some(e)),
        },
        Command::Canonize { file, common, truth } => match cmd_canonize(file, common, truth.as_deref()) {
            Ok((v, t, pass)) => (if pass { 0 } else { 4 }, Some(t), Some(v), None),
            Err((e, t)) => (e.exit_code(), t, None, Some(e)),
        },
        Command::Verify { file, transforms, common } => match cmd_verify(file, transforms, common) {
            Ok((r, t)) => (if r.pass { 0 } else { 4 }, Some(t), Some(to_value(&r)), None),
            Err((e, t)) => (e.exit_code(), t, None, Some(e)),
        },
        Command::Gen { spec, seed, out } => match cmd_gen(spec, *seed, out) {
            Ok(v) => (0, None, Some(v), None),
            Err(e) => (e.exit_code(), None, None, Some(e)),
        },
    };
    let mut report = envelope(name, code, tol.as_ref());
    report["result"] = body.unwrap_or(Value::Null);
    report["error"] = error.as_ref().map_or(Value::Null, error_value);
    Outcome { exit_code: code, report }
}

fn report_target(cli: &Cli) -> Option<&Path> {
    match &cli.command {
        Command::Analyze { common, .. } | Command::Canonize { common, .. } | Command::Verify { common, .. } => {
            common.out.as_deref()
        }
        Command::Gen { .. } => None,
    }
}

/// Entry point used by the binary. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = execute(&cli);
    let text = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
    if let Some(msg) = outcome.report["error"]["message"].as_str() {
        eprintln!("error: {msg}");
    }
    match report_target(&cli) {
        Some(path) => {
            if let Err(e) = write_atomic(path, &format!("{text}\n")) {
                eprintln!("error: {e}");
                return e.exit_code();
            }
        }
        None => {
            use std::io::Write;
            let _ = writeln!(std::io::stdout().lock(), "{text}");
        }
    }
    outcome.exit_code
}
