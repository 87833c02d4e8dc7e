use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::linalg::LinalgError;

/// A hypothesis of the canonical-form theorem that fails on the grid.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum HypothesisViolation {
    #[error("SingularPencil: det(A + lambda B) vanishes identically at x = {point:?}")]
    SingularPencil { point: Vec<f64> },
    #[error("ComplexRoots: root {re} + {im}i at x = {point:?}")]
    ComplexRoots { point: Vec<f64>, re: f64, im: f64 },
    #[error("MultiplicityChange: root pattern {pattern_a} at x = {point_a:?} but {pattern_b} at x = {point_b:?}")]
    MultiplicityChange { point_a: Vec<f64>, pattern_a: String, point_b: Vec<f64>, pattern_b: String },
    #[error("RootCollision: two root branches meet near {value} at x = {point:?}")]
    RootCollision { point: Vec<f64>, value: f64 },
    #[error("RankChange: rank {matrix} is {rank_a} at x = {point_a:?} but {rank_b} at x = {point_b:?}")]
    RankChange { matrix: String, point_a: Vec<f64>, rank_a: usize, point_b: Vec<f64>, rank_b: usize },
    #[error("FullRank: {matrix} has full rank {rank}")]
    FullRank { matrix: String, rank: usize },
    #[error("NoZeroRoot: lambda = 0 is not a root of det(A + lambda B)")]
    NoZeroRoot,
    #[error("NoInfinitePart: det(A + lambda B) has full degree n, so B is nonsingular")]
    NoInfinitePart,
    #[error("NoShiftFound: {detail}")]
    NoShiftFound { detail: String },
}

impl HypothesisViolation {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::SingularPencil { .. } => "SingularPencil",
            Self::ComplexRoots { .. } => "ComplexRoots",
            Self::MultiplicityChange { .. } => "MultiplicityChange",
            Self::RootCollision { .. } => "RootCollision",
            Self::RankChange { .. } => "RankChange",
            Self::FullRank { .. } => "FullRank",
            Self::NoZeroRoot => "NoZeroRoot",
            Self::NoInfinitePart => "NoInfinitePart",
            Self::NoShiftFound { .. } => "NoShiftFound",
        }
    }
}

/// Step of the canonization chain at which a failure happened.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Shift,
    SpectralSplit,
    ReduceN,
    InvertBlocks,
    ReduceM,
    Assemble,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Shift => "shift",
            Stage::SpectralSplit => "spectral_split",
            Stage::ReduceN => "reduce_n",
            Stage::InvertBlocks => "invert_blocks",
            Stage::ReduceM => "reduce_m",
            Stage::Assemble => "assemble",
        };
        f.write_str(s)
    }
}

/// Failures inside the canonization chain.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum PipelineError {
    #[error("NonzeroEigenvalue: matrix is not nilpotent at point {point}")]
    NonzeroEigenvalue { point: usize },
    #[error("RankChange: block rank {rank_a} at point {point_a} but {rank_b} at point {point_b}")]
    RankChange { point_a: usize, rank_a: usize, point_b: usize, rank_b: usize },
    #[error("ClusterMismatch at point {point}: {detail}")]
    ClusterMismatch { point: usize, detail: String },
    #[error("GapTooSmall at point {point}: predicted clusters {gap:e} apart")]
    GapTooSmall { point: usize, gap: f64 },
    #[error("numerical failure at point {point}: {source}")]
    Numerical { point: usize, source: LinalgError },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("parse error in {location}: {source}")]
    Parse { location: String, source: ParseError },
    #[error("evaluation fault in {location} at x = {point:?}: {source}")]
    Eval { location: String, point: Vec<f64>, source: EvalError },
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("hypothesis violated: {0}")]
    Hypothesis(#[from] HypothesisViolation),
    #[error("stage {stage}: {source}")]
    Pipeline { stage: Stage, source: PipelineError },
    #[error("ConditioningBlowup at x = {point:?}: cond(P) = {cond_p:e}, cond(Q) = {cond_q:e}")]
    ConditioningBlowup { point: Vec<f64>, cond_p: f64, cond_q: f64 },
    #[error("numerical failure: {0}")]
    Linalg(#[from] LinalgError),
}

impl Error {
    /// Stable process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Parse { .. } | Error::Eval { .. } | Error::Io { .. } => 1,
            Error::Hypothesis(_) => 2,
            Error::Pipeline { .. } | Error::ConditioningBlowup { .. } | Error::Linalg(_) => 3,
        }
    }

    /// Short machine-readable name of the failure.
    pub fn kind(&self) -> String {
        match self {
            Error::Input(_) => "InputError".into(),
            Error::Parse { .. } => "ParseError".into(),
            Error::Eval { .. } => "EvaluationFault".into(),
            Error::Io { .. } => "IoError".into(),
            Error::Hypothesis(h) => h.kind().into(),
            Error::Pipeline { source, .. } => match source {
                PipelineError::NonzeroEigenvalue { .. } => "NonzeroEigenvalue",
                PipelineError::RankChange { .. } => "RankChange",
                PipelineError::ClusterMismatch { .. } => "ClusterMismatch",
                PipelineError::GapTooSmall { .. } => "GapTooSmall",
                PipelineError::Numerical { .. } => "NumericalFailure",
            }
            .into(),
            Error::ConditioningBlowup { .. } => "ConditioningBlowup".into(),
            Error::Linalg(_) => "NumericalFailure".into(),
        }
    }

    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Pipeline { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}
