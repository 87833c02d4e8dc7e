pub mod analysis;
pub mod canon;
pub mod cli;
pub mod config;
pub mod error;
pub mod expr;
pub mod generate;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod pencil;
pub mod verify;

pub use analysis::{analyze, analyze_and_canonize, Analysis};
pub use config::Tolerances;
pub use error::{Error, HypothesisViolation, PipelineError, Stage};
