use serde::Serialize;

use crate::canon::{canonize, Canonization};
use crate::config::Tolerances;
use crate::error::Error;
use crate::pencil::{
    choose_shift, rank_degree_classify, rank_profile, spectrum_profile, Classification, Pencil, RankProfile,
    Samples, ShiftFunction, SpectrumProfile,
};

/// Everything the hypothesis checks learn about a pencil.
#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    #[serde(skip)]
    pub samples: Samples,
    pub ranks: RankProfile,
    pub spectrum: SpectrumProfile,
    pub classification: Classification,
    pub shift: ShiftFunction,
}

/// Samples the pencil and runs the rank, spectrum, shift and rank-degree checks in that order.
pub fn analyze(p: &Pencil, tol: &Tolerances, forced_shift: Option<f64>) -> Result<Analysis, Error> {
    let samples = p.sample()?;
    let ranks = rank_profile(&samples, tol)?;
    let spectrum = spectrum_profile(&samples, tol)?;
    let shift = choose_shift(&samples, &spectrum, tol, forced_shift)?;
    let classification = rank_degree_classify(&samples, &spectrum, ranks, tol)?;
    Ok(Analysis { samples, ranks, spectrum, classification, shift })
}

/// [`analyze`] followed by [`canonize`].
pub fn analyze_and_canonize(
    p: &Pencil,
    tol: &Tolerances,
    forced_shift: Option<f64>,
) -> Result<(Analysis, Canonization), Error> {
    let an = analyze(p, tol, forced_shift)?;
    let c = canonize(&an.samples, &an.spectrum, &an.shift, tol)?;
    Ok((an, c))
}
