//! Orchestration: transition → Gaussian state → marginals → pursuit or
//! enumeration → report.

use fcf_core::{
    enumerate_exact_spectrum, evolve_vacuum, l1_distance, ptmp, scan_pairs, EnumerationBudget,
    GaussianState, PairMarginalSet, PatternDistribution, DEFAULT_CUTOFF, DEFAULT_STEP,
};

use crate::error::{CliError, Result};
use crate::input::ParsedTransition;
use crate::report::{lines_from, Method, ReportMetadata, RunParameters, SpectrumReport};

pub const DEFAULT_PER_MODE_CAP: usize = 3;
pub const DEFAULT_TOTAL_CAP: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructOptions {
    pub cutoff: usize,
    pub step: f64,
    pub max_iter: Option<usize>,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            cutoff: DEFAULT_CUTOFF,
            step: DEFAULT_STEP,
            max_iter: None,
        }
    }
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            per_mode_cap: DEFAULT_PER_MODE_CAP,
            total_cap: DEFAULT_TOTAL_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationOptions {
    pub per_mode_cap: usize,
    pub total_cap: usize,
}

pub fn gaussian_state(t: &ParsedTransition) -> Result<GaussianState> {
    Ok(evolve_vacuum(&t.doktorov()?)?)
}

pub fn run_marginals(t: &ParsedTransition, cutoff: usize) -> Result<PairMarginalSet> {
    check_pairs(t)?;
    Ok(scan_pairs(&gaussian_state(t)?, cutoff)?)
}

fn check_pairs(t: &ParsedTransition) -> Result<()> {
    if t.n_modes() < 2 {
        return Err(CliError::validation(
            "n_modes",
            "pair marginals need at least 2 modes; use `exact` for a single mode",
        ));
    }
    Ok(())
}

/// Marginal scan followed by the pursuit. With a `reference`, the report
/// carries the l1 distance to it.
pub fn run_reconstruct(
    t: &ParsedTransition,
    opts: ReconstructOptions,
    reference: Option<&dyn PatternDistribution>,
) -> Result<SpectrumReport> {
    let y = run_marginals(t, opts.cutoff)?;
    let spectrum = ptmp(&y, opts.step, opts.max_iter)?;
    let lines = lines_from(spectrum.weights(), &t.omega_final);
    Ok(SpectrumReport {
        method: Method::Ptmp,
        n_modes: t.n_modes(),
        parameters: RunParameters {
            cutoff: Some(opts.cutoff),
            step: Some(opts.step),
            iterations: Some(spectrum.iterations_used()),
            max_iter: opts.max_iter,
            ..Default::default()
        },
        wide_patterns: lines.iter().any(|l| !l.pattern.is_single_digit()),
        lines,
        mass_captured: None,
        l1_vs_reference: reference.map(|r| l1_distance(&spectrum, r)),
        metadata: Some(ReportMetadata::from(&t.metadata)),
    })
}

/// Exact enumeration within the caps; zero-probability patterns are omitted.
pub fn run_exact(t: &ParsedTransition, opts: EnumerationOptions) -> Result<SpectrumReport> {
    let state = gaussian_state(t)?;
    let exact = enumerate_exact_spectrum(
        &state,
        EnumerationBudget {
            per_mode_cap: opts.per_mode_cap,
            total_cap: opts.total_cap,
        },
        None,
    )?;
    let nonzero = exact
        .entries()
        .iter()
        .filter(|(_, &w)| w > 0.0)
        .map(|(p, &w)| (p.clone(), w))
        .collect();
    let lines = lines_from(&nonzero, &t.omega_final);
    Ok(SpectrumReport {
        method: Method::Exact,
        n_modes: t.n_modes(),
        parameters: RunParameters {
            per_mode_cap: Some(opts.per_mode_cap),
            total_cap: Some(opts.total_cap),
            ..Default::default()
        },
        wide_patterns: lines.iter().any(|l| !l.pattern.is_single_digit()),
        lines,
        mass_captured: Some(exact.mass_captured()),
        l1_vs_reference: None,
        metadata: Some(ReportMetadata::from(&t.metadata)),
    })
}

/// l1 distance between two line tables over the union of their patterns.
pub fn compare(a: &dyn PatternDistribution, b: &dyn PatternDistribution) -> f64 {
    l1_distance(a, b)
}
