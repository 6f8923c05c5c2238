//! Slow, independent references: brute-force matchings, exhaustive chain
//! search, full pattern enumeration and closed-form single-mode laws.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::hafnian::check_loop_matrix;
use crate::pattern::{count_patterns, enumerate_patterns, PhotonPattern};
use crate::probability::{build_context, pattern_probability, DEFAULT_HAFNIAN_BUDGET};
use crate::pursuit::{PatternDistribution, ResidueChain};

pub const BRUTE_FORCE_MAX_DIM: usize = 10;
pub const EXHAUSTIVE_MAX_PATTERNS: usize = 1_000_000;
pub const ENUMERATION_MAX_PATTERNS: usize = 10_000_000;

/// Loop hafnian by listing every loop/pair cover explicitly and summing the
/// products. Factorial time; limited to dimension 10.
pub fn brute_force_loop_hafnian(m: &DMatrix<f64>) -> Result<f64> {
    check_loop_matrix(m)?;
    let dim = m.nrows();
    if dim > BRUTE_FORCE_MAX_DIM {
        return Err(Error::TooLarge {
            what: "brute-force loop hafnian dimension",
            size: dim,
            limit: BRUTE_FORCE_MAX_DIM,
        });
    }
    let mut covers: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut current = Vec::new();
    list_covers(&mut (0..dim).collect::<Vec<_>>(), &mut current, &mut covers);
    Ok(covers
        .iter()
        .map(|cover| cover.iter().map(|&(i, j)| m[(i, j)]).product::<f64>())
        .sum())
}

fn list_covers(
    free: &mut [usize],
    current: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    let Some(&first) = free.first() else {
        out.push(current.clone());
        return;
    };
    let rest: Vec<usize> = free[1..].to_vec();

    // loop on `first`
    current.push((first, first));
    let mut remaining = rest.clone();
    list_covers(&mut remaining, current, out);
    current.pop();

    for (pos, &partner) in rest.iter().enumerate() {
        current.push((first, partner));
        let mut remaining: Vec<usize> = rest
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != pos)
            .map(|(_, &v)| v)
            .collect();
        list_covers(&mut remaining, current, out);
        current.pop();
    }
}

/// Best pattern by scoring all `K^N` of them; ties go to the lexicographically
/// smallest.
pub fn exhaustive_chain_argmax(residue: &ResidueChain) -> Result<PhotonPattern> {
    let n = residue.n_modes();
    let k = residue.cutoff();
    let total = (k as f64).powi(n as i32);
    if total > EXHAUSTIVE_MAX_PATTERNS as f64 {
        return Err(Error::TooLarge {
            what: "exhaustive chain search",
            size: total.min(usize::MAX as f64) as usize,
            limit: EXHAUSTIVE_MAX_PATTERNS,
        });
    }
    let mut best: Option<(f64, PhotonPattern)> = None;
    // enumerate_patterns yields lexicographic order, so strict improvement
    // keeps the smallest maximiser
    for pattern in enumerate_patterns(n, k - 1, n * (k - 1)) {
        let score = residue.chain_score(&pattern)?;
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((score, pattern));
        }
    }
    Ok(best.expect("at least one pattern").1)
}

/// Caps that define which patterns an exact spectrum covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub per_mode_cap: usize,
    pub total_cap: usize,
}

/// Probabilities of every pattern within an [`EnumerationBudget`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSpectrum {
    entries: BTreeMap<PhotonPattern, f64>,
    mass_captured: f64,
    budget: EnumerationBudget,
}

impl ExactSpectrum {
    pub fn entries(&self) -> &BTreeMap<PhotonPattern, f64> {
        &self.entries
    }

    pub fn mass_captured(&self) -> f64 {
        self.mass_captured
    }

    pub fn budget(&self) -> EnumerationBudget {
        self.budget
    }

    pub fn probability(&self, pattern: &PhotonPattern) -> f64 {
        self.entries.get(pattern).copied().unwrap_or(0.0)
    }

    /// Sums the entries onto modes `(pair, pair + 1)`; counts at or above
    /// `cutoff` are dropped.
    pub fn pair_marginal(&self, pair: usize, cutoff: usize) -> Vec<f64> {
        let mut table = vec![0.0; cutoff * cutoff];
        for (p, &w) in &self.entries {
            let (a, b) = (p[pair], p[pair + 1]);
            if a < cutoff && b < cutoff {
                table[a * cutoff + b] += w;
            }
        }
        table
    }
}

impl PatternDistribution for ExactSpectrum {
    fn pattern_weights(&self) -> &BTreeMap<PhotonPattern, f64> {
        &self.entries
    }
}

/// Evaluates every pattern with `n_i <= per_mode_cap` and `Σ n_i <= total_cap`.
/// `hafnian_budget` (default 24) bounds `2 · total_cap`.
pub fn enumerate_exact_spectrum(
    state: &GaussianState,
    budget: EnumerationBudget,
    hafnian_budget: Option<usize>,
) -> Result<ExactSpectrum> {
    let hafnian_budget = hafnian_budget.unwrap_or(DEFAULT_HAFNIAN_BUDGET);
    let n = state.n_modes();
    let reachable_total = budget.total_cap.min(budget.per_mode_cap.saturating_mul(n));
    if 2 * reachable_total > hafnian_budget {
        return Err(Error::PatternTooLarge {
            dim: 2 * reachable_total,
            budget: hafnian_budget,
        });
    }
    let count = count_patterns(n, budget.per_mode_cap, budget.total_cap, usize::MAX);
    if count > ENUMERATION_MAX_PATTERNS {
        return Err(Error::TooLarge {
            what: "exact enumeration pattern count",
            size: count,
            limit: ENUMERATION_MAX_PATTERNS,
        });
    }
    let ctx = build_context(state)?.with_budget(hafnian_budget);
    let patterns = enumerate_patterns(n, budget.per_mode_cap, budget.total_cap);
    let probs = patterns
        .par_iter()
        .map(|p| pattern_probability(&ctx, p))
        .collect::<Result<Vec<f64>>>()?;
    let mass_captured = probs.iter().sum();
    Ok(ExactSpectrum {
        entries: patterns.into_iter().zip(probs).collect(),
        mass_captured,
        budget,
    })
}

/// Closed-form photon statistics of single-mode transitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingleModeLaw {
    /// Unchanged frequency, dimensionless shift `delta`: Poisson with mean `delta²/2`.
    Displaced { delta: f64 },
    /// Pure frequency change with squeezing parameter `r = ½ ln(ω'/ω)`.
    Squeezed { r: f64 },
}

impl SingleModeLaw {
    pub fn squeezed_from_ratio(omega_final_over_initial: f64) -> Self {
        Self::Squeezed {
            r: 0.5 * omega_final_over_initial.ln(),
        }
    }

    /// `P(0) ..= P(n_max)`.
    pub fn probabilities(&self, n_max: usize) -> Vec<f64> {
        match *self {
            Self::Displaced { delta } => {
                let mean = 0.5 * delta * delta;
                let mut out = Vec::with_capacity(n_max + 1);
                let mut term = (-mean).exp();
                for n in 0..=n_max {
                    if n > 0 {
                        term *= mean / n as f64;
                    }
                    out.push(term);
                }
                out
            }
            Self::Squeezed { r } => {
                let t2 = r.tanh().powi(2);
                let base = 1.0 / r.cosh();
                (0..=n_max)
                    .map(|n| {
                        if n % 2 == 1 {
                            return 0.0;
                        }
                        let half = n / 2;
                        // (2m)! / (2^{2m} (m!)^2) as a running product
                        let central: f64 = (1..=half)
                            .map(|i| (2 * i - 1) as f64 / (2 * i) as f64)
                            .product();
                        base * central * t2.powi(half as i32)
                    })
                    .collect()
            }
        }
    }
}

/// Free function form of [`SingleModeLaw::probabilities`].
pub fn analytic_singles(law: SingleModeLaw, n_max: usize) -> Vec<f64> {
    law.probabilities(n_max)
}
