//! Nearest-neighbour two-mode photon-number marginals, the compressed
//! measurement that the pursuit reconstructs from.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::pattern::PhotonPattern;
use crate::probability::{build_context, pattern_probability};

/// Default per-mode cutoff `K`; counts run over `0..K`.
pub const DEFAULT_CUTOFF: usize = 4;

/// Tolerance for the overlap check between neighbouring tables.
pub const CHAIN_CONSISTENCY_TOL: f64 = 5e-3;

const ENTRY_TOL: f64 = 1e-9;

/// `N - 1` tables of `K × K` probabilities; table `m` holds
/// `P(n_m = a, n_{m+1} = b)` at `(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMarginalSet {
    n_modes: usize,
    cutoff: usize,
    /// Row-major per table: `tables[m][a * K + b]`.
    tables: Vec<Vec<f64>>,
}

impl PairMarginalSet {
    pub fn new(n_modes: usize, cutoff: usize, tables: Vec<Vec<f64>>) -> Result<Self> {
        if n_modes < 2 {
            return Err(Error::InvalidParameter(format!(
                "pair marginals need at least 2 modes, got {n_modes}"
            )));
        }
        if cutoff == 0 {
            return Err(Error::InvalidParameter("cutoff must be at least 1".into()));
        }
        if tables.len() != n_modes - 1 {
            return Err(Error::DimensionMismatch {
                what: "pair tables",
                expected: n_modes - 1,
                found: tables.len(),
            });
        }
        for (m, table) in tables.iter().enumerate() {
            if table.len() != cutoff * cutoff {
                return Err(Error::DimensionMismatch {
                    what: "pair table cells",
                    expected: cutoff * cutoff,
                    found: table.len(),
                });
            }
            if let Some(v) = table
                .iter()
                .find(|v| !v.is_finite() || **v < -ENTRY_TOL || **v > 1.0 + ENTRY_TOL)
            {
                return Err(Error::InvalidMarginal(format!(
                    "table {m} has entry {v} outside [0, 1]"
                )));
            }
            let sum: f64 = table.iter().sum();
            if sum > 1.0 + ENTRY_TOL {
                return Err(Error::InvalidMarginal(format!(
                    "table {m} sums to {sum} > 1"
                )));
            }
        }
        Ok(Self {
            n_modes,
            cutoff,
            tables,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    /// `P(n_pair = a, n_{pair+1} = b)`.
    pub fn get(&self, pair: usize, a: usize, b: usize) -> f64 {
        self.tables[pair][a * self.cutoff + b]
    }

    /// Distribution of mode `pair + 1` from table `pair` (summing out its first mode).
    pub fn right_marginal(&self, pair: usize) -> Vec<f64> {
        let k = self.cutoff;
        (0..k)
            .map(|b| (0..k).map(|a| self.get(pair, a, b)).sum())
            .collect()
    }

    /// Distribution of mode `pair` from table `pair` (summing out its second mode).
    pub fn left_marginal(&self, pair: usize) -> Vec<f64> {
        let k = self.cutoff;
        (0..k)
            .map(|a| (0..k).map(|b| self.get(pair, a, b)).sum())
            .collect()
    }

    /// Largest disagreement between the two estimates of each interior mode's
    /// distribution.
    pub fn chain_inconsistency(&self) -> f64 {
        (0..self.n_modes - 2)
            .flat_map(|m| {
                let right = self.right_marginal(m);
                let left = self.left_marginal(m + 1);
                right
                    .into_iter()
                    .zip(left)
                    .map(|(r, l)| (r - l).abs())
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }

    /// Measurement vector ordered by pair, then first count, then second count.
    pub fn flatten(&self) -> Vec<f64> {
        self.tables.iter().flatten().copied().collect()
    }
}

/// Computes all adjacent-pair tables of `state` up to `cutoff`.
pub fn scan_pairs(state: &GaussianState, cutoff: usize) -> Result<PairMarginalSet> {
    let n = state.n_modes();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "pair marginals need at least 2 modes, got {n}"
        )));
    }
    if cutoff == 0 {
        return Err(Error::InvalidParameter("cutoff must be at least 1".into()));
    }
    let budget = 4 * (cutoff - 1);
    let tables = (0..n - 1)
        .into_par_iter()
        .map(|m| {
            let pair = state.reduce(&[m, m + 1])?;
            let ctx = build_context(&pair)?;
            let ctx = if ctx.budget() < budget {
                ctx.with_budget(budget)
            } else {
                ctx
            };
            (0..cutoff * cutoff)
                .into_par_iter()
                .map(|cell| {
                    let pattern = PhotonPattern::new(vec![cell / cutoff, cell % cutoff]);
                    pattern_probability(&ctx, &pattern)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let pm = PairMarginalSet::new(n, cutoff, tables)?;
    let drift = pm.chain_inconsistency();
    if drift > CHAIN_CONSISTENCY_TOL {
        warn!("neighbouring tables disagree by {drift:.3e}; cutoff {cutoff} truncates noticeable mass");
    }
    Ok(pm)
}

/// Free function form of [`PairMarginalSet::flatten`].
pub fn flatten_measurement(pm: &PairMarginalSet) -> Vec<f64> {
    pm.flatten()
}

/// Applies the measurement operator to a weighted set of patterns: each pattern
/// contributes its weight to one cell of every pair table. Patterns with a
/// count at or above `cutoff` are outside the measured space and are dropped.
pub fn measure_patterns<'a>(
    n_modes: usize,
    cutoff: usize,
    weights: impl IntoIterator<Item = (&'a PhotonPattern, f64)>,
) -> Result<PairMarginalSet> {
    if n_modes < 2 || cutoff == 0 {
        return Err(Error::InvalidParameter(format!(
            "cannot measure with {n_modes} modes and cutoff {cutoff}"
        )));
    }
    let mut tables = vec![vec![0.0; cutoff * cutoff]; n_modes - 1];
    for (pattern, w) in weights {
        if pattern.n_modes() != n_modes {
            return Err(Error::PatternLength {
                expected: n_modes,
                found: pattern.n_modes(),
            });
        }
        if pattern.counts().iter().any(|&c| c >= cutoff) {
            continue;
        }
        for (m, table) in tables.iter_mut().enumerate() {
            table[pattern[m] * cutoff + pattern[m + 1]] += w;
        }
    }
    PairMarginalSet::new(n_modes, cutoff, tables)
}
