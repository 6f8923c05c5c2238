//! Polynomial-time matching pursuit over nearest-neighbour marginals.
//!
//! The measurement matrix is never built. A column is a photon pattern `n`; it
//! has a one in cell `(m, n_m, n_{m+1})` of every pair table and zeros
//! elsewhere. The overlap of a residue with column `n` is therefore the chain
//! score `Σ_m r_m(n_m, n_{m+1})`, and the best column is the ground state of a
//! one-dimensional chain with nearest-neighbour couplings, found by dynamic
//! programming in `O(N K²)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::marginals::PairMarginalSet;
use crate::pattern::PhotonPattern;

/// Default pursuit step.
pub const DEFAULT_STEP: f64 = 0.01;

/// Residue over the pair tables. Entries may turn negative during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueChain {
    n_modes: usize,
    cutoff: usize,
    /// `(N - 1) K²` cells, indexed `m K² + a K + b`.
    cells: Vec<f64>,
}

impl ResidueChain {
    pub fn new(n_modes: usize, cutoff: usize, cells: Vec<f64>) -> Result<Self> {
        if n_modes < 2 || cutoff == 0 {
            return Err(Error::InvalidParameter(format!(
                "residue chain needs >= 2 modes and cutoff >= 1 (got {n_modes}, {cutoff})"
            )));
        }
        let expected = (n_modes - 1) * cutoff * cutoff;
        if cells.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "residue cells",
                expected,
                found: cells.len(),
            });
        }
        if cells.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("residue"));
        }
        Ok(Self {
            n_modes,
            cutoff,
            cells,
        })
    }

    pub fn zeros(n_modes: usize, cutoff: usize) -> Result<Self> {
        Self::new(
            n_modes,
            cutoff,
            vec![0.0; n_modes.saturating_sub(1) * cutoff * cutoff],
        )
    }

    /// Starts a residue at the measurement `y`.
    pub fn from_marginals(y: &PairMarginalSet) -> Self {
        Self {
            n_modes: y.n_modes(),
            cutoff: y.cutoff(),
            cells: y.flatten(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    #[inline]
    fn index(&self, pair: usize, a: usize, b: usize) -> usize {
        (pair * self.cutoff + a) * self.cutoff + b
    }

    pub fn get(&self, pair: usize, a: usize, b: usize) -> f64 {
        self.cells[self.index(pair, a, b)]
    }

    pub fn set(&mut self, pair: usize, a: usize, b: usize, value: f64) {
        let i = self.index(pair, a, b);
        self.cells[i] = value;
    }

    fn check_pattern(&self, pattern: &PhotonPattern) -> Result<()> {
        if pattern.n_modes() != self.n_modes {
            return Err(Error::PatternLength {
                expected: self.n_modes,
                found: pattern.n_modes(),
            });
        }
        if let Some((mode, &count)) = pattern
            .counts()
            .iter()
            .enumerate()
            .find(|(_, &c)| c >= self.cutoff)
        {
            return Err(Error::PatternOutOfRange {
                mode,
                count,
                cutoff: self.cutoff,
            });
        }
        Ok(())
    }

    /// Overlap of the residue with the column of `pattern`, summed left to right.
    pub fn chain_score(&self, pattern: &PhotonPattern) -> Result<f64> {
        self.check_pattern(pattern)?;
        Ok((0..self.n_modes - 1).fold(0.0, |acc, m| acc + self.get(m, pattern[m], pattern[m + 1])))
    }

    /// Subtracts `step` from the `N - 1` cells of the column of `pattern`.
    pub fn subtract_column(&mut self, pattern: &PhotonPattern, step: f64) -> Result<()> {
        self.check_pattern(pattern)?;
        for m in 0..self.n_modes - 1 {
            let i = self.index(m, pattern[m], pattern[m + 1]);
            self.cells[i] -= step;
        }
        Ok(())
    }
}

/// Free function form of [`ResidueChain::subtract_column`].
pub fn subtract_column(
    mut residue: ResidueChain,
    pattern: &PhotonPattern,
    step: f64,
) -> Result<ResidueChain> {
    residue.subtract_column(pattern, step)?;
    Ok(residue)
}

/// Pattern with the largest chain score; among equal scores the
/// lexicographically smallest pattern wins.
///
/// Forward sweep `E_1(i) = 0`, `E_k(j) = max_i [E_{k-1}(i) + r_{k-1}(i, j)]`
/// with backpointers, followed by a backtrace. Alongside each `E_k(j)` the sweep
/// keeps the lexicographic rank of the optimal prefix ending in `j`, which
/// settles ties between predecessors without comparing whole prefixes.
pub fn chain_argmax(residue: &ResidueChain) -> PhotonPattern {
    let n = residue.n_modes;
    let k = residue.cutoff;
    let mut energy = vec![0.0f64; k];
    let mut rank: Vec<usize> = (0..k).collect();
    let mut next_energy = vec![0.0f64; k];
    let mut parent = vec![0usize; k];
    let mut back = vec![0usize; (n - 1) * k];
    let mut order: Vec<usize> = (0..k).collect();

    for pair in 0..n - 1 {
        let table = &residue.cells[pair * k * k..(pair + 1) * k * k];
        for j in 0..k {
            let mut best_i = 0;
            let mut best = energy[0] + table[j];
            for i in 1..k {
                let v = energy[i] + table[i * k + j];
                if v > best || (v == best && rank[i] < rank[best_i]) {
                    best = v;
                    best_i = i;
                }
            }
            next_energy[j] = best;
            parent[j] = best_i;
        }
        back[pair * k..(pair + 1) * k].copy_from_slice(&parent);
        std::mem::swap(&mut energy, &mut next_energy);

        // prefixes ending in j compare first by their parent's prefix, then by j
        order.sort_unstable_by_key(|&j| (rank[parent[j]], j));
        for (pos, &j) in order.iter().enumerate() {
            rank[j] = pos;
        }
    }

    let mut last = 0;
    for j in 1..k {
        if energy[j] > energy[last] || (energy[j] == energy[last] && rank[j] < rank[last]) {
            last = j;
        }
    }
    let mut counts = vec![0usize; n];
    counts[n - 1] = last;
    for pair in (0..n - 1).rev() {
        counts[pair] = back[pair * k + counts[pair + 1]];
    }
    PhotonPattern::new(counts)
}

/// A reconstructed spectrum: pattern weights that are whole multiples of the
/// pursuit step.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpectrum {
    weights: BTreeMap<PhotonPattern, f64>,
    hits: BTreeMap<PhotonPattern, usize>,
    step: f64,
    iterations_used: usize,
}

impl SparseSpectrum {
    fn from_hits(hits: BTreeMap<PhotonPattern, usize>, step: f64, iterations_used: usize) -> Self {
        let weights = hits
            .iter()
            .map(|(p, &h)| (p.clone(), h as f64 * step))
            .collect();
        Self {
            weights,
            hits,
            step,
            iterations_used,
        }
    }

    pub fn weights(&self) -> &BTreeMap<PhotonPattern, f64> {
        &self.weights
    }

    /// Number of steps credited to each pattern.
    pub fn hits(&self) -> &BTreeMap<PhotonPattern, usize> {
        &self.hits
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn iterations_used(&self) -> usize {
        self.iterations_used
    }

    pub fn total_weight(&self) -> f64 {
        self.iterations_used as f64 * self.step
    }

    pub fn weight(&self, pattern: &PhotonPattern) -> f64 {
        self.weights.get(pattern).copied().unwrap_or(0.0)
    }
}

/// Anything that assigns weights to photon patterns.
pub trait PatternDistribution {
    fn pattern_weights(&self) -> &BTreeMap<PhotonPattern, f64>;
}

impl PatternDistribution for SparseSpectrum {
    fn pattern_weights(&self) -> &BTreeMap<PhotonPattern, f64> {
        &self.weights
    }
}

impl PatternDistribution for BTreeMap<PhotonPattern, f64> {
    fn pattern_weights(&self) -> &BTreeMap<PhotonPattern, f64> {
        self
    }
}

/// `Σ |p_i - q_i|` over the union of both supports.
pub fn l1_distance<P, Q>(p: &P, q: &Q) -> f64
where
    P: PatternDistribution + ?Sized,
    Q: PatternDistribution + ?Sized,
{
    let (p, q) = (p.pattern_weights(), q.pattern_weights());
    let mut total = 0.0;
    for (pattern, &w) in p {
        total += (w - q.get(pattern).copied().unwrap_or(0.0)).abs();
    }
    for (pattern, &w) in q {
        if !p.contains_key(pattern) {
            total += w.abs();
        }
    }
    total
}

/// Step-by-step pursuit state.
#[derive(Debug, Clone)]
pub struct Pursuit {
    residue: ResidueChain,
    hits: BTreeMap<PhotonPattern, usize>,
    step: f64,
    iterations: usize,
}

impl Pursuit {
    pub fn new(y: &PairMarginalSet, step: f64) -> Result<Self> {
        check_step(step)?;
        Ok(Self {
            residue: ResidueChain::from_marginals(y),
            hits: BTreeMap::new(),
            step,
            iterations: 0,
        })
    }

    /// One support-detection and update round; returns the detected pattern.
    pub fn step(&mut self) -> PhotonPattern {
        let pattern = chain_argmax(&self.residue);
        self.residue
            .subtract_column(&pattern, self.step)
            .expect("argmax pattern fits the residue");
        *self.hits.entry(pattern.clone()).or_insert(0) += 1;
        self.iterations += 1;
        pattern
    }

    /// Whether the accumulated weight has reached one.
    pub fn is_complete(&self) -> bool {
        self.iterations as f64 * self.step >= 1.0 - 1e-12
    }

    pub fn residue(&self) -> &ResidueChain {
        &self.residue
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn spectrum(&self) -> SparseSpectrum {
        SparseSpectrum::from_hits(self.hits.clone(), self.step, self.iterations)
    }
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "pursuit step must lie in (0, 1], got {step}"
        )));
    }
    Ok(())
}

/// `ceil(1 / step)`, the number of steps needed to accumulate unit weight.
pub fn default_max_iter(step: f64) -> usize {
    let raw = 1.0 / step;
    // 1/0.01 lands a hair above 100 on some inputs; do not round that up.
    let nearest = raw.round();
    if (raw - nearest).abs() < 1e-9 {
        nearest as usize
    } else {
        raw.ceil() as usize
    }
}

/// Reconstructs a sparse spectrum from the pair marginals `y`. Stops after the
/// update that brings the total weight to one, or after `max_iter` rounds
/// (default `ceil(1 / step)`).
pub fn ptmp(y: &PairMarginalSet, step: f64, max_iter: Option<usize>) -> Result<SparseSpectrum> {
    check_step(step)?;
    let max_iter = max_iter.unwrap_or_else(|| default_max_iter(step));
    let mut pursuit = Pursuit::new(y, step)?;
    while pursuit.iterations() < max_iter {
        pursuit.step();
        if pursuit.is_complete() {
            break;
        }
    }
    Ok(pursuit.spectrum())
}
