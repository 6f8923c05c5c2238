//! Random transitions for tests and benchmarks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::Result;
use crate::gaussian::VibronicTransition;

/// Ranges for [`random_transition`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticRanges {
    /// Both frequency sets are drawn uniformly from this interval (cm⁻¹).
    pub omega: (f64, f64),
    /// Displacements are drawn uniformly from `[-max_shift, max_shift]`.
    pub max_shift: f64,
}

impl Default for SyntheticRanges {
    /// Frequencies within a factor of two of each other, `|δ| <= 1`.
    fn default() -> Self {
        Self {
            omega: (1000.0, 2000.0),
            max_shift: 1.0,
        }
    }
}

/// Orthogonal matrix from the QR factorisation of a random matrix, with column
/// signs fixed so the factorisation is unique.
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let qr = raw.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..n {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    q
}

pub fn random_transition(
    rng: &mut impl Rng,
    n_modes: usize,
    ranges: SyntheticRanges,
) -> Result<VibronicTransition> {
    let (lo, hi) = ranges.omega;
    let omega_initial = (0..n_modes).map(|_| rng.gen_range(lo..hi)).collect();
    let omega_final = (0..n_modes).map(|_| rng.gen_range(lo..hi)).collect();
    let u = random_orthogonal(rng, n_modes);
    let shift = DVector::from_fn(n_modes, |_, _| {
        rng.gen_range(-ranges.max_shift..=ranges.max_shift)
    });
    VibronicTransition::new(omega_initial, omega_final, u, shift)
}
