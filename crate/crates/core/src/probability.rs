//! Photon-number probabilities of Gaussian states.
//!
//! With `σ_Q = σ + I/2`, `D = X (I - σ_Q^{-1})` and `γ = σ_Q^{-1} β`, the
//! probability of pattern `n` is
//!
//! ```text
//! P(n) = exp(-½ βᵀ σ_Q^{-1} β) / (sqrt(det σ_Q) Π n_i!) · lhaf(C_n)
//! ```
//!
//! where `C_n` repeats rows/columns `i` and `N + i` of `D` `n_i` times and puts
//! the correspondingly repeated `γ` on the diagonal.

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian::{symmetrize, GaussianState};
use crate::hafnian::{expand_repeated, loop_hafnian_repeated};
use crate::pattern::PhotonPattern;

/// Default cap on the loop-hafnian dimension `2 Σ n_i`.
pub const DEFAULT_HAFNIAN_BUDGET: usize = 24;

/// Round-off window for probabilities outside `[0, 1]`.
pub const CLAMP_TOL: f64 = 1e-9;

/// Everything about a state that pattern probabilities need, computed once.
#[derive(Debug, Clone)]
pub struct PatternProbabilityContext {
    sigma_q: DMatrix<f64>,
    d_matrix: DMatrix<f64>,
    gamma: DVector<f64>,
    mean: DVector<f64>,
    det_sigma_q: f64,
    /// `exp(-½ βᵀ σ_Q^{-1} β) / sqrt(det σ_Q)`, i.e. the vacuum probability.
    prefactor: f64,
    budget: usize,
}

impl PatternProbabilityContext {
    pub fn n_modes(&self) -> usize {
        self.gamma.len() / 2
    }

    pub fn sigma_q(&self) -> &DMatrix<f64> {
        &self.sigma_q
    }

    pub fn d_matrix(&self) -> &DMatrix<f64> {
        &self.d_matrix
    }

    pub fn gamma(&self) -> &DVector<f64> {
        &self.gamma
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn det_sigma_q(&self) -> f64 {
        self.det_sigma_q
    }

    pub fn vacuum_probability(&self) -> f64 {
        self.prefactor
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Same context with a different loop-hafnian dimension cap.
    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    /// Row/column repetition counts for `pattern` over the `2N` operator slots.
    fn repetitions(&self, pattern: &PhotonPattern) -> Result<Vec<usize>> {
        let n = self.n_modes();
        if pattern.n_modes() != n {
            return Err(Error::PatternLength {
                expected: n,
                found: pattern.n_modes(),
            });
        }
        Ok(pattern.counts().iter().chain(pattern.counts()).copied().collect())
    }

    /// The explicit matrix `C` whose loop hafnian gives the (unnormalised)
    /// probability of `pattern`.
    pub fn c_matrix(&self, pattern: &PhotonPattern) -> Result<DMatrix<f64>> {
        let reps = self.repetitions(pattern)?;
        Ok(expand_repeated(&self.d_matrix, self.gamma.as_slice(), &reps))
    }
}

/// Precomputes `σ_Q`, `D`, `γ` and the vacuum prefactor for `state`.
pub fn build_context(state: &GaussianState) -> Result<PatternProbabilityContext> {
    let dim = 2 * state.n_modes();
    let n = state.n_modes();
    let sigma_q = state.covariance() + DMatrix::<f64>::identity(dim, dim) * 0.5;
    let chol = sigma_q.clone().cholesky().ok_or(Error::SingularSigmaQ)?;
    let det_sigma_q = chol.l_dirty().diagonal().iter().map(|d| d * d).product::<f64>();
    if !(det_sigma_q.is_finite() && det_sigma_q > 0.0) {
        return Err(Error::SingularSigmaQ);
    }
    let q_inv = symmetrize(&chol.inverse());

    // D = X (I - σ_Q^{-1}): the block swap exchanges the upper and lower halves.
    let eye_minus = DMatrix::<f64>::identity(dim, dim) - &q_inv;
    let d_matrix = DMatrix::from_fn(dim, dim, |r, c| {
        let src = if r < n { r + n } else { r - n };
        eye_minus[(src, c)]
    });

    let mean = state.mean().clone();
    let gamma = &q_inv * &mean;
    let exponent = -0.5 * mean.dot(&gamma);
    let prefactor = exponent.exp() / det_sigma_q.sqrt();

    Ok(PatternProbabilityContext {
        sigma_q,
        d_matrix,
        gamma,
        mean,
        det_sigma_q,
        prefactor,
        budget: DEFAULT_HAFNIAN_BUDGET,
    })
}

/// Probability of `pattern` under the state behind `ctx`.
pub fn pattern_probability(ctx: &PatternProbabilityContext, pattern: &PhotonPattern) -> Result<f64> {
    let reps = ctx.repetitions(pattern)?;
    if pattern.is_vacuum() {
        return clamp_probability(ctx.prefactor);
    }
    let dim = 2 * pattern.total();
    if dim > ctx.budget {
        return Err(Error::PatternTooLarge {
            dim,
            budget: ctx.budget,
        });
    }
    let lhaf = loop_hafnian_repeated(&ctx.d_matrix, ctx.gamma.as_slice(), &reps)?;
    let factorials: f64 = pattern.counts().iter().map(|&k| factorial(k)).product();
    clamp_probability(ctx.prefactor * lhaf / factorials)
}

/// Overlap of `state` with the vacuum, `exp(-½ βᵀ σ_Q^{-1} β) / sqrt(det σ_Q)`.
pub fn vacuum_probability(state: &GaussianState) -> Result<f64> {
    Ok(build_context(state)?.prefactor)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn clamp_probability(p: f64) -> Result<f64> {
    if !p.is_finite() {
        return Err(Error::NonFinite("probability"));
    }
    if p < 0.0 {
        if p < -CLAMP_TOL {
            return Err(Error::NegativeProbability(p));
        }
        return Ok(0.0);
    }
    if p > 1.0 {
        if p > 1.0 + CLAMP_TOL {
            warn!("probability {p:.12} clamped to 1");
        }
        return Ok(1.0);
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{build_doktorov, evolve_vacuum, VibronicTransition};
    use approx::assert_abs_diff_eq;

    fn single(omega: f64, omega_final: f64, delta: f64) -> GaussianState {
        let t = VibronicTransition::new(
            vec![omega],
            vec![omega_final],
            DMatrix::identity(1, 1),
            DVector::from_element(1, delta),
        )
        .unwrap();
        evolve_vacuum(&build_doktorov(&t).unwrap()).unwrap()
    }

    #[test]
    fn vacuum_context() {
        let ctx = build_context(&GaussianState::vacuum(3)).unwrap();
        assert_eq!(*ctx.sigma_q(), DMatrix::identity(6, 6));
        assert!(ctx.d_matrix().iter().all(|&x| x == 0.0));
        assert!(ctx.gamma().iter().all(|&x| x == 0.0));
        assert_eq!(pattern_probability(&ctx, &PhotonPattern::vacuum(3)).unwrap(), 1.0);
        assert_eq!(
            pattern_probability(&ctx, &PhotonPattern::new(vec![0, 1, 0])).unwrap(),
            0.0
        );
    }

    #[test]
    fn displaced_gamma_equals_mean() {
        let s = single(1000.0, 1000.0, 0.9);
        let ctx = build_context(&s).unwrap();
        let mu = 0.9 / std::f64::consts::SQRT_2;
        assert_abs_diff_eq!(ctx.gamma()[0], mu, epsilon = 1e-15);
        assert_abs_diff_eq!(ctx.gamma()[1], mu, epsilon = 1e-15);
        assert_abs_diff_eq!(vacuum_probability(&s).unwrap(), (-0.81f64 / 2.0).exp(), epsilon = 1e-15);
    }

    #[test]
    fn d_matrix_block_swap_identity() {
        let t = VibronicTransition::new(
            vec![1000.0, 1300.0],
            vec![1500.0, 900.0],
            DMatrix::from_row_slice(2, 2, &[0.6, 0.8, -0.8, 0.6]),
            DVector::from_vec(vec![0.4, -0.7]),
        )
        .unwrap();
        let ctx = build_context(&evolve_vacuum(&build_doktorov(&t).unwrap()).unwrap()).unwrap();
        let d = ctx.d_matrix();
        let x = DMatrix::from_fn(4, 4, |r, c| if (r + 2) % 4 == c { 1.0 } else { 0.0 });
        assert_abs_diff_eq!(&x * d, d.transpose() * &x, epsilon = 1e-14);
    }

    #[test]
    fn c_matrix_layout() {
        // two modes, pattern (2, 1): repeated indices 0,0,1,2,2,3
        let t = VibronicTransition::new(
            vec![1000.0, 1300.0],
            vec![1500.0, 900.0],
            DMatrix::from_row_slice(2, 2, &[0.6, 0.8, -0.8, 0.6]),
            DVector::from_vec(vec![0.4, -0.7]),
        )
        .unwrap();
        let ctx = build_context(&evolve_vacuum(&build_doktorov(&t).unwrap()).unwrap()).unwrap();
        let c = ctx.c_matrix(&PhotonPattern::new(vec![2, 1])).unwrap();
        assert_eq!(c.shape(), (6, 6));
        let g = ctx.gamma();
        let diag: Vec<f64> = c.diagonal().iter().copied().collect();
        assert_eq!(diag, vec![g[0], g[0], g[1], g[2], g[2], g[3]]);
        let d = ctx.d_matrix();
        let idx = [0, 0, 1, 2, 2, 3];
        for r in 0..6 {
            for col in 0..6 {
                if r != col {
                    assert_eq!(c[(r, col)], d[(idx[r], idx[col])]);
                }
            }
        }
    }

    #[test]
    fn pattern_budget_and_length_errors() {
        let ctx = build_context(&single(1000.0, 2000.0, 0.3)).unwrap().with_budget(6);
        assert!(pattern_probability(&ctx, &PhotonPattern::new(vec![3])).is_ok());
        assert_eq!(
            pattern_probability(&ctx, &PhotonPattern::new(vec![4])),
            Err(Error::PatternTooLarge { dim: 8, budget: 6 })
        );
        assert_eq!(
            pattern_probability(&ctx, &PhotonPattern::new(vec![0, 0])),
            Err(Error::PatternLength { expected: 1, found: 2 })
        );
    }

    #[test]
    fn clamping() {
        assert_eq!(clamp_probability(-1e-12).unwrap(), 0.0);
        assert_eq!(clamp_probability(1.0 + 1e-12).unwrap(), 1.0);
        assert!(matches!(clamp_probability(-1e-6), Err(Error::NegativeProbability(_))));
    }
}
