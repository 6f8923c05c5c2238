//! Vibronic transitions and the Gaussian states they induce.
//!
//! Mode operators are ordered `(a_1 .. a_N, a_1^† .. a_N^†)`. Under this ordering
//! the vacuum covariance is `I/2` and a real displacement places the same value
//! at entries `i` and `N + i` of the mean vector.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const ORTHOGONALITY_TOL: f64 = 1e-8;
pub const SYMMETRY_TOL: f64 = 1e-10;
pub const MAX_CONDITION: f64 = 1e12;

/// Molecular input: frequencies of both electronic states, the Duschinsky
/// rotation and the dimensionless displacement of the final-state modes.
#[derive(Debug, Clone, PartialEq)]
pub struct VibronicTransition {
    omega_initial: Vec<f64>,
    omega_final: Vec<f64>,
    duschinsky: DMatrix<f64>,
    displacement: DVector<f64>,
}

impl VibronicTransition {
    pub fn new(
        omega_initial: Vec<f64>,
        omega_final: Vec<f64>,
        duschinsky: DMatrix<f64>,
        displacement: DVector<f64>,
    ) -> Result<Self> {
        let n = omega_final.len();
        if n == 0 {
            return Err(Error::InvalidParameter("transition needs at least one mode".into()));
        }
        if omega_initial.len() != n {
            return Err(Error::DimensionMismatch {
                what: "omega_initial",
                expected: n,
                found: omega_initial.len(),
            });
        }
        if duschinsky.nrows() != n || duschinsky.ncols() != n {
            return Err(Error::DimensionMismatch {
                what: "duschinsky",
                expected: n,
                found: if duschinsky.nrows() != n {
                    duschinsky.nrows()
                } else {
                    duschinsky.ncols()
                },
            });
        }
        if displacement.len() != n {
            return Err(Error::DimensionMismatch {
                what: "displacement",
                expected: n,
                found: displacement.len(),
            });
        }
        for (mode, &w) in omega_initial.iter().chain(&omega_final).enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidFrequency { mode: mode % n, value: w });
            }
        }
        if duschinsky.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("duschinsky"));
        }
        if displacement.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("displacement"));
        }
        let max_deviation = orthogonality_defect(&duschinsky);
        if max_deviation >= ORTHOGONALITY_TOL {
            return Err(Error::NotOrthogonal { max_deviation });
        }
        Ok(Self {
            omega_initial,
            omega_final,
            duschinsky,
            displacement,
        })
    }

    /// Unchanged frequencies, no rotation, no displacement.
    pub fn identity(omega: Vec<f64>) -> Result<Self> {
        let n = omega.len();
        Self::new(
            omega.clone(),
            omega,
            DMatrix::identity(n, n),
            DVector::zeros(n),
        )
    }

    pub fn n_modes(&self) -> usize {
        self.omega_final.len()
    }

    pub fn omega_initial(&self) -> &[f64] {
        &self.omega_initial
    }

    pub fn omega_final(&self) -> &[f64] {
        &self.omega_final
    }

    pub fn duschinsky(&self) -> &DMatrix<f64> {
        &self.duschinsky
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.displacement
    }
}

/// `max |U^T U - I|`.
pub fn orthogonality_defect(u: &DMatrix<f64>) -> f64 {
    let n = u.ncols();
    (u.transpose() * u - DMatrix::<f64>::identity(n, n)).amax()
}

/// Bogoliubov coefficients of the transition: `alpha = (J - J^{-T})/2`,
/// `beta = (J + J^{-T})/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoktorovParameters {
    j_matrix: DMatrix<f64>,
    alpha: DMatrix<f64>,
    beta: DMatrix<f64>,
    delta: DVector<f64>,
}

impl DoktorovParameters {
    /// Builds the coefficients from a precomputed `J` and dimensionless shift.
    pub fn from_j(j_matrix: DMatrix<f64>, delta: DVector<f64>) -> Result<Self> {
        let n = j_matrix.nrows();
        if j_matrix.ncols() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: j_matrix.ncols(),
            });
        }
        if n == 0 {
            return Err(Error::InvalidParameter("J must have at least one mode".into()));
        }
        if delta.len() != n {
            return Err(Error::DimensionMismatch {
                what: "delta",
                expected: n,
                found: delta.len(),
            });
        }
        if j_matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("j_matrix"));
        }
        if delta.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("delta"));
        }

        let jt = j_matrix.transpose();
        let singular = jt.clone().svd(false, false).singular_values;
        let (smax, smin) = singular
            .iter()
            .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if condition.is_nan() || condition > MAX_CONDITION {
            return Err(Error::SingularJ { condition });
        }
        let jt_inv = jt.try_inverse().ok_or(Error::SingularJ {
            condition: f64::INFINITY,
        })?;

        let alpha = (&j_matrix - &jt_inv) * 0.5;
        let beta = (&j_matrix + &jt_inv) * 0.5;
        Ok(Self {
            j_matrix,
            alpha,
            beta,
            delta,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.delta.len()
    }

    pub fn j_matrix(&self) -> &DMatrix<f64> {
        &self.j_matrix
    }

    pub fn alpha(&self) -> &DMatrix<f64> {
        &self.alpha
    }

    pub fn beta(&self) -> &DMatrix<f64> {
        &self.beta
    }

    pub fn delta(&self) -> &DVector<f64> {
        &self.delta
    }
}

/// `J = Ω' U Ω^{-1}` with `Ω = diag(ω)^{1/2}`; the displacement passes through.
pub fn build_doktorov(transition: &VibronicTransition) -> Result<DoktorovParameters> {
    let n = transition.n_modes();
    let max_deviation = orthogonality_defect(&transition.duschinsky);
    if max_deviation >= ORTHOGONALITY_TOL {
        return Err(Error::NotOrthogonal { max_deviation });
    }
    let j = DMatrix::from_fn(n, n, |r, c| {
        transition.omega_final[r].sqrt() * transition.duschinsky[(r, c)]
            / transition.omega_initial[c].sqrt()
    });
    DoktorovParameters::from_j(j, transition.displacement.clone())
}

/// A real-displaced Gaussian state in `(a, a^†)` ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    covariance: DMatrix<f64>,
    mean: DVector<f64>,
}

impl GaussianState {
    pub fn new(covariance: DMatrix<f64>, mean: DVector<f64>) -> Result<Self> {
        let dim = covariance.nrows();
        if covariance.ncols() != dim {
            return Err(Error::NotSquare {
                rows: dim,
                cols: covariance.ncols(),
            });
        }
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "covariance dimension {dim} is not a positive even number"
            )));
        }
        if mean.len() != dim {
            return Err(Error::DimensionMismatch {
                what: "mean",
                expected: dim,
                found: mean.len(),
            });
        }
        if covariance.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("covariance"));
        }
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("mean"));
        }
        let asym = (&covariance - covariance.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        let n = dim / 2;
        for i in 0..n {
            let (a, b) = (mean[i], mean[n + i]);
            if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                return Err(Error::ComplexMean { mode: i });
            }
        }
        let sigma_q = &covariance + DMatrix::<f64>::identity(dim, dim) * 0.5;
        if sigma_q.cholesky().is_none() {
            return Err(Error::SingularSigmaQ);
        }
        Ok(Self { covariance, mean })
    }

    pub fn vacuum(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        Self {
            covariance: DMatrix::identity(dim, dim) * 0.5,
            mean: DVector::zeros(dim),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Restriction to `modes` (0-based, in the given order). Rows/columns `i`
    /// and `N + i` are kept and re-packed into `(a.., a^†..)` order.
    pub fn reduce(&self, modes: &[usize]) -> Result<Self> {
        let n = self.n_modes();
        if modes.is_empty() {
            return Err(Error::BadModeIndex("empty mode selection".into()));
        }
        let mut seen = vec![false; n];
        for &m in modes {
            if m >= n {
                return Err(Error::BadModeIndex(format!(
                    "mode {m} out of range for {n} modes"
                )));
            }
            if std::mem::replace(&mut seen[m], true) {
                return Err(Error::BadModeIndex(format!("mode {m} selected twice")));
            }
        }
        let k = modes.len();
        let index: Vec<usize> = modes
            .iter()
            .copied()
            .chain(modes.iter().map(|&m| m + n))
            .collect();
        let covariance = DMatrix::from_fn(2 * k, 2 * k, |r, c| {
            self.covariance[(index[r], index[c])]
        });
        let mean = DVector::from_fn(2 * k, |r, _| self.mean[index[r]]);
        Ok(Self { covariance, mean })
    }
}

/// Free function form of [`GaussianState::reduce`].
pub fn reduce_state(state: &GaussianState, modes: &[usize]) -> Result<GaussianState> {
    state.reduce(modes)
}

/// Evolves the vacuum through `S = [[α, β], [β, α]]`: covariance `S (I/2) S^T`,
/// mean `δ_i / √2` at entries `i` and `N + i`.
pub fn evolve_vacuum(params: &DoktorovParameters) -> Result<GaussianState> {
    let n = params.n_modes();
    let (alpha, beta) = (&params.alpha, &params.beta);

    // S S^T in blocks; each block symmetrised so the result is exactly symmetric
    // and exactly invariant under the a <-> a^† block swap.
    let diag_block = symmetrize(&((alpha * alpha.transpose() + beta * beta.transpose()) * 0.5));
    let off_block = symmetrize(&((alpha * beta.transpose() + beta * alpha.transpose()) * 0.5));

    let mut covariance = DMatrix::zeros(2 * n, 2 * n);
    covariance.view_mut((0, 0), (n, n)).copy_from(&diag_block);
    covariance.view_mut((n, n), (n, n)).copy_from(&diag_block);
    covariance.view_mut((0, n), (n, n)).copy_from(&off_block);
    covariance.view_mut((n, 0), (n, n)).copy_from(&off_block);

    let mut mean = DVector::zeros(2 * n);
    for i in 0..n {
        let shift = params.delta[i] / SQRT_2;
        mean[i] = shift;
        mean[n + i] = shift;
    }
    GaussianState::new(covariance, mean)
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn single(omega: f64, omega_final: f64, delta: f64) -> VibronicTransition {
        VibronicTransition::new(
            vec![omega],
            vec![omega_final],
            DMatrix::identity(1, 1),
            DVector::from_element(1, delta),
        )
        .unwrap()
    }

    #[test]
    fn identity_transition_parameters() {
        let p = build_doktorov(&single(1000.0, 1000.0, 0.0)).unwrap();
        assert_abs_diff_eq!(p.j_matrix()[(0, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.alpha()[(0, 0)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.beta()[(0, 0)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn frequency_change_parameters() {
        let p = build_doktorov(&single(1000.0, 4000.0, 0.0)).unwrap();
        assert_abs_diff_eq!(p.j_matrix()[(0, 0)], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.alpha()[(0, 0)], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(p.beta()[(0, 0)], 1.25, epsilon = 1e-15);
    }

    #[test]
    fn formic_acid_final_frequencies_are_accepted() {
        let omega = vec![3629.9, 3064.9, 1566.5, 1399.7, 1215.3, 1190.9, 496.3];
        let t = VibronicTransition::identity(omega).unwrap();
        assert_eq!(t.n_modes(), 7);
        assert!(build_doktorov(&t).is_ok());
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut u = DMatrix::identity(2, 2);
        u[(0, 1)] = 0.1;
        let err = VibronicTransition::new(
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            u,
            DVector::zeros(2),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotOrthogonal { .. }));

        let err = VibronicTransition::new(
            vec![1.0, -1.0],
            vec![1.0, 1.0],
            DMatrix::identity(2, 2),
            DVector::zeros(2),
        )
        .unwrap_err();
        assert_eq!(err, Error::InvalidFrequency { mode: 1, value: -1.0 });

        let err = VibronicTransition::new(
            vec![1.0, f64::NAN],
            vec![1.0, 1.0],
            DMatrix::identity(2, 2),
            DVector::zeros(2),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidFrequency { .. }));
    }

    #[test]
    fn singular_j_is_reported() {
        let j = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let err = DoktorovParameters::from_j(j, DVector::zeros(2)).unwrap_err();
        assert!(matches!(err, Error::SingularJ { .. }));

        let j = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-13]);
        let err = DoktorovParameters::from_j(j, DVector::zeros(2)).unwrap_err();
        assert!(matches!(err, Error::SingularJ { .. }));
    }

    #[test]
    fn vacuum_in_vacuum_out() {
        let p = build_doktorov(&VibronicTransition::identity(vec![1000.0, 800.0]).unwrap()).unwrap();
        let s = evolve_vacuum(&p).unwrap();
        assert_eq!(s, GaussianState::vacuum(2));
    }

    #[test]
    fn pure_displacement_shifts_mean() {
        let d0 = 0.8;
        let s = evolve_vacuum(&build_doktorov(&single(900.0, 900.0, d0)).unwrap()).unwrap();
        assert_abs_diff_eq!(s.mean()[0], d0 / SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mean()[1], d0 / SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(*s.covariance(), DMatrix::identity(2, 2) * 0.5, epsilon = 1e-15);
    }

    #[test]
    fn squeezing_covariance_matches_closed_form() {
        // r = ln(2) for a fourfold frequency increase
        let s = evolve_vacuum(&build_doktorov(&single(1000.0, 4000.0, 0.0)).unwrap()).unwrap();
        let r = 0.5 * 4f64.ln();
        let c = s.covariance();
        assert_abs_diff_eq!(c[(0, 0)], 0.5 * (2.0 * r).cosh(), epsilon = 1e-14);
        assert_abs_diff_eq!(c[(0, 1)], 0.5 * (2.0 * r).sinh(), epsilon = 1e-14);
        assert_eq!(c[(0, 0)], c[(1, 1)]);
    }

    #[test]
    fn reduce_slices_rows_and_columns() {
        let cov = DMatrix::from_fn(6, 6, |r, c| {
            if r == c {
                2.0 + r as f64
            } else {
                0.01 * (r + c) as f64
            }
        });
        let mean = DVector::from_vec(vec![0.1, 0.2, 0.3, 0.1, 0.2, 0.3]);
        let s = GaussianState::new(cov.clone(), mean).unwrap();
        let red = s.reduce(&[0, 1]).unwrap();
        let idx = [0, 1, 3, 4];
        for (r, &ir) in idx.iter().enumerate() {
            for (c, &ic) in idx.iter().enumerate() {
                assert_eq!(red.covariance()[(r, c)], cov[(ir, ic)]);
            }
        }
        assert_eq!(red.mean().as_slice(), &[0.1, 0.2, 0.1, 0.2]);
        assert_eq!(s.reduce(&[0, 1, 2]).unwrap(), s);
        assert!(matches!(s.reduce(&[]), Err(Error::BadModeIndex(_))));
        assert!(matches!(s.reduce(&[3]), Err(Error::BadModeIndex(_))));
        assert!(matches!(s.reduce(&[1, 1]), Err(Error::BadModeIndex(_))));
    }

    #[test]
    fn reduce_vacuum_is_vacuum() {
        let v = GaussianState::vacuum(4);
        assert_eq!(v.reduce(&[3, 1]).unwrap(), GaussianState::vacuum(2));
    }

    #[test]
    fn state_validation() {
        let mut cov = DMatrix::identity(2, 2) * 0.5;
        cov[(0, 1)] = 0.1;
        assert!(matches!(
            GaussianState::new(cov, DVector::zeros(2)),
            Err(Error::NotSymmetric(_))
        ));
        assert!(matches!(
            GaussianState::new(DMatrix::identity(2, 2) * -0.6, DVector::zeros(2)),
            Err(Error::SingularSigmaQ)
        ));
        assert!(matches!(
            GaussianState::new(DMatrix::identity(2, 2) * 0.5, DVector::from_vec(vec![0.1, 0.2])),
            Err(Error::ComplexMean { mode: 0 })
        ));
    }
}
