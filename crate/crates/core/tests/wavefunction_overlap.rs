//! Franck-Condon factors from direct wavefunction overlaps on a grid, compared
//! with the loop-hafnian probabilities of the evolved Gaussian state.
//!
//! In dimensionless final-state coordinates `x = Ω' q'` the initial vibrational
//! ground state is `exp(-½ (x - δ)ᵀ M (x - δ))` with
//! `M = Ω'^{-1} U diag(ω) Uᵀ Ω'^{-1}`, and the final levels are products of
//! Hermite functions. Nothing here touches covariance matrices.

use fcf_core::{
    build_context, build_doktorov, evolve_vacuum, pattern_probability, PhotonPattern,
    VibronicTransition,
};
use nalgebra::{DMatrix, DVector};

/// ψ_0 ..= ψ_{n_max} at `x`.
fn hermite_functions(x: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp());
    if n_max >= 1 {
        out.push(std::f64::consts::SQRT_2 * x * out[0]);
    }
    for n in 1..n_max {
        let next = (2.0 / (n + 1) as f64).sqrt() * x * out[n]
            - (n as f64 / (n + 1) as f64).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

fn precision_matrix(t: &VibronicTransition) -> DMatrix<f64> {
    let n = t.n_modes();
    let inv_wf = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| 1.0 / t.omega_final()[i].sqrt()));
    let wi = DMatrix::from_diagonal(&DVector::from_vec(t.omega_initial().to_vec()));
    &inv_wf * t.duschinsky() * wi * t.duschinsky().transpose() * &inv_wf
}

fn grid(half_width: f64, points: usize) -> (Vec<f64>, f64) {
    let h = 2.0 * half_width / (points - 1) as f64;
    ((0..points).map(|i| -half_width + i as f64 * h).collect(), h)
}

#[test]
fn single_mode_overlaps() {
    let n_max = 6;
    for &(wi, wf, shift) in &[(1000.0, 1700.0, 0.8), (1500.0, 700.0, -1.1), (900.0, 900.0, 1.3)] {
        let t = VibronicTransition::new(
            vec![wi],
            vec![wf],
            DMatrix::identity(1, 1),
            DVector::from_element(1, shift),
        )
        .unwrap();
        let m = precision_matrix(&t)[(0, 0)];
        let norm = (m / std::f64::consts::PI).powf(0.25);
        let (xs, h) = grid(14.0, 4001);
        let mut amp = vec![0.0; n_max + 1];
        for &x in &xs {
            let ground = norm * (-0.5 * m * (x - shift).powi(2)).exp();
            for (a, psi) in amp.iter_mut().zip(hermite_functions(x, n_max)) {
                *a += psi * ground * h;
            }
        }
        let ctx = build_context(&evolve_vacuum(&build_doktorov(&t).unwrap()).unwrap()).unwrap();
        for (n, a) in amp.iter().enumerate() {
            let p = pattern_probability(&ctx, &PhotonPattern::new(vec![n])).unwrap();
            assert!(
                (p - a * a).abs() < 1e-10,
                "({wi}, {wf}, {shift}) n={n}: hafnian {p} vs overlap {}",
                a * a
            );
        }
    }
}

#[test]
fn two_mode_rotated_overlaps() {
    let theta: f64 = 0.5;
    let (c, s) = (theta.cos(), theta.sin());
    let t = VibronicTransition::new(
        vec![1000.0, 1400.0],
        vec![1600.0, 900.0],
        DMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
        DVector::from_vec(vec![0.6, -0.9]),
    )
    .unwrap();
    let m = precision_matrix(&t);
    let delta = t.displacement().clone();
    let norm = (m.determinant() / std::f64::consts::PI.powi(2)).powf(0.25);
    let n_max = 3;

    let (xs, h) = grid(11.0, 601);
    let psi: Vec<Vec<f64>> = xs.iter().map(|&x| hermite_functions(x, n_max)).collect();
    let mut amp = vec![vec![0.0; n_max + 1]; n_max + 1];
    for (i, &x1) in xs.iter().enumerate() {
        for (j, &x2) in xs.iter().enumerate() {
            let d = DVector::from_vec(vec![x1 - delta[0], x2 - delta[1]]);
            let ground = norm * (-0.5 * d.dot(&(&m * &d))).exp();
            if ground < 1e-30 {
                continue;
            }
            for a in 0..=n_max {
                for b in 0..=n_max {
                    amp[a][b] += psi[i][a] * psi[j][b] * ground * h * h;
                }
            }
        }
    }

    let ctx = build_context(&evolve_vacuum(&build_doktorov(&t).unwrap()).unwrap()).unwrap();
    for a in 0..=n_max {
        for b in 0..=n_max {
            let p = pattern_probability(&ctx, &PhotonPattern::new(vec![a, b])).unwrap();
            let q = amp[a][b] * amp[a][b];
            assert!((p - q).abs() < 1e-9, "({a},{b}): hafnian {p} vs overlap {q}");
        }
    }
}
