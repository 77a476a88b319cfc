//! Module examples checked against reference values computed here.

mod common;

use num_complex::Complex64;

use common::{phi, sawtooth_alpha, simpson, simpson_pieces, unit_step_alpha};
use dither_field::analysis::{basis_deployment_integral, mse_upper_bound, ExtendedReal};
use dither_field::estimator::{estimate_coefficients, EstimatorConfig, Schedule};
use dither_field::field_model::{
    m_term_approximation, m_term_error, make_sobolev_field, true_coefficients, Basis, BvShape, FieldSpec,
};
use dither_field::rng::TrialSeed;
use dither_field::sensing::{quantize_one, simulate_batch, DeploymentDensity, NoiseModel};

fn sawtooth() -> FieldSpec {
    FieldSpec::bounded_variation(BvShape::Sawtooth, 0.5).unwrap()
}

#[test]
fn sawtooth_alpha2_against_simpson() {
    let re = simpson(|x| ((x - 0.5) * phi(2, x).conj()).re, 0.0, 1.0, 200_000);
    let im = simpson(|x| ((x - 0.5) * phi(2, x).conj()).im, 0.0, 1.0, 200_000);
    let lib = true_coefficients(&sawtooth(), Basis::Fourier, 3).unwrap().values[2];
    assert!((lib - Complex64::new(re, im)).norm() < 1e-12);
    assert!((lib - sawtooth_alpha(2)).norm() < 1e-15);
}

#[test]
fn closed_forms_for_step_and_sawtooth() {
    let step = FieldSpec::bounded_variation(BvShape::UnitStep, 1.0).unwrap();
    let lib = true_coefficients(&step, Basis::Fourier, 33).unwrap();
    for (j, v) in lib.values.iter().enumerate() {
        assert!((v - unit_step_alpha(j)).norm() < 1e-14, "j={j}");
    }
    let lib = true_coefficients(&sawtooth(), Basis::Fourier, 33).unwrap();
    for (j, v) in lib.values.iter().enumerate() {
        assert!((v - sawtooth_alpha(j)).norm() < 1e-14, "j={j}");
    }
}

#[test]
fn partial_sums_improve_off_the_jump() {
    let f = sawtooth();
    let c = true_coefficients(&f, Basis::Fourier, 64).unwrap();
    let x = 0.25;
    let e2 = (m_term_approximation(&c, 2, x).re - f.eval(x)).abs();
    let e64 = (m_term_approximation(&c, 64, x).re - f.eval(x)).abs();
    assert!(e64 < e2);
}

#[test]
fn finite_dim_partial_sum_is_exact() {
    let a1 = Complex64::new(0.2, -0.15);
    let coeffs = vec![Complex64::new(0.1, 0.0), a1, a1.conj()];
    let f = FieldSpec::finite_dim(Basis::Fourier, coeffs.clone(), 1.0).unwrap();
    let c = true_coefficients(&f, Basis::Fourier, 3).unwrap();
    for i in 0..=50 {
        let x = i as f64 / 50.0;
        let direct: f64 = coeffs.iter().enumerate().map(|(j, a)| (a * phi(j, x)).re).sum();
        assert!((m_term_approximation(&c, 3, x).re - direct).abs() < 1e-10);
    }
    assert!(m_term_error(&c, &f, 3).abs() < 1e-15);
}

#[test]
fn sawtooth_tail_decays_like_inverse_m() {
    let f = sawtooth();
    let c = true_coefficients(&f, Basis::Fourier, 257).unwrap();
    let mut prev = f64::INFINITY;
    let mut sigma: f64 = 0.0;
    for p in 0..=8 {
        let m = 1usize << p;
        let eps = m_term_error(&c, &f, m);
        assert!(eps <= prev + 1e-15);
        prev = eps;
        // ε = Σ_{k > ⌊m/2⌋} 1/(2π²k²) for the two-sided tail
        let first_pair = m / 2 + 1;
        let direct: f64 = (first_pair..200_000).map(|k| 1.0 / (2.0 * std::f64::consts::PI.powi(2) * (k * k) as f64)).sum();
        let direct = direct + if m.is_multiple_of(2) { sawtooth_alpha(m).norm_sqr() } else { 0.0 };
        assert!((eps - direct).abs() < 1e-5, "m={m}: {eps} vs {direct}");
        sigma = sigma.max(eps * m as f64);
    }
    // fitted σ = max m·ε; m·ε tends to 1/π²
    let limit = 1.0 / std::f64::consts::PI.powi(2);
    assert!(sigma < 0.12, "σ = {sigma}");
    assert!((prev * 256.0 - limit).abs() < 0.01 * limit);
}

#[test]
fn sobolev_tail_scaled_by_m_squared_is_bounded() {
    let f = make_sobolev_field(1.0, 1, 1.0).unwrap();
    let (_, coeffs) = f.series().unwrap();
    let c = true_coefficients(&f, Basis::Fourier, 257).unwrap();
    let mut scaled = Vec::new();
    for p in 2..=8 {
        let m = 1usize << p;
        let direct: f64 = coeffs[m..].iter().map(|v| v.norm_sqr()).sum();
        let eps = m_term_error(&c, &f, m);
        assert!((eps - direct).abs() < 1e-12);
        scaled.push(eps * (m * m) as f64);
    }
    let max = scaled.iter().cloned().fold(0.0, f64::max);
    let min = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max / min < 5.0, "{scaled:?}");
}

#[test]
fn sobolev_norm_matches_quadrature() {
    let f = make_sobolev_field(1.0, 3, 1.0).unwrap();
    let direct = simpson(|x| f.eval(x).powi(2), 0.0, 1.0, 40_000);
    assert!((direct - f.norm_sq()).abs() < 1e-8 * f.norm_sq());
}

#[test]
fn dither_ties_and_conditional_mean() {
    assert_eq!(quantize_one(0.5, 0.5), -1);
    let f = FieldSpec::zero(1.0).unwrap();
    let batch = simulate_batch(&f, &DeploymentDensity::Uniform, NoiseModel::Zero, 1_000_000, TrialSeed::new(1, 0));
    let mean = batch.b.iter().map(|&b| f64::from(b)).sum::<f64>() / 1e6;
    assert!(mean.abs() <= 0.004);
    // E[B | y] = y / c with c = 1; thresholds uniform on [−1, 1]
    let t = &batch.t;
    let mean: f64 = t.iter().map(|&t| f64::from(quantize_one(0.3, t))).sum::<f64>() / 1e6;
    assert!((mean - 0.3).abs() <= 4.0 * (1.0f64 - 0.09).sqrt() / 1e3);
}

#[test]
fn zero_field_coefficient_mean() {
    let f = FieldSpec::zero(1.0).unwrap();
    let cfg = EstimatorConfig {
        basis: Basis::Fourier,
        deploy: DeploymentDensity::Uniform,
        c: 1.0,
        schedule: Schedule::Fixed { m: 1 },
    };
    let trials = 10_000;
    let n = 100;
    let sum: f64 = (0..trials)
        .map(|t| {
            let b = simulate_batch(&f, &cfg.deploy, NoiseModel::Zero, n, TrialSeed::for_grid(3, 0, t));
            estimate_coefficients(&b, &cfg, 1).unwrap().values[0].re
        })
        .sum();
    let mean = sum / trials as f64;
    assert!(mean.abs() <= 4.0 * 1.0 / ((n * trials) as f64).sqrt());
}

#[test]
fn sawtooth_first_coefficient_unbiased() {
    let f = sawtooth();
    let noise = NoiseModel::UniformSym { b: 0.5 };
    let cfg = EstimatorConfig {
        basis: Basis::Fourier,
        deploy: DeploymentDensity::Uniform,
        c: 1.0,
        schedule: Schedule::Fixed { m: 2 },
    };
    let trials = 200;
    let vals: Vec<Complex64> = (0..trials)
        .map(|t| {
            let b = simulate_batch(&f, &cfg.deploy, noise, 100_000, TrialSeed::for_grid(4, 0, t));
            estimate_coefficients(&b, &cfg, 2).unwrap().values[1]
        })
        .collect();
    let mean: Complex64 = vals.iter().sum::<Complex64>() / trials as f64;
    let var_im = vals.iter().map(|v| (v.im - mean.im).powi(2)).sum::<f64>() / (trials - 1) as f64;
    let var_re = vals.iter().map(|v| (v.re - mean.re).powi(2)).sum::<f64>() / (trials - 1) as f64;
    let alpha = sawtooth_alpha(1);
    assert!((mean.im - alpha.im).abs() <= 4.0 * (var_im / trials as f64).sqrt());
    assert!((mean.re - alpha.re).abs() <= 4.0 * (var_re / trials as f64).sqrt());
}

#[test]
fn schedule_examples() {
    assert_eq!(Schedule::Bv.resolve(10_000), 100);
    assert_eq!(Schedule::Sobolev { s: 1.0 }.resolve(1000), 10);
    for n in [1, 17, 1000, 1 << 20] {
        assert_eq!(Schedule::FiniteDim { k: 5 }.resolve(n), 5);
        assert_eq!(Schedule::Bv.resolve(n) as u64, common::int_root_ceil(n as u64, 2));
        assert_eq!(Schedule::Sobolev { s: 1.0 }.resolve(n) as u64, common::int_root_ceil(n as u64, 3));
    }
}

#[test]
fn affine_floor_integral_against_simpson() {
    for j in [0usize, 3, 10] {
        let direct = simpson(|x| phi(j, x).norm_sqr() / (0.5 + x), 0.0, 1.0, 20_000);
        let lib = basis_deployment_integral(Basis::Fourier, &DeploymentDensity::AffineFloor { nu: 0.5 }, j);
        assert!((lib.as_f64() - direct).abs() < 1e-10);
        assert!((direct - 3f64.ln()).abs() < 1e-10);
    }
    assert_eq!(
        basis_deployment_integral(Basis::Fourier, &DeploymentDensity::Linear2x, 0),
        ExtendedReal::Infinite
    );
}

#[test]
fn finite_dim_reduced_bound() {
    let f = FieldSpec::finite_dim(Basis::Fourier, common::k5_alpha(), 1.0).unwrap();
    let b = mse_upper_bound(&f, Basis::Fourier, &DeploymentDensity::Uniform, 1000, 5, 2.0).unwrap();
    assert!((b.reduced_total - 4.0 * 5.0 / 1000.0).abs() < 1e-15);
    assert!(b.bias_term.abs() < 1e-15);
    assert_eq!(b.total, b.variance_term + b.bias_term);
}

#[test]
fn bias_term_matches_direct_tail_quadrature() {
    // ε[f, m] = ‖f − f_m‖² by direct quadrature
    let f = FieldSpec::bounded_variation(BvShape::Staircase, 0.75).unwrap();
    let c = true_coefficients(&f, Basis::Fourier, 9).unwrap();
    let direct = simpson_pieces(
        |x| (m_term_approximation(&c, 9, x).re - f.eval(x)).powi(2),
        &[0.0, 0.25, 0.5, 0.75, 1.0],
        20_000,
    );
    assert!((m_term_error(&c, &f, 9) - direct).abs() < 1e-9);
}
