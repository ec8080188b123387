//! Ensemble statistics against closed forms that are computed here, not by the
//! library.

use shs_lab::integrators::SchemeMethod;
use shs_lab::montecarlo::{confidence_interval, scaled_hamiltonian_deviation, EnsembleConfig, RunOptions};
use shs_lab::problem::{hamdev_limit_value, LimitMethod, ProblemId};

/// Euler on Kubo multiplies `|X|²` by `r = (1 - h/2)² + (h + ΔW)²` each step.
/// Returns `(E r, E r²)`.
fn kubo_euler_ratio_moments(h: f64) -> (f64, f64) {
    let c = 1.0 - h / 2.0;
    let er = c * c + h * h + h;
    // E (h + ΔW)^4 with ΔW ~ N(0, h)
    let m4 = h.powi(4) + 6.0 * h.powi(3) + 3.0 * h * h;
    let er2 = c.powi(4) + 2.0 * c * c * (h * h + h) + m4;
    (er, er2)
}

#[test]
fn kubo_euler_deviation_matches_finite_n_closed_form() {
    let (n, t) = (100u64, 2.0);
    let h = 1.0 / n as f64;
    let steps = (t * n as f64) as i32;
    let (er, er2) = kubo_euler_ratio_moments(h);
    // H = ½|X|² and the exact H stays ½.
    let mean = (n as f64).sqrt() * 0.5 * (er.powi(steps) - 1.0);
    let second = n as f64 * 0.25 * (er2.powi(steps) - 2.0 * er.powi(steps) + 1.0);

    let stats = scaled_hamiltonian_deviation(
        ProblemId::Kubo,
        &[SchemeMethod::EulerMaruyama],
        n,
        &[t],
        &RunOptions::default(),
        &EnsembleConfig::new(40_000, 11),
    )
    .unwrap();
    let (m, ci) = confidence_interval(&stats[0].scaled).unwrap();
    let (s, ci2) = confidence_interval(&stats[0].scaled_sq).unwrap();
    assert!((m - mean).abs() < 4.0 * ci, "mean {m} vs {mean} ± {ci}");
    assert!((s - second).abs() < 4.0 * ci2, "second moment {s} vs {second} ± {ci2}");
    // The finite-n value sits well above the limit t/2 already at t = 2.
    assert!(second > 1.05 * hamdev_limit_value(ProblemId::Kubo, LimitMethod::Euler, t).unwrap());
}

#[test]
fn linosc_euler_mean_matches_variance_recursion() {
    // E|X_{k+1}|² = (1 + h²) E|X_k|² + h from X_0 = 0, against E|X_t|² = t.
    let (n, t) = (50u64, 3.0);
    let h = 1.0 / n as f64;
    let steps = (t * n as f64) as i32;
    let en = ((1.0 + h * h).powi(steps) - 1.0) / h;
    let expected = n as f64 * 0.5 * (en - t);

    let stats = scaled_hamiltonian_deviation(
        ProblemId::LinOsc,
        &[SchemeMethod::EulerMaruyama],
        n,
        &[t],
        &RunOptions::default(),
        &EnsembleConfig::new(40_000, 5),
    )
    .unwrap();
    let (m, ci) = confidence_interval(&stats[0].scaled).unwrap();
    assert!((m - expected).abs() < 4.0 * ci, "{m} vs {expected} ± {ci}");
    let limit = hamdev_limit_value(ProblemId::LinOsc, LimitMethod::Euler, t).unwrap();
    assert!((expected - limit).abs() < 0.05 * limit);
}

#[test]
fn kubo_theta_limit_constant_at_four() {
    // (2θ-1)²/2 · ∫₀⁴ ½(1 + e^{-8s} cos 4s) ds by composite Simpson.
    let k = 4000;
    let dx = 4.0 / k as f64;
    let f = |s: f64| 0.5 * (1.0 + (-8.0 * s).exp() * (4.0 * s).cos());
    let mut integral = f(0.0) + f(4.0);
    for i in 1..k {
        integral += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * dx);
    }
    integral *= dx / 3.0;
    for theta in [1.0, 0.75, 0.0] {
        let expected = (2.0 * theta - 1.0f64).powi(2) / 2.0 * integral;
        let got = hamdev_limit_value(ProblemId::Kubo, LimitMethod::SymplTheta(theta), 4.0).unwrap();
        assert!((got - expected).abs() < 1e-10, "theta {theta}: {got} vs {expected}");
    }
    assert!((hamdev_limit_value(ProblemId::Kubo, LimitMethod::SymplTheta(1.0), 4.0).unwrap() - 1.025).abs() < 1e-3);
}

#[test]
fn linosc_limit_values() {
    let t = 4.0f64;
    let v = hamdev_limit_value(ProblemId::LinOsc, LimitMethod::SymplTheta(1.0), t).unwrap();
    assert!((v - 0.5 * (1.0 - 8.0f64.cos()) / 4.0).abs() < 1e-15);
    assert!((v - 0.1432).abs() < 1e-4);
    assert_eq!(hamdev_limit_value(ProblemId::LinOsc, LimitMethod::Euler, t).unwrap(), 4.0);
}
