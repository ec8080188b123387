//! Compares the normalized Euler error on the Kubo oscillator with samples of
//! its limit law by a two-sample Kolmogorov–Smirnov test.

use shs_lab::integrators::SchemeMethod;
use shs_lab::limit::kubo_euler_limit_draws;
use shs_lab::montecarlo::{scaled_error_samples, two_sample_ks, EnsembleConfig, RunOptions};
use shs_lab::problem::ProblemId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, t, paths) = (200, 1.0, 4000);
    let errors = scaled_error_samples(
        ProblemId::Kubo,
        SchemeMethod::EulerMaruyama,
        n,
        t,
        &RunOptions::default(),
        &EnsembleConfig::new(paths, 21),
    )?;
    let limit = kubo_euler_limit_draws(t, paths, 22);
    for (i, name) in ["P", "Q"].iter().enumerate() {
        let xs: Vec<f64> = errors.iter().map(|e| e.scaled[i]).collect();
        let ys: Vec<f64> = limit.iter().map(|s| s.u[i]).collect();
        let ks = two_sample_ks(&xs, &ys)?;
        println!("component {name}: D = {:.4}, 1% critical value {:.4}", ks.statistic, ks.critical_value(1.63));
    }
    Ok(())
}
