//! Strong convergence ladders on shared Brownian paths and fitted orders.

use shs_lab::integrators::SchemeMethod;
use shs_lab::montecarlo::{empirical_order, strong_error_ladder, EnsembleConfig, RunOptions};
use shs_lab::problem::ProblemId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ladder = [16, 32, 64, 128];
    let config = EnsembleConfig::new(500, 4);
    let cases = [
        (ProblemId::Kubo, SchemeMethod::SymplTheta { theta: 0.5 }),
        (ProblemId::LinOsc, SchemeMethod::SymplTheta { theta: 1.0 }),
        (ProblemId::LinOsc, SchemeMethod::EulerMaruyama),
    ];
    for (problem, method) in cases {
        let points = strong_error_ladder(problem, method, &ladder, 1, &RunOptions::default(), &config)?;
        let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.rms_terminal)).collect();
        let errs: Vec<String> = points.iter().map(|p| format!("{:.2e}", p.rms_terminal)).collect();
        println!("{problem} {:<18} errors [{}] order {:.2}", method.label(), errs.join(", "), empirical_order(&pairs)?);
    }
    Ok(())
}
