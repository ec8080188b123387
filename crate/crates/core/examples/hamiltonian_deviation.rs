//! Normalized Hamiltonian deviation of the linear oscillator for Euler and two
//! symplectic schemes, next to the limit values.

use shs_lab::integrators::SchemeMethod;
use shs_lab::montecarlo::{confidence_interval, scaled_hamiltonian_deviation, EnsembleConfig, RunOptions};
use shs_lab::problem::{hamdev_limit_value, LimitMethod, ProblemId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let methods =
        [SchemeMethod::EulerMaruyama, SchemeMethod::SymplTheta { theta: 1.0 }, SchemeMethod::SymplTheta { theta: 0.1 }];
    let times = [1.0, 2.0, 4.0];
    let stats = scaled_hamiltonian_deviation(
        ProblemId::LinOsc,
        &methods,
        50,
        &times,
        &RunOptions::default(),
        &EnsembleConfig::new(20_000, 9),
    )?;
    println!("{:<18} {:>4} {:>10} {:>10} {:>10}", "method", "t", "n E[dH]", "95% ci", "limit");
    for s in &stats {
        let (mean, ci) = confidence_interval(&s.scaled)?;
        let limit = match s.method {
            SchemeMethod::EulerMaruyama => LimitMethod::Euler,
            SchemeMethod::SymplTheta { theta } => LimitMethod::SymplTheta(theta),
        };
        let reference = hamdev_limit_value(ProblemId::LinOsc, limit, s.t)?;
        println!("{:<18} {:>4} {:>10.4} {:>10.4} {:>10.4}", s.method.label(), s.t, mean, ci, reference);
    }
    Ok(())
}
