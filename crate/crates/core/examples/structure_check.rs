//! Checks that the limit equations are stochastic Hamiltonian systems for
//! every θ on the built-in problems, and that a corrupted coefficient set is
//! caught.

use shs_lab::limit::{check_hamiltonian_structure, LimitRegime, LimitSpec};
use shs_lab::problem::{Kubo, LinearOscillator, ScaledDriftJacobian};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let states = [(0.0, 1.0), (0.7, -0.4), (-1.3, 0.2)];
    for theta in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let mult = LimitSpec::new(LimitRegime::MultTheta { theta }, &Kubo)?;
        let add = LimitSpec::new(LimitRegime::AddTheta { theta }, &LinearOscillator)?;
        let worst = states.iter().fold(0.0f64, |acc, &(p, q)| {
            let a = check_hamiltonian_structure(&mult, &[p], &[q]).residual;
            let b = check_hamiltonian_structure(&add, &[p], &[q]).residual;
            acc.max(a).max(b)
        });
        println!("theta {theta:<5} max residual {worst:.2e}");
    }
    let spec = LimitSpec::new(LimitRegime::MultEuler, &Kubo)?;
    println!("mult euler  residual {:.2e}", check_hamiltonian_structure(&spec, &[0.3], &[0.9]).residual);
    let spec = LimitSpec::new(LimitRegime::AddEuler, &LinearOscillator)?;
    println!("add euler   residual {:.2e}", check_hamiltonian_structure(&spec, &[0.3], &[0.9]).residual);

    let corrupted = ScaledDriftJacobian { inner: Kubo, factor: 1.5 };
    let spec = LimitSpec::new(LimitRegime::MultTheta { theta: 1.0 }, &corrupted)?;
    println!("corrupted   residual {:.2e}", check_hamiltonian_structure(&spec, &[0.3], &[0.9]).residual);
    Ok(())
}
