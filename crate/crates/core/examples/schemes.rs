//! Integrates the Kubo oscillator with the θ-family and Euler–Maruyama on one
//! shared Brownian path and compares against the exact random rotation.

use shs_lab::integrators::{integrate, SchemeConfig, SchemeMethod};
use shs_lab::noise::BrownianLattice;
use shs_lab::problem::{make_kubo, HamiltonianPair};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kubo = make_kubo();
    let (n, horizon) = (200, 4);
    let lattice = BrownianLattice::sample(n, 1, horizon, 7, 0)?;
    let w_t = lattice.w_path().last().copied().unwrap();
    let exact = kubo.exact.at(horizon as f64, w_t).unwrap();

    let methods = [
        SchemeMethod::EulerMaruyama,
        SchemeMethod::SymplTheta { theta: 0.0 },
        SchemeMethod::SymplTheta { theta: 0.5 },
        SchemeMethod::SymplTheta { theta: 1.0 },
    ];
    println!("{:<18} {:>12} {:>12} {:>10}", "method", "|X_T - exact|", "H(X_T) - 1/2", "solver its");
    for method in methods {
        let scheme = SchemeConfig::for_noise(method, n, kubo.id.noise_kind());
        let traj = integrate(&kubo.system, &kubo.initial, &scheme, &lattice)?;
        let x = traj.terminal();
        let dh = kubo.system.hamiltonian(&x.p, &x.q) - 0.5;
        println!("{:<18} {:>12.3e} {:>12.3e} {:>10}", method.label(), x.max_abs_diff(&exact), dh, traj.iterations);
    }
    Ok(())
}
