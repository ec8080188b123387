//! A user-defined system: a pendulum whose angle is kicked by multiplicative
//! noise, `H = p²/2 - cos q` and noise Hamiltonian `H̄ = c (1 - cos q)`.
//! Derivatives come from finite differences and there is no exact solution,
//! so a fine-step midpoint run on the same path serves as reference.

use shs_lab::integrators::{integrate, SchemeConfig, SchemeMethod};
use shs_lab::limit::{check_hamiltonian_structure, LimitRegime, LimitSpec};
use shs_lab::noise::BrownianLattice;
use shs_lab::problem::{FnCoefficients, NoiseKind, StateVector};

const C: f64 = 0.3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pendulum = FnCoefficients::new(
        1,
        NoiseKind::Multiplicative,
        |p, q, f, g| {
            f[0] = -q[0].sin();
            g[0] = p[0];
        },
        |_p, q, a, b| {
            a[0] = -C * q[0].sin();
            b[0] = 0.0;
        },
    );
    let kind = NoiseKind::Multiplicative;
    let x0 = StateVector::new(vec![0.0], vec![1.0]);
    let (n, m, horizon) = (50, 64, 5);
    let lattice = BrownianLattice::sample(n, m, horizon, 11, 0)?;

    let fine = BrownianLattice::from_increments(n * m, 1, horizon, lattice.dw_fine().to_vec(), None)?;
    let reference = integrate(
        &pendulum,
        &x0,
        &SchemeConfig::for_noise(SchemeMethod::SymplTheta { theta: 0.5 }, n * m, kind),
        &fine,
    )?
    .terminal();

    for method in
        [SchemeMethod::EulerMaruyama, SchemeMethod::SymplTheta { theta: 0.5 }, SchemeMethod::SymplTheta { theta: 1.0 }]
    {
        let traj = integrate(&pendulum, &x0, &SchemeConfig::for_noise(method, n, kind), &lattice)?;
        println!("{:<18} |X_T - reference| = {:.3e}", method.label(), traj.terminal().max_abs_diff(&reference));
    }

    let spec = LimitSpec::new(LimitRegime::MultTheta { theta: 1.0 }, &pendulum)?;
    let report = check_hamiltonian_structure(&spec, &[0.4], &[1.2]);
    println!("limit equation structure residual at (0.4, 1.2): {:.2e}", report.residual);
    Ok(())
}
