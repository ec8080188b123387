//! Samples the limit equation of the normalized Kubo error for the symplectic
//! Euler scheme along one exact path and evaluates its Hamiltonians.

use shs_lab::limit::{assemble_h012, simulate_limit, LimitRegime, LimitSpec};
use shs_lab::noise::BrownianLattice;
use shs_lab::problem::{hamdev_limit_value, make_kubo, LimitMethod};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kubo = make_kubo();
    let (n, m, horizon) = (100, 32, 4);
    let lattice = BrownianLattice::sample_with_auxiliary(n, m, horizon, 5, 0)?;
    let exact = kubo.exact.path_on_fine_grid(lattice.dw_fine(), lattice.fine_step());

    let spec = LimitSpec::new(LimitRegime::MultTheta { theta: 1.0 }, &kubo.system)?;
    let path = simulate_limit(&spec, &exact, &lattice)?;
    println!("{:>5} {:>10} {:>10} {:>10} {:>10} {:>10}", "t", "U_P", "U_Q", "H0", "H1", "H2");
    for t in 0..=horizon as usize {
        let j = t * (n * m) as usize;
        let u = path.u_at(j);
        let x = &exact[2 * j..2 * j + 2];
        let h = assemble_h012(&spec, &x[..1], &x[1..], u);
        println!("{t:>5} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}", u[0], u[1], h[0], h[1], h[2]);
    }

    let mut csv = Vec::new();
    path.write_csv(&mut csv, (n * m) as usize, true)?;
    print!("{}", String::from_utf8(csv)?);
    println!(
        "limit of n E[(H(X^n_4) - H(X_4))²]: {:.4}",
        hamdev_limit_value(kubo.id, LimitMethod::SymplTheta(1.0), horizon as f64)?
    );
    Ok(())
}
