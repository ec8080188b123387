//! Modified equation of the symplectic Euler scheme: one path in detail, then
//! the mean pathwise gap to the scheme as `n` doubles.

use shs_lab::integrators::{integrate, SchemeConfig, SchemeMethod};
use shs_lab::modified::{integrate_modified_mult, modified_closeness};
use shs_lab::montecarlo::{empirical_order, EnsembleConfig, RunOptions, StreamingMoments};
use shs_lab::noise::BrownianLattice;
use shs_lab::problem::{make_kubo, ProblemId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kubo = make_kubo();
    let (n, m) = (32, 32);
    let lattice = BrownianLattice::sample(n, m, 1, 3, 0)?;
    let modified = integrate_modified_mult(&kubo.system, &kubo.initial, n, &lattice)?;
    let scheme = SchemeConfig::for_noise(SchemeMethod::SymplTheta { theta: 1.0 }, n, kubo.id.noise_kind());
    let traj = integrate(&kubo.system, &kubo.initial, &scheme, &lattice)?;
    for k in [0, 8, 16, 24, 32] {
        let (x, y) = (modified.coarse_state(k), traj.state(k));
        println!(
            "t = {:.2}: modified ({:+.5}, {:+.5}) scheme ({:+.5}, {:+.5})",
            k as f64 / n as f64,
            x.p[0],
            x.q[0],
            y.p[0],
            y.q[0]
        );
    }

    let config = EnsembleConfig::new(300, 1);
    let mut pairs = Vec::new();
    for n in [16, 32, 64] {
        let samples = modified_closeness(ProblemId::Kubo, n, 1, &RunOptions::default(), &config)?;
        let gap = StreamingMoments::from_slice(&samples.iter().map(|s| s.sup_gap).collect::<Vec<_>>());
        println!("n = {n:>3}: E sup |modified - scheme| = {:.3e}", gap.mean());
        pairs.push((n as f64, gap.mean()));
    }
    println!("observed order {:.2}", empirical_order(&pairs)?);
    Ok(())
}
