//! Samples a Brownian lattice, inspects its coarse and fine views, truncates
//! the coarse increments and round-trips the binary dump.

use shs_lab::noise::{
    omega_complement_frequency, truncate, two_sided_tail, BrownianLattice, OmegaProbe, TruncationPolicy,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, m, horizon, seed) = (64, 8, 2, 2024);
    let lat = BrownianLattice::sample_with_auxiliary(n, m, horizon, seed, 0)?;
    println!("coarse step {} with {} fine cells each", lat.coarse_step(), lat.m());

    let w = lat.w_path();
    let coarse = lat.coarse_increments();
    println!("W_T = {:.6}, sum of coarse increments = {:.6}", w[w.len() - 1], coarse.iter().sum::<f64>());
    println!("B_T = {:.6}", lat.b_path().unwrap().last().unwrap());

    let policy = TruncationPolicy::default();
    let (hat, clamped) = truncate(&coarse, &policy, n)?;
    let level = policy.clamp_level(n);
    let gap: f64 = coarse.iter().zip(&hat).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!(
        "clamp level A_n = {level:.4}, clamped {clamped} of {} (expected rate {:.2e}), max gap {gap:.2e}",
        hat.len(),
        two_sided_tail(level)
    );

    let lattices: Vec<_> = (0..200).map(|id| BrownianLattice::sample(n, m, 1, seed, id)).collect::<Result<_, _>>()?;
    let probe = OmegaProbe::default();
    println!(
        "cells oscillating above n^-(1/2-eps) = {:.4}: frequency {:.3}",
        probe.threshold(n),
        omega_complement_frequency(&lattices, &probe)?
    );

    let mut buf = Vec::new();
    lat.write_to(&mut buf)?;
    let back = BrownianLattice::read_from(&buf[..])?;
    println!("dump is {} bytes, round trip equal: {}", buf.len(), back == lat);
    Ok(())
}
