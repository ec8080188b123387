//! Simulation lab for stochastic Hamiltonian systems.
//!
//! The crate integrates `dX = F(X) dt + σ(X) o dW` with `X = (P, Q)` by the
//! stochastic symplectic θ-family and by Euler–Maruyama. It samples the
//! limit equations of the normalized errors, checks that those are Hamiltonian,
//! integrates the modified equations of the symplectic Euler method and
//! estimates Hamiltonian-deviation statistics by Monte Carlo.
//!
//! ```
//! use shs_lab::integrators::{integrate, SchemeConfig, SchemeMethod};
//! use shs_lab::noise::BrownianLattice;
//! use shs_lab::problem::make_kubo;
//!
//! let kubo = make_kubo();
//! let lattice = BrownianLattice::sample(100, 1, 1, 42, 0).unwrap();
//! let scheme = SchemeConfig::new(SchemeMethod::SymplTheta { theta: 1.0 }, 100);
//! let traj = integrate(&kubo.system, &kubo.initial, &scheme, &lattice).unwrap();
//! assert_eq!(traj.len(), 101);
//! ```

pub mod experiments;
pub mod integrators;
pub mod limit;
pub mod modified;
pub mod montecarlo;
pub mod noise;
pub mod problem;

pub use integrators::{integrate, SchemeConfig, SchemeMethod, Trajectory};
pub use noise::BrownianLattice;
pub use problem::{CoefficientSet, HamiltonianPair, NoiseKind, ProblemId, StateVector};
