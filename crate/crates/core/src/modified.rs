//! Modified equations of the symplectic Euler scheme (θ = 1, `d = 1`)
//!
//! Both equations restart a bridge-like correction at every coarse node `η(s)`.
//! Multiplicative noise:
//!
//! ```text
//! dX̃ = μ(X̃) ds + σ(X̃) dW + c(X̃) (W_s - W_η) dW,
//! c = (a_P a - a_Q b, b_P a - b_Q b),
//! ```
//!
//! with `μ` the Itô drift. Additive noise:
//!
//! ```text
//! dP̃ = [f + (f_P f - f_Q g + ½a² f_PP + ½b² f_QQ)(s - η) - b f_Q (W_s - W_η)] ds
//!      + [a + a f_P (s - η)] dW
//! ```
//!
//! and the same with `g` in place of `f` and `b` in place of `a` for `Q̃`.
//! Both are discretized by Euler–Maruyama on the fine grid of the lattice.

use std::io::{self, Write};

use thiserror::Error;

use crate::integrators::{fmt_f64, integrate, state_header, IntegrateError, SchemeConfig, SchemeMethod};
use crate::montecarlo::{map_batches, normalization_exponent, EnsembleConfig, MonteCarloError, RunOptions};
use crate::noise::{BrownianLattice, NoiseError};
use crate::problem::{
    ito_drift_into, BlockJacobian, CoefficientSet, Kubo, LinearOscillator, NoiseKind, ProblemId, StateVector,
};

#[derive(Debug, Error)]
pub enum ModifiedError {
    #[error("modified equations are implemented for d = 1 only (got d = {0})")]
    Dimension(usize),
    #[error("expected {expected:?} noise")]
    NoiseKind { expected: NoiseKind },
    #[error("lattice has n = {lattice}, expected n = {expected}")]
    LatticeMismatch { lattice: u64, expected: u64 },
    #[error("non-finite state at fine step {0}")]
    NonFinite(usize),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    MonteCarlo(#[from] MonteCarloError),
}

/// Fine-grid path of a modified equation.
#[derive(Clone, Debug, PartialEq)]
pub struct ModifiedPath {
    pub n: u64,
    pub m: u64,
    pub h_fine: f64,
    /// Flat `[P, Q]` per fine node.
    pub states: Vec<f64>,
}

impl ModifiedPath {
    pub fn len(&self) -> usize {
        self.states.len() / 2
    }
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
    pub fn state(&self, k: usize) -> StateVector {
        StateVector::new(vec![self.states[2 * k]], vec![self.states[2 * k + 1]])
    }
    /// State at coarse node `k`.
    pub fn coarse_state(&self, k: usize) -> StateVector {
        self.state(k * self.m as usize)
    }
    /// Index of the coarse cell containing fine node `k` (the last node
    /// belongs to the last cell).
    pub fn cell_index(&self, k: usize) -> usize {
        let cells = (self.len() - 1) / self.m as usize;
        (k / self.m as usize).min(cells.saturating_sub(1))
    }

    /// CSV with columns `t, P_1, Q_1, cell_index`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{},cell_index", state_header(1))?;
        for k in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_f64(k as f64 * self.h_fine),
                fmt_f64(self.states[2 * k]),
                fmt_f64(self.states[2 * k + 1]),
                self.cell_index(k)
            )?;
        }
        Ok(())
    }
}

fn check<C: CoefficientSet + ?Sized>(
    coeffs: &C,
    kind: NoiseKind,
    n: u64,
    lattice: &BrownianLattice,
) -> Result<(), ModifiedError> {
    if coeffs.dim() != 1 {
        return Err(ModifiedError::Dimension(coeffs.dim()));
    }
    if coeffs.noise_kind() != kind {
        return Err(ModifiedError::NoiseKind { expected: kind });
    }
    if lattice.n() != n {
        return Err(ModifiedError::LatticeMismatch { lattice: lattice.n(), expected: n });
    }
    Ok(())
}

pub fn integrate_modified_mult<C: CoefficientSet + ?Sized>(
    coeffs: &C,
    initial: &StateVector,
    n: u64,
    lattice: &BrownianLattice,
) -> Result<ModifiedPath, ModifiedError> {
    check(coeffs, NoiseKind::Multiplicative, n, lattice)?;
    let m = lattice.m() as usize;
    let h = lattice.fine_step();
    let dw = lattice.dw_fine();
    let mut states = Vec::with_capacity(2 * (dw.len() + 1));
    let (mut p, mut q) = (initial.p[0], initial.q[0]);
    states.extend_from_slice(&[p, q]);
    let (mut mu_p, mut mu_q, mut a, mut b) = ([0.0], [0.0], [0.0], [0.0]);
    let mut jac = BlockJacobian::zeros(1);
    let mut bridge = 0.0;
    for (j, &dwj) in dw.iter().enumerate() {
        if j % m == 0 {
            bridge = 0.0;
        }
        ito_drift_into(coeffs, &[p], &[q], &mut a, &mut b, &mut jac, &mut mu_p, &mut mu_q);
        coeffs.diffusion(&[p], &[q], &mut a, &mut b);
        coeffs.diffusion_jacobian(&[p], &[q], &mut jac);
        let cp = jac.x_p[0] * a[0] - jac.x_q[0] * b[0];
        let cq = jac.y_p[0] * a[0] - jac.y_q[0] * b[0];
        p += mu_p[0] * h + (a[0] + cp * bridge) * dwj;
        q += mu_q[0] * h + (b[0] + cq * bridge) * dwj;
        bridge += dwj;
        if !(p.is_finite() && q.is_finite()) {
            return Err(ModifiedError::NonFinite(j));
        }
        states.extend_from_slice(&[p, q]);
    }
    Ok(ModifiedPath { n, m: m as u64, h_fine: h, states })
}

pub fn integrate_modified_add<C: CoefficientSet + ?Sized>(
    coeffs: &C,
    initial: &StateVector,
    n: u64,
    lattice: &BrownianLattice,
) -> Result<ModifiedPath, ModifiedError> {
    check(coeffs, NoiseKind::Additive, n, lattice)?;
    let m = lattice.m() as usize;
    let h = lattice.fine_step();
    let dw = lattice.dw_fine();
    let mut states = Vec::with_capacity(2 * (dw.len() + 1));
    let (mut p, mut q) = (initial.p[0], initial.q[0]);
    states.extend_from_slice(&[p, q]);
    let (mut f, mut g, mut a, mut b) = ([0.0], [0.0], [0.0], [0.0]);
    let mut jf = BlockJacobian::zeros(1);
    let (mut hf, mut hg) = ([0.0; 4], [0.0; 4]);
    let mut bridge = 0.0;
    for (j, &dwj) in dw.iter().enumerate() {
        if j % m == 0 {
            bridge = 0.0;
        }
        let lag = (j % m) as f64 * h;
        coeffs.drift(&[p], &[q], &mut f, &mut g);
        coeffs.diffusion(&[p], &[q], &mut a, &mut b);
        coeffs.drift_jacobian(&[p], &[q], &mut jf);
        coeffs.drift_hessian(&[p], &[q], 0, &mut hf, &mut hg);
        let (f, g, a, b) = (f[0], g[0], a[0], b[0]);
        let (f1, f2, g1, g2) = (jf.x_p[0], jf.x_q[0], jf.y_p[0], jf.y_q[0]);
        let cp = f1 * f - f2 * g + 0.5 * a * a * hf[0] + 0.5 * b * b * hf[3];
        let cq = g1 * f - g2 * g + 0.5 * a * a * hg[0] + 0.5 * b * b * hg[3];
        p += (f + cp * lag - b * f2 * bridge) * h + (a + a * f1 * lag) * dwj;
        q += (g + cq * lag - b * g2 * bridge) * h + (b + a * g1 * lag) * dwj;
        bridge += dwj;
        if !(p.is_finite() && q.is_finite()) {
            return Err(ModifiedError::NonFinite(j));
        }
        states.extend_from_slice(&[p, q]);
    }
    Ok(ModifiedPath { n, m: m as u64, h_fine: h, states })
}

/// Substeps per coarse cell for [`modified_closeness`]. The fine
/// Euler–Maruyama error decays like `(n m)^{-1/2}`, so `m ≥ n` keeps it below
/// the `O(1/n)` gap between the modified equation and the scheme.
pub fn closeness_refinement(n: u64, requested: u64) -> u64 {
    requested.max(n)
}

/// Modified equation against the symplectic Euler scheme on one path.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosenessSample {
    pub path_id: u64,
    /// Largest max-norm gap between modified path and scheme over coarse nodes.
    pub sup_gap: f64,
    /// `n^p (X̃_T - X_T)` as `[P, Q]`.
    pub modified_error: [f64; 2],
    /// `n^p (X^n_T - X_T)` as `[P, Q]`.
    pub scheme_error: [f64; 2],
}

/// Runs the modified equation and the symplectic Euler scheme on shared paths.
pub fn modified_closeness(
    problem: ProblemId,
    n: u64,
    horizon: u64,
    opts: &RunOptions,
    config: &EnsembleConfig,
) -> Result<Vec<ClosenessSample>, ModifiedError> {
    let m = closeness_refinement(n, opts.refine);
    let kind = problem.noise_kind();
    let scheme = SchemeConfig::for_noise(SchemeMethod::SymplTheta { theta: 1.0 }, n, kind).with_rho(opts.rho);
    let scale = (n as f64).powf(normalization_exponent(kind));
    let exact = problem.exact();
    let x0 = problem.initial();
    let batches = map_batches(config, |range| -> Result<Vec<ClosenessSample>, ModifiedError> {
        let mut lattice = BrownianLattice::sample(n, m, horizon, config.seed, range.start)?;
        let mut out = Vec::with_capacity((range.end - range.start) as usize);
        for path_id in range {
            lattice.resample(path_id);
            let (modified, traj) = match problem {
                ProblemId::Kubo => {
                    (integrate_modified_mult(&Kubo, &x0, n, &lattice)?, integrate(&Kubo, &x0, &scheme, &lattice)?)
                }
                ProblemId::LinOsc => (
                    integrate_modified_add(&LinearOscillator, &x0, n, &lattice)?,
                    integrate(&LinearOscillator, &x0, &scheme, &lattice)?,
                ),
            };
            let mut sup_gap: f64 = 0.0;
            for k in 0..traj.len() {
                let j = 2 * k * m as usize;
                let y = traj.flat(k);
                sup_gap = sup_gap.max((modified.states[j] - y[0]).abs()).max((modified.states[j + 1] - y[1]).abs());
            }
            let fine = exact.path_on_fine_grid(lattice.dw_fine(), lattice.fine_step());
            let xt = &fine[fine.len() - 2..];
            let me = &modified.states[modified.states.len() - 2..];
            let yt = traj.flat(traj.len() - 1);
            out.push(ClosenessSample {
                path_id,
                sup_gap,
                modified_error: [scale * (me[0] - xt[0]), scale * (me[1] - xt[1])],
                scheme_error: [scale * (yt[0] - xt[0]), scale * (yt[1] - xt[1])],
            });
        }
        Ok(out)
    })?;
    Ok(batches.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Kubo, LinearOscillator};

    #[test]
    fn zero_noise_kubo_reduces_to_ito_drift_flow() {
        let lat = BrownianLattice::from_increments(4, 2, 1, vec![0.0; 8], None).unwrap();
        let x0 = StateVector::new(vec![0.0], vec![1.0]);
        let path = integrate_modified_mult(&Kubo, &x0, 4, &lat).unwrap();
        assert_eq!(path.len(), 9);
        let (p, q) = (path.states[2], path.states[3]);
        assert!((p + 0.125).abs() < 1e-15 && (q - 0.9375).abs() < 1e-15);
    }

    #[test]
    fn cell_indices() {
        let lat = BrownianLattice::from_increments(2, 3, 1, vec![0.0; 6], None).unwrap();
        let path = integrate_modified_add(&LinearOscillator, &StateVector::zeros(1), 2, &lat).unwrap();
        let idx: Vec<_> = (0..path.len()).map(|k| path.cell_index(k)).collect();
        assert_eq!(idx, vec![0, 0, 0, 1, 1, 1, 1]);
    }

    #[test]
    fn rejects_wrong_kind_and_lattice() {
        let lat = BrownianLattice::from_increments(2, 1, 1, vec![0.0; 2], None).unwrap();
        let x0 = StateVector::zeros(1);
        assert!(integrate_modified_add(&Kubo, &x0, 2, &lat).is_err());
        assert!(integrate_modified_mult(&Kubo, &x0, 4, &lat).is_err());
    }
}
