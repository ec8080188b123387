//! One-step maps: the stochastic symplectic θ-family and Euler–Maruyama
//!
//! The θ-scheme evaluates everything at the interior point
//! `Y = (θP* + (1-θ)P_k, (1-θ)Q* + θQ_k)`:
//!
//! ```text
//! P* = P_k + u(Y) h + a(Y) ΔŴ,   u = f + (½-θ)(a_P a - a_Q b)
//! Q* = Q_k + v(Y) h + b(Y) ΔŴ,   v = g + (½-θ)(b_P a - b_Q b)
//! ```
//!
//! For additive noise the correction vanishes and `u = f`, `v = g`.
//! `θ = 1` is the symplectic Euler method and `θ = ½` the midpoint rule.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::noise::{BrownianLattice, NoiseError, TruncationPolicy};
use crate::problem::{ito_drift_into, BlockJacobian, CoefficientSet, NoiseKind, StateVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchemeMethod {
    SymplTheta { theta: f64 },
    EulerMaruyama,
}

impl SchemeMethod {
    pub fn label(&self) -> String {
        match self {
            SchemeMethod::SymplTheta { theta } => format!("sympl_theta={theta}"),
            SchemeMethod::EulerMaruyama => "euler".to_string(),
        }
    }

    pub fn theta(&self) -> Option<f64> {
        match self {
            SchemeMethod::SymplTheta { theta } => Some(*theta),
            SchemeMethod::EulerMaruyama => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverMode {
    /// Fixed-point iteration only.
    FixedPoint,
    /// Fixed-point iteration for half the budget, then Newton.
    NewtonFallback,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImplicitSolverConfig {
    pub mode: SolverMode,
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for ImplicitSolverConfig {
    fn default() -> Self {
        Self { mode: SolverMode::NewtonFallback, abs_tol: 1e-13, max_iter: 50 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeConfig {
    pub method: SchemeMethod,
    pub n: u64,
    pub truncation: TruncationPolicy,
    pub solver: ImplicitSolverConfig,
}

impl SchemeConfig {
    /// Truncation is on for the θ-family and off for Euler–Maruyama.
    pub fn new(method: SchemeMethod, n: u64) -> Self {
        let truncation = match method {
            SchemeMethod::SymplTheta { .. } => TruncationPolicy::default(),
            SchemeMethod::EulerMaruyama => TruncationPolicy::disabled(),
        };
        Self { method, n, truncation, solver: ImplicitSolverConfig::default() }
    }

    /// As [`SchemeConfig::new`], except that additive noise is never truncated:
    /// the additive θ-scheme is driven by the raw increments.
    pub fn for_noise(method: SchemeMethod, n: u64, kind: NoiseKind) -> Self {
        let mut cfg = Self::new(method, n);
        if kind == NoiseKind::Additive {
            cfg.truncation.enabled = false;
        }
        cfg
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.truncation.rho = rho;
        self
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        if self.n == 0 {
            return Err(IntegrateError::InvalidConfig("n must be positive".into()));
        }
        if let SchemeMethod::SymplTheta { theta } = self.method {
            if !(0.0..=1.0).contains(&theta) {
                return Err(IntegrateError::InvalidConfig(format!("theta must lie in [0, 1], got {theta}")));
            }
        }
        if self.truncation.enabled {
            TruncationPolicy::new(self.truncation.rho)?;
        }
        if !(self.solver.abs_tol > 0.0) || self.solver.max_iter == 0 {
            return Err(IntegrateError::InvalidConfig("solver needs abs_tol > 0 and max_iter > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error("implicit solve did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("non-finite state")]
    NonFinite,
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("step {step}: {source}")]
    Step { step: usize, source: StepError },
    #[error("invalid scheme configuration: {0}")]
    InvalidConfig(String),
    #[error("lattice has n = {lattice}, scheme expects n = {scheme}")]
    LatticeMismatch { lattice: u64, scheme: u64 },
    #[error("trajectories live on different grids")]
    GridMismatch,
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Values of one integrated path on the coarse grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    d: usize,
    h: f64,
    states: Vec<f64>,
    pub iterations: u64,
    pub clamp_count: usize,
}

impl Trajectory {
    pub fn new(d: usize, h: f64) -> Self {
        Self { d, h, states: Vec::new(), iterations: 0, clamp_count: 0 }
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), 2 * self.d);
        self.states.extend_from_slice(x);
    }

    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn len(&self) -> usize {
        self.states.len() / (2 * self.d)
    }
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
    pub fn step(&self) -> f64 {
        self.h
    }
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.h
    }
    /// Flat `[P, Q]` at node `k`.
    pub fn flat(&self, k: usize) -> &[f64] {
        &self.states[2 * self.d * k..2 * self.d * (k + 1)]
    }
    pub fn state(&self, k: usize) -> StateVector {
        StateVector::from_flat(self.flat(k))
    }
    pub fn terminal(&self) -> StateVector {
        self.state(self.len() - 1)
    }

    /// CSV with columns `t, P_1..P_d, Q_1..Q_d`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", state_header(self.d))?;
        for k in 0..self.len() {
            write!(w, "{}", fmt_f64(self.time(k)))?;
            for v in self.flat(k) {
                write!(w, ",{}", fmt_f64(*v))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub(crate) fn state_header(d: usize) -> String {
    let mut s = String::from("t");
    for i in 1..=d {
        s.push_str(&format!(",P_{i}"));
    }
    for i in 1..=d {
        s.push_str(&format!(",Q_{i}"));
    }
    s
}

/// Round-trippable decimal with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Reusable one-step integrator with scratch buffers.
pub struct Stepper<'a, C: CoefficientSet + ?Sized> {
    coeffs: &'a C,
    method: SchemeMethod,
    solver: ImplicitSolverConfig,
    d: usize,
    kind: NoiseKind,
    yp: Vec<f64>,
    yq: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    jac: BlockJacobian,
    xk: Vec<f64>,
    cand: Vec<f64>,
    phi: Vec<f64>,
}

impl<'a, C: CoefficientSet + ?Sized> Stepper<'a, C> {
    pub fn new(coeffs: &'a C, method: SchemeMethod, solver: ImplicitSolverConfig) -> Self {
        let d = coeffs.dim();
        Self {
            coeffs,
            method,
            solver,
            d,
            kind: coeffs.noise_kind(),
            yp: vec![0.0; d],
            yq: vec![0.0; d],
            f: vec![0.0; d],
            g: vec![0.0; d],
            a: vec![0.0; d],
            b: vec![0.0; d],
            jac: BlockJacobian::zeros(d),
            xk: vec![0.0; 2 * d],
            cand: vec![0.0; 2 * d],
            phi: vec![0.0; 2 * d],
        }
    }

    /// Advances the flat state `x` by one step; returns the number of
    /// implicit iterations (0 for explicit steps).
    pub fn step(&mut self, x: &mut [f64], h: f64, dw: f64) -> Result<usize, StepError> {
        let iters = match self.method {
            SchemeMethod::EulerMaruyama => {
                self.euler(x, h, dw);
                0
            }
            SchemeMethod::SymplTheta { theta } => self.theta_step(x, h, dw, theta)?,
        };
        if x.iter().all(|v| v.is_finite()) {
            Ok(iters)
        } else {
            Err(StepError::NonFinite)
        }
    }

    fn euler(&mut self, x: &mut [f64], h: f64, dw: f64) {
        let d = self.d;
        let (p, q) = x.split_at_mut(d);
        ito_drift_into(self.coeffs, p, q, &mut self.a, &mut self.b, &mut self.jac, &mut self.f, &mut self.g);
        self.coeffs.diffusion(p, q, &mut self.a, &mut self.b);
        for i in 0..d {
            p[i] += self.f[i] * h + self.a[i] * dw;
            q[i] += self.g[i] * h + self.b[i] * dw;
        }
    }

    /// `out = Φ(x*)`, the right-hand side of the implicit θ-step.
    fn theta_map(&mut self, xstar: &[f64], h: f64, dw: f64, theta: f64, out: &mut [f64]) {
        let d = self.d;
        for i in 0..d {
            self.yp[i] = theta * xstar[i] + (1.0 - theta) * self.xk[i];
            self.yq[i] = (1.0 - theta) * xstar[d + i] + theta * self.xk[d + i];
        }
        self.coeffs.drift(&self.yp, &self.yq, &mut self.f, &mut self.g);
        self.coeffs.diffusion(&self.yp, &self.yq, &mut self.a, &mut self.b);
        let c = 0.5 - theta;
        if self.kind == NoiseKind::Multiplicative && c != 0.0 {
            self.coeffs.diffusion_jacobian(&self.yp, &self.yq, &mut self.jac);
            for i in 0..d {
                let mut cp = 0.0;
                let mut cq = 0.0;
                for j in 0..d {
                    cp += self.jac.x_p[i * d + j] * self.a[j] - self.jac.x_q[i * d + j] * self.b[j];
                    cq += self.jac.y_p[i * d + j] * self.a[j] - self.jac.y_q[i * d + j] * self.b[j];
                }
                out[i] = self.xk[i] + (self.f[i] + c * cp) * h + self.a[i] * dw;
                out[d + i] = self.xk[d + i] + (self.g[i] + c * cq) * h + self.b[i] * dw;
            }
        } else {
            for i in 0..d {
                out[i] = self.xk[i] + self.f[i] * h + self.a[i] * dw;
                out[d + i] = self.xk[d + i] + self.g[i] * h + self.b[i] * dw;
            }
        }
    }

    fn residual_of(&mut self, xstar: &[f64], h: f64, dw: f64, theta: f64) -> f64 {
        let mut phi = std::mem::take(&mut self.phi);
        self.theta_map(xstar, h, dw, theta, &mut phi);
        let r = max_abs_diff(&phi, xstar);
        self.phi = phi;
        r
    }

    fn theta_step(&mut self, x: &mut [f64], h: f64, dw: f64, theta: f64) -> Result<usize, StepError> {
        self.xk.copy_from_slice(x);
        let mut cand = std::mem::take(&mut self.cand);
        let mut phi = std::mem::take(&mut self.phi);
        cand.copy_from_slice(x);
        let budget = self.solver.max_iter;
        let fp_budget = match self.solver.mode {
            SolverMode::FixedPoint => budget,
            SolverMode::NewtonFallback => budget.div_ceil(2),
        };
        let tol = self.solver.abs_tol;
        let mut residual = f64::INFINITY;
        let mut iters = 0;
        while iters < fp_budget {
            self.theta_map(&cand, h, dw, theta, &mut phi);
            iters += 1;
            residual = max_abs_diff(&phi, &cand);
            if residual <= tol {
                break;
            }
            cand.copy_from_slice(&phi);
        }
        self.phi = phi;
        if residual > tol && self.solver.mode == SolverMode::NewtonFallback {
            while iters < budget {
                iters += 1;
                if !self.newton_update(&mut cand, h, dw, theta) {
                    break;
                }
                residual = self.residual_of(&cand, h, dw, theta);
                if residual <= tol {
                    break;
                }
            }
        }
        if residual <= tol {
            x.copy_from_slice(&cand);
        }
        self.cand = cand;
        if residual <= tol {
            Ok(iters)
        } else {
            Err(StepError::NonConvergence { iterations: iters, residual })
        }
    }

    /// One Newton step on `R(x) = x - Φ(x)` with a finite-difference Jacobian.
    /// Returns `false` if the linear system is singular.
    fn newton_update(&mut self, cand: &mut [f64], h: f64, dw: f64, theta: f64) -> bool {
        let n = 2 * self.d;
        let mut phi = vec![0.0; n];
        self.theta_map(cand, h, dw, theta, &mut phi);
        let r = DVector::from_iterator(n, cand.iter().zip(&phi).map(|(x, p)| x - p));
        let mut jac = DMatrix::<f64>::identity(n, n);
        let mut probe = cand.to_vec();
        let (mut plus, mut minus) = (vec![0.0; n], vec![0.0; n]);
        for j in 0..n {
            let e = 1e-7 * cand[j].abs().max(1.0);
            probe[j] = cand[j] + e;
            self.theta_map(&probe, h, dw, theta, &mut plus);
            probe[j] = cand[j] - e;
            self.theta_map(&probe, h, dw, theta, &mut minus);
            probe[j] = cand[j];
            for i in 0..n {
                jac[(i, j)] -= (plus[i] - minus[i]) / (2.0 * e);
            }
        }
        match jac.lu().solve(&r) {
            Some(delta) => {
                for (c, dl) in cand.iter_mut().zip(delta.iter()) {
                    *c -= dl;
                }
                true
            }
            None => false,
        }
    }

    /// Max-norm residual `|x* - Φ(x*)|` of a candidate step from `xk`.
    pub fn theta_residual(&mut self, xk: &[f64], xstar: &[f64], h: f64, dw: f64, theta: f64) -> f64 {
        self.xk.copy_from_slice(xk);
        self.residual_of(xstar, h, dw, theta)
    }
}

fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// One θ-step from `state` with step `h` and (already truncated) increment `dw_hat`.
pub fn step_sympl_theta<C: CoefficientSet + ?Sized>(
    coeffs: &C,
    state: &StateVector,
    h: f64,
    dw_hat: f64,
    theta: f64,
    solver: &ImplicitSolverConfig,
) -> Result<StateVector, StepError> {
    let mut st = Stepper::new(coeffs, SchemeMethod::SymplTheta { theta }, *solver);
    let mut x = state.to_flat();
    st.step(&mut x, h, dw_hat)?;
    Ok(StateVector::from_flat(&x))
}

/// One Euler–Maruyama step with the Itô drift.
pub fn step_euler_maruyama<C: CoefficientSet + ?Sized>(
    coeffs: &C,
    state: &StateVector,
    h: f64,
    dw: f64,
) -> StateVector {
    let mut st = Stepper::new(coeffs, SchemeMethod::EulerMaruyama, ImplicitSolverConfig::default());
    let mut x = state.to_flat();
    st.euler(&mut x, h, dw);
    StateVector::from_flat(&x)
}

/// Integrates over the coarse grid of `lattice`.
pub fn integrate<C: CoefficientSet + ?Sized>(
    coeffs: &C,
    initial: &StateVector,
    scheme: &SchemeConfig,
    lattice: &BrownianLattice,
) -> Result<Trajectory, IntegrateError> {
    scheme.validate()?;
    if lattice.n() != scheme.n {
        return Err(IntegrateError::LatticeMismatch { lattice: lattice.n(), scheme: scheme.n });
    }
    let coarse = lattice.coarse_increments();
    let h = lattice.coarse_step();
    let mut st = Stepper::new(coeffs, scheme.method, scheme.solver);
    let mut traj = Trajectory::new(coeffs.dim(), h);
    let mut x = initial.to_flat();
    traj.push(&x);
    for (k, &dw) in coarse.iter().enumerate() {
        let (dw_hat, clamped) = scheme.truncation.apply(dw, scheme.n);
        traj.clamp_count += clamped as usize;
        let it = st.step(&mut x, h, dw_hat).map_err(|source| IntegrateError::Step { step: k, source })?;
        traj.iterations += it as u64;
        traj.push(&x);
    }
    Ok(traj)
}

/// Second-order expansion of the symplectic Euler step (θ = 1, `d = 1`):
///
/// ```text
/// P = P_k + u h + a ΔŴ + a_P a ΔŴ² + u_P u h² + (u_P a + a_P u) h ΔŴ
/// Q = Q_k + v h + b ΔŴ + b_P a ΔŴ² + v_P u h² + (v_P a + b_P u) h ΔŴ
/// ```
///
/// with every coefficient evaluated at the current state.
pub fn expansion_step_sympl_euler<C: CoefficientSet + ?Sized>(
    coeffs: &C,
    state: &StateVector,
    h: f64,
    dw_hat: f64,
) -> Result<StateVector, StepError> {
    if coeffs.dim() != 1 {
        return Err(StepError::Unsupported("the expansion step is implemented for d = 1 only".into()));
    }
    let (p, q) = (&state.p[..], &state.q[..]);
    let (mut f, mut g, mut a, mut b) = ([0.0], [0.0], [0.0], [0.0]);
    coeffs.drift(p, q, &mut f, &mut g);
    coeffs.diffusion(p, q, &mut a, &mut b);
    let mut jf = BlockJacobian::zeros(1);
    let mut js = BlockJacobian::zeros(1);
    coeffs.drift_jacobian(p, q, &mut jf);
    coeffs.diffusion_jacobian(p, q, &mut js);
    let (mut ha, mut hb) = ([0.0; 4], [0.0; 4]);
    coeffs.diffusion_hessian(p, q, 0, &mut ha, &mut hb);
    let (a, b, f, g) = (a[0], b[0], f[0], g[0]);
    let (a1, a2, b1, b2) = (js.x_p[0], js.x_q[0], js.y_p[0], js.y_q[0]);
    let (a11, a21, b11, b21) = (ha[0], ha[2], hb[0], hb[2]);
    // u = f + ½(a_Q b - a_P a), v = g + ½(b_Q b - b_P a)
    let u = f + 0.5 * (a2 * b - a1 * a);
    let v = g + 0.5 * (b2 * b - b1 * a);
    let u1 = jf.x_p[0] + 0.5 * (a21 * b + a2 * b1) - 0.5 * (a11 * a + a1 * a1);
    let v1 = jf.y_p[0] + 0.5 * (b21 * b + b2 * b1) - 0.5 * (b11 * a + b1 * a1);
    let w = dw_hat;
    let np = p[0] + u * h + a * w + a1 * a * w * w + u1 * u * h * h + (u1 * a + a1 * u) * h * w;
    let nq = q[0] + v * h + b * w + b1 * a * w * w + v1 * u * h * h + (v1 * a + b1 * u) * h * w;
    Ok(StateVector::new(vec![np], vec![nq]))
}

/// Supremum over nodes and terminal max-norm error between two trajectories on
/// the same grid.
pub fn strong_error(traj: &Trajectory, reference: &Trajectory) -> Result<(f64, f64), IntegrateError> {
    if traj.len() != reference.len() || traj.dim() != reference.dim() || traj.step() != reference.step() {
        return Err(IntegrateError::GridMismatch);
    }
    let mut sup: f64 = 0.0;
    let mut last = 0.0;
    for k in 0..traj.len() {
        last = max_abs_diff(traj.flat(k), reference.flat(k));
        sup = sup.max(last);
    }
    Ok((sup, last))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Kubo, LinearOscillator};

    fn kubo_start() -> StateVector {
        StateVector::new(vec![0.0], vec![1.0])
    }

    #[test]
    fn symplectic_euler_kubo_zero_noise() {
        let x = step_sympl_theta(&Kubo, &kubo_start(), 0.1, 0.0, 1.0, &ImplicitSolverConfig::default()).unwrap();
        // drift (-Q - P/2, P + Q/2) at Y = (P*, Q_k)
        let p = -0.1 / 1.05;
        assert!((x.p[0] - p).abs() < 1e-12);
        assert!((x.q[0] - (1.0 + 0.1 * (p + 0.5))).abs() < 1e-12);
        assert!((x.q[0] - 1.0404762).abs() < 1e-7);
    }

    #[test]
    fn euler_kubo_zero_noise() {
        let x = step_euler_maruyama(&Kubo, &kubo_start(), 0.1, 0.0);
        assert_eq!(x, StateVector::new(vec![-0.1], vec![0.95]));
    }

    #[test]
    fn midpoint_preserves_norm_on_kubo() {
        let solver = ImplicitSolverConfig::default();
        let mut x = kubo_start();
        for dw in [0.3, -0.2, 0.05, 0.7] {
            x = step_sympl_theta(&Kubo, &x, 0.1, dw, 0.5, &solver).unwrap();
        }
        let r2 = x.p[0] * x.p[0] + x.q[0] * x.q[0];
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn additive_theta_scheme_explicit_for_theta_one() {
        let x0 = StateVector::new(vec![0.2], vec![0.5]);
        let x = step_sympl_theta(&LinearOscillator, &x0, 0.1, 0.3, 1.0, &ImplicitSolverConfig::default()).unwrap();
        let p = 0.2 - 0.5 * 0.1 + 0.3;
        assert!((x.p[0] - p).abs() < 1e-15);
        assert!((x.q[0] - (0.5 + 0.1 * p)).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_failure_is_reported() {
        let solver = ImplicitSolverConfig { mode: SolverMode::FixedPoint, abs_tol: 1e-13, max_iter: 2 };
        let err = step_sympl_theta(&Kubo, &kubo_start(), 0.5, 2.0, 0.5, &solver).unwrap_err();
        assert!(matches!(err, StepError::NonConvergence { iterations: 2, .. }));
    }

    #[test]
    fn newton_rescues_large_steps() {
        let solver = ImplicitSolverConfig { mode: SolverMode::NewtonFallback, abs_tol: 1e-13, max_iter: 20 };
        let x = step_sympl_theta(&Kubo, &kubo_start(), 0.5, 2.0, 0.5, &solver).unwrap();
        let mut st = Stepper::new(&Kubo, SchemeMethod::SymplTheta { theta: 0.5 }, solver);
        assert!(st.theta_residual(&kubo_start().to_flat(), &x.to_flat(), 0.5, 2.0, 0.5) <= 1e-13);
    }

    #[test]
    fn integrate_zero_noise_lattice() {
        let lat = BrownianLattice::from_increments(10, 1, 1, vec![0.0; 10], None).unwrap();
        let cfg = SchemeConfig::new(SchemeMethod::SymplTheta { theta: 1.0 }, 10);
        let traj = integrate(&Kubo, &kubo_start(), &cfg, &lat).unwrap();
        assert_eq!(traj.len(), 11);
        assert_eq!(traj.state(0), kubo_start());
        let one = step_sympl_theta(&Kubo, &kubo_start(), 0.1, 0.0, 1.0, &cfg.solver).unwrap();
        assert_eq!(traj.state(1), one);
    }

    #[test]
    fn lattice_mismatch() {
        let lat = BrownianLattice::from_increments(10, 1, 1, vec![0.0; 10], None).unwrap();
        let cfg = SchemeConfig::new(SchemeMethod::EulerMaruyama, 20);
        assert!(matches!(integrate(&Kubo, &kubo_start(), &cfg, &lat), Err(IntegrateError::LatticeMismatch { .. })));
    }

    #[test]
    fn csv_layout() {
        let lat = BrownianLattice::from_increments(2, 1, 1, vec![0.0; 2], None).unwrap();
        let traj = integrate(&Kubo, &kubo_start(), &SchemeConfig::new(SchemeMethod::EulerMaruyama, 2), &lat).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,P_1,Q_1");
        assert_eq!(lines.len(), 4);
        let q: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(q, 1.0);
    }

    #[test]
    fn strong_error_of_identical_paths() {
        let lat = BrownianLattice::sample(8, 1, 1, 3, 0).unwrap();
        let cfg = SchemeConfig::new(SchemeMethod::EulerMaruyama, 8);
        let t = integrate(&Kubo, &kubo_start(), &cfg, &lat).unwrap();
        assert_eq!(strong_error(&t, &t).unwrap(), (0.0, 0.0));
    }
}
