//! Stochastic Hamiltonian systems in Stratonovich form
//!
//! ```text
//! dP = f(P,Q) dt + a(P,Q) o dW,   f = -dH/dQ,   a = -dH̄/dQ
//! dQ = g(P,Q) dt + b(P,Q) o dW,   g =  dH/dP,   b =  dH̄/dP
//! ```
//!
//! A system is described by a [`CoefficientSet`] (values and first and second
//! derivatives of `f, g, a, b`) and a [`HamiltonianPair`]. Two systems ship with
//! the crate: the Kubo oscillator (multiplicative noise) and the linear
//! oscillator with additive noise.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Whether the diffusion depends on the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseKind {
    Multiplicative,
    Additive,
}

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("theta must lie in [0, 1], got {0}")]
    InvalidTheta(f64),
    #[error("time must be finite and non-negative, got {0}")]
    InvalidTime(f64),
    #[error("unknown problem '{0}' (expected kubo or linosc)")]
    UnknownProblem(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Phase-space point `(P, Q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl StateVector {
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Self {
        assert_eq!(p.len(), q.len(), "P and Q must have the same dimension");
        Self { p, q }
    }

    pub fn zeros(d: usize) -> Self {
        Self { p: vec![0.0; d], q: vec![0.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    /// Builds a state from the flat layout `[P_1..P_d, Q_1..Q_d]`.
    pub fn from_flat(x: &[f64]) -> Self {
        let d = x.len() / 2;
        Self { p: x[..d].to_vec(), q: x[d..].to_vec() }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut x = self.p.clone();
        x.extend_from_slice(&self.q);
        x
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().chain(&self.q).all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.p.iter().zip(&other.p).chain(self.q.iter().zip(&other.q)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}

/// First derivatives of a pair of maps `(x, y)` with respect to `(P, Q)`.
///
/// Every block is a row-major `d x d` matrix, e.g. `x_p[i * d + j] = dx_i/dP_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockJacobian {
    pub d: usize,
    pub x_p: Vec<f64>,
    pub x_q: Vec<f64>,
    pub y_p: Vec<f64>,
    pub y_q: Vec<f64>,
}

impl BlockJacobian {
    pub fn zeros(d: usize) -> Self {
        Self { d, x_p: vec![0.0; d * d], x_q: vec![0.0; d * d], y_p: vec![0.0; d * d], y_q: vec![0.0; d * d] }
    }

    /// Full `2d x 2d` row-major matrix acting on `[P, Q]`.
    pub fn full(&self) -> Vec<f64> {
        let d = self.d;
        let n = 2 * d;
        let mut m = vec![0.0; n * n];
        for i in 0..d {
            for j in 0..d {
                m[i * n + j] = self.x_p[i * d + j];
                m[i * n + d + j] = self.x_q[i * d + j];
                m[(d + i) * n + j] = self.y_p[i * d + j];
                m[(d + i) * n + d + j] = self.y_q[i * d + j];
            }
        }
        m
    }

    /// `(x_P u_p + x_Q u_q, y_P u_p + y_Q u_q)`.
    pub fn apply(&self, up: &[f64], uq: &[f64], out_x: &mut [f64], out_y: &mut [f64]) {
        let d = self.d;
        for i in 0..d {
            let mut sx = 0.0;
            let mut sy = 0.0;
            for j in 0..d {
                sx += self.x_p[i * d + j] * up[j] + self.x_q[i * d + j] * uq[j];
                sy += self.y_p[i * d + j] * up[j] + self.y_q[i * d + j] * uq[j];
            }
            out_x[i] = sx;
            out_y[i] = sy;
        }
    }
}

/// Coefficients of a stochastic Hamiltonian system.
///
/// Hessians are `2d x 2d` row-major matrices over the variables `[P, Q]`, one per
/// component `i` of the corresponding map.
pub trait CoefficientSet: Send + Sync {
    fn dim(&self) -> usize;
    fn noise_kind(&self) -> NoiseKind;
    fn drift(&self, p: &[f64], q: &[f64], f: &mut [f64], g: &mut [f64]);
    fn diffusion(&self, p: &[f64], q: &[f64], a: &mut [f64], b: &mut [f64]);
    fn drift_jacobian(&self, p: &[f64], q: &[f64], jac: &mut BlockJacobian);
    fn diffusion_jacobian(&self, p: &[f64], q: &[f64], jac: &mut BlockJacobian);
    fn drift_hessian(&self, p: &[f64], q: &[f64], i: usize, hf: &mut [f64], hg: &mut [f64]);
    fn diffusion_hessian(&self, p: &[f64], q: &[f64], i: usize, ha: &mut [f64], hb: &mut [f64]);
}

/// `H` and the noise Hamiltonian `H̄`.
pub trait HamiltonianPair {
    fn hamiltonian(&self, p: &[f64], q: &[f64]) -> f64;
    fn noise_hamiltonian(&self, p: &[f64], q: &[f64]) -> f64;

    /// Gradient of `H` as `(dH/dP, dH/dQ)`; central differences unless overridden.
    fn grad_hamiltonian(&self, p: &[f64], q: &[f64], gp: &mut [f64], gq: &mut [f64]) {
        let e = 1e-6;
        let (mut pp, mut qq) = (p.to_vec(), q.to_vec());
        for j in 0..p.len() {
            pp[j] = p[j] + e;
            let hi = self.hamiltonian(&pp, q);
            pp[j] = p[j] - e;
            let lo = self.hamiltonian(&pp, q);
            pp[j] = p[j];
            gp[j] = (hi - lo) / (2.0 * e);
            qq[j] = q[j] + e;
            let hi = self.hamiltonian(p, &qq);
            qq[j] = q[j] - e;
            let lo = self.hamiltonian(p, &qq);
            qq[j] = q[j];
            gq[j] = (hi - lo) / (2.0 * e);
        }
    }
}

/// Stratonovich-to-Itô corrected drift
/// `(f + ½(a_P a + a_Q b), g + ½(b_P a + b_Q b))`.
pub fn ito_drift<C: CoefficientSet + ?Sized>(coeffs: &C, state: &StateVector) -> StateVector {
    let d = coeffs.dim();
    let mut out = StateVector::zeros(d);
    let mut a = vec![0.0; d];
    let mut b = vec![0.0; d];
    let mut jac = BlockJacobian::zeros(d);
    ito_drift_into(coeffs, &state.p, &state.q, &mut a, &mut b, &mut jac, &mut out.p, &mut out.q);
    out
}

/// Allocation-free form of [`ito_drift`]; `a`, `b`, `jac` are scratch.
#[allow(clippy::too_many_arguments)]
pub(crate) fn ito_drift_into<C: CoefficientSet + ?Sized>(
    coeffs: &C,
    p: &[f64],
    q: &[f64],
    a: &mut [f64],
    b: &mut [f64],
    jac: &mut BlockJacobian,
    out_p: &mut [f64],
    out_q: &mut [f64],
) {
    coeffs.drift(p, q, out_p, out_q);
    if coeffs.noise_kind() == NoiseKind::Additive {
        return;
    }
    coeffs.diffusion(p, q, a, b);
    coeffs.diffusion_jacobian(p, q, jac);
    let d = coeffs.dim();
    for i in 0..d {
        let mut cp = 0.0;
        let mut cq = 0.0;
        for j in 0..d {
            cp += jac.x_p[i * d + j] * a[j] + jac.x_q[i * d + j] * b[j];
            cq += jac.y_p[i * d + j] * a[j] + jac.y_q[i * d + j] * b[j];
        }
        out_p[i] += 0.5 * cp;
        out_q[i] += 0.5 * cq;
    }
}

/// Kubo oscillator: `H = H̄ = ½(P² + Q²)`, so `f = a = -Q`, `g = b = P`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kubo;

/// Linear oscillator with additive noise: `H = ½(P² + Q²)`, `H̄ = -Q`,
/// so `f = -Q`, `g = P`, `a = 1`, `b = 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct LinearOscillator;

fn rotation_jacobian(jac: &mut BlockJacobian) {
    jac.x_p[0] = 0.0;
    jac.x_q[0] = -1.0;
    jac.y_p[0] = 1.0;
    jac.y_q[0] = 0.0;
}

fn zero_jacobian(jac: &mut BlockJacobian) {
    jac.x_p[0] = 0.0;
    jac.x_q[0] = 0.0;
    jac.y_p[0] = 0.0;
    jac.y_q[0] = 0.0;
}

impl CoefficientSet for Kubo {
    fn dim(&self) -> usize {
        1
    }
    fn noise_kind(&self) -> NoiseKind {
        NoiseKind::Multiplicative
    }
    #[inline]
    fn drift(&self, p: &[f64], q: &[f64], f: &mut [f64], g: &mut [f64]) {
        f[0] = -q[0];
        g[0] = p[0];
    }
    #[inline]
    fn diffusion(&self, p: &[f64], q: &[f64], a: &mut [f64], b: &mut [f64]) {
        a[0] = -q[0];
        b[0] = p[0];
    }
    fn drift_jacobian(&self, _p: &[f64], _q: &[f64], jac: &mut BlockJacobian) {
        rotation_jacobian(jac);
    }
    fn diffusion_jacobian(&self, _p: &[f64], _q: &[f64], jac: &mut BlockJacobian) {
        rotation_jacobian(jac);
    }
    fn drift_hessian(&self, _p: &[f64], _q: &[f64], _i: usize, hf: &mut [f64], hg: &mut [f64]) {
        hf.fill(0.0);
        hg.fill(0.0);
    }
    fn diffusion_hessian(&self, _p: &[f64], _q: &[f64], _i: usize, ha: &mut [f64], hb: &mut [f64]) {
        ha.fill(0.0);
        hb.fill(0.0);
    }
}

impl HamiltonianPair for Kubo {
    fn hamiltonian(&self, p: &[f64], q: &[f64]) -> f64 {
        0.5 * (p[0] * p[0] + q[0] * q[0])
    }
    fn grad_hamiltonian(&self, p: &[f64], q: &[f64], gp: &mut [f64], gq: &mut [f64]) {
        gp[0] = p[0];
        gq[0] = q[0];
    }
    fn noise_hamiltonian(&self, p: &[f64], q: &[f64]) -> f64 {
        self.hamiltonian(p, q)
    }
}

impl CoefficientSet for LinearOscillator {
    fn dim(&self) -> usize {
        1
    }
    fn noise_kind(&self) -> NoiseKind {
        NoiseKind::Additive
    }
    #[inline]
    fn drift(&self, p: &[f64], q: &[f64], f: &mut [f64], g: &mut [f64]) {
        f[0] = -q[0];
        g[0] = p[0];
    }
    #[inline]
    fn diffusion(&self, _p: &[f64], _q: &[f64], a: &mut [f64], b: &mut [f64]) {
        a[0] = 1.0;
        b[0] = 0.0;
    }
    fn drift_jacobian(&self, _p: &[f64], _q: &[f64], jac: &mut BlockJacobian) {
        rotation_jacobian(jac);
    }
    fn diffusion_jacobian(&self, _p: &[f64], _q: &[f64], jac: &mut BlockJacobian) {
        zero_jacobian(jac);
    }
    fn drift_hessian(&self, _p: &[f64], _q: &[f64], _i: usize, hf: &mut [f64], hg: &mut [f64]) {
        hf.fill(0.0);
        hg.fill(0.0);
    }
    fn diffusion_hessian(&self, _p: &[f64], _q: &[f64], _i: usize, ha: &mut [f64], hb: &mut [f64]) {
        ha.fill(0.0);
        hb.fill(0.0);
    }
}

impl HamiltonianPair for LinearOscillator {
    fn hamiltonian(&self, p: &[f64], q: &[f64]) -> f64 {
        0.5 * (p[0] * p[0] + q[0] * q[0])
    }
    fn grad_hamiltonian(&self, p: &[f64], q: &[f64], gp: &mut [f64], gq: &mut [f64]) {
        gp[0] = p[0];
        gq[0] = q[0];
    }
    fn noise_hamiltonian(&self, _p: &[f64], q: &[f64]) -> f64 {
        -q[0]
    }
}

type VecField = Arc<dyn Fn(&[f64], &[f64], &mut [f64], &mut [f64]) + Send + Sync>;

/// A [`CoefficientSet`] built from closures for the values of `f, g, a, b`.
///
/// Derivatives are central finite differences: step `1e-6` for Jacobians and
/// `1e-4` for Hessians (second differences of values lose too many digits at
/// smaller steps).
#[derive(Clone)]
pub struct FnCoefficients {
    d: usize,
    kind: NoiseKind,
    drift: VecField,
    diffusion: VecField,
}

impl fmt::Debug for FnCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnCoefficients").field("d", &self.d).field("kind", &self.kind).finish()
    }
}

const JACOBIAN_STEP: f64 = 1e-6;
const HESSIAN_STEP: f64 = 1e-4;

impl FnCoefficients {
    pub fn new<F, S>(d: usize, kind: NoiseKind, drift: F, diffusion: S) -> Self
    where
        F: Fn(&[f64], &[f64], &mut [f64], &mut [f64]) + Send + Sync + 'static,
        S: Fn(&[f64], &[f64], &mut [f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self { d, kind, drift: Arc::new(drift), diffusion: Arc::new(diffusion) }
    }

    fn fd_jacobian(&self, field: &VecField, p: &[f64], q: &[f64], jac: &mut BlockJacobian) {
        let d = self.d;
        let mut x = [p.to_vec(), q.to_vec()];
        let (mut xp, mut yp, mut xm, mut ym) = (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
        for block in 0..2 {
            for j in 0..d {
                let orig = x[block][j];
                x[block][j] = orig + JACOBIAN_STEP;
                field(&x[0], &x[1], &mut xp, &mut yp);
                x[block][j] = orig - JACOBIAN_STEP;
                field(&x[0], &x[1], &mut xm, &mut ym);
                x[block][j] = orig;
                for i in 0..d {
                    let dx = (xp[i] - xm[i]) / (2.0 * JACOBIAN_STEP);
                    let dy = (yp[i] - ym[i]) / (2.0 * JACOBIAN_STEP);
                    if block == 0 {
                        jac.x_p[i * d + j] = dx;
                        jac.y_p[i * d + j] = dy;
                    } else {
                        jac.x_q[i * d + j] = dx;
                        jac.y_q[i * d + j] = dy;
                    }
                }
            }
        }
    }

    fn fd_hessian(&self, field: &VecField, p: &[f64], q: &[f64], i: usize, hx: &mut [f64], hy: &mut [f64]) {
        let d = self.d;
        let n = 2 * d;
        let base: Vec<f64> = p.iter().chain(q).copied().collect();
        let (mut bx, mut by) = (vec![0.0; d], vec![0.0; d]);
        let mut eval = |z: &[f64]| {
            field(&z[..d], &z[d..], &mut bx, &mut by);
            (bx[i], by[i])
        };
        let e = HESSIAN_STEP;
        let mut z = base.clone();
        for r in 0..n {
            for c in r..n {
                let mut corner = |sr: f64, sc: f64| {
                    z.copy_from_slice(&base);
                    z[r] += sr * e;
                    z[c] += sc * e;
                    eval(&z)
                };
                let (pp, mm, pm, mp) = (corner(1.0, 1.0), corner(-1.0, -1.0), corner(1.0, -1.0), corner(-1.0, 1.0));
                let vx = (pp.0 + mm.0 - pm.0 - mp.0) / (4.0 * e * e);
                let vy = (pp.1 + mm.1 - pm.1 - mp.1) / (4.0 * e * e);
                hx[r * n + c] = vx;
                hx[c * n + r] = vx;
                hy[r * n + c] = vy;
                hy[c * n + r] = vy;
            }
        }
    }
}

impl CoefficientSet for FnCoefficients {
    fn dim(&self) -> usize {
        self.d
    }
    fn noise_kind(&self) -> NoiseKind {
        self.kind
    }
    fn drift(&self, p: &[f64], q: &[f64], f: &mut [f64], g: &mut [f64]) {
        (self.drift)(p, q, f, g)
    }
    fn diffusion(&self, p: &[f64], q: &[f64], a: &mut [f64], b: &mut [f64]) {
        (self.diffusion)(p, q, a, b)
    }
    fn drift_jacobian(&self, p: &[f64], q: &[f64], jac: &mut BlockJacobian) {
        self.fd_jacobian(&self.drift, p, q, jac)
    }
    fn diffusion_jacobian(&self, p: &[f64], q: &[f64], jac: &mut BlockJacobian) {
        self.fd_jacobian(&self.diffusion, p, q, jac)
    }
    fn drift_hessian(&self, p: &[f64], q: &[f64], i: usize, hf: &mut [f64], hg: &mut [f64]) {
        self.fd_hessian(&self.drift, p, q, i, hf, hg)
    }
    fn diffusion_hessian(&self, p: &[f64], q: &[f64], i: usize, ha: &mut [f64], hb: &mut [f64]) {
        self.fd_hessian(&self.diffusion, p, q, i, ha, hb)
    }
}

/// Wraps a coefficient set and scales the reported Jacobian `g_P` by `factor`
/// while leaving the values untouched. Used to exercise consistency checks.
#[derive(Clone, Copy, Debug)]
pub struct ScaledDriftJacobian<C> {
    pub inner: C,
    pub factor: f64,
}

impl<C: CoefficientSet> CoefficientSet for ScaledDriftJacobian<C> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn noise_kind(&self) -> NoiseKind {
        self.inner.noise_kind()
    }
    fn drift(&self, p: &[f64], q: &[f64], f: &mut [f64], g: &mut [f64]) {
        self.inner.drift(p, q, f, g)
    }
    fn diffusion(&self, p: &[f64], q: &[f64], a: &mut [f64], b: &mut [f64]) {
        self.inner.diffusion(p, q, a, b)
    }
    fn drift_jacobian(&self, p: &[f64], q: &[f64], jac: &mut BlockJacobian) {
        self.inner.drift_jacobian(p, q, jac);
        jac.y_p.iter_mut().for_each(|v| *v *= self.factor);
    }
    fn diffusion_jacobian(&self, p: &[f64], q: &[f64], jac: &mut BlockJacobian) {
        self.inner.diffusion_jacobian(p, q, jac)
    }
    fn drift_hessian(&self, p: &[f64], q: &[f64], i: usize, hf: &mut [f64], hg: &mut [f64]) {
        self.inner.drift_hessian(p, q, i, hf, hg)
    }
    fn diffusion_hessian(&self, p: &[f64], q: &[f64], i: usize, ha: &mut [f64], hb: &mut [f64]) {
        self.inner.diffusion_hessian(p, q, i, ha, hb)
    }
}

/// How the exact solution of a built-in problem is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactKind {
    /// Closed form in `(t, W_t)`.
    PointwiseOfW,
    /// Recursion over the increments of a fine grid.
    ConvolutionOnGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactSolution {
    /// Kubo from `(0, 1)`: `P = -sin(t + W_t)`, `Q = cos(t + W_t)`.
    RandomRotation,
    /// Linear oscillator from `(0, 0)`:
    /// `X <- R(h) X + (dW, 0)` on the fine grid, with `R(h)` the rotation by `h`.
    RotationConvolution,
}

impl ExactSolution {
    pub fn kind(&self) -> ExactKind {
        match self {
            ExactSolution::RandomRotation => ExactKind::PointwiseOfW,
            ExactSolution::RotationConvolution => ExactKind::ConvolutionOnGrid,
        }
    }

    /// Pointwise evaluation; `None` for grid-based solutions.
    pub fn at(&self, t: f64, w: f64) -> Option<StateVector> {
        match self {
            ExactSolution::RandomRotation => {
                let (s, c) = (t + w).sin_cos();
                Some(StateVector::new(vec![-s], vec![c]))
            }
            ExactSolution::RotationConvolution => None,
        }
    }

    pub fn tracker(&self, h_fine: f64) -> ExactTracker {
        let (sin_h, cos_h) = h_fine.sin_cos();
        let mut tr = ExactTracker { solution: *self, h: h_fine, sin_h, cos_h, steps: 0, w: 0.0, p: 0.0, q: 0.0 };
        tr.reset();
        tr
    }

    /// Exact states at every node of the fine grid, flat `[P, Q]` per node.
    pub fn path_on_fine_grid(&self, dw_fine: &[f64], h_fine: f64) -> Vec<f64> {
        let mut tr = self.tracker(h_fine);
        let mut out = Vec::with_capacity(2 * (dw_fine.len() + 1));
        let (p, q) = tr.state();
        out.extend_from_slice(&[p, q]);
        for &dw in dw_fine {
            tr.advance(dw);
            let (p, q) = tr.state();
            out.extend_from_slice(&[p, q]);
        }
        out
    }
}

/// Streams the exact solution of a built-in problem along fine increments.
#[derive(Clone, Debug)]
pub struct ExactTracker {
    solution: ExactSolution,
    h: f64,
    sin_h: f64,
    cos_h: f64,
    steps: u64,
    w: f64,
    p: f64,
    q: f64,
}

impl ExactTracker {
    pub fn reset(&mut self) {
        self.steps = 0;
        self.w = 0.0;
        match self.solution {
            ExactSolution::RandomRotation => {
                self.p = 0.0;
                self.q = 1.0;
            }
            ExactSolution::RotationConvolution => {
                self.p = 0.0;
                self.q = 0.0;
            }
        }
    }

    #[inline]
    pub fn advance(&mut self, dw: f64) {
        self.steps += 1;
        self.w += dw;
        if self.solution == ExactSolution::RotationConvolution {
            let p = self.cos_h * self.p - self.sin_h * self.q + dw;
            let q = self.sin_h * self.p + self.cos_h * self.q;
            self.p = p;
            self.q = q;
        }
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.h
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn state(&self) -> (f64, f64) {
        match self.solution {
            ExactSolution::RandomRotation => {
                let (s, c) = (self.time() + self.w).sin_cos();
                (-s, c)
            }
            ExactSolution::RotationConvolution => (self.p, self.q),
        }
    }
}

/// Identifier of a built-in problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemId {
    Kubo,
    LinOsc,
}

impl ProblemId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemId::Kubo => "kubo",
            ProblemId::LinOsc => "linosc",
        }
    }

    pub fn noise_kind(&self) -> NoiseKind {
        match self {
            ProblemId::Kubo => NoiseKind::Multiplicative,
            ProblemId::LinOsc => NoiseKind::Additive,
        }
    }

    pub fn exact(&self) -> ExactSolution {
        match self {
            ProblemId::Kubo => ExactSolution::RandomRotation,
            ProblemId::LinOsc => ExactSolution::RotationConvolution,
        }
    }

    pub fn initial(&self) -> StateVector {
        match self {
            ProblemId::Kubo => StateVector::new(vec![0.0], vec![1.0]),
            ProblemId::LinOsc => StateVector::new(vec![0.0], vec![0.0]),
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemId {
    type Err = ProblemError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kubo" => Ok(ProblemId::Kubo),
            "linosc" | "linear" | "linear-oscillator" => Ok(ProblemId::LinOsc),
            other => Err(ProblemError::UnknownProblem(other.to_string())),
        }
    }
}

/// A built-in system with its exact solution and initial value.
#[derive(Clone, Debug)]
pub struct Problem<S> {
    pub id: ProblemId,
    pub system: S,
    pub exact: ExactSolution,
    pub initial: StateVector,
}

pub fn make_kubo() -> Problem<Kubo> {
    let id = ProblemId::Kubo;
    Problem { id, system: Kubo, exact: id.exact(), initial: id.initial() }
}

pub fn make_linear_oscillator() -> Problem<LinearOscillator> {
    let id = ProblemId::LinOsc;
    Problem { id, system: LinearOscillator, exact: id.exact(), initial: id.initial() }
}

/// Euler-baseline limit of the Kubo error in closed form,
/// `U = -(1/√2) B_t (sin(t + W_t), -cos(t + W_t))`.
pub fn kubo_euler_limit_closed_form(t: f64, w: f64, b: f64) -> (f64, f64) {
    let (s, c) = (t + w).sin_cos();
    let k = -b / std::f64::consts::SQRT_2;
    (k * s, -k * c)
}

/// Which scheme a limit value refers to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LimitMethod {
    Euler,
    SymplTheta(f64),
}

/// Limit of the normalized Hamiltonian deviation.
///
/// Kubo: `n E[(H(X^n_t) - H(X_t))²]`. Linear oscillator: `n E[H(X^n_t) - H(X_t)]`.
pub fn hamdev_limit_value(problem: ProblemId, method: LimitMethod, t: f64) -> Result<f64, ProblemError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(ProblemError::InvalidTime(t));
    }
    if let LimitMethod::SymplTheta(theta) = method {
        if !(0.0..=1.0).contains(&theta) {
            return Err(ProblemError::InvalidTheta(theta));
        }
    }
    Ok(match (problem, method) {
        (ProblemId::Kubo, LimitMethod::Euler) => t / 2.0,
        (ProblemId::Kubo, LimitMethod::SymplTheta(theta)) => {
            // ∫_0^t ½(1 + e^{-8s} cos 4s) ds
            let damped = (8.0 + (-8.0 * t).exp() * (4.0 * (4.0 * t).sin() - 8.0 * (4.0 * t).cos())) / 80.0;
            let integral = 0.5 * (t + damped);
            (2.0 * theta - 1.0).powi(2) / 2.0 * integral
        }
        (ProblemId::LinOsc, LimitMethod::Euler) => t * t / 4.0,
        (ProblemId::LinOsc, LimitMethod::SymplTheta(theta)) => (theta - 0.5) * (1.0 - (2.0 * t).cos()) / 4.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kubo_ito_drift() {
        let x = ito_drift(&Kubo, &StateVector::new(vec![0.0], vec![1.0]));
        assert_eq!(x, StateVector::new(vec![-1.0], vec![-0.5]));
        let x = ito_drift(&Kubo, &StateVector::new(vec![1.0], vec![0.0]));
        assert_eq!(x, StateVector::new(vec![-0.5], vec![1.0]));
    }

    #[test]
    fn linosc_ito_drift_is_stratonovich_drift() {
        let x = ito_drift(&LinearOscillator, &StateVector::new(vec![0.3], vec![-0.7]));
        assert_eq!(x, StateVector::new(vec![0.7], vec![0.3]));
    }

    #[test]
    fn kubo_exact_examples() {
        let e = ExactSolution::RandomRotation;
        let x = e.at(0.0, 0.0).unwrap();
        assert_eq!(x, StateVector::new(vec![-0.0], vec![1.0]));
        let x = e.at(std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        assert!((x.p[0] + 1.0).abs() < 1e-15 && x.q[0].abs() < 1e-15);
    }

    #[test]
    fn linosc_recursion_one_step() {
        let path = ExactSolution::RotationConvolution.path_on_fine_grid(&[0.25], 0.0);
        assert_eq!(path, vec![0.0, 0.0, 0.25, 0.0]);
    }

    #[test]
    fn hamiltonians_of_builtins() {
        assert_eq!(Kubo.hamiltonian(&[0.0], &[1.0]), 0.5);
        assert_eq!(LinearOscillator.noise_hamiltonian(&[0.4], &[2.0]), -2.0);
    }

    #[test]
    fn closed_form_limit_values() {
        assert_eq!(hamdev_limit_value(ProblemId::Kubo, LimitMethod::Euler, 4.0).unwrap(), 2.0);
        assert_eq!(hamdev_limit_value(ProblemId::LinOsc, LimitMethod::Euler, 4.0).unwrap(), 4.0);
        let v = hamdev_limit_value(ProblemId::LinOsc, LimitMethod::SymplTheta(1.0), 4.0).unwrap();
        assert!((v - 0.125 * (1.0 - 8f64.cos())).abs() < 1e-15);
        let v = hamdev_limit_value(ProblemId::Kubo, LimitMethod::SymplTheta(0.5), 3.0).unwrap();
        assert_eq!(v, 0.0);
        assert!(hamdev_limit_value(ProblemId::Kubo, LimitMethod::SymplTheta(1.5), 1.0).is_err());
    }

    #[test]
    fn fd_coefficients_match_kubo() {
        let fd = FnCoefficients::new(
            1,
            NoiseKind::Multiplicative,
            |p, q, f, g| {
                f[0] = -q[0];
                g[0] = p[0];
            },
            |p, q, a, b| {
                a[0] = -q[0];
                b[0] = p[0];
            },
        );
        let mut j1 = BlockJacobian::zeros(1);
        let mut j2 = BlockJacobian::zeros(1);
        fd.diffusion_jacobian(&[0.3], &[0.8], &mut j1);
        Kubo.diffusion_jacobian(&[0.3], &[0.8], &mut j2);
        for (x, y) in j1.full().iter().zip(j2.full()) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn fd_hessian_of_quadratic() {
        let fd = FnCoefficients::new(
            1,
            NoiseKind::Multiplicative,
            |p, q, f, g| {
                f[0] = p[0] * q[0];
                g[0] = p[0] * p[0];
            },
            |_, _, a, b| {
                a[0] = 0.0;
                b[0] = 0.0;
            },
        );
        let mut hf = [0.0; 4];
        let mut hg = [0.0; 4];
        fd.drift_hessian(&[0.2], &[0.1], 0, &mut hf, &mut hg);
        let want_f = [0.0, 1.0, 1.0, 0.0];
        let want_g = [2.0, 0.0, 0.0, 0.0];
        for k in 0..4 {
            assert!((hf[k] - want_f[k]).abs() < 1e-6);
            assert!((hg[k] - want_g[k]).abs() < 1e-6);
        }
    }
}
