//! Limit equations of the normalized error `U` and their Hamiltonian structure
//!
//! In every regime the error process solves a linear Itô equation driven by the
//! same `W` and by an independent `B`,
//!
//! ```text
//! dU = (A(X) U + c0(X)) dt + (G(X) U + cW(X)) dW + cB(X) dB,
//! ```
//!
//! with `X` the exact solution. [`limit_fields`] evaluates `A, c0, G, cW, cB`.
//!
//! Multiplicative noise (`U` is the √n-scaled error): `A` is the Jacobian of the
//! Itô drift, `G = J_σ`, `c0 = cW = 0`, and
//! `cB = (2θ-1)/√2 (a_P a - a_Q b, b_P a - b_Q b)` for the θ-scheme or
//! `cB = -(1/√2) J_σ σ` for Euler–Maruyama.
//!
//! Additive noise (`U` is the n-scaled error): `A = J_F`, `G = 0`, and the
//! offsets are built from first and second derivatives of `f` and `g`.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::integrators::fmt_f64;
use crate::montecarlo::{map_batches, with_system, EnsembleConfig, MonteCarloError};
use crate::noise::{motion_rng, BrownianLattice, MotionTag, NoiseError};
use crate::problem::{
    kubo_euler_limit_closed_form, BlockJacobian, CoefficientSet, HamiltonianPair, NoiseKind, ProblemId,
};

#[derive(Debug, Error)]
pub enum LimitError {
    #[error("regime {regime:?} requires {expected:?} noise")]
    RegimeMismatch { regime: LimitRegime, expected: NoiseKind },
    #[error("theta must lie in [0, 1], got {0}")]
    InvalidTheta(f64),
    #[error("lattice carries no auxiliary motion B")]
    MissingAuxiliary,
    #[error("exact path has {got} values, expected {expected}")]
    PathLength { expected: usize, got: usize },
    #[error("time {0} is not a node of the limit grid")]
    OffGrid(f64),
    #[error("non-finite limit state at fine step {0}")]
    NonFinite(usize),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    MonteCarlo(#[from] MonteCarloError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LimitRegime {
    MultTheta { theta: f64 },
    MultEuler,
    AddTheta { theta: f64 },
    AddEuler,
}

impl LimitRegime {
    pub fn noise_kind(&self) -> NoiseKind {
        match self {
            LimitRegime::MultTheta { .. } | LimitRegime::MultEuler => NoiseKind::Multiplicative,
            LimitRegime::AddTheta { .. } | LimitRegime::AddEuler => NoiseKind::Additive,
        }
    }

    /// Regime matching a noise kind and a scheme (`None` for Euler–Maruyama).
    pub fn for_scheme(kind: NoiseKind, theta: Option<f64>) -> Self {
        match (kind, theta) {
            (NoiseKind::Multiplicative, Some(theta)) => LimitRegime::MultTheta { theta },
            (NoiseKind::Multiplicative, None) => LimitRegime::MultEuler,
            (NoiseKind::Additive, Some(theta)) => LimitRegime::AddTheta { theta },
            (NoiseKind::Additive, None) => LimitRegime::AddEuler,
        }
    }

    fn theta(&self) -> Option<f64> {
        match self {
            LimitRegime::MultTheta { theta } | LimitRegime::AddTheta { theta } => Some(*theta),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LimitSpec<'a, C: CoefficientSet + ?Sized> {
    pub regime: LimitRegime,
    pub coeffs: &'a C,
}

impl<'a, C: CoefficientSet + ?Sized> LimitSpec<'a, C> {
    pub fn new(regime: LimitRegime, coeffs: &'a C) -> Result<Self, LimitError> {
        if coeffs.noise_kind() != regime.noise_kind() {
            return Err(LimitError::RegimeMismatch { regime, expected: regime.noise_kind() });
        }
        if let Some(theta) = regime.theta() {
            if !(0.0..=1.0).contains(&theta) {
                return Err(LimitError::InvalidTheta(theta));
            }
        }
        Ok(Self { regime, coeffs })
    }
}

/// Itô coefficients of the `U`-equation frozen at one state. Matrices are
/// `2d x 2d` row-major, vectors have length `2d`, both in `[P, Q]` order.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitFields {
    pub d: usize,
    pub drift_matrix: Vec<f64>,
    pub drift_offset: Vec<f64>,
    pub noise_matrix: Vec<f64>,
    pub noise_offset: Vec<f64>,
    pub aux_offset: Vec<f64>,
}

impl LimitFields {
    pub fn zeros(d: usize) -> Self {
        let n = 2 * d;
        Self {
            d,
            drift_matrix: vec![0.0; n * n],
            drift_offset: vec![0.0; n],
            noise_matrix: vec![0.0; n * n],
            noise_offset: vec![0.0; n],
            aux_offset: vec![0.0; n],
        }
    }

    /// `A U + c0`.
    pub fn drift(&self, u: &[f64], out: &mut [f64]) {
        affine(&self.drift_matrix, &self.drift_offset, u, out)
    }

    /// `G U + cW`.
    pub fn noise(&self, u: &[f64], out: &mut [f64]) {
        affine(&self.noise_matrix, &self.noise_offset, u, out)
    }
}

fn affine(m: &[f64], c: &[f64], u: &[f64], out: &mut [f64]) {
    let n = u.len();
    for i in 0..n {
        out[i] = c[i] + (0..n).map(|j| m[i * n + j] * u[j]).sum::<f64>();
    }
}

/// Scratch space for [`limit_fields`].
#[derive(Clone, Debug)]
pub struct FieldScratch {
    f: Vec<f64>,
    g: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    jf: BlockJacobian,
    js: BlockJacobian,
    hx: Vec<f64>,
    hy: Vec<f64>,
}

impl FieldScratch {
    pub fn new(d: usize) -> Self {
        Self {
            f: vec![0.0; d],
            g: vec![0.0; d],
            a: vec![0.0; d],
            b: vec![0.0; d],
            jf: BlockJacobian::zeros(d),
            js: BlockJacobian::zeros(d),
            hx: vec![0.0; 4 * d * d],
            hy: vec![0.0; 4 * d * d],
        }
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Blocks of the Hessian of one scalar component: returns
/// `(uᵀ H_PP u, uᵀ H_PQ v, vᵀ H_QQ v)`.
fn hessian_forms(h: &[f64], d: usize, u: &[f64], v: &[f64]) -> (f64, f64, f64) {
    let n = 2 * d;
    let (mut pp, mut pq, mut qq) = (0.0, 0.0, 0.0);
    for r in 0..d {
        for c in 0..d {
            pp += u[r] * h[r * n + c] * u[c];
            pq += u[r] * h[r * n + d + c] * v[c];
            qq += v[r] * h[(d + r) * n + d + c] * v[c];
        }
    }
    (pp, pq, qq)
}

/// Evaluates the `U`-equation coefficients at `(p, q)`.
pub fn limit_fields<C: CoefficientSet + ?Sized>(
    spec: &LimitSpec<'_, C>,
    p: &[f64],
    q: &[f64],
    s: &mut FieldScratch,
    out: &mut LimitFields,
) {
    let c = spec.coeffs;
    let d = c.dim();
    let n = 2 * d;
    c.drift(p, q, &mut s.f, &mut s.g);
    c.diffusion(p, q, &mut s.a, &mut s.b);
    c.drift_jacobian(p, q, &mut s.jf);
    c.diffusion_jacobian(p, q, &mut s.js);
    let jf = s.jf.full();
    let js = s.js.full();
    let sigma: Vec<f64> = s.a.iter().chain(&s.b).copied().collect();
    match spec.regime {
        LimitRegime::MultTheta { .. } | LimitRegime::MultEuler => {
            // A = J_F + ½(Σ_k H_{σ_i}[j][k] σ_k + J_σ J_σ)
            out.drift_matrix.copy_from_slice(&jf);
            for i in 0..n {
                for j in 0..n {
                    let sq: f64 = (0..n).map(|k| js[i * n + k] * js[k * n + j]).sum();
                    out.drift_matrix[i * n + j] += 0.5 * sq;
                }
            }
            for i in 0..d {
                c.diffusion_hessian(p, q, i, &mut s.hx, &mut s.hy);
                for j in 0..n {
                    let hx: f64 = (0..n).map(|k| s.hx[j * n + k] * sigma[k]).sum();
                    let hy: f64 = (0..n).map(|k| s.hy[j * n + k] * sigma[k]).sum();
                    out.drift_matrix[i * n + j] += 0.5 * hx;
                    out.drift_matrix[(d + i) * n + j] += 0.5 * hy;
                }
            }
            out.noise_matrix.copy_from_slice(&js);
            out.drift_offset.fill(0.0);
            out.noise_offset.fill(0.0);
            for i in 0..d {
                let row = |blk: &[f64]| blk[i * d..(i + 1) * d].to_vec();
                let (ap, aq, bp, bq) = (&row(&s.js.x_p), &row(&s.js.x_q), &row(&s.js.y_p), &row(&s.js.y_q));
                match spec.regime {
                    LimitRegime::MultTheta { theta } => {
                        let k = (2.0 * theta - 1.0) / std::f64::consts::SQRT_2;
                        out.aux_offset[i] = k * (dot(ap, &s.a) - dot(aq, &s.b));
                        out.aux_offset[d + i] = k * (dot(bp, &s.a) - dot(bq, &s.b));
                    }
                    _ => {
                        let k = -std::f64::consts::FRAC_1_SQRT_2;
                        out.aux_offset[i] = k * (dot(ap, &s.a) + dot(aq, &s.b));
                        out.aux_offset[d + i] = k * (dot(bp, &s.a) + dot(bq, &s.b));
                    }
                }
            }
        }
        LimitRegime::AddTheta { .. } | LimitRegime::AddEuler => {
            out.drift_matrix.copy_from_slice(&jf);
            out.noise_matrix.fill(0.0);
            let k3 = -(3f64).sqrt() / 6.0;
            for i in 0..d {
                c.drift_hessian(p, q, i, &mut s.hx, &mut s.hy);
                let rows = [
                    (&s.jf.x_p[i * d..(i + 1) * d], &s.jf.x_q[i * d..(i + 1) * d], &s.hx, i),
                    (&s.jf.y_p[i * d..(i + 1) * d], &s.jf.y_q[i * d..(i + 1) * d], &s.hy, d + i),
                ];
                for (phi_p, phi_q, hess, slot) in rows {
                    let (aa, ab, bb) = hessian_forms(hess, d, &s.a, &s.b);
                    let (pf, qg) = (dot(phi_p, &s.f), dot(phi_q, &s.g));
                    let (pa, qb) = (dot(phi_p, &s.a), dot(phi_q, &s.b));
                    match spec.regime {
                        LimitRegime::AddTheta { theta } => {
                            let c = theta - 0.5;
                            out.drift_offset[slot] = c * (pf - qg)
                                + (0.5 * theta * theta - 0.25) * aa
                                + (theta * (1.0 - theta) - 0.5) * ab
                                + (0.5 * (1.0 - theta).powi(2) - 0.25) * bb;
                            out.noise_offset[slot] = c * (pa - qb);
                        }
                        _ => {
                            out.drift_offset[slot] = -0.5 * (pf + qg) - 0.25 * (aa + bb + 2.0 * ab);
                            out.noise_offset[slot] = -0.5 * (pa + qb);
                        }
                    }
                    out.aux_offset[slot] = k3 * (pa + qb);
                }
            }
        }
    }
}

/// A sampled limit path on the fine grid of its lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitPath {
    pub d: usize,
    pub h_fine: f64,
    /// Flat `[U_P, U_Q]` per fine node.
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub seed: u64,
    pub path_id: u64,
}

impl LimitPath {
    pub fn len(&self) -> usize {
        self.w.len()
    }
    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
    pub fn u_at(&self, k: usize) -> &[f64] {
        &self.u[2 * self.d * k..2 * self.d * (k + 1)]
    }

    /// Appends rows `path_id, t, U_P.., U_Q.., W_t, B_t` for every `stride`-th node.
    pub fn write_csv<W: Write>(&self, mut w: W, stride: usize, header: bool) -> io::Result<()> {
        if header {
            writeln!(w, "{}", limit_header(self.d))?;
        }
        for k in (0..self.len()).step_by(stride.max(1)) {
            write!(w, "{},{}", self.path_id, fmt_f64(k as f64 * self.h_fine))?;
            for v in self.u_at(k) {
                write!(w, ",{}", fmt_f64(*v))?;
            }
            writeln!(w, ",{},{}", fmt_f64(self.w[k]), fmt_f64(self.b[k]))?;
        }
        Ok(())
    }
}

pub fn limit_header(d: usize) -> String {
    let mut s = String::from("path_id,t");
    for i in 1..=d {
        s.push_str(&format!(",U_P_{i}"));
    }
    for i in 1..=d {
        s.push_str(&format!(",U_Q_{i}"));
    }
    s.push_str(",W_t,B_t");
    s
}

/// Euler–Maruyama for the `U`-equation along a given exact path (flat `[P, Q]`
/// per fine node of `lattice`), starting from `U_0 = 0`.
pub fn simulate_limit<C: CoefficientSet + ?Sized>(
    spec: &LimitSpec<'_, C>,
    exact_path: &[f64],
    lattice: &BrownianLattice,
) -> Result<LimitPath, LimitError> {
    let d = spec.coeffs.dim();
    let db = lattice.db_fine().ok_or(LimitError::MissingAuxiliary)?;
    let dw = lattice.dw_fine();
    let expected = 2 * d * (dw.len() + 1);
    if exact_path.len() != expected {
        return Err(LimitError::PathLength { expected, got: exact_path.len() });
    }
    let h = lattice.fine_step();
    let mut stepper = LimitStepper::new(spec);
    let mut u = vec![0.0; 2 * d];
    let mut path = LimitPath {
        d,
        h_fine: h,
        u: Vec::with_capacity(expected),
        w: lattice.w_path(),
        b: lattice.b_path().unwrap_or_default(),
        seed: lattice.seed(),
        path_id: lattice.path_id(),
    };
    path.u.extend_from_slice(&u);
    for (j, (&dwj, &dbj)) in dw.iter().zip(db).enumerate() {
        let x = &exact_path[2 * d * j..2 * d * (j + 1)];
        stepper.step(&x[..d], &x[d..], &mut u, h, dwj, dbj);
        if !u.iter().all(|v| v.is_finite()) {
            return Err(LimitError::NonFinite(j));
        }
        path.u.extend_from_slice(&u);
    }
    Ok(path)
}

struct LimitStepper<'s, 'a, C: CoefficientSet + ?Sized> {
    spec: &'s LimitSpec<'a, C>,
    scratch: FieldScratch,
    fields: LimitFields,
    drift: Vec<f64>,
    noise: Vec<f64>,
}

impl<'s, 'a, C: CoefficientSet + ?Sized> LimitStepper<'s, 'a, C> {
    fn new(spec: &'s LimitSpec<'a, C>) -> Self {
        let d = spec.coeffs.dim();
        Self {
            spec,
            scratch: FieldScratch::new(d),
            fields: LimitFields::zeros(d),
            drift: vec![0.0; 2 * d],
            noise: vec![0.0; 2 * d],
        }
    }

    #[inline]
    fn step(&mut self, p: &[f64], q: &[f64], u: &mut [f64], h: f64, dw: f64, db: f64) {
        limit_fields(self.spec, p, q, &mut self.scratch, &mut self.fields);
        self.fields.drift(u, &mut self.drift);
        self.fields.noise(u, &mut self.noise);
        for i in 0..u.len() {
            u[i] += self.drift[i] * h + self.noise[i] * dw + self.fields.aux_offset[i] * db;
        }
    }
}

/// Limit state at one time, with the driving motions.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitSample {
    pub path_id: u64,
    pub u: Vec<f64>,
    pub x: Vec<f64>,
    pub w_t: f64,
    pub b_t: f64,
}

/// Default grid for limit ensembles: 100 display cells per unit time, each
/// split into 32 substeps.
pub const LIMIT_DISPLAY_N: u64 = 100;
pub const LIMIT_SUBSTEPS: u64 = 32;

/// Samples `U_t` of a built-in problem over an ensemble.
pub fn limit_samples(
    problem: ProblemId,
    regime: LimitRegime,
    t: f64,
    config: &EnsembleConfig,
) -> Result<Vec<LimitSample>, LimitError> {
    with_system!(problem, sys => limit_samples_impl(problem, sys, regime, t, config))
}

fn limit_samples_impl<S: CoefficientSet>(
    problem: ProblemId,
    sys: &S,
    regime: LimitRegime,
    t: f64,
    config: &EnsembleConfig,
) -> Result<Vec<LimitSample>, LimitError> {
    let spec = LimitSpec::new(regime, sys)?;
    let per_unit = LIMIT_DISPLAY_N * LIMIT_SUBSTEPS;
    let target = (t * per_unit as f64).round();
    if !(t > 0.0) || (target / per_unit as f64 - t).abs() > 1e-9 * t.max(1.0) {
        return Err(LimitError::OffGrid(t));
    }
    let target = target as usize;
    let horizon = (target as u64).div_ceil(per_unit);
    let batches = map_batches(config, |range| -> Result<Vec<LimitSample>, LimitError> {
        let mut lattice =
            BrownianLattice::sample_with_auxiliary(LIMIT_DISPLAY_N, LIMIT_SUBSTEPS, horizon, config.seed, 0)?;
        let h = lattice.fine_step();
        let mut stepper = LimitStepper::new(&spec);
        let mut out = Vec::new();
        for path_id in range {
            lattice.resample(path_id);
            let mut tracker = problem.exact().tracker(h);
            let mut u = vec![0.0; 2];
            let mut b = 0.0;
            let db = lattice.db_fine().expect("sampled with auxiliary motion");
            for (j, (&dwj, &dbj)) in lattice.dw_fine()[..target].iter().zip(db).enumerate() {
                let (p, q) = tracker.state();
                stepper.step(&[p], &[q], &mut u, h, dwj, dbj);
                if !u.iter().all(|v| v.is_finite()) {
                    return Err(LimitError::NonFinite(j));
                }
                tracker.advance(dwj);
                b += dbj;
            }
            let (p, q) = tracker.state();
            out.push(LimitSample { path_id, u: u.clone(), x: vec![p, q], w_t: tracker.w(), b_t: b });
        }
        Ok(out)
    })?;
    Ok(batches.into_iter().flatten().collect())
}

/// Independent draws of the closed-form Kubo Euler limit at time `t`, from
/// the auxiliary stream so they share no randomness with scheme paths.
pub fn kubo_euler_limit_draws(t: f64, paths: u64, seed: u64) -> Vec<LimitSample> {
    (0..paths)
        .map(|path_id| {
            let mut rng = motion_rng(seed, path_id, MotionTag::Auxiliary);
            let w = t.sqrt() * rng.sample::<f64, _>(StandardNormal);
            let b = t.sqrt() * rng.sample::<f64, _>(StandardNormal);
            let (up, uq) = kubo_euler_limit_closed_form(t, w, b);
            let (p, q) = (-(t + w).sin(), (t + w).cos());
            LimitSample { path_id, u: vec![up, uq], x: vec![p, q], w_t: w, b_t: b }
        })
        .collect()
}

/// Samples of `∇H(X_t) · U_t`, the first-order normalized Hamiltonian
/// deviation implied by the limit equation.
pub fn hamdev_limit_samples(
    problem: ProblemId,
    regime: LimitRegime,
    t: f64,
    config: &EnsembleConfig,
) -> Result<Vec<f64>, LimitError> {
    let samples = limit_samples(problem, regime, t, config)?;
    Ok(with_system!(problem, sys => samples
        .iter()
        .map(|s| {
            let (mut gp, mut gq) = ([0.0], [0.0]);
            sys.grad_hamiltonian(&s.x[..1], &s.x[1..], &mut gp, &mut gq);
            gp[0] * s.u[0] + gq[0] * s.u[1]
        })
        .collect()))
}

/// `(H0, H1, H2)` of the `U`-equation at state `(p, q)` and error `u = [U_P, U_Q]`.
///
/// Quadratic parts use the Jacobian convention
/// `½ U_Pᵀ y_P U_P - U_Qᵀ x_P U_P - ½ U_Qᵀ x_Q U_Q`, which coincides with the
/// symmetric form for `d = 1`. Linear parts `c_Qᵀ U_P - c_Pᵀ U_Q` carry the
/// inhomogeneous Stratonovich coefficients.
pub fn assemble_h012<C: CoefficientSet + ?Sized>(spec: &LimitSpec<'_, C>, p: &[f64], q: &[f64], u: &[f64]) -> [f64; 3] {
    let c = spec.coeffs;
    let d = c.dim();
    let (up, uq) = u.split_at(d);
    let mut jf = BlockJacobian::zeros(d);
    let mut js = BlockJacobian::zeros(d);
    c.drift_jacobian(p, q, &mut jf);
    c.diffusion_jacobian(p, q, &mut js);
    let (mut f, mut g, mut a, mut b) = (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    c.drift(p, q, &mut f, &mut g);
    c.diffusion(p, q, &mut a, &mut b);
    let quad = |j: &BlockJacobian| {
        let mut h = 0.0;
        for r in 0..d {
            for k in 0..d {
                h += 0.5 * up[r] * j.y_p[r * d + k] * up[k];
                h -= uq[r] * j.x_p[r * d + k] * up[k];
                h -= 0.5 * uq[r] * j.x_q[r * d + k] * uq[k];
            }
        }
        h
    };
    // Σ_i (cg_i U_P,i - cf_i U_Q,i)
    let linear = |cf: &[f64], cg: &[f64]| dot(cg, up) - dot(cf, uq);
    let row = |blk: &[f64], i: usize| blk[i * d..(i + 1) * d].to_vec();
    match spec.regime {
        LimitRegime::MultTheta { theta } => {
            let k = (2.0 * theta - 1.0) / std::f64::consts::SQRT_2;
            let mut h2 = 0.0;
            for i in 0..d {
                let bb = dot(&row(&js.y_p, i), &a) - dot(&row(&js.y_q, i), &b);
                let aa = dot(&row(&js.x_p, i), &a) - dot(&row(&js.x_q, i), &b);
                h2 += k * (up[i] * bb - uq[i] * aa);
            }
            [quad(&jf), quad(&js), h2]
        }
        LimitRegime::MultEuler => {
            let k = -std::f64::consts::FRAC_1_SQRT_2;
            let (mut cf, mut cg) = (vec![0.0; d], vec![0.0; d]);
            for i in 0..d {
                cf[i] = k * (dot(&row(&js.x_p, i), &a) + dot(&row(&js.x_q, i), &b));
                cg[i] = k * (dot(&row(&js.y_p, i), &a) + dot(&row(&js.y_q, i), &b));
            }
            [quad(&jf), quad(&js), linear(&cf, &cg)]
        }
        LimitRegime::AddTheta { theta } => {
            let t1 = theta * (1.0 - theta);
            let (mut h0, mut h1, mut h2) = (quad(&jf), 0.0, 0.0);
            let (mut hf, mut hg) = (vec![0.0; 4 * d * d], vec![0.0; 4 * d * d]);
            for i in 0..d {
                c.drift_hessian(p, q, i, &mut hf, &mut hg);
                let (fp, fq, gp, gq) = (row(&jf.x_p, i), row(&jf.x_q, i), row(&jf.y_p, i), row(&jf.y_q, i));
                let (gaa, gab, gbb) = hessian_forms(&hg, d, &a, &b);
                let (faa, fab, fbb) = hessian_forms(&hf, d, &a, &b);
                h0 += (theta - 0.5) * ((dot(&gp, &f) - dot(&gq, &g)) * up[i] - (dot(&fp, &f) - dot(&fq, &g)) * uq[i]);
                h0 -= (0.5 * t1 * gaa - (t1 - 0.5) * gab + 0.5 * t1 * gbb) * up[i];
                h0 += (0.5 * t1 * faa - (t1 - 0.5) * fab + 0.5 * t1 * fbb) * uq[i];
                h1 += (theta - 0.5) * ((dot(&gp, &a) - dot(&gq, &b)) * up[i] - (dot(&fp, &a) - dot(&fq, &b)) * uq[i]);
                h2 += -(3f64).sqrt() / 6.0
                    * ((dot(&gp, &a) + dot(&gq, &b)) * up[i] - (dot(&fp, &a) + dot(&fq, &b)) * uq[i]);
            }
            [h0, h1, h2]
        }
        LimitRegime::AddEuler => {
            // The Itô-to-Stratonovich correction cancels the Hessian terms of
            // the Euler drift, leaving only first derivatives.
            let (mut h0, mut h1, mut h2) = (quad(&jf), 0.0, 0.0);
            for i in 0..d {
                let (fp, fq, gp, gq) = (row(&jf.x_p, i), row(&jf.x_q, i), row(&jf.y_p, i), row(&jf.y_q, i));
                h0 += -0.5 * ((dot(&gp, &f) + dot(&gq, &g)) * up[i] - (dot(&fp, &f) + dot(&fq, &g)) * uq[i]);
                let sa_g = dot(&gp, &a) + dot(&gq, &b);
                let sa_f = dot(&fp, &a) + dot(&fq, &b);
                h1 += -0.5 * (sa_g * up[i] - sa_f * uq[i]);
                h2 += -(3f64).sqrt() / 6.0 * (sa_g * up[i] - sa_f * uq[i]);
            }
            [h0, h1, h2]
        }
    }
}

/// Canonical vector field `(-∂H/∂U_Q, ∂H/∂U_P)` by central differences with
/// unit step (exact for polynomials of degree two).
fn canonical_field<F: Fn(&[f64]) -> f64>(h: F, u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let d = n / 2;
    let mut out = vec![0.0; n];
    let mut v = u.to_vec();
    for j in 0..n {
        v[j] = u[j] + 1.0;
        let hi = h(&v);
        v[j] = u[j] - 1.0;
        let lo = h(&v);
        v[j] = u[j];
        let grad = 0.5 * (hi - lo);
        if j < d {
            out[d + j] = grad;
        } else {
            out[j - d] = -grad;
        }
    }
    out
}

/// Outcome of [`check_hamiltonian_structure`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureReport {
    /// Max of the two residuals below.
    pub residual: f64,
    /// Stratonovich form of the simulated Itô coefficients against the
    /// canonical fields of `H0, H1, H2`.
    pub conversion_residual: f64,
    /// Finite-difference linearization of the coefficient values against the
    /// homogeneous part of the canonical fields of `H0, H1`.
    pub linearization_residual: f64,
}

/// Checks that the `U`-equation is a stochastic Hamiltonian system with
/// Hamiltonians [`assemble_h012`] at state `(p, q)`, on a fixed set of probes.
pub fn check_hamiltonian_structure<C: CoefficientSet + ?Sized>(
    spec: &LimitSpec<'_, C>,
    p: &[f64],
    q: &[f64],
) -> StructureReport {
    let c = spec.coeffs;
    let d = c.dim();
    let n = 2 * d;
    let mut probes: Vec<Vec<f64>> = Vec::new();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        probes.push(e);
    }
    probes.push((0..n).map(|j| 0.7 - 1.3 * j as f64).collect());
    probes.push((0..n).map(|j| -2.1 + 0.9 * (j as f64).powi(2)).collect());

    let mut scratch = FieldScratch::new(d);
    let mut fields = LimitFields::zeros(d);
    limit_fields(spec, p, q, &mut scratch, &mut fields);
    let (mut a, mut b) = (vec![0.0; d], vec![0.0; d]);
    c.diffusion(p, q, &mut a, &mut b);
    let sigma: Vec<f64> = a.iter().chain(&b).copied().collect();

    // Fields at X ± ε σ(X) for the derivative of the dW coefficient along σ.
    let eps_x = 1e-4;
    let shifted = |sign: f64| {
        let ps: Vec<f64> = (0..d).map(|i| p[i] + sign * eps_x * sigma[i]).collect();
        let qs: Vec<f64> = (0..d).map(|i| q[i] + sign * eps_x * sigma[d + i]).collect();
        let mut s = FieldScratch::new(d);
        let mut out = LimitFields::zeros(d);
        limit_fields(spec, &ps, &qs, &mut s, &mut out);
        out
    };
    let (fp, fm) = (shifted(1.0), shifted(-1.0));

    let h = |k: usize| move |u: &[f64]| assemble_h012(spec, p, q, u)[k];
    let zero = vec![0.0; n];
    let base: Vec<Vec<f64>> = (0..3).map(|k| canonical_field(h(k), &zero)).collect();

    let eps_l = 1e-4;
    let eval_pair = |field: &dyn Fn(&[f64], &[f64], &mut [f64], &mut [f64]), u: &[f64], sign: f64| {
        let ps: Vec<f64> = (0..d).map(|i| p[i] + sign * eps_l * u[i]).collect();
        let qs: Vec<f64> = (0..d).map(|i| q[i] + sign * eps_l * u[d + i]).collect();
        let (mut x, mut y) = (vec![0.0; d], vec![0.0; d]);
        field(&ps, &qs, &mut x, &mut y);
        x.into_iter().chain(y).collect::<Vec<f64>>()
    };
    let drift = |p: &[f64], q: &[f64], x: &mut [f64], y: &mut [f64]| c.drift(p, q, x, y);
    let diffusion = |p: &[f64], q: &[f64], x: &mut [f64], y: &mut [f64]| c.diffusion(p, q, x, y);

    let mut conv: f64 = 0.0;
    let mut lin: f64 = 0.0;
    let max_diff = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    for u in &probes {
        let (mut gw, mut drift_u) = (vec![0.0; n], vec![0.0; n]);
        fields.noise(u, &mut gw);
        fields.drift(u, &mut drift_u);
        // ½ [∂_U(GU + cW) (GU + cW) + ∂_X(GU + cW) σ]
        let mut g_gw = vec![0.0; n];
        affine(&fields.noise_matrix, &zero, &gw, &mut g_gw);
        let (mut np, mut nm) = (vec![0.0; n], vec![0.0; n]);
        fp.noise(u, &mut np);
        fm.noise(u, &mut nm);
        let strat0: Vec<f64> = (0..n).map(|i| drift_u[i] - 0.5 * (g_gw[i] + (np[i] - nm[i]) / (2.0 * eps_x))).collect();
        let targets = [strat0, gw, fields.aux_offset.clone()];
        for (k, target) in targets.iter().enumerate() {
            conv = conv.max(max_diff(target, &canonical_field(h(k), u)));
        }
        for (k, field) in [(0usize, &drift as &dyn Fn(&[f64], &[f64], &mut [f64], &mut [f64])), (1, &diffusion)] {
            let plus = eval_pair(field, u, 1.0);
            let minus = eval_pair(field, u, -1.0);
            let lin_fd: Vec<f64> = (0..n).map(|i| (plus[i] - minus[i]) / (2.0 * eps_l)).collect();
            let hom: Vec<f64> = canonical_field(h(k), u).iter().zip(&base[k]).map(|(x, y)| x - y).collect();
            lin = lin.max(max_diff(&lin_fd, &hom));
        }
    }
    StructureReport { residual: conv.max(lin), conversion_residual: conv, linearization_residual: lin }
}
