//! Ensembles over paths, streaming moments and the derived statistics
//!
//! Paths are split into fixed batches of `batch_size` consecutive path ids.
//! Each batch is reduced on its own and batch results are merged in batch
//! order, so results do not depend on the number of worker threads.

use std::io::{self, Write};
use std::ops::Range;

use rayon::prelude::*;
use thiserror::Error;

use crate::integrators::{fmt_f64, IntegrateError, SchemeConfig, SchemeMethod, StepError, Stepper};
use crate::noise::{BrownianLattice, NoiseError};
use crate::problem::{CoefficientSet, HamiltonianPair, NoiseKind, ProblemId};

#[derive(Debug, Error)]
pub enum MonteCarloError {
    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(String),
    #[error("empty sample")]
    EmptySample,
    #[error("need at least {need} distinct values, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("non-positive error {0} cannot be log-regressed")]
    NonPositiveError(f64),
    #[error("evaluation time {0} is not a node of the coarse grid")]
    OffGrid(f64),
    #[error("path {path_id}, step {step}: {source}")]
    Path { path_id: u64, step: usize, source: StepError },
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnsembleConfig {
    pub paths: u64,
    pub seed: u64,
    pub batch_size: u64,
    pub workers: usize,
}

impl EnsembleConfig {
    pub fn new(paths: u64, seed: u64) -> Self {
        Self { paths, seed, batch_size: 1000, workers: 1 }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_batch_size(mut self, batch_size: u64) -> Self {
        self.batch_size = batch_size;
        self
    }

    pub fn validate(&self) -> Result<(), MonteCarloError> {
        if self.paths == 0 || self.batch_size == 0 || self.workers == 0 {
            return Err(MonteCarloError::InvalidConfig(format!(
                "paths, batch_size and workers must be positive ({self:?})"
            )));
        }
        Ok(())
    }

    pub fn batches(&self) -> Vec<Range<u64>> {
        (0..self.paths.div_ceil(self.batch_size))
            .map(|b| b * self.batch_size..((b + 1) * self.batch_size).min(self.paths))
            .collect()
    }
}

/// Runs `per_batch` on every batch of path ids and returns the results in
/// batch order. The first error in batch order wins.
pub fn map_batches<T, E, F>(config: &EnsembleConfig, per_batch: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send + From<MonteCarloError>,
    F: Fn(Range<u64>) -> Result<T, E> + Sync,
{
    config.validate()?;
    let batches = config.batches();
    let run = || batches.into_par_iter().map(&per_batch).collect::<Vec<_>>();
    let results = if config.workers == 1 {
        config.batches().into_iter().map(&per_batch).collect::<Vec<_>>()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| MonteCarloError::InvalidConfig(e.to_string()))?
            .install(run)
    };
    results.into_iter().collect()
}

/// Welford accumulator of count, mean and centered second moment.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StreamingMoments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl StreamingMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut m = Self::new();
        xs.iter().for_each(|&x| m.push(x));
        m
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Combines two accumulators (Chan et al.).
    pub fn merge(&mut self, other: &StreamingMoments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.count as f64, other.count as f64);
        self.mean += delta * nb / n as f64;
        self.m2 += other.m2 + delta * delta * na * nb / n as f64;
        self.count = n;
    }

    pub fn count(&self) -> u64 {
        self.count
    }
    pub fn mean(&self) -> f64 {
        self.mean
    }
    /// Unbiased sample variance; `NaN` with fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
    /// Mean of the squared samples.
    pub fn second_moment(&self) -> f64 {
        self.m2 / self.count as f64 + self.mean * self.mean
    }
}

/// Mean and 95% normal half-width `1.96 √(s²/M)`.
pub fn confidence_interval(m: &StreamingMoments) -> Result<(f64, f64), MonteCarloError> {
    if m.count() < 2 {
        return Err(MonteCarloError::TooFewPoints { need: 2, got: m.count() as usize });
    }
    Ok((m.mean(), 1.96 * (m.variance() / m.count() as f64).sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KSResult {
    pub statistic: f64,
    pub n1: usize,
    pub n2: usize,
}

impl KSResult {
    /// Critical value `c √((n1+n2)/(n1 n2))`; `c = 1.63` is the 1% level.
    pub fn critical_value(&self, c: f64) -> f64 {
        c * ((self.n1 + self.n2) as f64 / (self.n1 * self.n2) as f64).sqrt()
    }
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn two_sample_ks(xs: &[f64], ys: &[f64]) -> Result<KSResult, MonteCarloError> {
    if xs.is_empty() || ys.is_empty() {
        return Err(MonteCarloError::EmptySample);
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n1, n2) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n1 && j < n2 {
        let v = if a[i].total_cmp(&b[j]).is_le() { a[i] } else { b[j] };
        while i < n1 && a[i] == v {
            i += 1;
        }
        while j < n2 && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    Ok(KSResult { statistic: d, n1, n2 })
}

/// Least-squares slope of `log(error)` against `log(1/n)`.
pub fn empirical_order(pairs: &[(f64, f64)]) -> Result<f64, MonteCarloError> {
    let mut ns: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    ns.sort_by(f64::total_cmp);
    ns.dedup();
    if ns.len() < 3 {
        return Err(MonteCarloError::TooFewPoints { need: 3, got: ns.len() });
    }
    if let Some(&(_, e)) = pairs.iter().find(|p| !(p.1 > 0.0)) {
        return Err(MonteCarloError::NonPositiveError(e));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| -p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Knobs shared by the problem-level jobs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub rho: f64,
    /// Fine cells per coarse cell. For grid-based exact solutions the
    /// refinement is raised so that the fine step is at most `h² T`; exact
    /// solutions that are pointwise functions of `W` need no refinement.
    pub refine: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { rho: 2.5, refine: 16 }
    }
}

/// Refinement actually used for a problem at coarse resolution `n` on `[0, horizon]`.
pub fn effective_refinement(problem: ProblemId, n: u64, horizon: u64, requested: u64) -> u64 {
    match problem.exact().kind() {
        crate::problem::ExactKind::PointwiseOfW => 1,
        crate::problem::ExactKind::ConvolutionOnGrid => requested.max(n.div_ceil(horizon)),
    }
}

/// Exponent `p` in the normalization `n^p`: `½` for multiplicative, `1` for additive noise.
pub fn normalization_exponent(kind: NoiseKind) -> f64 {
    match kind {
        NoiseKind::Multiplicative => 0.5,
        NoiseKind::Additive => 1.0,
    }
}

fn grid_indices(times: &[f64], n: u64) -> Result<(Vec<usize>, u64), MonteCarloError> {
    let mut idx = Vec::with_capacity(times.len());
    for &t in times {
        let k = (t * n as f64).round();
        if !(t > 0.0) || ((k / n as f64) - t).abs() > 1e-9 * t.max(1.0) {
            return Err(MonteCarloError::OffGrid(t));
        }
        idx.push(k as usize);
    }
    let last = idx.iter().copied().max().ok_or(MonteCarloError::EmptySample)?;
    let horizon = (last as u64).div_ceil(n);
    Ok((idx, horizon))
}

/// Statistics of the normalized Hamiltonian deviation `n^p (H(X^n_t) - H(X_t))`
/// for one method at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviationStats {
    pub method: SchemeMethod,
    pub n: u64,
    pub t: f64,
    /// Moments of `n^p ΔH`.
    pub scaled: StreamingMoments,
    /// Moments of `(n^p ΔH)²`.
    pub scaled_sq: StreamingMoments,
    pub clamp_count: u64,
}

/// Reusable per-path state: the lattice and one stepper per method.
struct PathRunner<'a, S: CoefficientSet> {
    problem: ProblemId,
    system: &'a S,
    schemes: Vec<SchemeConfig>,
    steppers: Vec<Stepper<'a, S>>,
    lattice: BrownianLattice,
    states: Vec<Vec<f64>>,
}

impl<'a, S: CoefficientSet> PathRunner<'a, S> {
    fn new(
        problem: ProblemId,
        system: &'a S,
        methods: &[SchemeMethod],
        n: u64,
        horizon: u64,
        opts: &RunOptions,
        seed: u64,
    ) -> Result<Self, MonteCarloError> {
        let schemes: Vec<_> =
            methods.iter().map(|&m| SchemeConfig::for_noise(m, n, problem.noise_kind()).with_rho(opts.rho)).collect();
        for s in &schemes {
            s.validate()?;
        }
        let steppers = schemes.iter().map(|s| Stepper::new(system, s.method, s.solver)).collect();
        let m = effective_refinement(problem, n, horizon, opts.refine);
        let lattice = BrownianLattice::sample(n, m, horizon, seed, 0)?;
        let states = vec![problem.initial().to_flat(); methods.len()];
        Ok(Self { problem, system, schemes, steppers, lattice, states })
    }

    /// Integrates all methods along path `path_id`, calling `visit(k, exact, states, w)`
    /// after every coarse step `k + 1`.
    fn run<F>(&mut self, path_id: u64, clamps: &mut [u64], mut visit: F) -> Result<(), MonteCarloError>
    where
        F: FnMut(usize, &[f64], &[Vec<f64>], f64),
    {
        self.lattice.resample(path_id);
        let n = self.lattice.n();
        let h = self.lattice.coarse_step();
        let m = self.lattice.m() as usize;
        let mut tracker = self.problem.exact().tracker(self.lattice.fine_step());
        let init = self.problem.initial().to_flat();
        for s in self.states.iter_mut() {
            s.copy_from_slice(&init);
        }
        let _ = self.system;
        for (k, cell) in self.lattice.dw_fine().chunks_exact(m).enumerate() {
            let mut dw = 0.0;
            for &x in cell {
                dw += x;
                tracker.advance(x);
            }
            for (i, (st, cfg)) in self.steppers.iter_mut().zip(&self.schemes).enumerate() {
                let (dw_hat, clamped) = cfg.truncation.apply(dw, n);
                clamps[i] += clamped as u64;
                st.step(&mut self.states[i], h, dw_hat).map_err(|source| MonteCarloError::Path {
                    path_id,
                    step: k,
                    source,
                })?;
            }
            let (p, q) = tracker.state();
            visit(k + 1, &[p, q], &self.states, tracker.w());
        }
        Ok(())
    }
}

/// Dispatches a generic body over the concrete system of a built-in problem.
macro_rules! with_system {
    ($id:expr, $sys:ident => $body:expr) => {
        match $id {
            $crate::problem::ProblemId::Kubo => {
                let $sys = &$crate::problem::Kubo;
                $body
            }
            $crate::problem::ProblemId::LinOsc => {
                let $sys = &$crate::problem::LinearOscillator;
                $body
            }
        }
    };
}
pub(crate) use with_system;

/// Monte Carlo estimate of the normalized Hamiltonian deviation for several
/// methods driven by the same paths. Returns one entry per `(method, time)`,
/// methods outermost.
pub fn scaled_hamiltonian_deviation(
    problem: ProblemId,
    methods: &[SchemeMethod],
    n: u64,
    times: &[f64],
    opts: &RunOptions,
    config: &EnsembleConfig,
) -> Result<Vec<DeviationStats>, MonteCarloError> {
    with_system!(problem, sys => deviation_impl(problem, sys, methods, n, times, opts, config))
}

fn deviation_impl<S: CoefficientSet + HamiltonianPair>(
    problem: ProblemId,
    sys: &S,
    methods: &[SchemeMethod],
    n: u64,
    times: &[f64],
    opts: &RunOptions,
    config: &EnsembleConfig,
) -> Result<Vec<DeviationStats>, MonteCarloError> {
    let (idx, horizon) = grid_indices(times, n)?;
    let scale = (n as f64).powf(normalization_exponent(problem.noise_kind()));
    let nm = methods.len();
    let nt = times.len();
    type Acc = (Vec<StreamingMoments>, Vec<StreamingMoments>, Vec<u64>);
    let batches: Vec<Acc> = map_batches(config, |range| -> Result<Acc, MonteCarloError> {
        let mut runner = PathRunner::new(problem, sys, methods, n, horizon, opts, config.seed)?;
        let mut mom = vec![StreamingMoments::new(); nm * nt];
        let mut sq = vec![StreamingMoments::new(); nm * nt];
        let mut clamps = vec![0u64; nm];
        for path_id in range {
            runner.run(path_id, &mut clamps, |k, exact, states, _w| {
                for (ti, _) in idx.iter().enumerate().filter(|(_, &i)| i == k) {
                    let h_ref = sys.hamiltonian(&exact[..1], &exact[1..]);
                    for (mi, x) in states.iter().enumerate() {
                        let d = x.len() / 2;
                        let v = scale * (sys.hamiltonian(&x[..d], &x[d..]) - h_ref);
                        mom[mi * nt + ti].push(v);
                        sq[mi * nt + ti].push(v * v);
                    }
                }
            })?;
        }
        Ok((mom, sq, clamps))
    })?;
    let mut mom = vec![StreamingMoments::new(); nm * nt];
    let mut sq = vec![StreamingMoments::new(); nm * nt];
    let mut clamps = vec![0u64; nm];
    for (bm, bs, bc) in &batches {
        for i in 0..nm * nt {
            mom[i].merge(&bm[i]);
            sq[i].merge(&bs[i]);
        }
        for i in 0..nm {
            clamps[i] += bc[i];
        }
    }
    let mut out = Vec::with_capacity(nm * nt);
    for (mi, &method) in methods.iter().enumerate() {
        for (ti, &t) in times.iter().enumerate() {
            out.push(DeviationStats {
                method,
                n,
                t,
                scaled: mom[mi * nt + ti],
                scaled_sq: sq[mi * nt + ti],
                clamp_count: clamps[mi],
            });
        }
    }
    Ok(out)
}

/// Normalized error `n^p (X^n_t - X_t)` of one path, with the driving `W_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorSample {
    pub path_id: u64,
    /// `[P.., Q..]` components.
    pub scaled: Vec<f64>,
    pub w_t: f64,
    /// Scheme paths never draw the auxiliary motion.
    pub b_t: Option<f64>,
}

pub fn scaled_error_samples(
    problem: ProblemId,
    method: SchemeMethod,
    n: u64,
    t: f64,
    opts: &RunOptions,
    config: &EnsembleConfig,
) -> Result<Vec<ErrorSample>, MonteCarloError> {
    with_system!(problem, sys => error_samples_impl(problem, sys, method, n, t, opts, config))
}

fn error_samples_impl<S: CoefficientSet>(
    problem: ProblemId,
    sys: &S,
    method: SchemeMethod,
    n: u64,
    t: f64,
    opts: &RunOptions,
    config: &EnsembleConfig,
) -> Result<Vec<ErrorSample>, MonteCarloError> {
    let (idx, horizon) = grid_indices(&[t], n)?;
    let target = idx[0];
    let scale = (n as f64).powf(normalization_exponent(problem.noise_kind()));
    let batches = map_batches(config, |range| -> Result<Vec<ErrorSample>, MonteCarloError> {
        let mut runner = PathRunner::new(problem, sys, &[method], n, horizon, opts, config.seed)?;
        let mut out = Vec::with_capacity((range.end - range.start) as usize);
        let mut clamps = [0u64];
        for path_id in range {
            let mut sample = None;
            runner.run(path_id, &mut clamps, |k, exact, states, w| {
                if k == target {
                    let scaled = states[0].iter().zip(exact).map(|(x, e)| scale * (x - e)).collect();
                    sample = Some(ErrorSample { path_id, scaled, w_t: w, b_t: None });
                }
            })?;
            out.extend(sample);
        }
        Ok(out)
    })?;
    Ok(batches.into_iter().flatten().collect())
}

/// One rung of a strong-error ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderPoint {
    pub n: u64,
    /// Root mean square of the terminal max-norm error.
    pub rms_terminal: f64,
    /// Moments of `n^p |X^n_T - X_T|` (max norm).
    pub scaled: StreamingMoments,
    /// Moments of the supremum over nodes of the max-norm error.
    pub sup: StreamingMoments,
}

/// Strong errors of one method for every `n` in `ladder`, all driven by the
/// same Brownian paths on a common fine grid.
pub fn strong_error_ladder(
    problem: ProblemId,
    method: SchemeMethod,
    ladder: &[u64],
    horizon: u64,
    opts: &RunOptions,
    config: &EnsembleConfig,
) -> Result<Vec<LadderPoint>, MonteCarloError> {
    with_system!(problem, sys => ladder_impl(problem, sys, method, ladder, horizon, opts, config))
}

fn ladder_impl<S: CoefficientSet>(
    problem: ProblemId,
    sys: &S,
    method: SchemeMethod,
    ladder: &[u64],
    horizon: u64,
    opts: &RunOptions,
    config: &EnsembleConfig,
) -> Result<Vec<LadderPoint>, MonteCarloError> {
    let n_min = *ladder.iter().min().ok_or(MonteCarloError::EmptySample)?;
    let n_max = *ladder.iter().max().unwrap();
    let m_req = effective_refinement(problem, n_max, horizon, opts.refine);
    let per_unit = n_max * m_req;
    if let Some(&bad) = ladder.iter().find(|&&n| per_unit % n != 0) {
        return Err(MonteCarloError::InvalidConfig(format!("ladder value {bad} does not divide {per_unit}")));
    }
    let schemes: Vec<_> =
        ladder.iter().map(|&n| SchemeConfig::for_noise(method, n, problem.noise_kind()).with_rho(opts.rho)).collect();
    for s in &schemes {
        s.validate()?;
    }
    let scale_p = normalization_exponent(problem.noise_kind());
    type Acc = Vec<(StreamingMoments, StreamingMoments, StreamingMoments)>;
    let batches: Vec<Acc> = map_batches(config, |range| -> Result<Acc, MonteCarloError> {
        let mut lattice = BrownianLattice::sample(n_min, per_unit / n_min, horizon, config.seed, 0)?;
        let mut acc: Acc = vec![Default::default(); ladder.len()];
        let exact = problem.exact();
        for path_id in range {
            lattice.resample(path_id);
            let fine = lattice.dw_fine();
            let reference = exact.path_on_fine_grid(fine, 1.0 / per_unit as f64);
            for (li, cfg) in schemes.iter().enumerate() {
                let n = cfg.n;
                let stride = (per_unit / n) as usize;
                let h = 1.0 / n as f64;
                let mut st = Stepper::new(sys, cfg.method, cfg.solver);
                let mut x = problem.initial().to_flat();
                let mut sup: f64 = 0.0;
                let mut last = 0.0;
                for (k, cell) in fine.chunks_exact(stride).enumerate() {
                    let dw: f64 = cell.iter().sum();
                    let (dw_hat, _) = cfg.truncation.apply(dw, n);
                    st.step(&mut x, h, dw_hat).map_err(|source| MonteCarloError::Path { path_id, step: k, source })?;
                    let node = (k + 1) * stride;
                    let r = &reference[2 * node..2 * node + 2];
                    last = x.iter().zip(r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    sup = sup.max(last);
                }
                acc[li].0.push(last * last);
                acc[li].1.push((n as f64).powf(scale_p) * last);
                acc[li].2.push(sup);
            }
        }
        Ok(acc)
    })?;
    let mut total: Acc = vec![Default::default(); ladder.len()];
    for b in &batches {
        for (t, x) in total.iter_mut().zip(b) {
            t.0.merge(&x.0);
            t.1.merge(&x.1);
            t.2.merge(&x.2);
        }
    }
    Ok(ladder
        .iter()
        .zip(total)
        .map(|(&n, (sq, scaled, sup))| LadderPoint { n, rms_terminal: sq.mean().sqrt(), scaled, sup })
        .collect())
}

/// One line of a statistics CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct StatRow {
    pub job_id: String,
    pub problem: ProblemId,
    pub method: Option<SchemeMethod>,
    pub n: u64,
    pub t: f64,
    pub paths: u64,
    pub statistic: String,
    pub value: f64,
    pub ci_halfwidth: f64,
}

pub const STATS_HEADER: &str = "job_id,problem,method,theta,n,t,M,statistic_name,value,ci_halfwidth";

pub fn write_stats_csv<W: Write>(rows: &[StatRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{STATS_HEADER}")?;
    for r in rows {
        let (method, theta) = match r.method {
            Some(SchemeMethod::EulerMaruyama) => ("euler", String::new()),
            Some(SchemeMethod::SymplTheta { theta }) => ("sympl", fmt_f64(theta)),
            None => ("limit", String::new()),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.job_id,
            r.problem,
            method,
            theta,
            r.n,
            fmt_f64(r.t),
            r.paths,
            r.statistic,
            fmt_f64(r.value),
            fmt_f64(r.ci_halfwidth)
        )?;
    }
    Ok(())
}

pub fn stats_csv_string(rows: &[StatRow]) -> String {
    let mut buf = Vec::new();
    write_stats_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Mean and second-moment rows for a set of deviation statistics.
pub fn deviation_rows(job_id: &str, problem: ProblemId, stats: &[DeviationStats]) -> Vec<StatRow> {
    let mut rows = Vec::new();
    for s in stats {
        for (name, m) in [("scaled_mean", &s.scaled), ("scaled_second_moment", &s.scaled_sq)] {
            let (value, ci) = confidence_interval(m).unwrap_or((m.mean(), f64::NAN));
            rows.push(StatRow {
                job_id: job_id.to_string(),
                problem,
                method: Some(s.method),
                n: s.n,
                t: s.t,
                paths: m.count(),
                statistic: name.to_string(),
                value,
                ci_halfwidth: ci,
            });
        }
    }
    rows
}
