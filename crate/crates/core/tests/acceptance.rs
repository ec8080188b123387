//! Acceptance suite. Prints one PASS/FAIL line per check and exits non-zero
//! if any check fails.
//!
//! `cargo test --release --test acceptance` runs everything; trailing numbers
//! select checks, e.g. `cargo test --test acceptance -- 2 7`.

use std::collections::HashMap;
use std::error::Error;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shs_lab::integrators::SchemeMethod;
use shs_lab::limit::{
    check_hamiltonian_structure, kubo_euler_limit_draws, limit_samples, simulate_limit, LimitRegime, LimitSpec,
};
use shs_lab::modified::modified_closeness;
use shs_lab::montecarlo::{
    confidence_interval, deviation_rows, empirical_order, map_batches, scaled_error_samples,
    scaled_hamiltonian_deviation, stats_csv_string, strong_error_ladder, two_sample_ks, DeviationStats, EnsembleConfig,
    LadderPoint, MonteCarloError, RunOptions, StatRow, StreamingMoments,
};
use shs_lab::noise::{omega_complement_frequency, two_sided_tail, BrownianLattice, OmegaProbe, TruncationPolicy};
use shs_lab::problem::{
    hamdev_limit_value, CoefficientSet, Kubo, LimitMethod, LinearOscillator, ProblemId, ScaledDriftJacobian,
};

type Res<T> = Result<T, Box<dyn Error>>;

const SEED: u64 = 20240917;
const LADDER: [u64; 6] = [16, 32, 64, 128, 256, 512];
const ME_LADDER: [u64; 4] = [32, 64, 128, 256];

const EULER: SchemeMethod = SchemeMethod::EulerMaruyama;
const SYMPL: SchemeMethod = SchemeMethod::SymplTheta { theta: 1.0 };
const MIDPOINT: SchemeMethod = SchemeMethod::SymplTheta { theta: 0.5 };
const SYMPL_LOW: SchemeMethod = SchemeMethod::SymplTheta { theta: 0.1 };

struct Verdict {
    pass: bool,
    detail: String,
    /// Statistics CSV of the run, compared across worker counts.
    csv: String,
}

/// Ensemble results shared between checks, keyed by worker count.
#[derive(Default)]
struct Shared {
    ladders: HashMap<(usize, &'static str), (Vec<LadderPoint>, Duration)>,
    kubo_profile: HashMap<usize, (Vec<DeviationStats>, Duration)>,
    lin_profile: HashMap<usize, (Vec<DeviationStats>, Duration)>,
}

fn ens(paths: u64, workers: usize) -> EnsembleConfig {
    EnsembleConfig::new(paths, SEED).with_workers(workers)
}

fn opts() -> RunOptions {
    RunOptions::default()
}

fn timed<T>(f: impl FnOnce() -> Res<T>) -> Res<(T, Duration)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed()))
}

fn ladder<'a>(
    sh: &'a mut Shared,
    workers: usize,
    key: &'static str,
    problem: ProblemId,
    method: SchemeMethod,
) -> Res<&'a (Vec<LadderPoint>, Duration)> {
    if !sh.ladders.contains_key(&(workers, key)) {
        let run = timed(|| Ok(strong_error_ladder(problem, method, &LADDER, 1, &opts(), &ens(2000, workers))?))?;
        sh.ladders.insert((workers, key), run);
    }
    Ok(&sh.ladders[&(workers, key)])
}

fn kubo_profile(sh: &mut Shared, workers: usize) -> Res<&(Vec<DeviationStats>, Duration)> {
    if !sh.kubo_profile.contains_key(&workers) {
        let times: Vec<f64> = (1..=10).map(f64::from).collect();
        let run = timed(|| {
            Ok(scaled_hamiltonian_deviation(
                ProblemId::Kubo,
                &[EULER, SYMPL],
                100,
                &times,
                &opts(),
                &ens(100_000, workers),
            )?)
        })?;
        sh.kubo_profile.insert(workers, run);
    }
    Ok(&sh.kubo_profile[&workers])
}

fn lin_profile(sh: &mut Shared, workers: usize) -> Res<&(Vec<DeviationStats>, Duration)> {
    if !sh.lin_profile.contains_key(&workers) {
        let times: Vec<f64> = (1..=12).map(|k| 0.5 * k as f64).collect();
        let run = timed(|| {
            Ok(scaled_hamiltonian_deviation(
                ProblemId::LinOsc,
                &[EULER, SYMPL, SYMPL_LOW],
                100,
                &times,
                &RunOptions { refine: 25, ..opts() },
                &ens(1_000_000, workers),
            )?)
        })?;
        sh.lin_profile.insert(workers, run);
    }
    Ok(&sh.lin_profile[&workers])
}

fn stat<'a>(stats: &'a [DeviationStats], method: SchemeMethod, t: f64) -> &'a DeviationStats {
    stats.iter().find(|s| s.method == method && (s.t - t).abs() < 1e-12).expect("statistic was computed")
}

fn row(
    job: &str,
    problem: ProblemId,
    method: Option<SchemeMethod>,
    n: u64,
    t: f64,
    paths: u64,
    name: &str,
    v: f64,
) -> StatRow {
    StatRow {
        job_id: job.into(),
        problem,
        method,
        n,
        t,
        paths,
        statistic: name.into(),
        value: v,
        ci_halfwidth: f64::NAN,
    }
}

fn ladder_rows(job: &str, problem: ProblemId, method: SchemeMethod, pts: &[LadderPoint]) -> Vec<StatRow> {
    pts.iter()
        .flat_map(|p| {
            [
                row(job, problem, Some(method), p.n, 1.0, 2000, "rms_terminal_error", p.rms_terminal),
                row(job, problem, Some(method), p.n, 1.0, 2000, "scaled_second_moment", p.scaled.second_moment()),
            ]
        })
        .collect()
}

fn slope(pts: &[LadderPoint]) -> Res<f64> {
    let pairs: Vec<_> = pts.iter().map(|p| (p.n as f64, p.rms_terminal)).collect();
    Ok(empirical_order(&pairs)?)
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target.abs()
}

// 1. Strong orders on the n-ladder.
fn strong_orders(sh: &mut Shared, workers: usize) -> Res<Verdict> {
    let cases = [
        ("kubo_sympl", ProblemId::Kubo, SYMPL, 0.40, 0.60),
        ("linosc_sympl", ProblemId::LinOsc, SYMPL, 0.85, 1.15),
        ("kubo_midpoint", ProblemId::Kubo, MIDPOINT, 0.85, 1.15),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    let mut rows = Vec::new();
    let mut total = Duration::ZERO;
    for (key, problem, method, lo, hi) in cases {
        let (pts, took) = ladder(sh, workers, key, problem, method)?;
        let s = slope(pts)?;
        total += *took;
        pass &= (lo..=hi).contains(&s);
        detail.push(format!("{key} slope {s:.3} in [{lo}, {hi}]"));
        rows.extend(ladder_rows("order", problem, method, pts));
    }
    pass &= total <= Duration::from_secs(120);
    detail.push(format!("{:.1}s", total.as_secs_f64()));
    Ok(Verdict { pass, detail: detail.join("; "), csv: stats_csv_string(&rows) })
}

// 2. Kubo second moment at T = 4.
fn kubo_second_moment(sh: &mut Shared, workers: usize) -> Res<Verdict> {
    let (stats, took) = kubo_profile(sh, workers)?;
    let e = stat(stats, EULER, 4.0).scaled_sq.mean();
    let s = stat(stats, SYMPL, 4.0).scaled_sq.mean();
    let sympl_ref = hamdev_limit_value(ProblemId::Kubo, LimitMethod::SymplTheta(1.0), 4.0).unwrap();
    let checks = [within(e, 2.0, 0.10), within(s, 1.025, 0.10), s < e, *took <= Duration::from_secs(60)];
    let detail = format!(
        "euler n E[dH^2] = {e:.4} (2.0 ± 10%) {}; sympl = {s:.4} (1.025 ± 10%, formula {sympl_ref:.4}) {}; sympl < euler {}; {:.1}s",
        ok(checks[0]),
        ok(checks[1]),
        ok(checks[2]),
        took.as_secs_f64()
    );
    let rows: Vec<_> = deviation_rows("hamdev", ProblemId::Kubo, stats).into_iter().filter(|r| r.t == 4.0).collect();
    Ok(Verdict { pass: checks.iter().all(|&c| c), detail, csv: stats_csv_string(&rows) })
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "out"
    }
}

// 3. Kubo mean deviation vanishes at the √n scale.
fn kubo_mean(sh: &mut Shared, workers: usize) -> Res<Verdict> {
    let (stats, _) = kubo_profile(sh, workers)?;
    let mut pass = true;
    let mut detail = Vec::new();
    for (label, m) in [("euler", EULER), ("sympl", SYMPL)] {
        let (mean, ci) = confidence_interval(&stat(stats, m, 4.0).scaled)?;
        let good = mean.abs() <= 3.0 * ci;
        pass &= good;
        detail.push(format!("{label} sqrt(n) E[dH] = {mean:.4}, 3 CI = {:.4} {}", 3.0 * ci, ok(good)));
    }
    let rows: Vec<_> = deviation_rows("hamdev", ProblemId::Kubo, stats)
        .into_iter()
        .filter(|r| r.t == 4.0 && r.statistic == "scaled_mean")
        .collect();
    Ok(Verdict { pass, detail: detail.join("; "), csv: stats_csv_string(&rows) })
}

// 4. Linear oscillator mean deviation at T = 4.
fn linosc_mean(sh: &mut Shared, workers: usize) -> Res<Verdict> {
    let (stats, took) = lin_profile(sh, workers)?;
    let e = stat(stats, EULER, 4.0).scaled.mean();
    let s = stat(stats, SYMPL, 4.0).scaled.mean();
    let mut low_ok = true;
    let mut low_bad = Vec::new();
    for st in stats.iter().filter(|st| st.method == SYMPL_LOW) {
        if 1.0 - (2.0 * st.t).cos() > 0.0 && !(st.scaled.mean() < 0.0) {
            low_ok = false;
            low_bad.push(format!("t={} {:.4}", st.t, st.scaled.mean()));
        }
    }
    let checks = [within(e, 4.0, 0.10), (s - 0.1432).abs() <= 0.05, low_ok, *took <= Duration::from_secs(600)];
    let detail = format!(
        "euler n E[dH] = {e:.4} (4.0 ± 10%) {}; theta=1 {s:.4} (0.1432 ± 0.05) {}; theta=0.1 negative {}{}; {:.1}s",
        ok(checks[0]),
        ok(checks[1]),
        ok(checks[2]),
        if low_bad.is_empty() { String::new() } else { format!(" (not at {})", low_bad.join(", ")) },
        took.as_secs_f64()
    );
    let rows: Vec<_> = deviation_rows("hamdev", ProblemId::LinOsc, stats)
        .into_iter()
        .filter(|r| r.statistic == "scaled_mean")
        .collect();
    Ok(Verdict { pass: checks.iter().all(|&c| c), detail, csv: stats_csv_string(&rows) })
}

// 5. Time profiles: Euler tracks the limit, the symplectic curve stays below.
fn time_profiles(sh: &mut Shared, workers: usize) -> Res<Verdict> {
    let mut rows = Vec::new();
    let mut detail = Vec::new();
    let mut pass = true;
    let (kubo, _) = kubo_profile(sh, workers)?;
    let (kubo_track, kubo_below) = profile_checks(kubo, |s| s.scaled_sq.mean(), |t| t / 2.0);
    rows.extend(deviation_rows("profile", ProblemId::Kubo, kubo).into_iter().filter(|r| r.statistic != "scaled_mean"));
    let (lin, _) = lin_profile(sh, workers)?;
    let (lin_track, lin_below) = profile_checks(lin, |s| s.scaled.mean(), |t| t * t / 4.0);
    rows.extend(deviation_rows("profile", ProblemId::LinOsc, lin).into_iter().filter(|r| r.statistic == "scaled_mean"));
    for (label, track, below) in [("kubo", kubo_track, kubo_below), ("linosc", lin_track, lin_below)] {
        pass &= track.is_empty() && below.is_empty();
        detail.push(format!(
            "{label} euler within 15% {}, sympl below euler {}",
            if track.is_empty() { "everywhere".to_string() } else { format!("fails at {}", track.join(" ")) },
            if below.is_empty() { "everywhere".to_string() } else { format!("fails at {}", below.join(" ")) },
        ));
    }
    Ok(Verdict { pass, detail: detail.join("; "), csv: stats_csv_string(&rows) })
}

fn profile_checks(
    stats: &[DeviationStats],
    value: impl Fn(&DeviationStats) -> f64,
    limit: impl Fn(f64) -> f64,
) -> (Vec<String>, Vec<String>) {
    let (mut track, mut below) = (Vec::new(), Vec::new());
    for e in stats.iter().filter(|s| s.method == EULER) {
        let (ev, lv) = (value(e), limit(e.t));
        if !within(ev, lv, 0.15) {
            track.push(format!("t={}({:.3} vs {:.3})", e.t, ev, lv));
        }
        if !(value(stat(stats, SYMPL, e.t)) < ev) {
            below.push(format!("t={}", e.t));
        }
    }
    (track, below)
}

// 6. Euler error distribution against the closed-form limit.
fn error_distribution(_: &mut Shared, workers: usize) -> Res<Verdict> {
    let (n, t, m) = (200, 1.0, 10_000);
    let scheme = scaled_error_samples(ProblemId::Kubo, EULER, n, t, &opts(), &ens(m, workers))?;
    let limit = kubo_euler_limit_draws(t, m, SEED + 1);
    let pick = |xs: Vec<(f64, f64)>, sign: i8| -> Vec<f64> {
        xs.into_iter().filter(|&(_, w)| sign == 0 || (w > 0.0) == (sign > 0)).map(|(u, _)| u).collect()
    };
    let a: Vec<_> = scheme.iter().map(|s| (s.scaled[0], s.w_t)).collect();
    let b: Vec<_> = limit.iter().map(|s| (s.u[0], s.w_t)).collect();
    let all = two_sample_ks(&pick(a.clone(), 0), &pick(b.clone(), 0))?.statistic;
    let pos = two_sample_ks(&pick(a.clone(), 1), &pick(b.clone(), 1))?.statistic;
    let neg = two_sample_ks(&pick(a, -1), &pick(b, -1))?.statistic;
    let pass = all <= 0.05 && pos <= 0.08 && neg <= 0.08;
    let rows = [("ks_all_P", all), ("ks_w_pos_P", pos), ("ks_w_neg_P", neg)]
        .map(|(name, v)| row("errordist", ProblemId::Kubo, Some(EULER), n, t, m, name, v));
    Ok(Verdict {
        pass,
        detail: format!("D = {all:.4} (≤ 0.05); W_T > 0: {pos:.4}, W_T < 0: {neg:.4} (≤ 0.08)"),
        csv: stats_csv_string(&rows),
    })
}

// 7. Hamiltonian structure of the limit equations.
fn structure(_: &mut Shared, _: usize) -> Res<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let states: Vec<(f64, f64)> =
        (0..100).map(|_| (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
    let thetas = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut worst: f64 = 0.0;
    let mut weakest_corrupted = f64::INFINITY;
    let mut rows = Vec::new();
    let mut detail = Vec::new();
    fn run<C: CoefficientSet>(c: &C, regime: LimitRegime, states: &[(f64, f64)]) -> Res<f64> {
        let spec = LimitSpec::new(regime, c)?;
        Ok(states.iter().map(|&(p, q)| check_hamiltonian_structure(&spec, &[p], &[q]).residual).fold(0.0, f64::max))
    }
    for (problem, regimes) in [
        (
            ProblemId::Kubo,
            thetas
                .iter()
                .map(|&theta| LimitRegime::MultTheta { theta })
                .chain([LimitRegime::MultEuler])
                .collect::<Vec<_>>(),
        ),
        (
            ProblemId::LinOsc,
            thetas.iter().map(|&theta| LimitRegime::AddTheta { theta }).chain([LimitRegime::AddEuler]).collect(),
        ),
    ] {
        let mut max_r: f64 = 0.0;
        for regime in regimes {
            let (r, bad) = match problem {
                ProblemId::Kubo => (
                    run(&Kubo, regime, &states)?,
                    run(&ScaledDriftJacobian { inner: Kubo, factor: 1.1 }, regime, &states)?,
                ),
                ProblemId::LinOsc => (
                    run(&LinearOscillator, regime, &states)?,
                    run(&ScaledDriftJacobian { inner: LinearOscillator, factor: 1.1 }, regime, &states)?,
                ),
            };
            max_r = max_r.max(r);
            worst = worst.max(r);
            weakest_corrupted = weakest_corrupted.min(bad);
            rows.push(row("structure", problem, None, 0, 0.0, 100, &format!("{regime:?}"), r));
        }
        detail.push(format!("{problem} max residual {max_r:.2e}"));
    }
    detail.push(format!("corrupted min residual {weakest_corrupted:.3}"));
    Ok(Verdict {
        pass: worst <= 1e-10 && weakest_corrupted >= 0.01,
        detail: detail.join("; "),
        csv: stats_csv_string(&rows),
    })
}

// 8. Midpoint degeneracy.
fn midpoint(sh: &mut Shared, workers: usize) -> Res<Verdict> {
    let samples = limit_samples(ProblemId::Kubo, LimitRegime::MultTheta { theta: 0.5 }, 1.0, &ens(1000, workers))?;
    let sample_zero = samples.iter().all(|s| s.u.iter().all(|&u| u == 0.0));
    let lattice = BrownianLattice::sample_with_auxiliary(100, 32, 2, SEED, 0)?;
    let exact = ProblemId::Kubo.exact().path_on_fine_grid(lattice.dw_fine(), lattice.fine_step());
    let spec = LimitSpec::new(LimitRegime::MultTheta { theta: 0.5 }, &Kubo)?;
    let path = simulate_limit(&spec, &exact, &lattice)?;
    let path_zero = path.u.iter().all(|&u| u == 0.0);
    let (pts, _) = ladder(sh, workers, "kubo_midpoint", ProblemId::Kubo, MIDPOINT)?;
    let moments: Vec<f64> = pts.iter().map(|p| p.scaled.second_moment()).collect();
    let decreasing = moments.windows(2).all(|w| w[1] < w[0]);
    let mut rows = ladder_rows("midpoint", ProblemId::Kubo, MIDPOINT, pts);
    rows.push(row(
        "midpoint",
        ProblemId::Kubo,
        None,
        0,
        1.0,
        1000,
        "max_abs_limit_u",
        samples.iter().flat_map(|s| s.u.iter()).fold(0.0, |a, &u| a.max(u.abs())),
    ));
    Ok(Verdict {
        pass: sample_zero && path_zero && decreasing,
        detail: format!(
            "limit U identically 0: samples {sample_zero}, path {path_zero}; n E[err^2] {} decreasing {decreasing}",
            moments.iter().map(|m| format!("{m:.2e}")).collect::<Vec<_>>().join(" > ")
        ),
        csv: stats_csv_string(&rows),
    })
}

// 9. Modified equation tracks the scheme at a higher order.
fn modified(_: &mut Shared, workers: usize) -> Res<Verdict> {
    let mut pairs = Vec::new();
    let mut rows = Vec::new();
    for &n in &ME_LADDER {
        let samples = modified_closeness(ProblemId::Kubo, n, 1, &opts(), &ens(1000, workers))?;
        let mean = StreamingMoments::from_slice(&samples.iter().map(|s| s.sup_gap).collect::<Vec<_>>()).mean();
        pairs.push((n as f64, mean));
        rows.push(row("modified", ProblemId::Kubo, Some(SYMPL), n, 1.0, 1000, "mean_sup_gap", mean));
    }
    let s = empirical_order(&pairs)?;
    let samples = modified_closeness(ProblemId::Kubo, 128, 1, &opts(), &ens(10_000, workers))?;
    let mut d: f64 = 0.0;
    for c in 0..2 {
        let a: Vec<_> = samples.iter().map(|x| x.modified_error[c]).collect();
        let b: Vec<_> = samples.iter().map(|x| x.scheme_error[c]).collect();
        d = d.max(two_sample_ks(&a, &b)?.statistic);
    }
    rows.push(row("modified", ProblemId::Kubo, Some(SYMPL), 128, 1.0, 10_000, "ks_max", d));
    Ok(Verdict {
        pass: s >= 0.9 && d <= 0.05,
        detail: format!(
            "E sup gap {} slope {s:.3} (≥ 0.9); KS at n=128 {d:.4} (≤ 0.05)",
            pairs.iter().map(|p| format!("{:.2e}", p.1)).collect::<Vec<_>>().join(" ")
        ),
        csv: stats_csv_string(&rows),
    })
}

// 10. Truncation diagnostics.
fn truncation(_: &mut Shared, workers: usize) -> Res<Verdict> {
    let n = 100;
    let policy = TruncationPolicy::default();
    let paths = 200_000;
    let parts = map_batches(&ens(paths, workers), |range| -> Result<(u64, StreamingMoments), MonteCarloError> {
        let mut lattice = BrownianLattice::sample(n, 1, 1, SEED, range.start)?;
        let (mut clamps, mut gap) = (0u64, StreamingMoments::new());
        for path_id in range {
            lattice.resample(path_id);
            for dw in lattice.coarse_increments() {
                let (hat, clamped) = policy.apply(dw, n);
                clamps += clamped as u64;
                gap.push(n as f64 * (dw - hat).powi(2));
            }
        }
        Ok((clamps, gap))
    })?;
    let (mut clamps, mut gap) = (0u64, StreamingMoments::new());
    for (c, g) in &parts {
        clamps += c;
        gap.merge(g);
    }
    let rate = clamps as f64 / gap.count() as f64;
    let expected = two_sided_tail(policy.clamp_level(n));
    let rate_ok = rate <= 3.0 * expected && rate >= expected / 3.0;
    let gap_bound = 10.0 * (n as f64).powf(-policy.rho);
    let gap_ok = gap.mean() <= gap_bound;

    let probe = OmegaProbe::new(0.1)?;
    let mut freqs = Vec::new();
    for n in [16, 64, 256] {
        let lattices = map_batches(&ens(2000, workers), |range| -> Result<Vec<BrownianLattice>, MonteCarloError> {
            range.map(|id| Ok(BrownianLattice::sample(n, 16, 1, SEED, id)?)).collect()
        })?;
        let lattices: Vec<_> = lattices.into_iter().flatten().collect();
        freqs.push(omega_complement_frequency(&lattices, &probe)?);
    }
    let freq_ok = freqs.windows(2).all(|w| w[1] <= w[0]);
    let rows = vec![
        row("truncation", ProblemId::Kubo, None, n, 1.0, paths, "clamp_rate", rate),
        row("truncation", ProblemId::Kubo, None, n, 1.0, paths, "mean_sq_gap", gap.mean()),
        row("truncation", ProblemId::Kubo, None, 16, 1.0, 2000, "omega_complement", freqs[0]),
        row("truncation", ProblemId::Kubo, None, 64, 1.0, 2000, "omega_complement", freqs[1]),
        row("truncation", ProblemId::Kubo, None, 256, 1.0, 2000, "omega_complement", freqs[2]),
    ];
    Ok(Verdict {
        pass: rate_ok && gap_ok && freq_ok,
        detail: format!(
            "clamp rate {rate:.2e} vs 2Phi(-A_n) {expected:.2e} {}; E|xi-zeta|^2 {:.2e} ≤ {gap_bound:.1e} {}; \
             omega complement {:?} non-increasing {}",
            ok(rate_ok),
            gap.mean(),
            ok(gap_ok),
            freqs,
            ok(freq_ok)
        ),
        csv: stats_csv_string(&rows),
    })
}

type Check = fn(&mut Shared, usize) -> Res<Verdict>;

const CHECKS: [(&str, Check); 10] = [
    ("strong orders", strong_orders),
    ("kubo second moment", kubo_second_moment),
    ("kubo mean deviation", kubo_mean),
    ("linosc mean deviation", linosc_mean),
    ("time profiles", time_profiles),
    ("error distribution", error_distribution),
    ("hamiltonian structure", structure),
    ("midpoint degeneracy", midpoint),
    ("modified equation", modified),
    ("truncation diagnostics", truncation),
];

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: usize| selected.is_empty() || selected.contains(&k);
    let mut shared = Shared::default();
    let mut csvs: HashMap<usize, String> = HashMap::new();
    let mut failures = 0;
    let mut report = |k: usize, name: &str, outcome: Res<(bool, String)>, took: Duration| {
        let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        failures += !pass as usize;
        println!("[{k:>2}] {} {name}: {detail} [{:.1}s]", if pass { "PASS" } else { "FAIL" }, took.as_secs_f64());
    };
    for (i, (name, check)) in CHECKS.iter().enumerate() {
        let k = i + 1;
        if !wanted(k) {
            continue;
        }
        let start = Instant::now();
        let outcome = check(&mut shared, 1).map(|v| {
            csvs.insert(k, v.csv);
            (v.pass, v.detail)
        });
        report(k, name, outcome, start.elapsed());
    }
    if wanted(11) {
        let start = Instant::now();
        let mut differ = Vec::new();
        let mut outcome = Ok(());
        for (i, (_, check)) in CHECKS.iter().enumerate() {
            let k = i + 1;
            let one = match csvs.get(&k) {
                Some(csv) => csv.clone(),
                None => match check(&mut shared, 1) {
                    Ok(v) => v.csv,
                    Err(e) => {
                        outcome = Err(e);
                        break;
                    }
                },
            };
            match check(&mut shared, 8) {
                Ok(v) if v.csv == one => {}
                Ok(_) => differ.push(k),
                Err(e) => {
                    outcome = Err(e);
                    break;
                }
            }
        }
        let outcome = outcome.map(|()| {
            let detail = if differ.is_empty() {
                "statistics CSVs of checks 1-10 identical for 1 and 8 workers".to_string()
            } else {
                format!("CSVs differ for checks {differ:?}")
            };
            (differ.is_empty(), detail)
        });
        report(11, "determinism", outcome, start.elapsed());
    }
    if failures > 0 {
        println!("{failures} check(s) failed");
        std::process::exit(1);
    }
}
