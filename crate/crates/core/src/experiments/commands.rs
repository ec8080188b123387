use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::{ConfigError, ExperimentConfig};
use super::{ExperimentError, Outcome};
use crate::integrators::{fmt_f64, integrate, SchemeConfig, SchemeMethod, Trajectory};
use crate::limit::{
    check_hamiltonian_structure, kubo_euler_limit_draws, limit_header, limit_samples, LimitRegime, LimitSample,
    LimitSpec,
};
use crate::modified::{integrate_modified_add, integrate_modified_mult};
use crate::montecarlo::{
    deviation_rows, scaled_error_samples, scaled_hamiltonian_deviation, strong_error_ladder, two_sample_ks,
    write_stats_csv, EnsembleConfig, RunOptions, StatRow,
};
use crate::noise::BrownianLattice;
use crate::problem::{
    hamdev_limit_value, CoefficientSet, Kubo, LimitMethod, LinearOscillator, NoiseKind, ProblemId, ScaledDriftJacobian,
};

/// 1% two-sample Kolmogorov–Smirnov coefficient.
const KS_COEFF: f64 = 1.63;
/// Largest residual accepted by the structure check.
pub(crate) const STRUCTURE_TOL: f64 = 1e-10;

pub(crate) fn ensemble(cfg: &ExperimentConfig) -> EnsembleConfig {
    EnsembleConfig::new(cfg.paths, cfg.seed).with_workers(cfg.workers)
}

pub(crate) fn run_options(cfg: &ExperimentConfig) -> RunOptions {
    RunOptions { rho: cfg.rho, refine: cfg.refine }
}

fn integer_horizon(t: f64) -> Result<u64, ConfigError> {
    if t.fract() != 0.0 || t < 1.0 {
        return Err(ConfigError::invalid(format!("T must be a positive integer for this command, got {t}")));
    }
    Ok(t as u64)
}

pub(crate) fn create_file(
    dir: &Path,
    name: &str,
    files: &mut Vec<PathBuf>,
) -> Result<BufWriter<File>, ExperimentError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let f = File::create(&path)?;
    files.push(path);
    Ok(BufWriter::new(f))
}

fn method_tag(m: &SchemeMethod) -> String {
    match m {
        SchemeMethod::EulerMaruyama => "euler".into(),
        SchemeMethod::SymplTheta { theta } => format!("sympl_theta_{theta}"),
    }
}

pub(crate) fn limit_method(m: &SchemeMethod) -> LimitMethod {
    match m {
        SchemeMethod::EulerMaruyama => LimitMethod::Euler,
        SchemeMethod::SymplTheta { theta } => LimitMethod::SymplTheta(*theta),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SimulateOptions {
    /// Replace every increment by zero.
    pub zero_noise: bool,
    /// Also integrate the modified equation of the symplectic Euler method.
    pub modified: bool,
}

const SUMMARY_PATHS: u64 = 5;

/// Integrates single paths and writes trajectory CSVs, the exact reference,
/// the lattice dump and optionally the modified-equation path.

pub fn simulate(cfg: &ExperimentConfig, opts: SimulateOptions) -> Result<Outcome, ExperimentError> {
    cfg.validate()?;
    let horizon = integer_horizon(cfg.horizon)?;
    let mut out = Outcome::default();
    let problem = cfg.problem;
    for path_id in 0..cfg.paths {
        let lattice = if opts.zero_noise {
            let cells = (cfg.n * cfg.refine * horizon) as usize;
            BrownianLattice::from_increments(cfg.n, cfg.refine, horizon, vec![0.0; cells], None)?
        } else {
            BrownianLattice::sample(cfg.n, cfg.refine, horizon, cfg.seed, path_id)?
        };
        lattice.write_to(create_file(&cfg.out, &format!("lattice_{path_id}.bin"), &mut out.files)?)?;
        for method in cfg.methods() {
            let scheme = SchemeConfig::for_noise(method, cfg.n, problem.noise_kind()).with_rho(cfg.rho);
            let traj = match problem {
                ProblemId::Kubo => integrate(&Kubo, &problem.initial(), &scheme, &lattice)?,
                ProblemId::LinOsc => integrate(&LinearOscillator, &problem.initial(), &scheme, &lattice)?,
            };
            let name = format!("trajectory_{}_{path_id}.csv", method_tag(&method));
            traj.write_csv(create_file(&cfg.out, &name, &mut out.files)?)?;
            let t = traj.terminal();
            if path_id >= SUMMARY_PATHS {
                continue;
            }
            let _ = writeln!(
                out.summary,
                "path {path_id} {}: X(T) = ({:.6}, {:.6}), clamps {}",
                method.label(),
                t.p[0],
                t.q[0],
                traj.clamp_count
            );
        }
        let fine = problem.exact().path_on_fine_grid(lattice.dw_fine(), lattice.fine_step());
        let mut exact = Trajectory::new(1, lattice.coarse_step());
        for k in 0..=lattice.coarse_len() {
            let j = k * lattice.m() as usize;
            exact.push(&fine[2 * j..2 * j + 2]);
        }
        exact.write_csv(create_file(&cfg.out, &format!("exact_{path_id}.csv"), &mut out.files)?)?;
        if opts.modified {
            let me = match problem {
                ProblemId::Kubo => integrate_modified_mult(&Kubo, &problem.initial(), cfg.n, &lattice)?,
                ProblemId::LinOsc => integrate_modified_add(&LinearOscillator, &problem.initial(), cfg.n, &lattice)?,
            };
            me.write_csv(create_file(&cfg.out, &format!("modified_{path_id}.csv"), &mut out.files)?)?;
        }
    }
    if cfg.paths > SUMMARY_PATHS {
        let _ = writeln!(out.summary, "... {} more paths written to {}", cfg.paths - SUMMARY_PATHS, cfg.out.display());
    }
    Ok(out)
}

/// Strong-error ladders and empirical orders.
pub fn order(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    cfg.validate()?;
    let horizon = integer_horizon(cfg.horizon)?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for method in cfg.methods() {
        let ladder = strong_error_ladder(cfg.problem, method, &cfg.n_list, horizon, &run_options(cfg), &ensemble(cfg))?;
        let pairs: Vec<_> = ladder.iter().map(|p| (p.n as f64, p.rms_terminal)).collect();
        let slope = crate::montecarlo::empirical_order(&pairs)?;
        for p in &ladder {
            rows.push(StatRow {
                job_id: "order".into(),
                problem: cfg.problem,
                method: Some(method),
                n: p.n,
                t: horizon as f64,
                paths: cfg.paths,
                statistic: "rms_terminal_error".into(),
                value: p.rms_terminal,
                ci_halfwidth: f64::NAN,
            });
        }
        rows.push(StatRow {
            job_id: "order".into(),
            problem: cfg.problem,
            method: Some(method),
            n: 0,
            t: horizon as f64,
            paths: cfg.paths,
            statistic: "empirical_order".into(),
            value: slope,
            ci_halfwidth: f64::NAN,
        });
        let _ = writeln!(out.summary, "{} {}: empirical order {slope:.4}", cfg.problem, method.label());
    }
    write_stats_csv(&rows, create_file(&cfg.out, "order.csv", &mut out.files)?)?;
    Ok(out)
}

/// Normalized Hamiltonian deviation at the requested times.
pub fn hamdev(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    cfg.validate()?;
    let mut out = Outcome::default();
    let stats = scaled_hamiltonian_deviation(
        cfg.problem,
        &cfg.methods(),
        cfg.n,
        &cfg.times(),
        &run_options(cfg),
        &ensemble(cfg),
    )?;
    let rows = deviation_rows("hamdev", cfg.problem, &stats);
    write_stats_csv(&rows, create_file(&cfg.out, "hamdev.csv", &mut out.files)?)?;
    for s in &stats {
        let (value, m) = match cfg.problem.noise_kind() {
            NoiseKind::Multiplicative => (s.scaled_sq.mean(), "n E[dH^2]"),
            NoiseKind::Additive => (s.scaled.mean(), "n E[dH]"),
        };
        let reference = hamdev_limit_value(cfg.problem, limit_method(&s.method), s.t).unwrap_or(f64::NAN);
        let _ = writeln!(
            out.summary,
            "{} {} n={} t={}: {m} = {value:.5} (limit {reference:.5})",
            cfg.problem,
            s.method.label(),
            s.n,
            s.t
        );
    }
    Ok(out)
}

/// KS statistics of component `c` overall and split by the sign of `W_t`.
pub(crate) fn ks_rows(
    label: &str,
    scheme: &[(Vec<f64>, f64)],
    limit: &[(Vec<f64>, f64)],
) -> Result<Vec<(String, f64, f64)>, ExperimentError> {
    let mut rows = Vec::new();
    for (c, comp) in ["P", "Q"].iter().enumerate() {
        for (stratum, keep) in [("all", 0i8), ("w_pos", 1), ("w_neg", -1)] {
            let pick = |s: &[(Vec<f64>, f64)]| -> Vec<f64> {
                s.iter().filter(|(_, w)| keep == 0 || (keep > 0) == (*w > 0.0)).map(|(u, _)| u[c]).collect()
            };
            let ks = two_sample_ks(&pick(scheme), &pick(limit))?;
            rows.push((format!("{label}ks_{stratum}_{comp}"), ks.statistic, ks.critical_value(KS_COEFF)));
        }
    }
    Ok(rows)
}

fn write_limit_samples<W: Write>(mut w: W, t: f64, samples: &[LimitSample]) -> std::io::Result<()> {
    writeln!(w, "{}", limit_header(1))?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            s.path_id,
            fmt_f64(t),
            fmt_f64(s.u[0]),
            fmt_f64(s.u[1]),
            fmt_f64(s.w_t),
            fmt_f64(s.b_t)
        )?;
    }
    Ok(())
}

/// Scheme errors against limit samples: two-sample KS overall and by sign of `W_T`.
///
/// In self-test mode both samples come from the limit generator with
/// independent seeds, and an unstratified statistic above the 1% critical
/// value is a violation.
pub fn errordist(cfg: &ExperimentConfig, self_test: bool) -> Result<Outcome, ExperimentError> {
    cfg.validate()?;
    let t = cfg.horizon;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    let kind = cfg.problem.noise_kind();
    let draw_limit = |method: &SchemeMethod, seed: u64| -> Result<Vec<LimitSample>, ExperimentError> {
        let ens = EnsembleConfig::new(cfg.paths, seed).with_workers(cfg.workers);
        Ok(match (cfg.problem, method) {
            (ProblemId::Kubo, SchemeMethod::EulerMaruyama) => kubo_euler_limit_draws(t, cfg.paths, seed),
            _ => limit_samples(cfg.problem, LimitRegime::for_scheme(kind, method.theta()), t, &ens)?,
        })
    };
    let pairs = |s: &[LimitSample]| s.iter().map(|x| (x.u.clone(), x.w_t)).collect::<Vec<_>>();
    for method in cfg.methods() {
        let limit = draw_limit(&method, cfg.seed.wrapping_add(1))?;
        write_limit_samples(
            create_file(&cfg.out, &format!("limit_samples_{}.csv", method_tag(&method)), &mut out.files)?,
            t,
            &limit,
        )?;
        let (label, first) = if self_test {
            ("selftest_", pairs(&draw_limit(&method, cfg.seed.wrapping_add(2))?))
        } else {
            let samples = scaled_error_samples(cfg.problem, method, cfg.n, t, &run_options(cfg), &ensemble(cfg))?;
            ("", samples.into_iter().map(|s| (s.scaled, s.w_t)).collect())
        };
        for (name, d, crit) in ks_rows(label, &first, &pairs(&limit))? {
            let _ =
                writeln!(out.summary, "{} {}: {name} = {d:.4} (1% critical {crit:.4})", cfg.problem, method.label());
            if self_test && name.contains("_all_") && d >= crit {
                out.violation = Some(format!("{name} = {d:.4} exceeds {crit:.4}"));
            }
            rows.push(StatRow {
                job_id: "errordist".into(),
                problem: cfg.problem,
                method: Some(method),
                n: cfg.n,
                t,
                paths: cfg.paths,
                statistic: name,
                value: d,
                ci_halfwidth: crit,
            });
        }
    }
    write_stats_csv(&rows, create_file(&cfg.out, "errordist.csv", &mut out.files)?)?;
    Ok(out)
}

/// States at which the structure check is evaluated.
pub(crate) const STRUCTURE_STATES: [(f64, f64); 4] = [(0.0, 1.0), (0.6, -0.3), (-1.2, 0.4), (2.0, 1.5)];

pub(crate) fn structure_residual<C: CoefficientSet>(coeffs: &C, regime: LimitRegime) -> Result<f64, ExperimentError> {
    let spec = LimitSpec::new(regime, coeffs)?;
    Ok(STRUCTURE_STATES
        .iter()
        .map(|&(p, q)| check_hamiltonian_structure(&spec, &[p], &[q]).residual)
        .fold(0.0, f64::max))
}

pub(crate) fn regimes_for(kind: NoiseKind, thetas: &[f64]) -> Vec<LimitRegime> {
    let mut v: Vec<_> = thetas.iter().map(|&t| LimitRegime::for_scheme(kind, Some(t))).collect();
    v.push(LimitRegime::for_scheme(kind, None));
    v
}

/// Checks the Hamiltonian structure of every limit regime that applies to the
/// problem. In self-test mode a copy with `g_P` scaled by 1.1 must be rejected.
pub fn structure_check(cfg: &ExperimentConfig, self_test: bool) -> Result<Outcome, ExperimentError> {
    cfg.validate()?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    let kind = cfg.problem.noise_kind();
    for regime in regimes_for(kind, &cfg.theta) {
        let (r, corrupted) = match cfg.problem {
            ProblemId::Kubo => (
                structure_residual(&Kubo, regime)?,
                structure_residual(&ScaledDriftJacobian { inner: Kubo, factor: 1.1 }, regime)?,
            ),
            ProblemId::LinOsc => (
                structure_residual(&LinearOscillator, regime)?,
                structure_residual(&ScaledDriftJacobian { inner: LinearOscillator, factor: 1.1 }, regime)?,
            ),
        };
        let _ = writeln!(out.summary, "{} {regime:?}: residual {r:.3e}", cfg.problem);
        if r > STRUCTURE_TOL {
            out.violation = Some(format!("{regime:?}: residual {r:e} exceeds {STRUCTURE_TOL:e}"));
        }
        let method = match regime {
            LimitRegime::MultTheta { theta } | LimitRegime::AddTheta { theta } => SchemeMethod::SymplTheta { theta },
            _ => SchemeMethod::EulerMaruyama,
        };
        let mut push = |name: &str, value: f64| {
            rows.push(StatRow {
                job_id: "structure".into(),
                problem: cfg.problem,
                method: Some(method),
                n: 0,
                t: 0.0,
                paths: 0,
                statistic: name.into(),
                value,
                ci_halfwidth: f64::NAN,
            })
        };
        push("structure_residual", r);
        if self_test {
            let _ = writeln!(out.summary, "{} {regime:?}: corrupted residual {corrupted:.3e}", cfg.problem);
            if corrupted < 1e-3 {
                out.violation = Some(format!("{regime:?}: corrupted coefficients not detected ({corrupted:e})"));
            }
            push("corrupted_residual", corrupted);
        }
    }
    write_stats_csv(&rows, create_file(&cfg.out, "structure.csv", &mut out.files)?)?;
    Ok(out)
}
