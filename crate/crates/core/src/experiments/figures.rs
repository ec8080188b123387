use std::fs;
use std::io::{self, Write};
use std::str::FromStr;

use super::commands::{create_file, ensemble, limit_method, run_options};
use super::config::{ConfigError, ExperimentConfig};
use super::{ExperimentError, Outcome};
use crate::integrators::{fmt_f64, SchemeMethod};
use crate::montecarlo::{confidence_interval, scaled_hamiltonian_deviation, DeviationStats};
use crate::problem::{hamdev_limit_value, ProblemId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FigureId {
    /// Kubo: `√n E[ΔH]` against `n`.
    Fig1a,
    /// Kubo: `n E[ΔH²]` against `n`.
    Fig1b,
    /// Kubo: `n E[ΔH²]` against `t`.
    Fig2,
    /// Linear oscillator: `n E[ΔH]` against `n`.
    Fig3,
    /// Linear oscillator: `n E[ΔH]` against `t`.
    Fig4,
    All,
}

impl FromStr for FigureId {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().trim_start_matches("fig") {
            "1a" => Ok(FigureId::Fig1a),
            "1b" => Ok(FigureId::Fig1b),
            "2" => Ok(FigureId::Fig2),
            "3" => Ok(FigureId::Fig3),
            "4" => Ok(FigureId::Fig4),
            "all" => Ok(FigureId::All),
            other => Err(ConfigError::invalid(format!("unknown figure '{other}' (expected 1a, 1b, 2, 3, 4 or all)"))),
        }
    }
}

/// One plotted curve: columns `x, value, ci_halfwidth, reference`.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureCurve {
    pub figure: String,
    pub curve: String,
    pub x_name: String,
    pub points: Vec<[f64; 4]>,
}

impl FigureCurve {
    pub fn file_name(&self) -> String {
        format!("{}_{}.csv", self.figure, self.curve)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{},value,ci_halfwidth,reference", self.x_name)?;
        for p in &self.points {
            writeln!(w, "{},{},{},{}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2]), fmt_f64(p[3]))?;
        }
        Ok(())
    }
}

fn curve_name(m: &SchemeMethod) -> String {
    match m {
        SchemeMethod::EulerMaruyama => "euler".into(),
        SchemeMethod::SymplTheta { theta } => format!("sympl_theta_{theta}"),
    }
}

fn methods(cfg: &ExperimentConfig) -> Vec<SchemeMethod> {
    let mut v = vec![SchemeMethod::EulerMaruyama];
    v.extend(cfg.theta.iter().map(|&theta| SchemeMethod::SymplTheta { theta }));
    v
}

fn point(x: f64, m: &crate::montecarlo::StreamingMoments, reference: f64) -> [f64; 4] {
    let (v, ci) = confidence_interval(m).unwrap_or((m.mean(), f64::NAN));
    [x, v, ci, reference]
}

/// Series over `xs`, one curve per method. `stat` maps one statistic to a point.
fn collect(
    figure: &str,
    x_name: &str,
    methods: &[SchemeMethod],
    runs: &[(f64, Vec<DeviationStats>)],
    stat: impl Fn(f64, &DeviationStats) -> [f64; 4],
) -> Vec<FigureCurve> {
    methods
        .iter()
        .map(|m| FigureCurve {
            figure: figure.into(),
            curve: curve_name(m),
            x_name: x_name.into(),
            points: runs
                .iter()
                .flat_map(|(x, stats)| stats.iter().filter(|s| s.method == *m).map(|s| stat(*x, s)).collect::<Vec<_>>())
                .collect(),
        })
        .collect()
}

fn reference(problem: ProblemId, m: &SchemeMethod, t: f64) -> f64 {
    hamdev_limit_value(problem, limit_method(m), t).unwrap_or(f64::NAN)
}

/// Computes the curves of one figure (or all of them).
pub fn figure_curves(which: FigureId, cfg: &ExperimentConfig) -> Result<Vec<FigureCurve>, ExperimentError> {
    cfg.validate()?;
    let ms = methods(cfg);
    let opts = run_options(cfg);
    let ens = ensemble(cfg);
    let t = cfg.horizon;
    let over_n = |problem: ProblemId| -> Result<Vec<(f64, Vec<DeviationStats>)>, ExperimentError> {
        cfg.n_list
            .iter()
            .map(|&n| Ok((n as f64, scaled_hamiltonian_deviation(problem, &ms, n, &[t], &opts, &ens)?)))
            .collect()
    };
    let over_t = |problem: ProblemId, default: Vec<f64>| -> Result<Vec<(f64, Vec<DeviationStats>)>, ExperimentError> {
        let times = if cfg.t_list.is_empty() { default } else { cfg.t_list.clone() };
        let stats = scaled_hamiltonian_deviation(problem, &ms, cfg.n, &times, &opts, &ens)?;
        Ok(times.iter().map(|&ti| (ti, stats.iter().filter(|s| s.t == ti).cloned().collect())).collect())
    };
    let kubo = ProblemId::Kubo;
    let lin = ProblemId::LinOsc;
    let mut curves = Vec::new();
    if matches!(which, FigureId::Fig1a | FigureId::Fig1b | FigureId::All) {
        let runs = over_n(kubo)?;
        if which != FigureId::Fig1b {
            curves.extend(collect("fig1a", "n", &ms, &runs, |x, s| point(x, &s.scaled, 0.0)));
        }
        if which != FigureId::Fig1a {
            curves.extend(collect("fig1b", "n", &ms, &runs, |x, s| {
                point(x, &s.scaled_sq, reference(kubo, &s.method, t))
            }));
        }
    }
    if matches!(which, FigureId::Fig2 | FigureId::All) {
        let runs = over_t(kubo, (1..=10).map(f64::from).collect())?;
        curves.extend(collect("fig2", "t", &ms, &runs, |x, s| point(x, &s.scaled_sq, reference(kubo, &s.method, x))));
    }
    if matches!(which, FigureId::Fig3 | FigureId::All) {
        let runs = over_n(lin)?;
        curves.extend(collect("fig3", "n", &ms, &runs, |x, s| point(x, &s.scaled, reference(lin, &s.method, t))));
    }
    if matches!(which, FigureId::Fig4 | FigureId::All) {
        let runs = over_t(lin, (1..=12).map(|k| 0.5 * k as f64).collect())?;
        curves.extend(collect("fig4", "t", &ms, &runs, |x, s| point(x, &s.scaled, reference(lin, &s.method, x))));
    }
    Ok(curves)
}

/// Writes one CSV per curve under `cfg.out`.
pub fn figures(which: FigureId, cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let curves = figure_curves(which, cfg)?;
    let mut out = Outcome::default();
    fs::create_dir_all(&cfg.out)?;
    for c in &curves {
        c.write_csv(create_file(&cfg.out, &c.file_name(), &mut out.files)?)?;
        let last = c.points.last().copied().unwrap_or([f64::NAN; 4]);
        out.summary.push_str(&format!(
            "{} {}: {} points, last {}={} value {:.4} ± {:.4} (reference {:.4})\n",
            c.figure,
            c.curve,
            c.points.len(),
            c.x_name,
            last[0],
            last[1],
            last[2],
            last[3]
        ));
    }
    Ok(out)
}
