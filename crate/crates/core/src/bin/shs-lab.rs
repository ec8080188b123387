//! Command-line front end: `shs-lab <simulate|order|hamdev|errordist|figures|structure-check>`.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use shs_lab::experiments::{self, ExperimentConfig, ExperimentError, FigureId, Outcome, SimulateOptions};

#[derive(Parser)]
#[command(name = "shs-lab", version, about = "Stochastic Hamiltonian systems simulation lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate single paths and write trajectory CSVs
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Drive the schemes with zero increments
        #[arg(long)]
        zero_noise: bool,
        /// Also integrate the modified equation of the symplectic Euler method
        #[arg(long)]
        modified: bool,
    },
    /// Strong-error ladders and empirical orders
    Order {
        #[command(flatten)]
        common: Common,
    },
    /// Normalized Hamiltonian deviation statistics
    Hamdev {
        #[command(flatten)]
        common: Common,
    },
    /// Scheme errors against limit-equation samples (two-sample KS)
    Errordist {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        self_test: bool,
    },
    /// Plot data for the Hamiltonian-deviation figures
    Figures {
        /// 1a, 1b, 2, 3, 4 or all
        which: String,
        #[command(flatten)]
        common: Common,
    },
    /// Hamiltonian structure of the limit equations
    StructureCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        self_test: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    method: Option<String>,
    /// One value or a comma-separated list
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long = "n-list")]
    n_list: Option<String>,
    #[arg(long = "T")]
    horizon: Option<String>,
    #[arg(long = "t-list")]
    t_list: Option<String>,
    #[arg(long)]
    paths: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    refine: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

impl Common {
    fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                experiments::parse_config(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("problem", &self.problem),
            ("method", &self.method),
            ("theta", &self.theta),
            ("n", &self.n),
            ("n-list", &self.n_list),
            ("T", &self.horizon),
            ("t-list", &self.t_list),
            ("paths", &self.paths),
            ("seed", &self.seed),
            ("rho", &self.rho),
            ("epsilon", &self.epsilon),
            ("refine", &self.refine),
            ("workers", &self.workers),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v).with_context(|| format!("--{key}"))?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<Outcome, (i32, String)> {
    let config_err = |e: anyhow::Error| (2, format!("{e:#}"));
    let exp_err = |e: ExperimentError| (e.exit_code(), e.to_string());
    match cli.command {
        Command::Simulate { common, zero_noise, modified } => {
            let cfg = common.resolve().map_err(config_err)?;
            experiments::simulate(&cfg, SimulateOptions { zero_noise, modified }).map_err(exp_err)
        }
        Command::Order { common } => experiments::order(&common.resolve().map_err(config_err)?).map_err(exp_err),
        Command::Hamdev { common } => experiments::hamdev(&common.resolve().map_err(config_err)?).map_err(exp_err),
        Command::Errordist { common, self_test } => {
            experiments::errordist(&common.resolve().map_err(config_err)?, self_test).map_err(exp_err)
        }
        Command::Figures { which, common } => {
            let which: FigureId = which.parse().map_err(|e: experiments::ConfigError| (2, e.to_string()))?;
            experiments::figures(which, &common.resolve().map_err(config_err)?).map_err(exp_err)
        }
        Command::StructureCheck { common, self_test } => {
            experiments::structure_check(&common.resolve().map_err(config_err)?, self_test).map_err(exp_err)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{}", out.summary);
            for f in &out.files {
                eprintln!("wrote {}", f.display());
            }
            if let Some(v) = &out.violation {
                eprintln!("threshold violation: {v}");
            }
            ExitCode::from(out.exit_code() as u8)
        }
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code as u8)
        }
    }
}
