//! Experiment configuration files
//!
//! Line-oriented `key = value` pairs, optionally grouped under `[section]`
//! headers. `#` and `;` start comments. Keys mirror the command-line flags.
//! Unknown keys and sections are errors, and so is setting a key twice.

use std::collections::HashMap;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::integrators::SchemeMethod;
use crate::problem::ProblemId;

#[derive(Debug, Error, PartialEq)]
#[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self { line: Some(line), message: message.into() }
    }
    pub fn invalid(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }
}

/// Which schemes a command runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodChoice {
    Euler,
    Sympl,
    Both,
}

impl FromStr for MethodChoice {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euler" | "em" | "euler-maruyama" => Ok(MethodChoice::Euler),
            "sympl" | "symplectic" | "theta" => Ok(MethodChoice::Sympl),
            "both" | "all" => Ok(MethodChoice::Both),
            other => Err(ConfigError::invalid(format!("unknown method '{other}' (expected euler, sympl or both)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemId,
    pub method: MethodChoice,
    pub theta: Vec<f64>,
    pub n: u64,
    pub n_list: Vec<u64>,
    pub horizon: f64,
    pub t_list: Vec<f64>,
    pub paths: u64,
    pub seed: u64,
    pub rho: f64,
    pub epsilon: f64,
    pub refine: u64,
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemId::Kubo,
            method: MethodChoice::Sympl,
            theta: vec![1.0],
            n: 100,
            n_list: vec![16, 32, 64, 128, 256, 512],
            horizon: 4.0,
            t_list: Vec::new(),
            paths: 1000,
            seed: 1,
            rho: 2.5,
            epsilon: 0.1,
            refine: 16,
            workers: 1,
            out: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Scheme methods selected by `method` and `theta`.
    pub fn methods(&self) -> Vec<SchemeMethod> {
        let mut out = Vec::new();
        if matches!(self.method, MethodChoice::Euler | MethodChoice::Both) {
            out.push(SchemeMethod::EulerMaruyama);
        }
        if matches!(self.method, MethodChoice::Sympl | MethodChoice::Both) {
            out.extend(self.theta.iter().map(|&theta| SchemeMethod::SymplTheta { theta }));
        }
        out
    }

    /// Evaluation times: `t-list` if given, otherwise `{T}`.
    pub fn times(&self) -> Vec<f64> {
        if self.t_list.is_empty() {
            vec![self.horizon]
        } else {
            self.t_list.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::invalid(m));
        if let Some(t) = self.theta.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return bad(format!("theta must lie in [0, 1], got {t}"));
        }
        if self.theta.is_empty() {
            return bad("theta list is empty".into());
        }
        if self.n < 2 || self.n_list.iter().any(|&n| n < 2) {
            return bad("n must be at least 2".into());
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(format!("T must be positive, got {}", self.horizon));
        }
        if self.t_list.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return bad("t-list entries must be positive".into());
        }
        if self.paths == 0 {
            return bad("paths must be positive".into());
        }
        if !(self.rho > 2.0) {
            return bad(format!("rho must exceed 2, got {}", self.rho));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return bad(format!("epsilon must lie in (0, 1/2), got {}", self.epsilon));
        }
        if self.refine == 0 || self.workers == 0 {
            return bad("refine and workers must be positive".into());
        }
        Ok(())
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "problem" => {
                self.problem =
                    v.parse().map_err(|e: crate::problem::ProblemError| ConfigError::invalid(e.to_string()))?
            }
            "method" => self.method = v.parse()?,
            "theta" => self.theta = parse_list(key, v)?,
            "n" => self.n = parse_one(key, v)?,
            "n-list" => self.n_list = parse_list(key, v)?,
            "T" => self.horizon = parse_one(key, v)?,
            "t-list" => self.t_list = parse_list(key, v)?,
            "paths" => self.paths = parse_one(key, v)?,
            "seed" => self.seed = parse_one(key, v)?,
            "rho" => self.rho = parse_one(key, v)?,
            "epsilon" => self.epsilon = parse_one(key, v)?,
            "refine" => self.refine = parse_one(key, v)?,
            "workers" => self.workers = parse_one(key, v)?,
            "out" => self.out = PathBuf::from(v),
            other => return Err(ConfigError::invalid(format!("unknown key '{other}'"))),
        }
        Ok(())
    }
}

pub const KEYS: &[&str] = &[
    "problem", "method", "theta", "n", "n-list", "T", "t-list", "paths", "seed", "rho", "epsilon", "refine", "workers",
    "out",
];
pub const SECTIONS: &[&str] = &["experiment", "problem", "scheme", "time", "ensemble", "noise", "output"];

fn parse_one<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError::invalid(format!("invalid value '{v}' for {key}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, ConfigError> {
    v.split(',').map(|x| parse_one(key, x.trim())).collect()
}

/// Parses a configuration file on top of the defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(line_no, format!("malformed section header '{line}'")))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(ConfigError::at(line_no, format!("unknown section '{name}'")));
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line_no, format!("expected 'key = value', found '{line}'")))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError::at(line_no, format!("unknown key '{key}'")));
        }
        if let Some(first) = seen.insert(key.to_string(), line_no) {
            return Err(ConfigError::at(line_no, format!("duplicate key '{key}' (first set on line {first})")));
        }
        cfg.set(key, value).map_err(|e| ConfigError::at(line_no, e.message))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_filled() {
        let cfg = parse_config("[scheme]\nn = 100\n").unwrap();
        assert_eq!(cfg.n, 100);
        assert_eq!((cfg.rho, cfg.epsilon, cfg.refine), (2.5, 0.1, 16));
    }

    #[test]
    fn unknown_key() {
        let err = parse_config("n = 10\nfoo = 1\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        assert!(err.message.contains("foo"));
    }

    #[test]
    fn duplicate_key_cites_both_lines() {
        let err = parse_config("n = 10\n\n[time]\nn = 20\n").unwrap_err();
        assert_eq!(err.line, Some(4));
        assert!(err.message.contains("line 1"));
    }

    #[test]
    fn lists_and_comments() {
        let cfg =
            parse_config("# comment\nproblem = linosc\ntheta = 1, 0.75, 0.1 ; trailing\nt-list = 0.5,1\n").unwrap();
        assert_eq!(cfg.problem, ProblemId::LinOsc);
        assert_eq!(cfg.theta, vec![1.0, 0.75, 0.1]);
        assert_eq!(cfg.t_list, vec![0.5, 1.0]);
    }

    #[test]
    fn invalid_values() {
        assert!(parse_config("rho = 1.5\n").is_err());
        assert!(parse_config("theta = 1.2\n").is_err());
        assert!(parse_config("[bogus]\n").is_err());
        assert!(parse_config("n 10\n").is_err());
    }
}
