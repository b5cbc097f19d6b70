//! Experiment configuration: defaults, `key=value` files and validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use genvi_core::fpu::FpuMethod;

use crate::error::{CliError, CliResult};
use crate::experiments::OrderMethod;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Resonance,
    Fpu,
    Check,
    Order,
    AdjointDemo,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Resonance => "resonance",
            Experiment::Fpu => "fpu",
            Experiment::Check => "check",
            Experiment::Order => "order",
            Experiment::AdjointDemo => "adjoint-demo",
        }
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        [
            Experiment::Resonance,
            Experiment::Fpu,
            Experiment::Check,
            Experiment::Order,
            Experiment::AdjointDemo,
        ]
        .into_iter()
        .find(|e| e.name() == s)
        .ok_or_else(|| CliError::Config(format!("unknown experiment '{s}'")))
    }
}

pub const DESK_T_RESONANCE: f64 = 1000.0;
pub const DESK_T_FPU: f64 = 200.0;
pub const LONG_T: f64 = 10_000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub epsilon: f64,
    pub omega: f64,
    pub m: usize,
    pub h_min: f64,
    pub h_max: f64,
    pub h_count: usize,
    /// Step size for single-h experiments (FPU).
    pub h: f64,
    /// Explicit horizon; `None` picks the desk or long default.
    pub t_final: Option<f64>,
    pub methods: Vec<String>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub long: bool,
    /// Output every `stride`-th step of an FPU trajectory.
    pub stride: usize,
    pub suite: String,
    /// Adds a deliberately false assertion to the check suite.
    pub negative_control: bool,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        let methods = match experiment {
            Experiment::Fpu => vec!["imex".to_string()],
            Experiment::Order => vec!["stormer_verlet".to_string()],
            _ => Vec::new(),
        };
        ExperimentConfig {
            experiment,
            epsilon: 0.1,
            omega: 50.0,
            m: 3,
            h_min: 0.1,
            h_max: 10.0,
            h_count: 50,
            h: 0.01,
            t_final: None,
            methods,
            seed: 2024,
            out: None,
            long: false,
            stride: 10,
            suite: "all".to_string(),
            negative_control: false,
        }
    }

    pub fn t_final(&self) -> f64 {
        match (self.t_final, self.long, self.experiment) {
            (Some(t), _, _) => t,
            (None, true, _) => LONG_T,
            (None, false, Experiment::Fpu) => DESK_T_FPU,
            (None, false, _) => DESK_T_RESONANCE,
        }
    }

    /// `h_count` evenly spaced step sizes from `h_min` to `h_max`.
    pub fn h_grid(&self) -> Vec<f64> {
        if self.h_count == 1 {
            return vec![self.h_min];
        }
        let d = (self.h_max - self.h_min) / (self.h_count - 1) as f64;
        (0..self.h_count).map(|k| self.h_min + d * k as f64).collect()
    }

    /// Applies `key=value` pairs; later keys win.
    pub fn apply(&mut self, pairs: &BTreeMap<String, String>) -> CliResult<()> {
        for (k, v) in pairs {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let bad = |what: &str| CliError::Config(format!("invalid {what} '{value}' for key '{key}'"));
        let float = || value.trim().parse::<f64>().map_err(|_| bad("number"));
        let int = || value.trim().parse::<usize>().map_err(|_| bad("integer"));
        let flag = || match value.trim() {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            _ => Err(bad("boolean")),
        };
        match key.trim().replace('-', "_").as_str() {
            "experiment" => self.experiment = value.trim().parse()?,
            "eps" | "epsilon" => self.epsilon = float()?,
            "omega" => self.omega = float()?,
            "m" => self.m = int()?,
            "h_min" => self.h_min = float()?,
            "h_max" => self.h_max = float()?,
            "h_count" => self.h_count = int()?,
            "h" => self.h = float()?,
            "t_final" => self.t_final = Some(float()?),
            "method" | "methods" => {
                self.methods = value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
            }
            "seed" => self.seed = value.trim().parse().map_err(|_| bad("seed"))?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "long" => self.long = flag()?,
            "stride" => self.stride = int()?,
            "suite" => self.suite = value.trim().to_string(),
            "negative_control" => self.negative_control = flag()?,
            other => return Err(CliError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Rejects inconsistent settings before any computation starts.
    pub fn validate(&self) -> CliResult<()> {
        let err = |m: String| Err(CliError::Config(m));
        let t = self.t_final();
        if !(t > 0.0) || !t.is_finite() {
            return err(format!("t_final must be positive, got {t}"));
        }
        match self.experiment {
            Experiment::Resonance => {
                if self.h_count == 0 {
                    return err("h grid is empty (h_count = 0)".into());
                }
                if !(self.h_min > 0.0) || !(self.h_max >= self.h_min) || !self.h_max.is_finite() {
                    return err(format!("need 0 < h_min <= h_max, got [{}, {}]", self.h_min, self.h_max));
                }
                if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
                    return err(format!("eps must be >= 0, got {}", self.epsilon));
                }
            }
            Experiment::Fpu => {
                if self.methods.len() != 1 {
                    return err(format!("fpu runs exactly one method, got {:?}", self.methods));
                }
                self.methods[0]
                    .parse::<FpuMethod>()
                    .map_err(|_| CliError::Config(format!("unknown FPU method '{}' (sv, htvi, imex)", self.methods[0])))?;
                if !(self.h > 0.0) || !self.h.is_finite() {
                    return err(format!("h must be positive, got {}", self.h));
                }
                if !(self.omega > 0.0) || self.m == 0 {
                    return err("need omega > 0 and m >= 1".into());
                }
                if self.stride == 0 {
                    return err("stride must be >= 1".into());
                }
            }
            Experiment::Order => {
                if self.methods.is_empty() {
                    return err("order needs at least one method".into());
                }
                for m in &self.methods {
                    m.parse::<OrderMethod>()
                        .map_err(|_| CliError::Config(format!("unknown method '{m}'")))?;
                }
            }
            Experiment::Check => {
                if !crate::check::SUITES.contains(&self.suite.as_str()) {
                    return err(format!("unknown suite '{}' (one of {:?})", self.suite, crate::check::SUITES));
                }
            }
            Experiment::AdjointDemo => {}
        }
        Ok(())
    }
}

/// Reads a `key=value` file; blank lines and `#` comments are skipped.
pub fn read_config_file(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key=value, got '{line}'", n + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Single-line rendering used in CSV headers; every field that affects the
/// numbers is included.
impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "experiment={} eps={:e} omega={:e} m={} h_min={:e} h_max={:e} h_count={} h={:e} t_final={:e} methods={} long={} stride={} seed={}",
            self.experiment.name(),
            self.epsilon,
            self.omega,
            self.m,
            self.h_min,
            self.h_max,
            self.h_count,
            self.h,
            self.t_final(),
            self.methods.join(","),
            self.long,
            self.stride,
            self.seed
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_applies_file() {
        let pairs = parse_config("# desk run\neps = 0.001\nh-count=5 # inline\nlong=true\n").unwrap();
        let mut cfg = ExperimentConfig::new(Experiment::Resonance);
        cfg.apply(&pairs).unwrap();
        assert_eq!(cfg.epsilon, 0.001);
        assert_eq!(cfg.h_count, 5);
        assert_eq!(cfg.t_final(), LONG_T);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_config("just words").is_err());
        let mut cfg = ExperimentConfig::new(Experiment::Resonance);
        assert!(cfg.set("colour", "red").is_err());
        assert!(cfg.set("eps", "lots").is_err());
        assert_eq!(cfg.set("h_count", "x").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::new(Experiment::Resonance);
        cfg.h_count = 0;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        let mut cfg = ExperimentConfig::new(Experiment::Fpu);
        cfg.methods = vec!["rk4".into()];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::new(Experiment::Order);
        cfg.methods = vec!["nope".into()];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::new(Experiment::Resonance);
        cfg.t_final = Some(-1.0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn grid_and_defaults() {
        let mut cfg = ExperimentConfig::new(Experiment::Resonance);
        cfg.h_min = 1.0;
        cfg.h_max = 2.0;
        cfg.h_count = 3;
        assert_eq!(cfg.h_grid(), vec![1.0, 1.5, 2.0]);
        assert_eq!(cfg.t_final(), DESK_T_RESONANCE);
        assert_eq!(ExperimentConfig::new(Experiment::Fpu).t_final(), DESK_T_FPU);
    }
}
