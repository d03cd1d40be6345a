//! Experiment configuration: a flat `key = value` file, overridden by flags.

use std::path::PathBuf;
use std::str::FromStr;

use crate::adaptive::{AdamHyper, Optimizer};
use crate::diagnostics::ClaimId;
use crate::error::{Error, Result};
use crate::schedule::StepSchedule;
use crate::solver::Method;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnyMethod {
    Mirror(Method),
    Adaptive(Optimizer),
}

impl FromStr for AnyMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.parse::<Method>()
            .map(AnyMethod::Mirror)
            .or_else(|_| s.parse::<Optimizer>().map(AnyMethod::Adaptive))
            .map_err(|_| {
                Error::Config(format!(
                    "unknown method `{s}` (md, omd, adam, optimistic-adam, rmsprop, optimistic-rmsprop)"
                ))
            })
    }
}

pub const KEYS: [&str; 20] = [
    "problem",
    "method",
    "geometry",
    "step",
    "sigma",
    "seed",
    "iters",
    "record_every",
    "ensemble",
    "workers",
    "out",
    "assert",
    "initial",
    "ergodic_threshold",
    "beta1",
    "beta2",
    "eps",
    "lr",
    "lr2",
    "paper_literal",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: Option<String>,
    pub method: Option<AnyMethod>,
    /// `None` uses the problem's default geometry.
    pub geometry: Option<String>,
    pub step: StepSchedule,
    pub sigma: f64,
    pub seed: u64,
    pub iters: usize,
    pub record_every: usize,
    pub ensemble: usize,
    /// `None` uses all available cores.
    pub workers: Option<usize>,
    pub out: PathBuf,
    pub assert: Vec<ClaimId>,
    pub initial: Option<Vec<f64>>,
    pub ergodic_threshold: f64,
    pub hyper: AdamHyper,
    lr2_set: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: None,
            method: None,
            geometry: None,
            step: StepSchedule::Constant(0.1),
            sigma: 0.0,
            seed: 0,
            iters: 1000,
            record_every: 1,
            ensemble: 1,
            workers: None,
            out: PathBuf::from("out"),
            assert: Vec::new(),
            initial: None,
            ergodic_threshold: 0.05,
            hyper: AdamHyper::default(),
            lr2_set: false,
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("`{key}` expects a number, got `{value}`")))
}

pub fn parse_list(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("`{s}` is not a number"))))
        .collect()
}

impl ExperimentConfig {
    /// Sets one key from its textual value.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "problem" => self.problem = Some(value.to_string()),
            "method" => self.method = Some(value.parse()?),
            "geometry" => self.geometry = Some(value.to_string()),
            "step" => self.step = value.parse().map_err(|e| Error::Config(format!("step: {e}")))?,
            "sigma" => self.sigma = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "iters" => self.iters = num(key, value)?,
            "record_every" => self.record_every = num(key, value)?,
            "ensemble" => self.ensemble = num(key, value)?,
            "workers" => self.workers = Some(num(key, value)?),
            "out" => self.out = PathBuf::from(value),
            "assert" => {
                self.assert = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse().map_err(|e| Error::Config(format!("assert: {e}"))))
                    .collect::<Result<_>>()?
            }
            "initial" => self.initial = Some(parse_list(value)?),
            "ergodic_threshold" => self.ergodic_threshold = num(key, value)?,
            "beta1" => self.hyper.beta1 = num(key, value)?,
            "beta2" => self.hyper.beta2 = num(key, value)?,
            "eps" => self.hyper.eps = num(key, value)?,
            "lr" => {
                self.hyper.lr = num(key, value)?;
                if !self.lr2_set {
                    self.hyper.lr2 = self.hyper.lr;
                }
            }
            "lr2" => {
                self.hyper.lr2 = num(key, value)?;
                self.lr2_set = true;
            }
            "paper_literal" => {
                self.hyper.paper_literal =
                    value.parse().map_err(|_| Error::Config(format!("paper_literal expects true/false, got `{value}`")))?
            }
            other => return Err(Error::Config(format!("unknown configuration key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file. `#` starts a comment; dashes in keys read as underscores.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            self.apply(&key.trim().replace('-', "_"), value)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn from_file_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_file(text)?;
        Ok(c)
    }

    /// Checks required fields and ranges.
    pub fn validate(&self) -> Result<(&str, AnyMethod)> {
        let problem = self.problem.as_deref().ok_or_else(|| Error::Config("missing `problem`".into()))?;
        let method = self.method.ok_or_else(|| Error::Config("missing `method`".into()))?;
        if self.iters == 0 || self.record_every == 0 || self.ensemble == 0 {
            return Err(Error::Config("iters, record_every and ensemble must be ≥ 1".into()));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::Config(format!("sigma must be non-negative, got {}", self.sigma)));
        }
        if matches!(method, AnyMethod::Adaptive(_)) {
            self.hyper.validate()?;
        }
        Ok((problem, method))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_override() {
        let mut c = ExperimentConfig::from_file_text(
            "# pennies\nproblem = matching-pennies\nmethod = omd\nstep = const:0.5\niters = 500 # short\nrecord-every = 2\n",
        )
        .unwrap();
        assert_eq!(c.iters, 500);
        assert_eq!(c.record_every, 2);
        assert_eq!(c.method, Some(AnyMethod::Mirror(Method::OptimisticMirrorDescent)));
        c.apply("iters", "20").unwrap();
        assert_eq!(c.iters, 20);
        assert_eq!(c.validate().unwrap().0, "matching-pennies");
    }

    #[test]
    fn unknown_keys_and_missing_fields() {
        assert!(ExperimentConfig::from_file_text("problme = x").is_err());
        assert!(ExperimentConfig::from_file_text("problem").is_err());
        let c = ExperimentConfig::from_file_text("method = md").unwrap();
        assert!(c.validate().is_err());
        let c = ExperimentConfig::from_file_text("problem = portrait").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn adaptive_and_claims() {
        let c = ExperimentConfig::from_file_text(
            "problem = bilinear\nmethod = optimistic-adam\nlr = 0.01\npaper_literal = true\nassert = MonotoneDescent, bounded-orbit",
        )
        .unwrap();
        assert_eq!(c.method, Some(AnyMethod::Adaptive(Optimizer::OptimisticAdam)));
        assert!(c.hyper.paper_literal);
        assert_eq!((c.hyper.lr, c.hyper.lr2), (0.01, 0.01));
        assert_eq!(c.assert, vec![ClaimId::MonotoneDescent, ClaimId::BoundedOrbit]);
        assert!(ExperimentConfig::from_file_text("method = sgd").is_err());
        assert!(ExperimentConfig::from_file_text("step = linear:3").is_err());
    }

    #[test]
    fn every_key_is_accepted() {
        let sample = |k: &str| match k {
            "problem" | "geometry" | "out" => "x",
            "method" => "md",
            "step" => "const:0.1",
            "assert" => "NullIdentity",
            "initial" => "0.1,0.2",
            "paper_literal" => "false",
            _ => "1",
        };
        let mut c = ExperimentConfig::default();
        for k in KEYS {
            c.apply(k, sample(k)).unwrap();
        }
    }
}
