//! Adam and RMSprop with an optional extra-gradient ("optimistic") pass,
//! for unconstrained min-max problems in gradient-field form.
//!
//! An optimistic step forms a waiting point `θ′` from `θ_{t−1}` with the first moment set,
//! re-queries the field at `θ′`, and steps from `θ_{t−1}` again with a second, disjoint moment set.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::{l2_dist, l2_norm};
use crate::oracle::OracleConfig;
use crate::problems::FieldFn;
use crate::solver::{ErgodicAverage, IterationRow, RunMeta, RunRecord, RECORD_SCHEMA};

/// Iterates with norm above this are treated as divergent.
pub const DIVERGENCE_NORM: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    Adam,
    OptimisticAdam,
    Rmsprop,
    OptimisticRmsprop,
}

impl Optimizer {
    pub const ALL: [Optimizer; 4] =
        [Optimizer::Adam, Optimizer::OptimisticAdam, Optimizer::Rmsprop, Optimizer::OptimisticRmsprop];

    pub fn is_optimistic(self) -> bool {
        matches!(self, Optimizer::OptimisticAdam | Optimizer::OptimisticRmsprop)
    }

    pub fn evaluations_per_step(self) -> u64 {
        if self.is_optimistic() {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimizer::Adam => "adam",
            Optimizer::OptimisticAdam => "optimistic-adam",
            Optimizer::Rmsprop => "rmsprop",
            Optimizer::OptimisticRmsprop => "optimistic-rmsprop",
        })
    }
}

impl FromStr for Optimizer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Optimizer::ALL
            .into_iter()
            .find(|o| o.to_string() == s)
            .ok_or_else(|| Error::Parse(format!("unknown optimizer `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamHyper {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// First-pass learning rate `η`.
    pub lr: f64,
    /// Second-pass learning rate `η′`.
    pub lr2: f64,
    /// Second-pass recursion with `(1 − β1)` on `v′` and `1 − β1^t` in both bias corrections.
    #[serde(default)]
    pub paper_literal: bool,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self { beta1: 0.0, beta2: 0.9, eps: 1e-8, lr: 1e-4, lr2: 1e-4, paper_literal: false }
    }
}

impl AdamHyper {
    pub fn with_lr(mut self, lr: f64) -> Self {
        self.lr = lr;
        self.lr2 = lr;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {b}")));
            }
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        for (name, lr) in [("lr", self.lr), ("lr2", self.lr2)] {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {lr}")));
            }
        }
        Ok(())
    }
}

/// Parameters, both moment sets and the step counter.
/// `(m, v)` belong to the first pass, `(m2, v2)` to the second.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub theta: Vec<f64>,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub m2: Vec<f64>,
    pub v2: Vec<f64>,
    pub t: u64,
    pub hyper: AdamHyper,
    pub evaluations: u64,
}

fn finite_gradient(g: Vec<f64>, dim: usize) -> Result<Vec<f64>> {
    check_len(dim, g.len())?;
    if g.iter().all(|v| v.is_finite()) {
        Ok(g)
    } else {
        Err(Error::NonFiniteGradient)
    }
}

impl AdamState {
    pub fn new(theta: Vec<f64>, hyper: AdamHyper) -> Result<Self> {
        hyper.validate()?;
        let d = theta.len();
        Ok(Self { theta, m: vec![0.0; d], v: vec![0.0; d], m2: vec![0.0; d], v2: vec![0.0; d], t: 0, hyper, evaluations: 0 })
    }

    fn evaluate(&mut self, field: &dyn Fn(&[f64]) -> Vec<f64>, at: &[f64]) -> Result<Vec<f64>> {
        self.evaluations += 1;
        finite_gradient(field(at), self.theta.len())
    }

    /// First pass at the current `t`: updates `(m, v)` with `g` and returns the waiting point `θ′`.
    pub fn first_pass(&mut self, g: &[f64], rmsprop: bool) -> Vec<f64> {
        let AdamHyper { beta1, beta2, eps, lr, .. } = self.hyper;
        let t = self.t as i32;
        let (c1, c2) = (1.0 - beta1.powi(t), 1.0 - beta2.powi(t));
        (0..g.len())
            .map(|i| {
                self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g[i] * g[i];
                if rmsprop {
                    self.theta[i] - lr * g[i] / (self.v[i].sqrt() + eps)
                } else {
                    self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g[i];
                    self.theta[i] - lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + eps)
                }
            })
            .collect()
    }

    /// Second pass at the current `t`: updates `(m2, v2)` with `g` and returns the new `θ_t`,
    /// stepped from `θ_{t−1}`.
    pub fn second_pass(&mut self, g: &[f64], rmsprop: bool) -> Vec<f64> {
        let AdamHyper { beta1, beta2, eps, lr2, paper_literal, .. } = self.hyper;
        let t = self.t as i32;
        let (c1, c2, v_rate) = if paper_literal {
            (1.0 - beta1.powi(t), 1.0 - beta1.powi(t), 1.0 - beta1)
        } else {
            (1.0 - beta1.powi(t), 1.0 - beta2.powi(t), 1.0 - beta2)
        };
        (0..g.len())
            .map(|i| {
                if rmsprop {
                    self.v2[i] = beta2 * self.v2[i] + (1.0 - beta2) * g[i] * g[i];
                    self.theta[i] - lr2 * g[i] / (self.v2[i].sqrt() + eps)
                } else {
                    self.v2[i] = beta2 * self.v2[i] + v_rate * g[i] * g[i];
                    self.m2[i] = beta1 * self.m2[i] + (1.0 - beta1) * g[i];
                    self.theta[i] - lr2 * (self.m2[i] / c1) / ((self.v2[i] / c2).sqrt() + eps)
                }
            })
            .collect()
    }

    fn vanilla(&mut self, field: &dyn Fn(&[f64]) -> Vec<f64>, rmsprop: bool) -> Result<()> {
        let g = self.evaluate(field, &self.theta.clone())?;
        self.t += 1;
        self.theta = self.first_pass(&g, rmsprop);
        Ok(())
    }

    fn optimistic(&mut self, field: &dyn Fn(&[f64]) -> Vec<f64>, rmsprop: bool) -> Result<Vec<f64>> {
        let g1 = self.evaluate(field, &self.theta.clone())?;
        let saved = self.clone();
        self.t += 1;
        let waiting = self.first_pass(&g1, rmsprop);
        let g2 = match self.evaluate(field, &waiting) {
            Ok(g) => g,
            Err(e) => {
                let evaluations = self.evaluations;
                *self = saved;
                self.evaluations = evaluations;
                return Err(e);
            }
        };
        self.theta = self.second_pass(&g2, rmsprop);
        Ok(waiting)
    }

    pub fn adam_step(&mut self, field: &dyn Fn(&[f64]) -> Vec<f64>) -> Result<()> {
        self.vanilla(field, false)
    }

    /// Returns the waiting point `θ′`.
    pub fn optimistic_adam_step(&mut self, field: &dyn Fn(&[f64]) -> Vec<f64>) -> Result<Vec<f64>> {
        self.optimistic(field, false)
    }

    pub fn rmsprop_step(&mut self, field: &dyn Fn(&[f64]) -> Vec<f64>) -> Result<()> {
        self.vanilla(field, true)
    }

    pub fn optimistic_rmsprop_step(&mut self, field: &dyn Fn(&[f64]) -> Vec<f64>) -> Result<Vec<f64>> {
        self.optimistic(field, true)
    }

    /// One step of `optimizer`; returns `θ′` for optimistic variants.
    pub fn step(&mut self, optimizer: Optimizer, field: &dyn Fn(&[f64]) -> Vec<f64>) -> Result<Option<Vec<f64>>> {
        match optimizer {
            Optimizer::Adam => self.adam_step(field).map(|_| None),
            Optimizer::OptimisticAdam => self.optimistic_adam_step(field).map(Some),
            Optimizer::Rmsprop => self.rmsprop_step(field).map(|_| None),
            Optimizer::OptimisticRmsprop => self.optimistic_rmsprop_step(field).map(Some),
        }
    }
}

/// A min-max problem on all of `R^d`, given by its field `(∇_{θ1} f, −∇_{θ2} f)`.
#[derive(Clone)]
pub struct UnconstrainedProblem {
    pub label: String,
    pub dim: usize,
    pub field: FieldFn,
    pub solution: Option<Vec<f64>>,
}

impl fmt::Debug for UnconstrainedProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnconstrainedProblem")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("solution", &self.solution)
            .finish()
    }
}

pub const UNCONSTRAINED_LABELS: [&str; 2] = ["bilinear", "quadratic-saddle"];

impl UnconstrainedProblem {
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        field: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        solution: Option<Vec<f64>>,
    ) -> Self {
        Self { label: label.into(), dim, field: Arc::new(field), solution }
    }

    /// `f = θ1·θ2`
    pub fn bilinear() -> Self {
        Self::new("bilinear", 2, |t| vec![t[1], -t[0]], Some(vec![0.0, 0.0]))
    }

    /// `f = ½(θ1² − θ2²)`
    pub fn quadratic_saddle() -> Self {
        Self::new("quadratic-saddle", 2, |t| vec![t[0], t[1]], Some(vec![0.0, 0.0]))
    }

    pub fn zero(dim: usize) -> Self {
        Self::new("zero", dim, move |_| vec![0.0; dim], None)
    }

    pub fn builtin(label: &str) -> Result<Self> {
        match label {
            "bilinear" => Ok(Self::bilinear()),
            "quadratic-saddle" => Ok(Self::quadratic_saddle()),
            other => Err(Error::Config(format!("unknown unconstrained problem `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AdaptiveConfig {
    pub optimizer: Optimizer,
    pub hyper: AdamHyper,
    pub iterations: usize,
    pub initial_point: Vec<f64>,
    pub record_every: usize,
}

impl AdaptiveConfig {
    pub fn new(optimizer: Optimizer, iterations: usize, initial_point: Vec<f64>) -> Self {
        Self { optimizer, hyper: AdamHyper::default(), iterations, initial_point, record_every: 1 }
    }

    pub fn with_hyper(mut self, hyper: AdamHyper) -> Self {
        self.hyper = hyper;
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }
}

/// Runs an adaptive optimizer. Distances in the record are `‖θ − θ*‖`;
/// `queries` counts field evaluations.
pub fn run_adaptive(problem: &UnconstrainedProblem, config: &AdaptiveConfig) -> Result<RunRecord> {
    if config.iterations == 0 || config.record_every == 0 {
        return Err(Error::Config("iterations and record_every must be ≥ 1".into()));
    }
    check_len(problem.dim, config.initial_point.len())?;
    let mut state = AdamState::new(config.initial_point.clone(), config.hyper)?;
    let solutions: Vec<Vec<f64>> = problem.solution.iter().cloned().collect();
    let dists = |theta: &[f64]| solutions.iter().map(|s| l2_dist(theta, s)).collect::<Vec<_>>();
    let initial_distances = dists(&state.theta);
    let mut average = ErgodicAverage::new(problem.dim);
    let mut rows = Vec::new();
    let (mut abort_reason, mut diverged) = (None, false);
    let start = Instant::now();
    let field = problem.field.clone();

    for n in 1..=config.iterations {
        let before = state.theta.clone();
        let waiting = match state.step(config.optimizer, &*field) {
            Ok(w) => w,
            Err(e) => {
                abort_reason = Some(format!("iteration {n}: {e}"));
                break;
            }
        };
        average.push(1.0, &before);
        let norm = l2_norm(&state.theta);
        if n % config.record_every == 0 || n == config.iterations || !(norm <= DIVERGENCE_NORM) {
            rows.push(IterationRow {
                n,
                step: config.hyper.lr,
                iterate: state.theta.clone(),
                half_step: waiting,
                ergodic: average.current(),
                distances: dists(&state.theta),
                queries: state.evaluations,
            });
        }
        if !(norm <= DIVERGENCE_NORM) {
            diverged = true;
            abort_reason = Some(format!("iteration {n}: ‖θ‖ = {norm:e} exceeds {DIVERGENCE_NORM:e}"));
            break;
        }
    }

    Ok(RunRecord {
        meta: RunMeta {
            schema: RECORD_SCHEMA.to_string(),
            problem: problem.label.clone(),
            method: config.optimizer.to_string(),
            geometry: None,
            schedule: None,
            oracle: OracleConfig::exact(),
            iterations: config.iterations,
            record_every: config.record_every,
            solutions: solutions.into_iter().map(Into::into).collect(),
            certifications: Default::default(),
            warnings: Vec::new(),
            complete: abort_reason.is_none(),
            abort_reason,
            diverged,
            elapsed_seconds: start.elapsed().as_secs_f64(),
            hyperparameters: serde_json::to_value(config.hyper).ok(),
        },
        initial: config.initial_point.clone(),
        initial_distances,
        rows,
    })
}
