//! Mirror descent (MD) and optimistic mirror descent (OMD) runs.
//!
//! MD:  `X_{n+1} = prox_{X_n}(−γ_n ĝ_n)`
//!
//! OMD: `X_{n+1/2} = prox_{X_n}(−γ_n ĝ_n)`, then `X_{n+1} = prox_{X_n}(−γ_n ĝ_{n+1/2})`.
//! Both prox steps of OMD are based at `X_n`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::{Geometry, PrimalPoint};
use crate::oracle::{OracleConfig, OracleState};
use crate::problems::Problem;
use crate::schedule::{Certification, Requirement, StepSchedule};

pub const RECORD_SCHEMA: &str = "saddlepoint-run/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "md")]
    MirrorDescent,
    #[serde(rename = "omd")]
    OptimisticMirrorDescent,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::MirrorDescent => "md",
            Method::OptimisticMirrorDescent => "omd",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "md" => Ok(Method::MirrorDescent),
            "omd" => Ok(Method::OptimisticMirrorDescent),
            other => Err(Error::Parse(format!("unknown mirror method `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Defaults to [`Problem::default_geometry`].
    pub geometry: Option<Geometry>,
    pub schedule: StepSchedule,
    pub oracle: OracleConfig,
    pub iterations: usize,
    /// Defaults to [`Geometry::initial_point`].
    pub initial_point: Option<PrimalPoint>,
    pub record_every: usize,
}

impl RunConfig {
    pub fn new(schedule: StepSchedule, iterations: usize) -> Self {
        Self {
            geometry: None,
            schedule,
            oracle: OracleConfig::exact(),
            iterations,
            initial_point: None,
            record_every: 1,
        }
    }

    pub fn with_geometry(mut self, geometry: Geometry) -> Self {
        self.geometry = Some(geometry);
        self
    }

    pub fn with_oracle(mut self, oracle: OracleConfig) -> Self {
        self.oracle = oracle;
        self
    }

    pub fn with_initial_point(mut self, x: impl Into<PrimalPoint>) -> Self {
        self.initial_point = Some(x.into());
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }
}

/// State after iteration `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub n: usize,
    /// `γ_n`
    pub step: f64,
    /// `X_{n+1}`
    pub iterate: Vec<f64>,
    /// `X_{n+1/2}` (optimistic methods only)
    pub half_step: Option<Vec<f64>>,
    /// `X̄_n = Σ_{k≤n} γ_k X_k / Σ_{k≤n} γ_k`
    pub ergodic: Vec<f64>,
    /// `D(x*_j, X_{n+1})` per listed solution; Euclidean distance for adaptive optimizers.
    pub distances: Vec<f64>,
    /// Cumulative oracle queries.
    pub queries: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub schema: String,
    pub problem: String,
    pub method: String,
    pub geometry: Option<Geometry>,
    pub schedule: Option<StepSchedule>,
    pub oracle: OracleConfig,
    pub iterations: usize,
    pub record_every: usize,
    pub solutions: Vec<PrimalPoint>,
    pub certifications: BTreeMap<String, Certification>,
    pub warnings: Vec<String>,
    pub complete: bool,
    pub abort_reason: Option<String>,
    pub diverged: bool,
    pub elapsed_seconds: f64,
    /// Optimizer hyperparameters for adaptive runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyperparameters: Option<serde_json::Value>,
}

/// Trajectory and metadata of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub meta: RunMeta,
    /// `X_1`
    pub initial: Vec<f64>,
    /// `D(x*_j, X_1)`
    pub initial_distances: Vec<f64>,
    pub rows: Vec<IterationRow>,
}

impl RunRecord {
    /// `[D(x*_j, X_1), D(x*_j, X_2), …]` over recorded rows.
    pub fn distance_series(&self, solution: usize) -> Vec<f64> {
        std::iter::once(self.initial_distances[solution])
            .chain(self.rows.iter().map(|r| r.distances[solution]))
            .collect()
    }

    /// `[X_1, X_2, …]` over recorded rows.
    pub fn iterates(&self) -> Vec<&[f64]> {
        std::iter::once(self.initial.as_slice())
            .chain(self.rows.iter().map(|r| r.iterate.as_slice()))
            .collect()
    }

    pub fn final_iterate(&self) -> &[f64] {
        self.rows.last().map_or(&self.initial, |r| &r.iterate)
    }

    pub fn final_distances(&self) -> &[f64] {
        self.rows.last().map_or(&self.initial_distances, |r| &r.distances)
    }

    pub fn final_ergodic(&self) -> Option<&[f64]> {
        self.rows.last().map(|r| r.ergodic.as_slice())
    }

    pub fn has_half_steps(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.half_step.is_some())
    }

    /// Every iteration recorded, in order.
    pub fn is_per_step(&self) -> bool {
        self.meta.record_every == 1 && self.rows.iter().enumerate().all(|(i, r)| r.n == i + 1)
    }

    pub fn solution_count(&self) -> usize {
        self.initial_distances.len()
    }
}

/// Running `Σγ_k X_k / Σγ_k`, updated in mean form so one point averages to itself exactly.
#[derive(Clone, Debug)]
pub struct ErgodicAverage {
    weighted: Vec<f64>,
    total_weight: f64,
    plain: Vec<f64>,
    count: usize,
}

impl ErgodicAverage {
    pub fn new(dim: usize) -> Self {
        Self { weighted: vec![0.0; dim], total_weight: 0.0, plain: vec![0.0; dim], count: 0 }
    }

    pub fn push(&mut self, weight: f64, x: &[f64]) {
        self.total_weight += weight;
        self.count += 1;
        let share = if self.total_weight > 0.0 { weight / self.total_weight } else { 0.0 };
        let plain_share = 1.0 / self.count as f64;
        for ((w, p), v) in self.weighted.iter_mut().zip(&mut self.plain).zip(x) {
            *w += share * (v - *w);
            *p += plain_share * (v - *p);
        }
    }

    /// Falls back to the unweighted mean while all weights are zero.
    pub fn current(&self) -> Vec<f64> {
        if self.total_weight > 0.0 {
            self.weighted.clone()
        } else {
            self.plain.clone()
        }
    }
}

/// Batch form of [`ErgodicAverage`].
pub fn ergodic_average(weights: &[f64], iterates: &[PrimalPoint]) -> Result<PrimalPoint> {
    check_len(weights.len(), iterates.len())?;
    let first = iterates.first().ok_or(Error::DimensionMismatch { expected: 1, got: 0 })?;
    let mut avg = ErgodicAverage::new(first.len());
    for (w, x) in weights.iter().zip(iterates) {
        check_len(first.len(), x.len())?;
        avg.push(*w, x);
    }
    Ok(PrimalPoint(avg.current()))
}

fn check_step(step: f64) -> Result<()> {
    if step.is_finite() && step >= 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("step size must be finite and non-negative, got {step}")))
    }
}

/// One MD step: `prox_x(−γ·ĝ(x))`. Queries the oracle once.
pub fn md_step(
    geometry: &Geometry,
    problem: &Problem,
    oracle: &mut OracleState,
    x: &[f64],
    step: f64,
) -> Result<PrimalPoint> {
    check_step(step)?;
    let g = oracle.query(problem, x)?;
    let dual: Vec<f64> = g.iter().map(|v| -step * v).collect();
    geometry.prox(x, &dual)
}

/// One OMD step, returning `(X_{n+1/2}, X_{n+1})`. Queries the oracle twice.
pub fn omd_step(
    geometry: &Geometry,
    problem: &Problem,
    oracle: &mut OracleState,
    x: &[f64],
    step: f64,
) -> Result<(PrimalPoint, PrimalPoint)> {
    let half = md_step(geometry, problem, oracle, x, step)?;
    let g_half = oracle.query(problem, &half)?;
    let dual: Vec<f64> = g_half.iter().map(|v| -step * v).collect();
    let next = geometry.prox(x, &dual)?;
    Ok((half, next))
}

fn solution_distances(geometry: &Geometry, solutions: &[PrimalPoint], x: &[f64]) -> Result<Vec<f64>> {
    solutions.iter().map(|s| geometry.bregman(s, x)).collect()
}

/// Runs MD or OMD for `config.iterations` steps.
///
/// Configuration problems are returned as errors. A step that fails mid-run stops the
/// iteration and the partial record is returned with `meta.complete = false`.
pub fn run(problem: &Problem, config: &RunConfig, method: Method) -> Result<RunRecord> {
    if config.iterations == 0 {
        return Err(Error::Config("iterations must be ≥ 1".into()));
    }
    if config.record_every == 0 {
        return Err(Error::Config("record_every must be ≥ 1".into()));
    }
    let geometry = config.geometry.clone().unwrap_or_else(|| problem.default_geometry());
    if geometry.set() != problem.set() {
        return Err(Error::Config("geometry is defined on a different feasible set".into()));
    }
    let initial = config.initial_point.clone().unwrap_or_else(|| geometry.initial_point());
    check_len(problem.dim(), initial.len())?;
    if !problem.set().contains(&initial, 1e-9) {
        return Err(Error::Config(format!("initial point {:?} is not feasible", initial.0)));
    }
    geometry
        .grad_dgf(&initial)
        .map_err(|e| Error::Config(format!("initial point is not a valid prox base: {e}")))?;

    let mut certifications = BTreeMap::new();
    certifications.insert("robbins_monro".to_string(), config.schedule.certify(Requirement::RobbinsMonro));
    let mut warnings = Vec::new();
    if method == Method::OptimisticMirrorDescent {
        let window = match problem.lipschitz() {
            Some(l) if l > 0.0 => config.schedule.certify(Requirement::OmdWindow {
                modulus: geometry.modulus(),
                lipschitz: l,
            }),
            _ => Certification::Uncertifiable("problem has no Lipschitz constant".into()),
        };
        if config.oracle.is_exact() && !window.passed() {
            warnings.push("optimistic run with exact oracle outside the certified step window".to_string());
        }
        certifications.insert("omd_window".to_string(), window);
    }

    let solutions = problem.solutions().to_vec();
    let initial_distances = solution_distances(&geometry, &solutions, &initial)?;
    let mut oracle = OracleState::new(config.oracle);
    let mut average = ErgodicAverage::new(problem.dim());
    let mut rows = Vec::with_capacity(config.iterations / config.record_every + 1);
    let mut x = initial.clone();
    let mut abort_reason = None;
    let start = Instant::now();

    for n in 1..=config.iterations {
        let outcome = config.schedule.step_at(n).and_then(|step| {
            let (half, next) = match method {
                Method::MirrorDescent => (None, md_step(&geometry, problem, &mut oracle, &x, step)?),
                Method::OptimisticMirrorDescent => {
                    let (h, nx) = omd_step(&geometry, problem, &mut oracle, &x, step)?;
                    (Some(h), nx)
                }
            };
            let distances = solution_distances(&geometry, &solutions, &next)?;
            Ok((step, half, next, distances))
        });
        let (step, half, next, distances) = match outcome {
            Ok(v) => v,
            Err(e) => {
                abort_reason = Some(format!("iteration {n}: {e}"));
                break;
            }
        };
        average.push(step, &x);
        x = next;
        if n % config.record_every == 0 || n == config.iterations {
            rows.push(IterationRow {
                n,
                step,
                iterate: x.0.clone(),
                half_step: half.map(PrimalPoint::into_inner),
                ergodic: average.current(),
                distances,
                queries: oracle.query_count(),
            });
        }
    }

    Ok(RunRecord {
        meta: RunMeta {
            schema: RECORD_SCHEMA.to_string(),
            problem: problem.label().to_string(),
            method: method.to_string(),
            geometry: Some(geometry),
            schedule: Some(config.schedule.clone()),
            oracle: config.oracle,
            iterations: config.iterations,
            record_every: config.record_every,
            solutions,
            certifications,
            warnings,
            complete: abort_reason.is_none(),
            abort_reason,
            diverged: false,
            elapsed_seconds: start.elapsed().as_secs_f64(),
            hyperparameters: None,
        },
        initial: initial.into_inner(),
        initial_distances,
        rows,
    })
}

/// SplitMix64 mix of `(base, index)`; the oracle seed of ensemble member `index`.
pub fn member_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `runs` independent copies of `config`, member `i` seeded by
/// `member_seed(config.oracle.seed, i)`. Records come back in member order.
pub fn run_ensemble(
    problem: &Problem,
    config: &RunConfig,
    method: Method,
    runs: usize,
    workers: Option<usize>,
) -> Result<Vec<RunRecord>> {
    if runs == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let job = || {
        (0..runs)
            .into_par_iter()
            .map(|i| {
                let mut member = config.clone();
                member.oracle = config.oracle.with_seed(member_seed(config.oracle.seed, i as u64));
                run(problem, &member, method)
            })
            .collect::<Result<Vec<_>>>()
    };
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?
            .install(job),
        None => job(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::matching_pennies;
    use approx::assert_abs_diff_eq;

    fn euclid(p: &Problem) -> Geometry {
        Geometry::euclidean(p.set().clone())
    }

    #[test]
    fn md_step_hand_trace() {
        let p = matching_pennies();
        let g = euclid(&p);
        let mut o = OracleState::new(OracleConfig::exact());
        let next = md_step(&g, &p, &mut o, &[0.9, 0.5], 0.1).unwrap();
        assert_abs_diff_eq!(next[0], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(next[1], 0.54, epsilon = 1e-15);
        let sol = &p.solutions()[0];
        assert_abs_diff_eq!(g.bregman(sol, &[0.9, 0.5]).unwrap(), 0.08, epsilon = 1e-15);
        assert_abs_diff_eq!(g.bregman(sol, &next).unwrap(), 0.0808, epsilon = 1e-15);
        assert_eq!(o.query_count(), 1);
    }

    #[test]
    fn omd_step_hand_trace() {
        let p = matching_pennies();
        let g = euclid(&p);
        let mut o = OracleState::new(OracleConfig::exact());
        let (half, next) = omd_step(&g, &p, &mut o, &[0.9, 0.5], 0.1).unwrap();
        assert_abs_diff_eq!(half[1], 0.54, epsilon = 1e-15);
        assert_abs_diff_eq!(next[0], 0.896, epsilon = 1e-15);
        assert_abs_diff_eq!(next[1], 0.54, epsilon = 1e-15);
        assert_abs_diff_eq!(g.bregman(&p.solutions()[0], &next).unwrap(), 0.079208, epsilon = 1e-15);
        assert_eq!(o.query_count(), 2);
    }

    #[test]
    fn ergodic_examples() {
        let x = PrimalPoint::from([0.3, 0.4]);
        assert_eq!(ergodic_average(&[0.7], &[x.clone()]).unwrap(), x);
        let mid = ergodic_average(&[1.0, 1.0], &[PrimalPoint::from([0.0, 2.0]), PrimalPoint::from([1.0, 0.0])]).unwrap();
        assert_eq!(mid.0, vec![0.5, 1.0]);
        let pts = [PrimalPoint::from([0.0, 0.0]), PrimalPoint::from([1.0, 0.0]), PrimalPoint::from([0.0, 1.0])];
        let avg = ergodic_average(&[1.0, 0.5, 1.0 / 3.0], &pts).unwrap();
        assert_abs_diff_eq!(avg[0], 3.0 / 11.0, epsilon = 1e-15);
        assert_abs_diff_eq!(avg[1], 2.0 / 11.0, epsilon = 1e-15);
        assert!(ergodic_average(&[1.0], &pts).is_err());
    }

    #[test]
    fn run_rejects_bad_configs() {
        let p = matching_pennies();
        let s = StepSchedule::constant(0.1).unwrap();
        assert!(run(&p, &RunConfig::new(s.clone(), 0), Method::MirrorDescent).is_err());
        assert!(run(&p, &RunConfig::new(s.clone(), 5).with_record_every(0), Method::MirrorDescent).is_err());
        assert!(run(&p, &RunConfig::new(s.clone(), 5).with_initial_point([2.0, 0.5]), Method::MirrorDescent).is_err());
        assert!(run(&p, &RunConfig::new(s, 5).with_initial_point([0.5]), Method::MirrorDescent).is_err());
    }

    #[test]
    fn custom_schedule_exhaustion_aborts_with_partial_record() {
        let p = matching_pennies();
        let cfg = RunConfig::new(StepSchedule::custom(vec![0.1, 0.1]).unwrap(), 5).with_initial_point([0.9, 0.5]);
        let rec = run(&p, &cfg, Method::MirrorDescent).unwrap();
        assert!(!rec.meta.complete);
        assert_eq!(rec.rows.len(), 2);
        assert!(rec.meta.abort_reason.unwrap().contains("iteration 3"));
    }

    #[test]
    fn record_every_keeps_final_row() {
        let p = matching_pennies();
        let cfg = RunConfig::new(StepSchedule::constant(0.1).unwrap(), 10)
            .with_initial_point([0.9, 0.5])
            .with_record_every(4);
        let rec = run(&p, &cfg, Method::OptimisticMirrorDescent).unwrap();
        let ns: Vec<usize> = rec.rows.iter().map(|r| r.n).collect();
        assert_eq!(ns, vec![4, 8, 10]);
        assert_eq!(rec.rows.last().unwrap().queries, 20);
        assert!(!rec.is_per_step());
    }

    #[test]
    fn member_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..100).map(|i| member_seed(1, i)).collect();
        assert_eq!(seeds.len(), 100);
    }
}
