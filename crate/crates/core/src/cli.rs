//! The `saddle` command line: run, check, probe, portrait, list-problems.
//!
//! Exit codes: 0 success, 1 a checked claim failed, 2 configuration or parse error,
//! 3 numerical abort.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::adaptive::{run_adaptive, AdaptiveConfig, UnconstrainedProblem, UNCONSTRAINED_LABELS};
use crate::config::{parse_list, AnyMethod, ExperimentConfig};
use crate::diagnostics::{
    check_ensemble_fraction, conformance_report, series_shape, CheckConstants, ClaimId, ConformanceReport,
};
use crate::error::{Error, Result};
use crate::geometry::{FeasibleBlock, Geometry, PrimalPoint};
use crate::oracle::{bound_report, OracleConfig, OracleState};
use crate::problems::{builtin, coherence_probe, Problem, SamplingPlan, BUILTIN_LABELS};
use crate::solver::{run, run_ensemble, Method, RunConfig, RunRecord};
use crate::{io, schedule::StepSchedule};

pub const EXIT_CLAIM_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Final-D threshold and required success fraction for ensemble assertions.
pub const ENSEMBLE_THRESHOLD: f64 = 1e-3;
pub const ENSEMBLE_REQUIRED_FRACTION: f64 = 0.9;
/// Samples used for the `M²` estimate.
const BOUND_SAMPLES: usize = 10_000;

#[derive(Parser, Debug)]
#[command(name = "saddle", version, about = "Mirror descent and optimistic mirror descent on saddle-point problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a solver and write trajectory CSV plus metadata JSON.
    Run(RunArgs),
    /// Check claims against a recorded trajectory.
    Check(CheckArgs),
    /// Classify a problem's coherence by sampling the variational residual.
    Probe(ProbeArgs),
    /// Run several methods from a grid of starts on a 2-D problem.
    Portrait(PortraitArgs),
    /// List the built-in problems.
    ListProblems,
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub problem: Option<String>,
    /// md, omd, adam, optimistic-adam, rmsprop, optimistic-rmsprop
    #[arg(long)]
    pub method: Option<String>,
    /// euclidean or entropic
    #[arg(long)]
    pub geometry: Option<String>,
    /// const:G, power:c=C,p=P or custom:[g1,g2,...]
    #[arg(long)]
    pub step: Option<String>,
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub iters: Option<String>,
    #[arg(long)]
    pub record_every: Option<String>,
    #[arg(long)]
    pub ensemble: Option<String>,
    #[arg(long)]
    pub workers: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    /// Comma-separated claims; exit 1 if any fails.
    #[arg(long)]
    pub assert: Option<String>,
    /// Comma-separated initial point.
    #[arg(long, allow_hyphen_values = true)]
    pub initial: Option<String>,
    #[arg(long)]
    pub ergodic_threshold: Option<String>,
    #[arg(long)]
    pub beta1: Option<String>,
    #[arg(long)]
    pub beta2: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub lr: Option<String>,
    #[arg(long)]
    pub lr2: Option<String>,
    #[arg(long)]
    pub paper_literal: bool,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let pairs: [(&'static str, &Option<String>); 19] = [
            ("problem", &self.problem),
            ("method", &self.method),
            ("geometry", &self.geometry),
            ("step", &self.step),
            ("sigma", &self.sigma),
            ("seed", &self.seed),
            ("iters", &self.iters),
            ("record_every", &self.record_every),
            ("ensemble", &self.ensemble),
            ("workers", &self.workers),
            ("out", &self.out),
            ("assert", &self.assert),
            ("initial", &self.initial),
            ("ergodic_threshold", &self.ergodic_threshold),
            ("beta1", &self.beta1),
            ("beta2", &self.beta2),
            ("eps", &self.eps),
            ("lr", &self.lr),
            ("lr2", &self.lr2),
        ];
        let mut out: Vec<_> = pairs.iter().filter_map(|(k, v)| v.as_deref().map(|v| (*k, v))).collect();
        if self.paper_literal {
            out.push(("paper_literal", "true"));
        }
        out
    }

    pub fn to_config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_file_text(&fs::read_to_string(path)?)?,
            None => ExperimentConfig::default(),
        };
        for (k, v) in self.overrides() {
            c.apply(k, v)?;
        }
        Ok(c)
    }
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Trajectory CSV; metadata is read from the sibling `.json`.
    pub record: PathBuf,
    /// Comma-separated claims, e.g. MonotoneDescent,NullIdentity
    #[arg(long, default_value = "MonotoneDescent")]
    pub claims: String,
    #[arg(long)]
    pub modulus: Option<f64>,
    /// Defaults to the built-in problem's constant.
    #[arg(long)]
    pub lipschitz: Option<f64>,
    /// Second-moment bound M²; defaults to an estimate for the built-in problem.
    #[arg(long)]
    pub m2: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub ergodic_threshold: f64,
    /// Report path; defaults to `<record>.report.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[arg(long)]
    pub problem: String,
    /// Grid points per axis.
    #[arg(long, conflicts_with = "samples")]
    pub grid: Option<usize>,
    /// Uniform random samples instead of a grid.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PortraitArgs {
    #[arg(long)]
    pub problem: String,
    #[arg(long, default_value = "md,omd")]
    pub methods: String,
    /// Semicolon-separated starts, e.g. "0.9,0.5;0.2,0.3".
    #[arg(long, conflicts_with = "grid")]
    pub starts: Option<String>,
    /// k×k interior grid of starts.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value = "const:0.1")]
    pub step: String,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    #[arg(long)]
    pub geometry: Option<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Parses `args` (program name first) and runs the command. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Probe(a) => cmd_probe(&a),
        Command::Portrait(a) => cmd_portrait(&a),
        Command::ListProblems => cmd_list_problems(),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Config(ref m) if m.starts_with("missing `")) {
                eprintln!("usage: saddle run --problem <LABEL> --method <METHOD> [options]  (see `saddle run --help`)");
            }
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonFiniteGradient | Error::NonFiniteInput(_) | Error::Domain(_) => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

fn fmt_list(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", "))
}

fn geometry_for(problem: &Problem, name: Option<&str>) -> Result<Geometry> {
    match name {
        Some(n) => Geometry::by_name(n, problem.set().clone()),
        None => Ok(problem.default_geometry()),
    }
}

fn constants_for(problem: &Problem, geometry: &Geometry, oracle: OracleConfig, threshold: f64) -> CheckConstants {
    CheckConstants {
        modulus: Some(geometry.modulus()),
        lipschitz: problem.lipschitz(),
        second_moment: Some(bound_report(&OracleState::new(oracle), problem, BOUND_SAMPLES)),
        ergodic_threshold: Some(threshold),
    }
}

fn report_abort(record: &RunRecord) -> Option<i32> {
    (!record.meta.complete).then(|| {
        eprintln!("aborted: {}", record.meta.abort_reason.as_deref().unwrap_or("unknown reason"));
        EXIT_NUMERICAL
    })
}

fn assert_exit(reports: &[ConformanceReport], extra: &[crate::diagnostics::ClaimEntry]) -> i32 {
    let mut ok = true;
    for e in reports.iter().flat_map(|r| &r.entries).chain(extra) {
        if !e.passed {
            ok = false;
            eprintln!("claim {} failed: {}", e.claim, e.detail);
        }
    }
    if ok {
        0
    } else {
        EXIT_CLAIM_FAILED
    }
}

pub fn cmd_run(args: &RunArgs) -> Result<i32> {
    let cfg = args.to_config()?;
    let (label, method) = cfg.validate()?;
    match method {
        AnyMethod::Mirror(m) => run_mirror(&cfg, label, m),
        AnyMethod::Adaptive(_) => run_adaptive_cmd(&cfg, label, method),
    }
}

fn run_mirror(cfg: &ExperimentConfig, label: &str, method: Method) -> Result<i32> {
    let problem = builtin(label)?;
    let geometry = geometry_for(&problem, cfg.geometry.as_deref())?;
    let oracle = OracleConfig::gaussian(cfg.sigma, cfg.seed)?;
    let mut rc = RunConfig::new(cfg.step.clone(), cfg.iters)
        .with_geometry(geometry.clone())
        .with_oracle(oracle)
        .with_record_every(cfg.record_every);
    if let Some(x) = &cfg.initial {
        rc = rc.with_initial_point(PrimalPoint(x.clone()));
    }
    let records = if cfg.ensemble > 1 {
        run_ensemble(&problem, &rc, method, cfg.ensemble, cfg.workers)?
    } else {
        vec![run(&problem, &rc, method)?]
    };
    for (i, r) in records.iter().enumerate() {
        let name = if records.len() == 1 { "run.csv".to_string() } else { format!("run-{i:03}.csv") };
        io::write_record(r, &cfg.out.join(name))?;
        for w in &r.meta.warnings {
            eprintln!("warning: {w}");
        }
    }
    if let [r] = records.as_slice() {
        println!(
            "{} {}: final D = {} (initial {}), queries = {}",
            r.meta.problem,
            r.meta.method,
            fmt_list(r.final_distances()),
            fmt_list(&r.initial_distances),
            r.rows.last().map_or(0, |row| row.queries)
        );
    } else {
        let mut finals: Vec<f64> =
            records.iter().map(|r| r.final_distances().iter().copied().fold(f64::INFINITY, f64::min)).collect();
        finals.sort_by(f64::total_cmp);
        println!(
            "{} {}: {} runs, final D min {:.3e} / median {:.3e} / max {:.3e}",
            problem.label(),
            method,
            finals.len(),
            finals[0],
            finals[finals.len() / 2],
            finals[finals.len() - 1]
        );
    }
    if let Some(code) = records.iter().find_map(report_abort) {
        return Ok(code);
    }
    if cfg.assert.is_empty() {
        return Ok(0);
    }
    let constants = constants_for(&problem, &geometry, oracle, cfg.ergodic_threshold);
    let per_record: Vec<ClaimId> =
        cfg.assert.iter().copied().filter(|c| *c != ClaimId::EnsembleConvergenceFraction).collect();
    let reports = records
        .iter()
        .map(|r| conformance_report(r, &per_record, &constants))
        .collect::<Result<Vec<_>>>()?;
    let extra = if cfg.assert.contains(&ClaimId::EnsembleConvergenceFraction) {
        vec![check_ensemble_fraction(&records, ENSEMBLE_THRESHOLD, ENSEMBLE_REQUIRED_FRACTION)?]
    } else {
        Vec::new()
    };
    io::write_json(&(&reports, &extra), &cfg.out.join("report.json"))?;
    Ok(assert_exit(&reports, &extra))
}

fn run_adaptive_cmd(cfg: &ExperimentConfig, label: &str, method: AnyMethod) -> Result<i32> {
    let AnyMethod::Adaptive(optimizer) = method else { unreachable!() };
    let problem = UnconstrainedProblem::builtin(label)?;
    let initial = cfg.initial.clone().unwrap_or_else(|| vec![1.0; problem.dim]);
    let ac = AdaptiveConfig::new(optimizer, cfg.iters, initial)
        .with_hyper(cfg.hyper)
        .with_record_every(cfg.record_every);
    let record = run_adaptive(&problem, &ac)?;
    io::write_record(&record, &cfg.out.join("run.csv"))?;
    let theta = record.final_iterate();
    println!(
        "{} {}: final ‖θ‖ = {:.4e}, ‖θ − θ*‖ = {}, gradient evaluations = {}",
        record.meta.problem,
        record.meta.method,
        theta.iter().map(|v| v * v).sum::<f64>().sqrt(),
        fmt_list(record.final_distances()),
        record.rows.last().map_or(0, |r| r.queries)
    );
    if let Some(code) = report_abort(&record) {
        return Ok(code);
    }
    if cfg.assert.is_empty() {
        return Ok(0);
    }
    let constants = CheckConstants { ergodic_threshold: Some(cfg.ergodic_threshold), ..Default::default() };
    let report = conformance_report(&record, &cfg.assert, &constants)?;
    io::write_json(&report, &cfg.out.join("report.json"))?;
    Ok(assert_exit(&[report], &[]))
}

pub fn cmd_check(args: &CheckArgs) -> Result<i32> {
    let record = io::read_record(&args.record)?;
    let claims: Vec<ClaimId> =
        args.claims.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse()).collect::<Result<_>>()?;
    let problem = builtin(&record.meta.problem).ok();
    let modulus = args.modulus.or_else(|| record.meta.geometry.as_ref().map(Geometry::modulus));
    let lipschitz = args.lipschitz.or_else(|| problem.as_ref().and_then(Problem::lipschitz));
    let second_moment = args
        .m2
        .or_else(|| problem.as_ref().map(|p| bound_report(&OracleState::new(record.meta.oracle), p, BOUND_SAMPLES)));
    let constants = CheckConstants { modulus, lipschitz, second_moment, ergodic_threshold: Some(args.ergodic_threshold) };
    let report = conformance_report(&record, &claims, &constants)?;
    let out = args.out.clone().unwrap_or_else(|| args.record.with_extension("report.json"));
    io::write_json(&report, &out)?;
    for e in &report.entries {
        println!("{} {}: {}", if e.passed { "PASS" } else { "FAIL" }, e.claim, e.detail);
    }
    Ok(if report.all_passed() { 0 } else { EXIT_CLAIM_FAILED })
}

pub fn cmd_probe(args: &ProbeArgs) -> Result<i32> {
    let problem = builtin(&args.problem)?;
    let plan = match (args.grid, args.samples) {
        (Some(per_axis), _) => SamplingPlan::Grid { per_axis },
        (None, Some(samples)) => SamplingPlan::Random { samples, seed: args.seed },
        (None, None) => problem.default_plan(),
    };
    let report = coherence_probe(&problem, &plan)?;
    for s in &report.per_solution {
        println!(
            "solution {}: min {:.3e}, max {:.3e}, mean {:.3e}, min off the {}-ball {}",
            fmt_list(&s.solution),
            s.min,
            s.max,
            s.mean,
            crate::problems::STRICT_EXCLUSION_RADIUS,
            s.min_off_ball.map_or("n/a".to_string(), |v| format!("{v:.3e}"))
        );
    }
    println!("{} (max |residual| = {:.1e})", report.classification, report.max_abs_residual());
    io::write_json(&report, &args.out.join(format!("probe-{}.json", problem.label())))?;
    Ok(0)
}

#[derive(Serialize)]
struct PortraitEntry {
    method: String,
    start: Vec<f64>,
    csv: PathBuf,
    first_distance: f64,
    min_distance: f64,
    argmin: usize,
    last_distance: f64,
}

#[derive(Serialize)]
struct PortraitIndex {
    figure: &'static str,
    problem: String,
    step: StepSchedule,
    iterations: usize,
    columns: &'static str,
    entries: Vec<PortraitEntry>,
}

fn grid_starts(problem: &Problem, k: usize) -> Result<Vec<Vec<f64>>> {
    let mut axes: Vec<(f64, f64)> = Vec::new();
    for block in problem.set().blocks() {
        match block {
            FeasibleBlock::Box { lower, upper } => axes.extend(lower.iter().copied().zip(upper.iter().copied())),
            FeasibleBlock::Ball { center, radius } => {
                axes.extend(center.iter().map(|c| (c - radius / 2f64.sqrt(), c + radius / 2f64.sqrt())))
            }
            FeasibleBlock::Simplex { .. } => return Err(Error::Config("grid starts need box or ball blocks".into())),
        }
    }
    let at = |(lo, hi): (f64, f64), i: usize| lo + (hi - lo) * (i + 1) as f64 / (k + 1) as f64;
    Ok((0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| vec![at(axes[0], i), at(axes[1], j)]).collect())
}

pub fn cmd_portrait(args: &PortraitArgs) -> Result<i32> {
    let problem = builtin(&args.problem)?;
    if problem.dim() != 2 {
        return Err(Error::Config(format!("portrait needs a 2-dimensional problem, `{}` has {}", problem.label(), problem.dim())));
    }
    let methods: Vec<Method> = args.methods.split(',').map(|m| m.trim().parse()).collect::<Result<_>>()?;
    let schedule: StepSchedule = args.step.parse()?;
    let geometry = geometry_for(&problem, args.geometry.as_deref())?;
    let starts = match (&args.starts, args.grid) {
        (Some(s), _) => s.split(';').map(parse_list).collect::<Result<Vec<_>>>()?,
        (None, k) => grid_starts(&problem, k.unwrap_or(3))?,
    };
    let mut entries = Vec::new();
    let mut aborted = false;
    for method in &methods {
        for (i, start) in starts.iter().enumerate() {
            let rc = RunConfig::new(schedule.clone(), args.iters)
                .with_geometry(geometry.clone())
                .with_initial_point(PrimalPoint(start.clone()));
            let record = run(&problem, &rc, *method)?;
            aborted |= report_abort(&record).is_some();
            let csv = args.out.join(format!("portrait-{method}-{i:02}.csv"));
            io::write_record(&record, &csv)?;
            let series = record.distance_series(0);
            let shape = series_shape(&series, 0.0).ok_or(Error::MissingSolution)?;
            println!(
                "{method} from {}: D {:.3e} → min {:.3e} at n = {} → {:.3e}",
                fmt_list(start),
                series[0],
                shape.min,
                shape.argmin + 1,
                shape.last
            );
            entries.push(PortraitEntry {
                method: method.to_string(),
                start: start.clone(),
                csv,
                first_distance: series[0],
                min_distance: shape.min,
                argmin: shape.argmin + 1,
                last_distance: shape.last,
            });
        }
    }
    let index = PortraitIndex {
        figure: "phase portrait: vanilla mirror descent against optimistic mirror descent",
        problem: problem.label().to_string(),
        step: schedule,
        iterations: args.iters,
        columns: "plot x_1 against x_2 from each CSV; the `# initial_point` line gives the start",
        entries,
    };
    io::write_json(&index, &args.out.join("portrait.json"))?;
    Ok(if aborted { EXIT_NUMERICAL } else { 0 })
}

pub fn cmd_list_problems() -> Result<i32> {
    for label in BUILTIN_LABELS {
        let p = builtin(label)?;
        let lipschitz = p.lipschitz().map_or("unknown".to_string(), |l| format!("{l:.4}"));
        println!("{label:<18} dim {}  L {lipschitz:<8} {:?}  {}", p.dim(), p.coherence(), p.description());
    }
    for label in UNCONSTRAINED_LABELS {
        let p = UnconstrainedProblem::builtin(label)?;
        println!("{label:<18} dim {}  unconstrained, adaptive methods only", p.dim);
    }
    Ok(0)
}

/// Path of the trajectory written by a single `run`.
pub fn run_csv_path(out: &Path) -> PathBuf {
    out.join("run.csv")
}
