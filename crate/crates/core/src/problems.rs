//! Benchmark saddle-point problems `min_{x1} max_{x2} f(x1, x2)`.
//!
//! Every problem carries its gradient field `g = (∇_{x1} f, −∇_{x2} f)`, the solutions it
//! knows about and the coherence class it declares. [`coherence_probe`] checks the declared
//! class against samples of the variational residual `⟨g(x), x − x*⟩`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::{dot, l2_dist, FeasibleBlock, Geometry, PrimalPoint, ProductSet};
use crate::nash;

pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type FieldFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Stationary point of the portrait problem, from a damped Newton solve of `g(x) = 0`
/// started at (½, ½). `tests/problems.rs` re-derives it.
pub const PORTRAIT_CRITICAL_POINT: [f64; 2] = [0.40278777035546204, 0.5972122296445379];

/// Labels accepted by [`builtin`].
pub const BUILTIN_LABELS: [&str; 5] = ["matching-pennies", "portrait", "nonmonotone-ex2", "scc-quadratic", "simplex-game"];

/// Declared relationship between the gradient field and the solution set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherenceClass {
    Strict,
    Null,
    Coherent,
    Unknown,
}

#[derive(Clone)]
pub struct Problem {
    label: String,
    description: String,
    set: ProductSet,
    value: ValueFn,
    field: FieldFn,
    lipschitz: Option<f64>,
    solutions: Vec<PrimalPoint>,
    coherence: CoherenceClass,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("label", &self.label)
            .field("dim", &self.set.dim())
            .field("lipschitz", &self.lipschitz)
            .field("solutions", &self.solutions)
            .field("coherence", &self.coherence)
            .finish()
    }
}

impl Problem {
    pub fn new(
        label: impl Into<String>,
        set: ProductSet,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        field: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            description: String::new(),
            set,
            value: Arc::new(value),
            field: Arc::new(field),
            lipschitz: None,
            solutions: Vec::new(),
            coherence: CoherenceClass::Unknown,
        }
    }

    pub fn with_description(mut self, text: impl Into<String>) -> Self {
        self.description = text.into();
        self
    }

    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.lipschitz = Some(lipschitz);
        self
    }

    pub fn with_solutions(mut self, solutions: Vec<PrimalPoint>) -> Result<Self> {
        for s in &solutions {
            check_len(self.set.dim(), s.len())?;
            if !self.set.contains(s, 1e-9) {
                return Err(Error::Config(format!("solution {:?} lies outside the feasible set", s.0)));
            }
        }
        self.solutions = solutions;
        Ok(self)
    }

    pub fn with_coherence(mut self, class: CoherenceClass) -> Self {
        self.coherence = class;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn set(&self) -> &ProductSet {
        &self.set
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    /// Lipschitz constant of `g` in the Euclidean norm, when known.
    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn solutions(&self) -> &[PrimalPoint] {
        &self.solutions
    }

    pub fn coherence(&self) -> CoherenceClass {
        self.coherence
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.field)(x)
    }

    /// Entropy on simplex blocks, Euclidean elsewhere.
    pub fn default_geometry(&self) -> Geometry {
        Geometry::entropic(self.set.clone())
    }

    /// Sampling plan used when checking the variational inequality for this problem.
    pub fn default_plan(&self) -> SamplingPlan {
        let plan = SamplingPlan::Grid { per_axis: 101 };
        match plan.points(&self.set) {
            Ok(_) => plan,
            Err(_) => SamplingPlan::Random { samples: 20_000, seed: 0 },
        }
    }
}

fn unit_square(lower: f64, upper: f64) -> ProductSet {
    ProductSet::two_player(
        FeasibleBlock::cube(1, lower, upper).expect("valid box"),
        FeasibleBlock::cube(1, lower, upper).expect("valid box"),
    )
    .expect("valid product")
}

/// `f(x1, x2) = (x1 − ½)(x2 − ½)` on `[0, 1]²`.
pub fn matching_pennies() -> Problem {
    Problem::new(
        "matching-pennies",
        unit_square(0.0, 1.0),
        |x| (x[0] - 0.5) * (x[1] - 0.5),
        |x| vec![x[1] - 0.5, -(x[0] - 0.5)],
    )
    .with_description("bilinear matching pennies on [0,1]², interior solution (½,½)")
    .with_lipschitz(1.0)
    .with_solutions(vec![PrimalPoint::from([0.5, 0.5])])
    .expect("solution is feasible")
    .with_coherence(CoherenceClass::Null)
}

/// `f(x1, x2) = (x1 − ½)(x2 − ½) + ⅓·exp(−(x1 − ¼)² − (x2 − ¾)²)` on `[0, 1]²`.
///
/// The listed solution is the unique stationary point of `g`. It is a (Stampacchia)
/// solution of the variational inequality, but `f` is concave in `x1` there.
pub fn portrait_problem() -> Problem {
    let bump = |x: &[f64]| (-(x[0] - 0.25).powi(2) - (x[1] - 0.75).powi(2)).exp();
    let problem = Problem::new(
        "portrait",
        unit_square(0.0, 1.0),
        move |x| (x[0] - 0.5) * (x[1] - 0.5) + bump(x) / 3.0,
        move |x| {
            let e = bump(x);
            vec![
                (x[1] - 0.5) - 2.0 / 3.0 * (x[0] - 0.25) * e,
                -((x[0] - 0.5) - 2.0 / 3.0 * (x[1] - 0.75) * e),
            ]
        },
    )
    .with_description("bilinear term plus a Gaussian bump on [0,1]²; vanilla MD spirals outward")
    .with_solutions(vec![PrimalPoint::from(PORTRAIT_CRITICAL_POINT)])
    .expect("critical point is feasible")
    .with_coherence(CoherenceClass::Coherent);
    let lipschitz = estimate_lipschitz(&problem, 20_000, 0);
    problem.with_lipschitz(lipschitz)
}

/// `f(x1, x2) = (x1⁴x2² + x1² + 1)(x1²x2⁴ − x2² + 1)` on `[−1, 1]²`: not quasi-monotone,
/// yet `(0, 0)` solves the variational inequality.
pub fn nonmonotone_example() -> Problem {
    let p = |a: f64, b: f64| a.powi(4) * b * b + a * a + 1.0;
    let q = |a: f64, b: f64| a * a * b.powi(4) - b * b + 1.0;
    let problem = Problem::new(
        "nonmonotone-ex2",
        unit_square(-1.0, 1.0),
        move |x| p(x[0], x[1]) * q(x[0], x[1]),
        move |x| {
            let (a, b) = (x[0], x[1]);
            let (pv, qv) = (p(a, b), q(a, b));
            let dfa = (4.0 * a.powi(3) * b * b + 2.0 * a) * qv + pv * (2.0 * a * b.powi(4));
            let dfb = (2.0 * a.powi(4) * b) * qv + pv * (4.0 * a * a * b.powi(3) - 2.0 * b);
            vec![dfa, -dfb]
        },
    )
    .with_description("non-monotone quartic on [-1,1]², unique solution (0,0)")
    .with_solutions(vec![PrimalPoint::from([0.0, 0.0])])
    .expect("origin is feasible")
    .with_coherence(CoherenceClass::Coherent);
    let lipschitz = estimate_lipschitz(&problem, 20_000, 0);
    problem.with_lipschitz(lipschitz)
}

/// `f = (κ/2)‖x1 − c1‖² − (κ/2)‖x2 − c2‖² + x1ᵀ B x2` on `[−1, 1]^dim × [−1, 1]^dim`.
pub fn strictly_convex_concave_with(
    center_min: Vec<f64>,
    center_max: Vec<f64>,
    coupling: DMatrix<f64>,
    curvature: f64,
) -> Result<Problem> {
    let d = center_min.len();
    check_len(d, center_max.len())?;
    check_len(d, coupling.nrows())?;
    check_len(d, coupling.ncols())?;
    if d == 0 {
        return Err(Error::Config("dimension must be ≥ 1".into()));
    }
    if !(curvature.is_finite() && curvature > 0.0) {
        return Err(Error::Config(format!("curvature must be positive, got {curvature}")));
    }
    // saddle: κ(x1 − c1) + B x2 = 0, κ(x2 − c2) − Bᵀ x1 = 0
    let mut sys = DMatrix::zeros(2 * d, 2 * d);
    sys.view_mut((0, 0), (d, d)).fill_with_identity();
    sys.view_mut((d, d), (d, d)).fill_with_identity();
    sys *= curvature;
    sys.view_mut((0, d), (d, d)).copy_from(&coupling);
    sys.view_mut((d, 0), (d, d)).copy_from(&(-coupling.transpose()));
    let mut rhs = DVector::zeros(2 * d);
    for i in 0..d {
        rhs[i] = curvature * center_min[i];
        rhs[d + i] = curvature * center_max[i];
    }
    let saddle = sys
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Config("saddle system is singular".into()))?;
    if saddle.iter().any(|v| !(v.abs() < 1.0 - 1e-6)) {
        return Err(Error::Config("saddle point is not interior to the box".into()));
    }
    let spectral = coupling.singular_values().iter().copied().fold(0.0, f64::max);
    let lipschitz = (curvature * curvature + spectral * spectral).sqrt();

    let set = ProductSet::two_player(
        FeasibleBlock::cube(d, -1.0, 1.0)?,
        FeasibleBlock::cube(d, -1.0, 1.0)?,
    )?;
    let (c1, c2, b) = (Arc::new(center_min), Arc::new(center_max), Arc::new(coupling));
    let value = {
        let (c1, c2, b) = (c1.clone(), c2.clone(), b.clone());
        move |x: &[f64]| {
            let (x1, x2) = x.split_at(d);
            let q1: f64 = x1.iter().zip(c1.iter()).map(|(a, c)| (a - c).powi(2)).sum();
            let q2: f64 = x2.iter().zip(c2.iter()).map(|(a, c)| (a - c).powi(2)).sum();
            let bilinear = DVector::from_column_slice(x1).dot(&(&*b * DVector::from_column_slice(x2)));
            0.5 * curvature * (q1 - q2) + bilinear
        }
    };
    let field = move |x: &[f64]| {
        let (x1, x2) = x.split_at(d);
        let bx2 = &*b * DVector::from_column_slice(x2);
        let btx1 = b.transpose() * DVector::from_column_slice(x1);
        let mut g = Vec::with_capacity(2 * d);
        g.extend((0..d).map(|i| curvature * (x1[i] - c1[i]) + bx2[i]));
        g.extend((0..d).map(|i| curvature * (x2[i] - c2[i]) - btx1[i]));
        g
    };
    Problem::new("scc-quadratic", set, value, field)
        .with_description("strictly convex-concave quadratic with bilinear coupling on boxes")
        .with_lipschitz(lipschitz)
        .with_solutions(vec![PrimalPoint(saddle.iter().copied().collect())])
        .map(|p| p.with_coherence(CoherenceClass::Strict))
}

/// Seeded instance of [`strictly_convex_concave_with`]: centers uniform in `[−½, ½]^dim`,
/// coupling entries uniform in `[−0.2, 0.2]`, shrunk until the saddle is interior.
pub fn strictly_convex_concave(dim: usize, curvature: f64, seed: u64) -> Result<Problem> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c1: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
    let c2: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
    let mut coupling = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-0.2..0.2));
    let mut last = None;
    for _ in 0..30 {
        match strictly_convex_concave_with(c1.clone(), c2.clone(), coupling.clone(), curvature) {
            Ok(p) => return Ok(p),
            Err(Error::Config(msg)) if msg.contains("interior") => {
                last = Some(msg);
                coupling *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Config(last.unwrap_or_else(|| "could not place saddle".into())))
}

/// Zero-sum matrix game `f(x1, x2) = x1ᵀ A x2` over a product of simplices.
pub fn simplex_game(payoff: DMatrix<f64>) -> Result<Problem> {
    let (m, n) = payoff.shape();
    if m == 0 || n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    if payoff.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput("payoff matrix".into()));
    }
    let set = ProductSet::two_player(FeasibleBlock::simplex(m)?, FeasibleBlock::simplex(n)?)?;
    let (solutions, coherence) = if m <= nash::MAX_ENUMERATION_DIM && n <= nash::MAX_ENUMERATION_DIM {
        let eqs = nash::support_enumeration(&payoff)?;
        let class = if eqs.iter().any(|e| e.is_interior()) {
            CoherenceClass::Null
        } else {
            CoherenceClass::Coherent
        };
        let sols = eqs
            .into_iter()
            .map(|e| PrimalPoint(e.row.into_iter().chain(e.col).collect()))
            .collect();
        (sols, class)
    } else {
        (Vec::new(), CoherenceClass::Coherent)
    };
    let lipschitz = payoff.singular_values().iter().copied().fold(0.0, f64::max);
    let a = Arc::new(payoff);
    let a_value = a.clone();
    let value = move |x: &[f64]| {
        let (x1, x2) = x.split_at(m);
        DVector::from_column_slice(x1).dot(&(&*a_value * DVector::from_column_slice(x2)))
    };
    let field = move |x: &[f64]| {
        let (x1, x2) = x.split_at(m);
        let ax2 = &*a * DVector::from_column_slice(x2);
        let atx1 = a.transpose() * DVector::from_column_slice(x1);
        ax2.iter().copied().chain(atx1.iter().map(|v| -v)).collect()
    };
    let mut problem = Problem::new("simplex-game", set, value, field)
        .with_description(format!("{m}×{n} zero-sum matrix game on simplices"))
        .with_solutions(solutions)?
        .with_coherence(coherence);
    if lipschitz > 0.0 {
        problem = problem.with_lipschitz(lipschitz);
    }
    Ok(problem)
}

/// Looks up a builtin problem by label. `simplex-game` is matching pennies in mixed
/// strategies and `scc-quadratic` uses `dim = 2`, `curvature = 1`, `seed = 7`.
pub fn builtin(label: &str) -> Result<Problem> {
    match label {
        "matching-pennies" => Ok(matching_pennies()),
        "portrait" => Ok(portrait_problem()),
        "nonmonotone-ex2" => Ok(nonmonotone_example()),
        "scc-quadratic" => strictly_convex_concave(2, 1.0, 7),
        "simplex-game" => simplex_game(DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])),
        other => Err(Error::Config(format!(
            "unknown problem `{other}` (known: {})",
            BUILTIN_LABELS.join(", ")
        ))),
    }
}

/// Largest observed `‖g(x) − g(x')‖ / ‖x − x'‖` over seeded random pairs, in the Euclidean
/// norm. A lower estimate of the Lipschitz constant.
pub fn estimate_lipschitz(problem: &Problem, samples: usize, seed: u64) -> f64 {
    let geometry = Geometry::euclidean(problem.set().clone());
    estimate_lipschitz_in(problem, &geometry, samples, seed)
}

/// As [`estimate_lipschitz`], measured with the primal/dual norms of `geometry`.
pub fn estimate_lipschitz_in(problem: &Problem, geometry: &Geometry, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..samples.max(2) {
        let x = problem.set().sample(&mut rng);
        let y = problem.set().sample(&mut rng);
        let dx = geometry.distance(&x, &y);
        if dx <= 1e-12 {
            continue;
        }
        let gx = problem.gradient(&x);
        let gy = problem.gradient(&y);
        let dg: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a - b).collect();
        best = best.max(geometry.dual_norm(&dg) / dx);
    }
    best
}

/// Where to evaluate the variational residual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SamplingPlan {
    /// `per_axis` points per box coordinate; simplex blocks use the lattice with
    /// denominator `per_axis − 1`; ball blocks use the box grid clipped to the ball.
    Grid { per_axis: usize },
    Random { samples: usize, seed: u64 },
}

const MAX_GRID_POINTS: usize = 4_000_000;

impl SamplingPlan {
    pub fn points(&self, set: &ProductSet) -> Result<Vec<PrimalPoint>> {
        match *self {
            SamplingPlan::Random { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((0..samples).map(|_| set.sample(&mut rng)).collect())
            }
            SamplingPlan::Grid { per_axis } => {
                if per_axis < 2 {
                    return Err(Error::Config("grid needs at least 2 points per axis".into()));
                }
                let per_block: Vec<Vec<Vec<f64>>> =
                    set.blocks().iter().map(|b| block_grid(b, per_axis)).collect::<Result<_>>()?;
                let total = per_block
                    .iter()
                    .try_fold(1usize, |acc, g| acc.checked_mul(g.len()))
                    .filter(|t| *t <= MAX_GRID_POINTS)
                    .ok_or_else(|| Error::Config("grid is too large for this set".into()))?;
                let mut out: Vec<Vec<f64>> = vec![Vec::with_capacity(set.dim())];
                for grid in &per_block {
                    out = out
                        .into_iter()
                        .flat_map(|prefix| {
                            grid.iter().map(move |p| {
                                let mut v = prefix.clone();
                                v.extend_from_slice(p);
                                v
                            })
                        })
                        .collect();
                }
                debug_assert_eq!(out.len(), total);
                Ok(out.into_iter().map(PrimalPoint).collect())
            }
        }
    }
}

fn block_grid(block: &FeasibleBlock, per_axis: usize) -> Result<Vec<Vec<f64>>> {
    let steps = per_axis - 1;
    let axis = |l: f64, u: f64| -> Vec<f64> {
        (0..per_axis).map(|k| l + (u - l) * k as f64 / steps as f64).collect()
    };
    let box_grid = |lower: &[f64], upper: &[f64]| -> Result<Vec<Vec<f64>>> {
        let count = per_axis
            .checked_pow(lower.len() as u32)
            .filter(|c| *c <= MAX_GRID_POINTS)
            .ok_or_else(|| Error::Config("grid is too large for this set".into()))?;
        let mut out = Vec::with_capacity(count);
        out.push(Vec::new());
        for (l, u) in lower.iter().zip(upper) {
            let ticks = axis(*l, *u);
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<f64>| {
                    ticks.iter().map(move |t| {
                        let mut v = prefix.clone();
                        v.push(*t);
                        v
                    })
                })
                .collect();
        }
        Ok(out)
    };
    match block {
        FeasibleBlock::Box { lower, upper } => box_grid(lower, upper),
        FeasibleBlock::Ball { center, radius } => {
            let lower: Vec<f64> = center.iter().map(|c| c - radius).collect();
            let upper: Vec<f64> = center.iter().map(|c| c + radius).collect();
            Ok(box_grid(&lower, &upper)?
                .into_iter()
                .filter(|p| block.contains(p, 1e-12))
                .collect())
        }
        FeasibleBlock::Simplex { dim } => {
            let mut out = Vec::new();
            compositions(*dim, steps, &mut Vec::with_capacity(*dim), &mut out);
            if out.len() > MAX_GRID_POINTS {
                return Err(Error::Config("grid is too large for this set".into()));
            }
            Ok(out
                .into_iter()
                .map(|c| c.into_iter().map(|k| k as f64 / steps as f64).collect())
                .collect())
        }
    }
}

fn compositions(parts: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if out.len() > MAX_GRID_POINTS {
        return;
    }
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in 0..=total {
        prefix.push(k);
        compositions(parts - 1, total - k, prefix, out);
        prefix.pop();
    }
}

/// Half-width of the band treated as a zero residual.
pub const NULL_BAND: f64 = 1e-9;
/// Points closer than this to the solution are ignored by the strictness test.
pub const STRICT_EXCLUSION_RADIUS: f64 = 0.05;
/// Smallest residual accepted as strictly positive away from the solution.
pub const STRICT_MARGIN: f64 = 1e-6;

/// Classification returned by [`coherence_probe`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeClass {
    Null,
    Strict,
    Coherent,
    Inconclusive,
}

impl ProbeClass {
    /// Whether the observed class is consistent with a declared one. Strict and null
    /// coherence are both special cases of coherence.
    pub fn satisfies(self, declared: CoherenceClass) -> bool {
        match declared {
            CoherenceClass::Unknown => true,
            CoherenceClass::Null => self == ProbeClass::Null,
            CoherenceClass::Strict => self == ProbeClass::Strict,
            CoherenceClass::Coherent => self != ProbeClass::Inconclusive,
        }
    }

    fn rank(self) -> u8 {
        match self {
            ProbeClass::Inconclusive => 0,
            ProbeClass::Coherent => 1,
            ProbeClass::Strict | ProbeClass::Null => 2,
        }
    }
}

impl fmt::Display for ProbeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProbeClass::Null => "Null",
            ProbeClass::Strict => "Strict",
            ProbeClass::Coherent => "Coherent",
            ProbeClass::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

/// Residual statistics `⟨g(x), x − x*⟩` for one solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub solution: PrimalPoint,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub max_abs: f64,
    /// Minimum over samples at Euclidean distance ≥ [`STRICT_EXCLUSION_RADIUS`].
    pub min_off_ball: Option<f64>,
    /// Sample attaining `min`.
    pub argmin: PrimalPoint,
    pub class: ProbeClass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub problem: String,
    pub plan: SamplingPlan,
    pub samples: usize,
    pub per_solution: Vec<ResidualStats>,
    pub classification: ProbeClass,
}

impl ProbeReport {
    pub fn max_abs_residual(&self) -> f64 {
        self.per_solution.iter().map(|s| s.max_abs).fold(0.0, f64::max)
    }

    pub fn min_residual(&self) -> f64 {
        self.per_solution.iter().map(|s| s.min).fold(f64::INFINITY, f64::min)
    }
}

/// Samples the variational residual of every listed solution and classifies the problem.
pub fn coherence_probe(problem: &Problem, plan: &SamplingPlan) -> Result<ProbeReport> {
    if problem.solutions().is_empty() {
        return Err(Error::Config(format!("problem `{}` lists no solutions", problem.label())));
    }
    let points = plan.points(problem.set())?;
    if points.is_empty() {
        return Err(Error::Config("sampling plan produced no points".into()));
    }
    let gradients: Vec<Vec<f64>> = points.iter().map(|x| problem.gradient(x)).collect();
    let per_solution: Vec<ResidualStats> = problem
        .solutions()
        .iter()
        .map(|sol| residual_stats(sol, &points, &gradients))
        .collect();
    let classification = per_solution
        .iter()
        .map(|s| s.class)
        .reduce(|a, b| match (a, b) {
            _ if a == b => a,
            _ if a.rank() != b.rank() => {
                if a.rank() < b.rank() {
                    a
                } else {
                    b
                }
            }
            // one null, one strict
            _ => ProbeClass::Coherent,
        })
        .expect("at least one solution");
    Ok(ProbeReport {
        problem: problem.label().to_string(),
        plan: *plan,
        samples: points.len(),
        per_solution,
        classification,
    })
}

fn residual_stats(sol: &[f64], points: &[PrimalPoint], gradients: &[Vec<f64>]) -> ResidualStats {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut max_abs: f64 = 0.0;
    let mut min_off_ball: Option<f64> = None;
    let mut argmin = 0;
    for (i, (x, g)) in points.iter().zip(gradients).enumerate() {
        let diff: Vec<f64> = x.iter().zip(sol).map(|(a, b)| a - b).collect();
        let r = dot(g, &diff);
        if r < min {
            min = r;
            argmin = i;
        }
        max = max.max(r);
        max_abs = max_abs.max(r.abs());
        sum += r;
        if l2_dist(x, sol) >= STRICT_EXCLUSION_RADIUS {
            min_off_ball = Some(min_off_ball.map_or(r, |m| m.min(r)));
        }
    }
    let class = if max_abs <= NULL_BAND {
        ProbeClass::Null
    } else if min >= -NULL_BAND && min_off_ball.is_some_and(|m| m >= STRICT_MARGIN) {
        ProbeClass::Strict
    } else if min >= -NULL_BAND {
        ProbeClass::Coherent
    } else {
        ProbeClass::Inconclusive
    };
    ResidualStats {
        solution: PrimalPoint(sol.to_vec()),
        min,
        max,
        mean: sum / points.len() as f64,
        max_abs,
        min_off_ball,
        argmin: points[argmin].clone(),
        class,
    }
}
