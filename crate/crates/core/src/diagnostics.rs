//! Conformance checks over recorded trajectories, and ensemble statistics.
//!
//! Every check is a pure function of a [`RunRecord`] and the constants passed in.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{l2_dist, Geometry};
use crate::schedule::StepSchedule;
use crate::solver::RunRecord;

pub const MONOTONE_TOL: f64 = 1e-9;
pub const NULL_NONDECREASE_TOL: f64 = 1e-12;
pub const NULL_IDENTITY_TOL: f64 = 1e-9;
pub const DESCENT_INEQUALITY_TOL: f64 = 1e-9;
pub const BOUNDED_ORBIT_TOL: f64 = 1e-9;
/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClaimId {
    MonotoneDescent,
    NullNondecrease,
    /// `D(x*, X_{n+1}) − D(x*, X_n) = D(X_n, X_{n+1})`
    NullIdentity,
    BoundedOrbit,
    PerStepDescentInequality,
    ErgodicConvergence,
    EnsembleConvergenceFraction,
}

impl ClaimId {
    pub const ALL: [ClaimId; 7] = [
        ClaimId::MonotoneDescent,
        ClaimId::NullNondecrease,
        ClaimId::NullIdentity,
        ClaimId::BoundedOrbit,
        ClaimId::PerStepDescentInequality,
        ClaimId::ErgodicConvergence,
        ClaimId::EnsembleConvergenceFraction,
    ];
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for ClaimId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        ClaimId::ALL
            .into_iter()
            .find(|c| c.to_string().to_lowercase() == key)
            .ok_or_else(|| Error::Parse(format!("unknown claim `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimEntry {
    pub claim: ClaimId,
    pub passed: bool,
    /// The extreme value the pass/fail decision is made on; see each check.
    pub worst_margin: f64,
    /// Iteration `n` at which `worst_margin` occurs.
    pub worst_index: Option<usize>,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub problem: String,
    pub method: String,
    pub entries: Vec<ClaimEntry>,
}

impl ConformanceReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn entry(&self, claim: ClaimId) -> Option<&ClaimEntry> {
        self.entries.iter().find(|e| e.claim == claim)
    }
}

fn require_per_step(record: &RunRecord) -> Result<()> {
    if record.solution_count() == 0 {
        return Err(Error::MissingSolution);
    }
    if record.rows.is_empty() {
        return Err(Error::Config("record has no iterations".into()));
    }
    if !record.is_per_step() {
        return Err(Error::Config("per-step checks need a record with record_every = 1".into()));
    }
    Ok(())
}

/// Index and value of the largest `f(j, n)` over solutions `j` and steps `n = 1..`.
fn worst_over_steps(record: &RunRecord, mut f: impl FnMut(usize, usize) -> Result<f64>) -> Result<(f64, usize)> {
    let mut worst = (f64::NEG_INFINITY, 0);
    for j in 0..record.solution_count() {
        for n in 1..=record.rows.len() {
            let v = f(j, n)?;
            if v > worst.0 || v.is_nan() {
                worst = (v, n);
            }
        }
    }
    Ok(worst)
}

/// Passes iff `max_n D_{n+1} − D_n ≤ 1e-9`. Margin: the largest increment.
pub fn check_monotone_descent(record: &RunRecord) -> Result<ClaimEntry> {
    require_per_step(record)?;
    let series: Vec<Vec<f64>> = (0..record.solution_count()).map(|j| record.distance_series(j)).collect();
    let (worst, at) = worst_over_steps(record, |j, n| Ok(series[j][n] - series[j][n - 1]))?;
    Ok(ClaimEntry {
        claim: ClaimId::MonotoneDescent,
        passed: worst <= MONOTONE_TOL,
        worst_margin: worst,
        worst_index: Some(at),
        tolerance: MONOTONE_TOL,
        detail: format!("largest one-step increase of D(x*, X_n) is {worst:.3e} at n = {at}"),
    })
}

/// Passes iff `min_n D_{n+1} − D_n ≥ −1e-12`. Margin: the smallest increment.
pub fn check_null_nondecrease(record: &RunRecord) -> Result<ClaimEntry> {
    require_per_step(record)?;
    let series: Vec<Vec<f64>> = (0..record.solution_count()).map(|j| record.distance_series(j)).collect();
    let (neg, at) = worst_over_steps(record, |j, n| Ok(series[j][n - 1] - series[j][n]))?;
    let worst = -neg;
    Ok(ClaimEntry {
        claim: ClaimId::NullNondecrease,
        passed: worst >= -NULL_NONDECREASE_TOL,
        worst_margin: worst,
        worst_index: Some(at),
        tolerance: NULL_NONDECREASE_TOL,
        detail: format!("smallest one-step change of D(x*, X_n) is {worst:.3e} at n = {at}"),
    })
}

fn record_geometry(record: &RunRecord) -> Result<&Geometry> {
    record
        .meta
        .geometry
        .as_ref()
        .ok_or_else(|| Error::Config("record carries no mirror geometry".into()))
}

/// Passes iff `|(D_{n+1} − D_n) − D(X_n, X_{n+1})| ≤ 1e-9` at every step.
/// Margin: the largest deviation.
pub fn check_null_identity(record: &RunRecord) -> Result<ClaimEntry> {
    require_per_step(record)?;
    let geometry = record_geometry(record)?;
    let series: Vec<Vec<f64>> = (0..record.solution_count()).map(|j| record.distance_series(j)).collect();
    let xs = record.iterates();
    let (worst, at) = worst_over_steps(record, |j, n| {
        let step_divergence = geometry.bregman(xs[n - 1], xs[n])?;
        Ok(((series[j][n] - series[j][n - 1]) - step_divergence).abs())
    })?;
    Ok(ClaimEntry {
        claim: ClaimId::NullIdentity,
        passed: worst <= NULL_IDENTITY_TOL,
        worst_margin: worst,
        worst_index: Some(at),
        tolerance: NULL_IDENTITY_TOL,
        detail: format!("largest deviation from D(X_n, X_n+1) is {worst:.3e} at n = {at}"),
    })
}

/// Passes iff `D_{n+1} ≤ D_n − ½(α − γ_n²L²/α)‖X_{n+1/2} − X_n‖² + 1e-9` at every step.
/// Margin: the largest excess of the left side over the right side.
pub fn check_descent_inequality(record: &RunRecord, modulus: f64, lipschitz: f64) -> Result<ClaimEntry> {
    require_per_step(record)?;
    if !record.has_half_steps() {
        return Err(Error::MissingHalfStep);
    }
    if !record.meta.oracle.is_exact() {
        return Err(Error::Config("the descent inequality is stated for exact oracles".into()));
    }
    if !(modulus > 0.0 && lipschitz >= 0.0) {
        return Err(Error::Config("modulus must be positive and Lipschitz constant non-negative".into()));
    }
    let norm = |a: &[f64], b: &[f64]| match &record.meta.geometry {
        Some(g) => g.distance(a, b),
        None => l2_dist(a, b),
    };
    let series: Vec<Vec<f64>> = (0..record.solution_count()).map(|j| record.distance_series(j)).collect();
    let xs = record.iterates();
    let (worst, at) = worst_over_steps(record, |j, n| {
        let row = &record.rows[n - 1];
        let half = row.half_step.as_deref().ok_or(Error::MissingHalfStep)?;
        let gamma = row.step;
        let coefficient = 0.5 * (modulus - gamma * gamma * lipschitz * lipschitz / modulus);
        let gap = norm(half, xs[n - 1]);
        Ok(series[j][n] - (series[j][n - 1] - coefficient * gap * gap))
    })?;
    Ok(ClaimEntry {
        claim: ClaimId::PerStepDescentInequality,
        passed: worst <= DESCENT_INEQUALITY_TOL,
        worst_margin: worst,
        worst_index: Some(at),
        tolerance: DESCENT_INEQUALITY_TOL,
        detail: format!("largest excess over the descent bound is {worst:.3e} at n = {at}"),
    })
}

/// `D(x*, X_1) + M²/(2α)·Σγ²` with the sum taken in closed form.
pub fn bounded_orbit_bound(initial: f64, schedule: &StepSchedule, second_moment: f64, modulus: f64) -> Result<f64> {
    let sum_sq = schedule
        .sum_of_squares()
        .ok_or_else(|| Error::Uncertifiable(format!("schedule {schedule} has no closed-form Σγ²")))?;
    Ok(initial + second_moment / (2.0 * modulus) * sum_sq)
}

/// Passes iff every recorded `D(x*, X_n)` is within the bounded-orbit bound, plus 1e-9.
/// Margin: the largest excess over the bound.
pub fn check_bounded_orbit(
    record: &RunRecord,
    schedule: &StepSchedule,
    second_moment: f64,
    modulus: f64,
) -> Result<ClaimEntry> {
    if record.solution_count() == 0 {
        return Err(Error::MissingSolution);
    }
    let mut worst = (f64::NEG_INFINITY, 0, 0.0);
    for j in 0..record.solution_count() {
        let bound = bounded_orbit_bound(record.initial_distances[j], schedule, second_moment, modulus)?;
        for (i, d) in record.distance_series(j).into_iter().enumerate() {
            let n = if i == 0 { 0 } else { record.rows[i - 1].n };
            if d - bound > worst.0 {
                worst = (d - bound, n, bound);
            }
        }
    }
    let (excess, at, bound) = worst;
    Ok(ClaimEntry {
        claim: ClaimId::BoundedOrbit,
        passed: excess <= BOUNDED_ORBIT_TOL,
        worst_margin: excess,
        worst_index: Some(at),
        tolerance: BOUNDED_ORBIT_TOL,
        detail: format!("sup D = {:.6} against bound {bound:.6}", bound + excess),
    })
}

/// Passes iff the final ergodic average is within `threshold` (Euclidean) of a listed
/// solution. Margin: that distance.
pub fn check_ergodic_convergence(record: &RunRecord, threshold: f64) -> Result<ClaimEntry> {
    let avg = record.final_ergodic().ok_or_else(|| Error::Config("record has no iterations".into()))?;
    let dist = record
        .meta
        .solutions
        .iter()
        .map(|s| l2_dist(avg, s))
        .fold(f64::INFINITY, f64::min);
    if dist.is_infinite() {
        return Err(Error::MissingSolution);
    }
    let n = record.rows.last().map(|r| r.n);
    Ok(ClaimEntry {
        claim: ClaimId::ErgodicConvergence,
        passed: dist <= threshold,
        worst_margin: dist,
        worst_index: n,
        tolerance: threshold,
        detail: format!("‖X̄_n − x*‖ = {dist:.4e} at n = {}", n.unwrap_or(0)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub runs: usize,
    pub successes: usize,
    pub fraction: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (successes as f64, n as f64);
    let p = k / n;
    let z2 = z * z;
    let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Fraction of records whose final `D(x*, X_n)` (closest solution) is below `threshold`.
/// Incomplete records count as failures.
pub fn ensemble_stats(records: &[RunRecord], threshold: f64) -> Result<EnsembleStats> {
    if records.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let successes = records
        .iter()
        .filter(|r| r.meta.complete && r.final_distances().iter().any(|d| *d < threshold))
        .count();
    let (wilson_low, wilson_high) = wilson_interval(successes, records.len(), Z_95);
    Ok(EnsembleStats {
        runs: records.len(),
        successes,
        fraction: successes as f64 / records.len() as f64,
        wilson_low,
        wilson_high,
    })
}

/// Passes iff the success fraction is at least `required`. Margin: the fraction.
pub fn check_ensemble_fraction(records: &[RunRecord], threshold: f64, required: f64) -> Result<ClaimEntry> {
    let s = ensemble_stats(records, threshold)?;
    Ok(ClaimEntry {
        claim: ClaimId::EnsembleConvergenceFraction,
        passed: s.fraction >= required,
        worst_margin: s.fraction,
        worst_index: None,
        tolerance: required,
        detail: format!(
            "{}/{} runs below {threshold:e}; Wilson 95% [{:.4}, {:.4}]",
            s.successes, s.runs, s.wilson_low, s.wilson_high
        ),
    })
}

/// Shape of a scalar series around its minimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesShape {
    pub argmin: usize,
    pub min: f64,
    pub last: f64,
    /// Largest one-step drop after the minimum (0 when there is none).
    pub worst_drop_after_min: f64,
    pub nonincreasing: bool,
    pub nondecreasing: bool,
}

impl SeriesShape {
    pub fn nondecreasing_after_min(&self, tol: f64) -> bool {
        self.worst_drop_after_min <= tol
    }
}

/// Summarizes a series; index 0 is `X_1`. Monotonicity flags use tolerance `tol`.
pub fn series_shape(series: &[f64], tol: f64) -> Option<SeriesShape> {
    let (argmin, min) = series
        .iter()
        .copied()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
            Some((_, m)) if m <= v => best,
            _ => Some((i, v)),
        })?;
    let steps = || series.windows(2).map(|w| w[1] - w[0]);
    let worst_drop_after_min = series[argmin..].windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    Some(SeriesShape {
        argmin,
        min,
        last: *series.last()?,
        worst_drop_after_min,
        nonincreasing: steps().all(|d| d <= tol),
        nondecreasing: steps().all(|d| d >= -tol),
    })
}

/// Constants a [`ConformanceReport`] may need beyond the record itself.
#[derive(Clone, Debug, Default)]
pub struct CheckConstants {
    pub modulus: Option<f64>,
    pub lipschitz: Option<f64>,
    pub second_moment: Option<f64>,
    pub ergodic_threshold: Option<f64>,
}

/// Runs `claims` on one record. Ensemble claims need several records and are rejected here.
pub fn conformance_report(record: &RunRecord, claims: &[ClaimId], constants: &CheckConstants) -> Result<ConformanceReport> {
    let need = |v: Option<f64>, what: &str| v.ok_or_else(|| Error::Config(format!("{what} is required for this claim")));
    let modulus = constants.modulus.unwrap_or(1.0);
    let entries = claims
        .iter()
        .map(|claim| match claim {
            ClaimId::MonotoneDescent => check_monotone_descent(record),
            ClaimId::NullNondecrease => check_null_nondecrease(record),
            ClaimId::NullIdentity => check_null_identity(record),
            ClaimId::PerStepDescentInequality => {
                check_descent_inequality(record, modulus, need(constants.lipschitz, "a Lipschitz constant")?)
            }
            ClaimId::BoundedOrbit => {
                let schedule = record
                    .meta
                    .schedule
                    .as_ref()
                    .ok_or_else(|| Error::Config("record carries no step schedule".into()))?;
                check_bounded_orbit(record, schedule, need(constants.second_moment, "M²")?, modulus)
            }
            ClaimId::ErgodicConvergence => {
                check_ergodic_convergence(record, need(constants.ergodic_threshold, "an ergodic threshold")?)
            }
            ClaimId::EnsembleConvergenceFraction => {
                Err(Error::Config("ensemble claims are checked over several records".into()))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConformanceReport { problem: record.meta.problem.clone(), method: record.meta.method.clone(), entries })
}
