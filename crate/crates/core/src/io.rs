//! Trajectory CSV and metadata JSON.
//!
//! ```text
//! # saddlepoint trajectory v1
//! # initial_point,<X_1 coordinates>
//! # initial_distances,<D(x*_j, X_1) per solution>
//! n,step,x_1..x_d,[half_1..half_d],avg_1..avg_d,dist_1..dist_k,queries
//! ```
//!
//! Row `n` holds `γ_n`, `X_{n+1}`, `X_{n+1/2}` (optimistic runs), `X̄_n` and the distances at
//! `X_{n+1}`. Reals are written in scientific notation with 17 significant digits, so parsing
//! and re-emitting a file reproduces it byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::{IterationRow, RunMeta, RunRecord, RECORD_SCHEMA};

pub const CSV_VERSION_LINE: &str = "# saddlepoint trajectory v1";
const INITIAL_POINT: &str = "# initial_point";
const INITIAL_DISTANCES: &str = "# initial_distances";

/// The CSV part of a [`RunRecord`].
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub initial: Vec<f64>,
    pub initial_distances: Vec<f64>,
    pub rows: Vec<IterationRow>,
}

impl From<&RunRecord> for Trajectory {
    fn from(r: &RunRecord) -> Self {
        Self { initial: r.initial.clone(), initial_distances: r.initial_distances.clone(), rows: r.rows.clone() }
    }
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn header(dim: usize, half: bool, solutions: usize) -> Vec<String> {
    let mut h = vec!["n".to_string(), "step".to_string()];
    h.extend((1..=dim).map(|i| format!("x_{i}")));
    if half {
        h.extend((1..=dim).map(|i| format!("half_{i}")));
    }
    h.extend((1..=dim).map(|i| format!("avg_{i}")));
    h.extend((1..=solutions).map(|j| format!("dist_{j}")));
    h.push("queries".to_string());
    h
}

fn comment_line(key: &str, values: &[f64]) -> String {
    std::iter::once(key.to_string()).chain(values.iter().map(|v| real(*v))).collect::<Vec<_>>().join(",")
}

/// Renders the trajectory as CSV text.
pub fn trajectory_to_csv(t: &Trajectory) -> Result<String> {
    let dim = t.initial.len();
    let half = t.rows.first().is_some_and(|r| r.half_step.is_some());
    let mut out = format!(
        "{CSV_VERSION_LINE}\n{}\n{}\n",
        comment_line(INITIAL_POINT, &t.initial),
        comment_line(INITIAL_DISTANCES, &t.initial_distances)
    );
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header(dim, half, t.initial_distances.len()))?;
    for row in &t.rows {
        if row.iterate.len() != dim
            || row.ergodic.len() != dim
            || row.distances.len() != t.initial_distances.len()
            || row.half_step.as_ref().map_or(half, |h| h.len() == dim) != half
        {
            return Err(Error::Parse(format!("row {} does not match the trajectory shape", row.n)));
        }
        let mut fields = vec![row.n.to_string(), real(row.step)];
        fields.extend(row.iterate.iter().map(|v| real(*v)));
        if let Some(h) = &row.half_step {
            fields.extend(h.iter().map(|v| real(*v)));
        }
        fields.extend(row.ergodic.iter().map(|v| real(*v)));
        fields.extend(row.distances.iter().map(|v| real(*v)));
        fields.push(row.queries.to_string());
        w.write_record(&fields)?;
    }
    let body = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    out.push_str(&String::from_utf8(body).map_err(|e| Error::Parse(e.to_string()))?);
    Ok(out)
}

fn parse_real(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("`{s}` is not a number")))
}

fn parse_comment(line: Option<&str>, key: &str) -> Result<Vec<f64>> {
    let line = line.ok_or_else(|| Error::Parse(format!("missing `{key}` line")))?;
    let mut parts = line.split(',');
    if parts.next() != Some(key) {
        return Err(Error::Parse(format!("expected `{key}`, found `{line}`")));
    }
    parts.filter(|p| !p.is_empty()).map(parse_real).collect()
}

/// Parses CSV text produced by [`trajectory_to_csv`]. Shape mismatches, truncated rows and
/// unknown versions are errors.
pub fn parse_trajectory_csv(text: &str) -> Result<Trajectory> {
    let mut lines = text.splitn(4, '\n');
    if lines.next() != Some(CSV_VERSION_LINE) {
        return Err(Error::Parse("missing or unsupported trajectory version line".into()));
    }
    let initial = parse_comment(lines.next(), INITIAL_POINT)?;
    let initial_distances = parse_comment(lines.next(), INITIAL_DISTANCES)?;
    let body = lines.next().ok_or_else(|| Error::Parse("missing column header".into()))?;
    let dim = initial.len();
    let k = initial_distances.len();

    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let found: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let half = if found == header(dim, true, k) {
        true
    } else if found == header(dim, false, k) {
        false
    } else {
        return Err(Error::Parse(format!("column header does not match {dim} coordinates and {k} solutions")));
    };
    let width = found.len();

    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.len() != width {
            return Err(Error::Parse(format!("row has {} fields, expected {width}", rec.len())));
        }
        let n = rec[0].parse::<usize>().map_err(|_| Error::Parse(format!("bad iteration index `{}`", &rec[0])))?;
        let vals: Vec<f64> = (1..width - 1).map(|i| parse_real(&rec[i])).collect::<Result<_>>()?;
        let queries = rec[width - 1]
            .parse::<u64>()
            .map_err(|_| Error::Parse(format!("bad query count `{}`", &rec[width - 1])))?;
        let mut at = 1;
        let mut take = |len: usize| {
            let s = vals[at..at + len].to_vec();
            at += len;
            s
        };
        let step = vals[0];
        let iterate = take(dim);
        let half_step = half.then(|| take(dim));
        let ergodic = take(dim);
        let distances = take(k);
        rows.push(IterationRow { n, step, iterate, half_step, ergodic, distances, queries });
    }
    if rows.windows(2).any(|w| w[1].n <= w[0].n) {
        return Err(Error::Parse("iteration indices are not increasing".into()));
    }
    Ok(Trajectory { initial, initial_distances, rows })
}

/// Sibling metadata path: `run.csv` → `run.json`.
pub fn meta_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

/// Writes the trajectory to `csv_path` and the metadata next to it.
pub fn write_record(record: &RunRecord, csv_path: &Path) -> Result<()> {
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(csv_path, trajectory_to_csv(&Trajectory::from(record))?)?;
    write_json(&record.meta, &meta_path(csv_path))
}

/// Reads a trajectory and its metadata written by [`write_record`].
pub fn read_record(csv_path: &Path) -> Result<RunRecord> {
    let trajectory = parse_trajectory_csv(&fs::read_to_string(csv_path)?)?;
    let meta: RunMeta = serde_json::from_str(&fs::read_to_string(meta_path(csv_path))?)?;
    if meta.schema != RECORD_SCHEMA {
        return Err(Error::Parse(format!("unsupported metadata schema `{}`", meta.schema)));
    }
    if meta.solutions.len() != trajectory.initial_distances.len() {
        return Err(Error::Parse("metadata and trajectory disagree on the solution count".into()));
    }
    Ok(RunRecord {
        meta,
        initial: trajectory.initial,
        initial_distances: trajectory.initial_distances,
        rows: trajectory.rows,
    })
}
