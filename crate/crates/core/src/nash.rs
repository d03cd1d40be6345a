//! Equilibria of small two-player zero-sum matrix games.
//!
//! The row player minimizes `x1ᵀ A x2`, the column player maximizes it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest number of pure strategies per player handled by [`support_enumeration`].
pub const MAX_ENUMERATION_DIM: usize = 4;

const TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Equilibrium {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
    pub value: f64,
}

impl Equilibrium {
    pub fn is_interior(&self) -> bool {
        self.row.iter().chain(&self.col).all(|p| *p > TOL)
    }
}

/// All equilibria found by enumerating supports of equal size, plus the interior
/// equilibrium of degenerate games when one exists.
pub fn support_enumeration(a: &DMatrix<f64>) -> Result<Vec<Equilibrium>> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    if m > MAX_ENUMERATION_DIM || n > MAX_ENUMERATION_DIM {
        return Err(Error::Config(format!(
            "support enumeration is limited to {MAX_ENUMERATION_DIM} strategies per player, got {m}×{n}"
        )));
    }
    let mut found: Vec<Equilibrium> = Vec::new();
    for size in 1..=m.min(n) {
        for rows in subsets(m, size) {
            for cols in subsets(n, size) {
                if let Some(eq) = solve_supports(a, &rows, &cols) {
                    push_unique(&mut found, eq);
                }
            }
        }
    }
    if let Some(eq) = interior_equilibrium(a) {
        push_unique(&mut found, eq);
    }
    Ok(found)
}

/// An equilibrium with full support on both sides, found by least squares on the
/// indifference conditions. Returns `None` when no such profile exists.
pub fn interior_equilibrium(a: &DMatrix<f64>) -> Option<Equilibrium> {
    let col = indifferent_mix(a)?;
    let row = indifferent_mix(&a.transpose())?;
    let eq = profile(a, row, col);
    (eq.is_interior() && is_equilibrium(a, &eq)).then_some(eq)
}

fn profile(a: &DMatrix<f64>, row: Vec<f64>, col: Vec<f64>) -> Equilibrium {
    let value = DVector::from_vec(row.clone()).dot(&(a * DVector::from_vec(col.clone())));
    Equilibrium { row, col, value }
}

/// Mixed strategy `y` over the columns of `a` with `a y ∝ 1` and `Σ y = 1`.
fn indifferent_mix(a: &DMatrix<f64>) -> Option<Vec<f64>> {
    let (m, n) = a.shape();
    let mut sys = DMatrix::zeros(m + 1, n + 1);
    sys.view_mut((0, 0), (m, n)).copy_from(a);
    for i in 0..m {
        sys[(i, n)] = -1.0;
    }
    for j in 0..n {
        sys[(m, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(m + 1);
    rhs[m] = 1.0;
    let sol = sys.clone().svd(true, true).solve(&rhs, 1e-12).ok()?;
    if (&sys * &sol - &rhs).amax() > 1e-9 {
        return None;
    }
    Some(sol.rows(0, n).iter().copied().collect())
}

fn solve_supports(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> Option<Equilibrium> {
    let (m, n) = a.shape();
    let k = rows.len();
    // column mix making the row player indifferent on `rows`
    let sub = DMatrix::from_fn(k, k, |i, j| a[(rows[i], cols[j])]);
    let col_part = solve_indifference(&sub)?;
    let row_part = solve_indifference(&sub.transpose())?;
    let mut col = vec![0.0; n];
    for (j, c) in cols.iter().enumerate() {
        col[*c] = col_part[j];
    }
    let mut row = vec![0.0; m];
    for (i, r) in rows.iter().enumerate() {
        row[*r] = row_part[i];
    }
    let eq = profile(a, row, col);
    is_equilibrium(a, &eq).then_some(eq)
}

fn solve_indifference(sub: &DMatrix<f64>) -> Option<Vec<f64>> {
    let k = sub.nrows();
    let mut sys = DMatrix::zeros(k + 1, k + 1);
    sys.view_mut((0, 0), (k, k)).copy_from(sub);
    for i in 0..k {
        sys[(i, k)] = -1.0;
        sys[(k, i)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = sys.lu().solve(&rhs)?;
    let mix: Vec<f64> = sol.rows(0, k).iter().copied().collect();
    (mix.iter().all(|p| p.is_finite() && *p >= -TOL)).then_some(mix)
}

fn is_equilibrium(a: &DMatrix<f64>, eq: &Equilibrium) -> bool {
    if eq.row.iter().chain(&eq.col).any(|p| *p < -TOL) {
        return false;
    }
    let row_costs = a * DVector::from_column_slice(&eq.col);
    let col_gains = a.transpose() * DVector::from_column_slice(&eq.row);
    // no profitable deviation for either player
    row_costs.iter().all(|c| *c >= eq.value - 1e-9) && col_gains.iter().all(|g| *g <= eq.value + 1e-9)
}

fn push_unique(found: &mut Vec<Equilibrium>, eq: Equilibrium) {
    let clean = |v: &[f64]| v.iter().map(|p| p.max(0.0)).collect::<Vec<_>>();
    let eq = Equilibrium { row: clean(&eq.row), col: clean(&eq.col), value: eq.value };
    let same = |other: &Equilibrium| {
        other.row.iter().zip(&eq.row).chain(other.col.iter().zip(&eq.col)).all(|(a, b)| (a - b).abs() < 1e-9)
    };
    if !found.iter().any(same) {
        found.push(eq);
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
        .collect()
}
