//! Builtin problems against independent oracles: finite differences, Newton's method,
//! brute-force grids and closed forms.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use saddlepoint::problems::{
    builtin, coherence_probe, estimate_lipschitz, matching_pennies, nonmonotone_example, portrait_problem,
    simplex_game, strictly_convex_concave, PORTRAIT_CRITICAL_POINT,
};
use saddlepoint::{ProbeClass, Problem, SamplingPlan};

fn field_by_differences(p: &Problem, x: &[f64]) -> Vec<f64> {
    let h = 1e-6;
    let min_coords = p.set().player_coordinates(saddlepoint::Player::Min);
    (0..x.len())
        .map(|i| {
            let (mut a, mut b) = (x.to_vec(), x.to_vec());
            a[i] += h;
            b[i] -= h;
            let d = (p.value(&a) - p.value(&b)) / (2.0 * h);
            if min_coords.contains(&i) {
                d
            } else {
                -d
            }
        })
        .collect()
}

#[test]
fn fields_match_finite_differences_of_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for label in ["matching-pennies", "portrait", "nonmonotone-ex2", "scc-quadratic", "simplex-game"] {
        let p = builtin(label).unwrap();
        for _ in 0..200 {
            let x = p.set().sample(&mut rng);
            let (g, fd) = (p.gradient(&x), field_by_differences(&p, &x));
            for (a, b) in g.iter().zip(&fd) {
                assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()), "{label} at {x:?}: {g:?} vs {fd:?}");
            }
        }
    }
}

#[test]
fn portrait_critical_point_by_newton() {
    let p = portrait_problem();
    let mut x = [0.5, 0.5];
    for _ in 0..50 {
        let g = p.gradient(&x);
        let h = 1e-7;
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let mut xp = x;
            xp[j] += h;
            let gp = p.gradient(&xp);
            for i in 0..2 {
                jac[i][j] = (gp[i] - g[i]) / h;
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        x[0] -= (jac[1][1] * g[0] - jac[0][1] * g[1]) / det;
        x[1] -= (-jac[1][0] * g[0] + jac[0][0] * g[1]) / det;
    }
    assert!((x[0] - PORTRAIT_CRITICAL_POINT[0]).abs() < 1e-10);
    assert!((x[1] - PORTRAIT_CRITICAL_POINT[1]).abs() < 1e-10);
    assert!(p.gradient(&PORTRAIT_CRITICAL_POINT).iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn portrait_is_not_coherent_on_the_square() {
    // some point of the grid has ⟨g(x), x − x*⟩ < −0.1
    let p = portrait_problem();
    let x_star = PORTRAIT_CRITICAL_POINT;
    let mut worst = f64::INFINITY;
    for i in 0..=100 {
        for j in 0..=100 {
            let x = [i as f64 / 100.0, j as f64 / 100.0];
            let g = p.gradient(&x);
            worst = worst.min(g[0] * (x[0] - x_star[0]) + g[1] * (x[1] - x_star[1]));
        }
    }
    assert!(worst < -0.1, "worst residual {worst}");
    let report = coherence_probe(&p, &SamplingPlan::Grid { per_axis: 101 }).unwrap();
    assert_eq!(report.classification, ProbeClass::Inconclusive);
    assert!((report.min_residual() - worst).abs() < 1e-12);
}

#[test]
fn portrait_has_no_minty_solution_on_a_grid() {
    // every grid candidate is beaten somewhere on the square
    let p = portrait_problem();
    let pts: Vec<[f64; 2]> = (0..=40).flat_map(|i| (0..=40).map(move |j| [i as f64 / 40.0, j as f64 / 40.0])).collect();
    let fields: Vec<Vec<f64>> = pts.iter().map(|x| p.gradient(x)).collect();
    let best = pts
        .iter()
        .map(|c| {
            pts.iter()
                .zip(&fields)
                .map(|(x, g)| g[0] * (x[0] - c[0]) + g[1] * (x[1] - c[1]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(best < -0.05, "best candidate residual {best}");
}

#[test]
fn nonmonotone_residual_closed_form() {
    // ⟨g(x), x − 0⟩ expanded by the product rule; positive off the origin
    let p = nonmonotone_example();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let (a, b): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let g = p.gradient(&[a, b]);
        let residual = g[0] * a + g[1] * b;
        let pa = a.powi(4) * b * b + a * a + 1.0;
        let qb = a * a * b.powi(4) - b * b + 1.0;
        let expected = (4.0 * a.powi(4) * b * b + 2.0 * a * a) * qb + pa * 2.0 * a * a * b.powi(4)
            - (2.0 * a.powi(4) * b * b) * qb
            - pa * (4.0 * a * a * b.powi(4) - 2.0 * b * b);
        assert!((residual - expected).abs() < 1e-9 * (1.0 + expected.abs()));
        if a.abs() + b.abs() > 1e-6 {
            assert!(residual > 0.0);
        }
    }
}

#[test]
fn scc_saddle_beats_sampled_deviations() {
    for seed in 0..5 {
        let p = strictly_convex_concave(3, 0.7, seed).unwrap();
        let s = p.solutions()[0].clone();
        let f_star = p.value(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..500 {
            let y = p.set().sample(&mut rng);
            let mut x1_dev = s.0.clone();
            x1_dev[..3].copy_from_slice(&y[..3]);
            let mut x2_dev = s.0.clone();
            x2_dev[3..].copy_from_slice(&y[3..]);
            assert!(p.value(&x1_dev) >= f_star - 1e-12);
            assert!(p.value(&x2_dev) <= f_star + 1e-12);
        }
    }
}

#[test]
fn matrix_game_values_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let a = DMatrix::from_fn(2, 3, |_, _| rng.random_range(-1.0..1.0));
        let p = simplex_game(a.clone()).unwrap();
        let sol = &p.solutions()[0];
        let value = p.value(sol);
        // the row player's guaranteed cost over a fine grid of mixed strategies
        let brute = (0..=100_000)
            .map(|k| {
                let q = k as f64 / 100_000.0;
                (0..3).map(|j| q * a[(0, j)] + (1.0 - q) * a[(1, j)]).fold(f64::NEG_INFINITY, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((value - brute).abs() < 1e-4, "{value} vs {brute}");
        for s in p.solutions() {
            assert!((p.value(s) - value).abs() < 1e-9);
        }
    }
}

#[test]
fn matching_pennies_residual_vanishes_everywhere() {
    let p = matching_pennies();
    let r = coherence_probe(&p, &SamplingPlan::Random { samples: 5000, seed: 4 }).unwrap();
    assert_eq!(r.classification, ProbeClass::Null);
    assert!(r.max_abs_residual() < 1e-15);
}

#[test]
fn lipschitz_estimate_is_a_lower_bound() {
    let p = matching_pennies();
    let est = estimate_lipschitz(&p, 5000, 9);
    assert!(est <= 1.0 + 1e-12 && est > 0.99);
}
