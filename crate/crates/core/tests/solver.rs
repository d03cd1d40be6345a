use saddlepoint::diagnostics::{check_monotone_descent, check_null_identity, check_null_nondecrease};
use saddlepoint::problems::{builtin, matching_pennies};
use saddlepoint::solver::{md_step, omd_step, run_ensemble};
use saddlepoint::{
    run, Certification, FeasibleBlock, Geometry, Method, OracleConfig, OracleState, Problem, ProductSet, RunConfig,
    StepSchedule,
};

fn zero_field() -> Problem {
    let set = ProductSet::two_player(FeasibleBlock::simplex(3).unwrap(), FeasibleBlock::cube(2, 0.0, 1.0).unwrap()).unwrap();
    Problem::new("zero", set, |_| 0.0, |x| vec![0.0; x.len()])
}

#[test]
fn zero_field_steps_are_identities() {
    let p = zero_field();
    let g = Geometry::entropic(p.set().clone());
    let x = [0.2, 0.3, 0.5, 0.1, 0.9];
    let mut o = OracleState::new(OracleConfig::exact());
    let close = |a: &[f64]| a.iter().zip(&x).all(|(u, v)| (u - v).abs() < 1e-15);
    assert!(close(&md_step(&g, &p, &mut o, &x, 0.7).unwrap()));
    let (half, next) = omd_step(&g, &p, &mut o, &x, 0.7).unwrap();
    assert!(close(&half) && close(&next));
    assert_eq!(o.query_count(), 3);
}

#[test]
fn query_accounting() {
    for label in ["matching-pennies", "scc-quadratic", "simplex-game"] {
        let p = builtin(label).unwrap();
        let cfg = RunConfig::new(StepSchedule::constant(0.05).unwrap(), 37).with_oracle(OracleConfig::gaussian(0.1, 3).unwrap());
        let md = run(&p, &cfg, Method::MirrorDescent).unwrap();
        let omd = run(&p, &cfg, Method::OptimisticMirrorDescent).unwrap();
        assert_eq!(md.rows.last().unwrap().queries, 37);
        assert_eq!(omd.rows.last().unwrap().queries, 74);
        assert!(md.rows.iter().all(|r| r.half_step.is_none()));
        assert!(omd.has_half_steps());
    }
}

#[test]
fn runs_are_deterministic() {
    let p = builtin("scc-quadratic").unwrap();
    let cfg = RunConfig::new(StepSchedule::power(1.0, 1.0).unwrap(), 500).with_oracle(OracleConfig::gaussian(0.3, 11).unwrap());
    let mut a = run(&p, &cfg, Method::OptimisticMirrorDescent).unwrap();
    let mut b = run(&p, &cfg, Method::OptimisticMirrorDescent).unwrap();
    a.meta.elapsed_seconds = 0.0;
    b.meta.elapsed_seconds = 0.0;
    assert_eq!(a, b);
}

#[test]
fn ensembles_do_not_depend_on_worker_count() {
    let p = builtin("scc-quadratic").unwrap();
    let cfg = RunConfig::new(StepSchedule::power(0.5, 0.75).unwrap(), 200)
        .with_oracle(OracleConfig::gaussian(0.2, 5).unwrap())
        .with_record_every(200);
    let finals = |w| {
        run_ensemble(&p, &cfg, Method::MirrorDescent, 8, Some(w))
            .unwrap()
            .iter()
            .map(|r| r.final_iterate().to_vec())
            .collect::<Vec<_>>()
    };
    let one = finals(1);
    assert_eq!(one, finals(3));
    assert_ne!(one[0], one[1]);
}

#[test]
fn default_start_is_centroid_and_uniform() {
    let p = builtin("simplex-game").unwrap();
    let rec = run(&p, &RunConfig::new(StepSchedule::constant(0.1).unwrap(), 1), Method::MirrorDescent).unwrap();
    assert_eq!(rec.initial, vec![0.5; 4]);
    let p = builtin("nonmonotone-ex2").unwrap();
    let rec = run(&p, &RunConfig::new(StepSchedule::constant(0.01).unwrap(), 1), Method::MirrorDescent).unwrap();
    assert_eq!(rec.initial, vec![0.0, 0.0]);
}

#[test]
fn entropic_md_on_the_simplex_game_keeps_the_null_identity() {
    // no boundary is ever reached, so the identity holds at every step
    let p = builtin("simplex-game").unwrap();
    let cfg = RunConfig::new(StepSchedule::power(1.0, 1.0).unwrap(), 2000).with_initial_point([0.8, 0.2, 0.4, 0.6]);
    let rec = run(&p, &cfg, Method::MirrorDescent).unwrap();
    assert_eq!(rec.meta.geometry.as_ref().unwrap().name(), "entropic");
    assert!(check_null_nondecrease(&rec).unwrap().passed);
    let identity = check_null_identity(&rec).unwrap();
    assert!(identity.passed, "{}", identity.detail);
}

#[test]
fn entropic_omd_converges_on_the_simplex_game() {
    let p = builtin("simplex-game").unwrap();
    let cfg = RunConfig::new(StepSchedule::constant(0.4).unwrap(), 3000).with_initial_point([0.8, 0.2, 0.4, 0.6]);
    let rec = run(&p, &cfg, Method::OptimisticMirrorDescent).unwrap();
    assert!(check_monotone_descent(&rec).unwrap().passed);
    assert!(rec.final_distances()[0] < 1e-8);
}

#[test]
fn omd_outside_the_window_is_flagged() {
    let p = matching_pennies();
    let cfg = RunConfig::new(StepSchedule::constant(1.5).unwrap(), 10);
    let rec = run(&p, &cfg, Method::OptimisticMirrorDescent).unwrap();
    assert!(matches!(rec.meta.certifications["omd_window"], Certification::Fail(_)));
    assert_eq!(rec.meta.warnings.len(), 1);
    let inside = run(&p, &RunConfig::new(StepSchedule::constant(0.5).unwrap(), 10), Method::OptimisticMirrorDescent).unwrap();
    assert!(inside.meta.warnings.is_empty());
    assert!(inside.meta.certifications["omd_window"].passed());
}

#[test]
fn bregman_values_are_nonnegative_and_averages_feasible() {
    let p = builtin("nonmonotone-ex2").unwrap();
    let cfg = RunConfig::new(StepSchedule::constant(0.01).unwrap(), 300)
        .with_initial_point([0.7, -0.6])
        .with_oracle(OracleConfig::gaussian(0.5, 1).unwrap());
    let rec = run(&p, &cfg, Method::OptimisticMirrorDescent).unwrap();
    for row in &rec.rows {
        assert!(row.distances.iter().all(|d| *d >= 0.0));
        assert!(p.set().contains(&row.ergodic, 1e-12));
        assert!(p.set().contains(&row.iterate, 1e-12));
    }
}

#[test]
fn entropy_rejects_boundary_start() {
    let p = builtin("simplex-game").unwrap();
    let cfg = RunConfig::new(StepSchedule::constant(0.1).unwrap(), 5).with_initial_point([1.0, 0.0, 0.5, 0.5]);
    assert!(run(&p, &cfg, Method::MirrorDescent).is_err());
}
