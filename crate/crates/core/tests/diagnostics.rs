use saddlepoint::diagnostics::{
    check_descent_inequality, check_monotone_descent, conformance_report, CheckConstants, ClaimId,
};
use saddlepoint::io::{read_record, write_record};
use saddlepoint::problems::builtin;
use saddlepoint::{run, Geometry, Method, RunConfig, StepSchedule};

#[test]
fn descent_inequality_implies_monotone_descent() {
    for label in ["matching-pennies", "scc-quadratic", "nonmonotone-ex2", "simplex-game"] {
        let p = builtin(label).unwrap();
        let l = p.lipschitz().unwrap();
        for frac in [0.2, 0.6, 0.95] {
            let cfg = RunConfig::new(StepSchedule::constant(frac / l).unwrap(), 300);
            let rec = run(&p, &cfg, Method::OptimisticMirrorDescent).unwrap();
            let ineq = check_descent_inequality(&rec, 1.0, l).unwrap();
            if ineq.passed {
                assert!(check_monotone_descent(&rec).unwrap().passed, "{label} at {frac}");
            }
        }
    }
}

#[test]
fn scc_omd_passes_both_checks() {
    let p = builtin("scc-quadratic").unwrap();
    let l = p.lipschitz().unwrap();
    let cfg = RunConfig::new(StepSchedule::constant(0.5 / l).unwrap(), 400).with_initial_point([0.9, -0.9, -0.5, 0.8]);
    let rec = run(&p, &cfg, Method::OptimisticMirrorDescent).unwrap();
    assert!(check_descent_inequality(&rec, 1.0, l).unwrap().passed);
    assert!(check_monotone_descent(&rec).unwrap().passed);
}

#[test]
fn reports_reproduce_from_stored_records() {
    let p = builtin("matching-pennies").unwrap();
    let cfg = RunConfig::new(StepSchedule::power(1.0, 1.0).unwrap(), 400)
        .with_geometry(Geometry::euclidean(p.set().clone()))
        .with_initial_point([0.9, 0.5]);
    let rec = run(&p, &cfg, Method::MirrorDescent).unwrap();
    let constants = CheckConstants {
        modulus: Some(1.0),
        lipschitz: Some(1.0),
        second_moment: Some(0.5),
        ergodic_threshold: Some(0.05),
    };
    let claims = [
        ClaimId::MonotoneDescent,
        ClaimId::NullNondecrease,
        ClaimId::NullIdentity,
        ClaimId::BoundedOrbit,
        ClaimId::ErgodicConvergence,
    ];
    let fresh = conformance_report(&rec, &claims, &constants).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("md.csv");
    write_record(&rec, &path).unwrap();
    let stored = conformance_report(&read_record(&path).unwrap(), &claims, &constants).unwrap();
    assert_eq!(serde_json::to_string(&fresh).unwrap(), serde_json::to_string(&stored).unwrap());
    assert!(fresh.entry(ClaimId::BoundedOrbit).unwrap().passed);
    assert!(!fresh.entry(ClaimId::MonotoneDescent).unwrap().passed);
}

#[test]
fn ensemble_claim_needs_several_records() {
    let p = builtin("matching-pennies").unwrap();
    let rec = run(&p, &RunConfig::new(StepSchedule::constant(0.1).unwrap(), 3), Method::MirrorDescent).unwrap();
    assert!(conformance_report(&rec, &[ClaimId::EnsembleConvergenceFraction], &CheckConstants::default()).is_err());
    assert!(conformance_report(&rec, &[ClaimId::PerStepDescentInequality], &CheckConstants::default()).is_err());
}
