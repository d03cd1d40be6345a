//! Runs MD and OMD on matching pennies and checks each against every per-step claim.

use saddlepoint::diagnostics::{conformance_report, CheckConstants};
use saddlepoint::problems::matching_pennies;
use saddlepoint::{run, ClaimId, Method, RunConfig, StepSchedule};

fn main() -> saddlepoint::Result<()> {
    let problem = matching_pennies();
    let constants = CheckConstants {
        modulus: Some(1.0),
        lipschitz: problem.lipschitz(),
        second_moment: Some(0.5),
        ergodic_threshold: Some(0.05),
    };
    let cfg = RunConfig::new(StepSchedule::constant(0.5)?, 500).with_initial_point([0.9, 0.5]);
    for method in [Method::MirrorDescent, Method::OptimisticMirrorDescent] {
        let rec = run(&problem, &cfg, method)?;
        let mut claims = vec![ClaimId::MonotoneDescent, ClaimId::NullNondecrease, ClaimId::NullIdentity];
        if rec.has_half_steps() {
            claims.push(ClaimId::PerStepDescentInequality);
        }
        let report = conformance_report(&rec, &claims, &constants)?;
        println!("{method}");
        for e in &report.entries {
            println!("  {:<26} {}  {}", e.claim.to_string(), if e.passed { "PASS" } else { "FAIL" }, e.detail);
        }
    }
    Ok(())
}
