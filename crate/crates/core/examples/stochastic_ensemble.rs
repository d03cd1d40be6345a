//! Noisy oracle with square-summable steps on a strictly convex-concave problem.
//! Prints the ensemble convergence fraction with its Wilson interval.

use saddlepoint::diagnostics::{bounded_orbit_bound, ensemble_stats};
use saddlepoint::problems::builtin;
use saddlepoint::{run_ensemble, Method, OracleConfig, RunConfig, StepSchedule};

fn main() -> saddlepoint::Result<()> {
    let problem = builtin("scc-quadratic")?;
    let schedule = StepSchedule::power(1.0, 0.75)?;
    let sigma = 0.5;
    let cfg = RunConfig::new(schedule.clone(), 20_000)
        .with_oracle(OracleConfig::gaussian(sigma, 2024)?)
        .with_record_every(1000);
    for method in [Method::MirrorDescent, Method::OptimisticMirrorDescent] {
        let records = run_ensemble(&problem, &cfg, method, 50, None)?;
        let stats = ensemble_stats(&records, 1e-3)?;
        println!(
            "{method}: {}/{} runs end within 1e-3, Wilson 95% [{:.3}, {:.3}]",
            stats.successes, stats.runs, stats.wilson_low, stats.wilson_high
        );
    }
    // a crude second-moment bound: sup ‖g‖² over the box plus the noise variance
    let m2 = problem.lipschitz().unwrap().powi(2) * 8.0 + sigma * sigma * problem.dim() as f64;
    let d0 = problem.default_geometry().bregman(&problem.solutions()[0], &problem.set().center())?;
    println!("orbit bound from the centre: {:.3}", bounded_orbit_bound(d0, &schedule, m2, 1.0)?);
    Ok(())
}
