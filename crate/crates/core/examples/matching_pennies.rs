//! Mirror descent spirals away from the interior saddle of `xy` on the square,
//! while the optimistic variant closes in on it.

use saddlepoint::problems::matching_pennies;
use saddlepoint::{run, Method, RunConfig, StepSchedule};

fn main() -> saddlepoint::Result<()> {
    let problem = matching_pennies();
    for (method, schedule) in [
        (Method::MirrorDescent, StepSchedule::power(1.0, 1.0)?),
        (Method::OptimisticMirrorDescent, StepSchedule::constant(0.5)?),
    ] {
        let cfg = RunConfig::new(schedule, 2000).with_initial_point([0.9, 0.5]);
        let rec = run(&problem, &cfg, method)?;
        let d = rec.distance_series(0);
        println!("{method}: D₀ = {:.4}", rec.initial_distances[0]);
        for n in [9, 99, 999, 1999] {
            println!("  n = {:>4}  D = {:.3e}  x = {:.4?}", n + 1, d[n], rec.rows[n].iterate.as_slice());
        }
        println!("  ergodic average {:.4?}", rec.final_ergodic().unwrap());
    }
    Ok(())
}
