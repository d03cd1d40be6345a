//! Entropic mirror descent on a matrix game is multiplicative weights. The Nash
//! equilibria come from support enumeration.

use nalgebra::DMatrix;
use saddlepoint::nash::support_enumeration;
use saddlepoint::problems::simplex_game;
use saddlepoint::{run, Method, RunConfig, StepSchedule};

fn main() -> saddlepoint::Result<()> {
    let payoff = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, -1.0, -1.0, 0.0, 1.0, 1.0, -1.0, 0.0]);
    for eq in support_enumeration(&payoff)? {
        println!("equilibrium row {:.4?} col {:.4?} value {:.4}", eq.row, eq.col, eq.value);
    }
    let game = simplex_game(payoff)?;
    let start = [0.6, 0.3, 0.1, 0.2, 0.2, 0.6];
    for method in [Method::MirrorDescent, Method::OptimisticMirrorDescent] {
        let cfg = RunConfig::new(StepSchedule::constant(0.1)?, 5000).with_initial_point(start);
        let rec = run(&game, &cfg, method)?;
        println!(
            "{method} ({}): KL to equilibrium {:.3e} → {:.3e}, average {:.3?}",
            rec.meta.geometry.as_ref().unwrap().name(),
            rec.initial_distances[0],
            rec.final_distances()[0],
            rec.final_ergodic().unwrap()
        );
    }
    Ok(())
}
