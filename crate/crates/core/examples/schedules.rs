//! Step-size schedules and what they certify.

use saddlepoint::{Requirement, StepSchedule};

fn main() -> saddlepoint::Result<()> {
    let schedules = [
        StepSchedule::constant(0.1)?,
        StepSchedule::power(1.0, 1.0)?,
        StepSchedule::power(0.5, 0.6)?,
        StepSchedule::power(1.0, 0.5)?,
        StepSchedule::custom(vec![0.5, 0.25, 0.125])?,
    ];
    for s in &schedules {
        println!(
            "{:<22} γ₁..γ₃ = {:.4?}  Σγ² = {:<10}  robbins-monro: {:?}  OMD window at L = 1: {:?}",
            s.to_string(),
            (1..=3).map(|n| s.step_at(n)).collect::<Result<Vec<_>, _>>()?,
            s.sum_of_squares().map_or("∞".to_string(), |v| format!("{v:.5}")),
            s.certify(Requirement::RobbinsMonro),
            s.certify(Requirement::OmdWindow { modulus: 1.0, lipschitz: 1.0 }),
        );
    }
    Ok(())
}
