//! Adam against optimistic Adam on the bilinear game f(θ₁, θ₂) = θ₁θ₂.

use saddlepoint::adaptive::AdaptiveConfig;
use saddlepoint::{run_adaptive, AdamHyper, Optimizer, UnconstrainedProblem};

fn main() -> saddlepoint::Result<()> {
    let problem = UnconstrainedProblem::bilinear();
    for lr in [1e-4, 1e-3, 1e-2] {
        println!("lr = {lr:e}");
        for optimizer in Optimizer::ALL {
            let cfg = AdaptiveConfig::new(optimizer, 10_000, vec![1.0, 1.0])
                .with_hyper(AdamHyper::default().with_lr(lr))
                .with_record_every(10_000);
            let rec = run_adaptive(&problem, &cfg)?;
            println!("  {:<20} ‖θ‖ = {:.4}", optimizer.to_string(), rec.final_distances()[0]);
        }
    }
    Ok(())
}
