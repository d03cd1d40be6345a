//! Classifies every builtin problem by sampling ⟨g(x), x − x*⟩.

use saddlepoint::problems::{builtin, coherence_probe, BUILTIN_LABELS};

fn main() -> saddlepoint::Result<()> {
    for label in BUILTIN_LABELS {
        let problem = builtin(label)?;
        let report = coherence_probe(&problem, &problem.default_plan())?;
        println!(
            "{label:<18} declared {:<12} probed {:<12} min residual {:+.3e} over {} samples",
            format!("{:?}", problem.coherence()),
            report.classification.to_string(),
            report.min_residual(),
            report.samples
        );
    }
    Ok(())
}
