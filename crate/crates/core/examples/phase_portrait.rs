//! Trajectories of both methods on a non-coherent problem, written as CSV for plotting.

use std::path::PathBuf;

use saddlepoint::io::write_record;
use saddlepoint::problems::portrait_problem;
use saddlepoint::{run, Method, RunConfig, StepSchedule};

fn main() -> saddlepoint::Result<()> {
    let problem = portrait_problem();
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "portrait-out".into()));
    std::fs::create_dir_all(&dir)?;
    let starts = [[0.2, 0.8], [0.5, 0.1], [0.9, 0.5], [0.6, 0.95]];
    for method in [Method::MirrorDescent, Method::OptimisticMirrorDescent] {
        for (i, start) in starts.iter().enumerate() {
            let cfg = RunConfig::new(StepSchedule::constant(0.05)?, 2000).with_initial_point(*start);
            let rec = run(&problem, &cfg, method)?;
            let path = dir.join(format!("{method}-{i}.csv"));
            write_record(&rec, &path)?;
            println!("{} start {start:?} → {:.4?}", path.display(), rec.final_iterate());
        }
    }
    Ok(())
}
