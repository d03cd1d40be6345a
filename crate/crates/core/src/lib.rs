//! Mirror descent and optimistic mirror descent for saddle-point problems,
//! with coherence probes, conformance checks and adaptive optimizers.

pub mod adaptive;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod nash;
pub mod oracle;
pub mod problems;
pub mod schedule;
pub mod solver;

pub use adaptive::{run_adaptive, AdamHyper, AdamState, Optimizer, UnconstrainedProblem};
pub use diagnostics::{ClaimEntry, ClaimId, ConformanceReport};
pub use error::{Error, Result};
pub use geometry::{Dgf, DualVector, FeasibleBlock, Geometry, Player, PrimalPoint, ProductSet};
pub use oracle::{NoiseModel, OracleConfig, OracleState};
pub use problems::{CoherenceClass, Problem, ProbeClass, SamplingPlan};
pub use schedule::{Certification, Requirement, StepSchedule};
pub use solver::{run, run_ensemble, Method, RunConfig, RunRecord};
