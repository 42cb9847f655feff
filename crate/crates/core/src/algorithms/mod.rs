//! The six methods: RG, RG-A, TR-G, TR-H, RN and RN-A.

mod config;
mod run;
mod steps;
mod trajectory;

pub use config::{Algo, AlgoConfig, NuResetRule, Termination, DEFAULT_DIVERGENCE_FLOOR};
pub use run::run;
pub use steps::{step_rg, step_rga, step_rn, step_rna, step_trg, step_trh, Point, StepOutcome};
pub use trajectory::{
    EvalCounts, IterateRecord, TerminationReason, Trajectory, CSV_TAIL_COLUMNS, TRAJECTORY_SCHEMA_VERSION,
};
