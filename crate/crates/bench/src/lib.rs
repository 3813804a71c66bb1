//! Experiment runner for the `axb-core` solvers: seeded multi-trial runs,
//! declarative grids and the shipped convergence matrix.

pub mod convergence;
pub mod error;
pub mod experiment;
pub mod grid;

pub use convergence::convergence_grid;
pub use error::{BenchError, Result};
pub use experiment::{
    run_experiment, run_trials, ExperimentConfig, ExperimentOutput, ProblemSource, Summary,
    TrialResult,
};
pub use grid::{
    judge, run_grid, run_matrix, CellOutcome, Expect, Grid, GridCell, GridDefaults, MatrixOutcome,
    Verdict,
};
