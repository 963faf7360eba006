//! Integrating-factor RK4 time stepping with dealiased nonlinearity.

mod config;
mod invariant;
mod solver;
mod trajectory;

pub use config::{advisory_dt, aligned_steps, default_padding, SolverConfig, CFL_SAFETY, TARGET_SNAPSHOTS};
pub use invariant::{invariant_i2, invariant_i2_corrected, I2Evaluator, I2Sign};
pub use solver::{evolve, linear_propagator, nonlinear_term, step_ifrk4, Solver, BLOW_UP_GROWTH};
pub use trajectory::{
    decode_snapshot, encode_snapshot, BlowUp, Diagnostics, Snapshot, Trajectory,
    DIAGNOSTICS_CSV_HEADER, SNAPSHOT_MAGIC,
};
