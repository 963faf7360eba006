//! δ-sweeps against the deep- and shallow-water limits, and the scaling check.

mod integrator;
mod scaling;
mod sweep;

pub use integrator::{
    conservation_check, i2_refinement, reversibility_error, self_convergence, ConservationCheck, I2Refinement,
    SelfConvergence,
};
pub use scaling::{apply_scaling_transform, sample_scaled, scaling_amplitude, scaling_check, ScalingCheck};
pub use sweep::{
    deep_water_sweep, fit_rate, run_sweep, shallow_water_sweep, strictly_decreasing, truncated_shallow_sweep,
    truncation_gap_at, varying_data_sweep, ConvergenceReport, DataProfile, LinearBound, Perturbation,
    PerturbationScaling, RunMetadata, SweepConfig, SweepKind, TruncationGap,
};
