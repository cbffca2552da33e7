//! Named, reproducible checks grouped into suites. Each suite returns a
//! [`VerificationReport`]; a check that cannot run because its hypotheses
//! fail is recorded as skipped, never as a pass.

pub mod claims;
mod exact_suites;
mod mc_suites;
mod report;

pub use exact_suites::{
    default_identity_speeds, default_speed_grid, identity_suite, level_probability, linear_lower_bound,
    sharpness_suite, speed_lower_bound, speeds_suite, structural_suite, three_path, transitive_suite, LevelBound,
    SharpnessCheck, StructuralOptions,
};
pub use mc_suites::{
    counterexample_suite, default_oracle_speeds, moving_target_suite, nonreversible_suite, occupation_suite,
    oracle_suite, MovingTargetOptions,
};
pub use report::{ChainMeta, Check, EstimateRow, FloorEvidence, Relation, VerificationReport};
