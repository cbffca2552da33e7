//! Seeded trajectory simulation of three independent walkers.
//!
//! Run `i` of an experiment with seed `s` draws from its own ChaCha stream
//! `(s, i)`, and per-run results are reduced in run order, so estimates do
//! not depend on the number of worker threads.

mod occupation;
mod race;
mod sampler;
mod target;

pub use occupation::{occupation_check, DiagonalOccupation, OccupationReport, ACCEPTANCE_FLOOR};
pub use race::{
    default_t_max, estimate_collision, estimate_collision_from, simulate_race, t_star_hit_or_bound, McEstimate,
    Occupation, RaceStart, TrajectoryOutcome, Winner, DEFAULT_CENSOR_CAP, DEFAULT_T_MAX_MULT,
};
pub use target::{moving_target_check, MovingTargetReport, TargetPath};
