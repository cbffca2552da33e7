//! Three walkers on one chain: which pair meets first.

mod absorb;
mod meeting;
mod product;

pub use absorb::{
    absorption, collision_exact, collision_exact_with_capacity, collision_from, Absorption, CollisionReport, Method,
    StartBreakdown, TieRule, DEFAULT_CAPACITY,
};
pub use meeting::{
    identity_gap, identity_gaps, meeting_cdf, meeting_small_time_profile, meeting_survival, IdentityGap,
    IdentityGapTable, MeetingSmallTimePoint,
};
pub use product::{classify, ProductClass, ProductGenerator};
