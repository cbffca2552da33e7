//! Single-chain analysis: spectrum, expected hitting times, hitting-time
//! distributions and the killed-generator quantities built on them.

mod hitting;
mod killed;
mod negative;
mod spectral;
mod transient;

pub use hitting::{hitting_moments, hitting_times_to, HittingSummary};
pub use killed::{killed_spectrum, residual_life_curve, KilledSpectrum, ResidualLifeCurve};
pub use negative::{
    negative_set, negative_set_at, negative_set_tail, small_time_profile, NegativeSet, NegativeSetTail, SmallTimePoint,
};
pub use spectral::{spectral_summary, SpectralSummary, DENSE_CAPACITY};
pub use transient::{hitting_cdf, hitting_survival, linear_grid, CurveKind, DistributionCurve, SurvivalTable};

pub(crate) use spectral::require_reversible;
pub(crate) use transient::survival_on_grid;
