//! Hitting times, meeting times and three-walker collision probabilities for
//! finite continuous-time Markov chains.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod cli;
pub mod collision;
pub mod error;
pub mod exact;
mod linalg;
pub mod montecarlo;
pub mod output;
pub mod verify;

pub use chain::{ChainSpec, Family, SpeedTriple};
pub use error::{Error, Result};
