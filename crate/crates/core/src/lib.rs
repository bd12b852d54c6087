//! Gordon-type exclusion of point spectrum for quasi-periodic CMV matrices.

// `!(x < bound)` is used on purpose: it rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cmv;
pub mod dynamics;
pub mod error;
pub mod frequency;
pub mod minmax;
pub mod phase;
pub mod pipeline;
pub mod sampling;
pub mod sequence;
pub mod transfer;

pub use error::{Error, Result};
pub use phase::{Phase, Precision};
pub use sequence::VerblunskySequence;
