//! Morse covering theorems with explicit constants, and Lebesgue integration
//! as gauge-controlled Riemann sums over disjoint Morse covers.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod covering;
pub mod error;
pub mod geometry;
pub mod integrate;
pub mod measure;
pub mod numeric;
pub mod sampling;
mod spatial;

pub use error::{Error, Result};
pub use geometry::{AaBox, MorseSet, Norm, Point, Segment, Shape, Space};
pub use measure::{RadonMeasure, Region};
