//! Exterior algebra over Rⁿ with its standard orthonormal frame.

mod curvature;
mod form;
mod frame;
mod skew;

pub use curvature::{lambda2_inner, CurvatureTensor, SymPair};
pub use form::{binomial, comb_rank, pair_index, pairs, KForm, PRUNE_TOL};
pub use frame::Frame;
pub use skew::{SkewMap, SKEW_TOL};
