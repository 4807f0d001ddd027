//! Infinitesimal models of naturally reductive homogeneous spaces: verification
//! of the Ambrose–Singer axioms, symmetry algebras, (k,B)-extensions and the
//! Lie algebras attached to them by the Nomizu construction.

pub mod catalog;
pub mod error;
pub mod extension;
pub mod io;
pub mod lie;
pub mod linalg;
pub mod model;
pub mod multilinear;
pub mod nomizu;
pub mod report;
pub mod sample;

pub use error::{Error, Result};
pub use model::{InfinitesimalModel, DEFAULT_TOL};
pub use multilinear::{CurvatureTensor, Frame, KForm, SkewMap};
pub use report::{Check, VerificationReport};
