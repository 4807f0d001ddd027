use thiserror::Error;

use crate::report::VerificationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("frame mismatch: dimension {left} vs {right}")]
    FrameMismatch { left: usize, right: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("expected a form of degree {expected}, got degree {found}")]
    WrongDegree { expected: usize, found: usize },

    #[error("contraction needs a form of degree at least 1")]
    ContractScalar,

    #[error("matrix is not antisymmetric (residual {residual:e})")]
    NotSkew { residual: f64 },

    #[error("duplicate basis label `{0}`")]
    DuplicateLabel(String),

    #[error("image of R is not contained in the stabilizer (residual {residual:e})")]
    ImageNotInStabilizer { residual: f64 },

    #[error("image of R is not closed under the commutator (residual {residual:e})")]
    ImageNotSubalgebra { residual: f64 },

    #[error("isotropy does not contain im(R) (residual {residual:e})")]
    IsotropyTooSmall { residual: f64 },

    #[error("isotropy element {index} does not stabilize T and R (residual {residual:e})")]
    NotStabilizing { index: usize, residual: f64 },

    #[error("isotropy is not closed under the commutator (residual {residual:e})")]
    IsotropyNotSubalgebra { residual: f64 },

    #[error("isotropy elements are linearly dependent")]
    DependentIsotropy,

    #[error("base algebra is not semisimple (Killing form condition number {condition:e})")]
    NotSemisimple { condition: f64 },

    #[error("[m,m] + m does not span the base algebra")]
    NotGeneratedByM,

    #[error("invariant metric extension is not unique (nullity {nullity})")]
    NonUniqueSolution { nullity: usize },

    #[error("no invariant metric extends g0 (residual {residual:e})")]
    NoInvariantExtension { residual: f64 },

    #[error("invariant metric is degenerate on the isotropy algebra")]
    DegenerateOnIsotropy,

    #[error("no complementary ideal found: {0}")]
    NoComplementaryIdeal(String),

    #[error("base model is not a product of a semisimple-type factor and a flat factor: {0}")]
    BaseNotProduct(String),

    #[error("bilinear form is not positive definite")]
    NotPositiveDefinite,

    #[error("extension data failed validation: {}", .0.failures().join(", "))]
    InvalidExtension(Box<VerificationReport>),

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("unknown parameter `{param}` for catalog entry `{entry}`")]
    UnknownParam { entry: String, param: String },

    #[error("parameter `{param}` out of domain: {reason}")]
    ParamOutOfDomain { param: String, reason: String },

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
