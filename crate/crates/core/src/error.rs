use thiserror::Error;

/// Errors raised by the lattice, monoid, fan and flattening operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero vector has no primitive representative")]
    ZeroVector,
    #[error("vector is not primitive")]
    NotPrimitive,
    #[error("vectors do not form a lattice basis")]
    NotABasis,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cone is not strongly convex")]
    NotPointed,
    #[error("vector is not in the support of the fan")]
    NotInSupport,
    #[error("fan map does not send the source support into the target support")]
    SupportNotMapped,
    #[error("quotient lattice has torsion")]
    TorsionQuotient,
    #[error("monoid is not a submonoid of the given monoid")]
    NotSubmonoid,
    #[error("monoid is not sharp")]
    NotSharp,
    #[error("monoid is not saturated")]
    NotSaturated,
    #[error("monoid does not span its ambient lattice")]
    NotFullDimensional,
    #[error("vector {0} is not an element of the monoid")]
    NotInMonoid(String),
    #[error("homomorphism does not map generator {0} into the target monoid")]
    NotAHomomorphism(String),
    #[error("ideals or homomorphism live over different monoids")]
    ParentMismatch,
    #[error("ideal is empty")]
    EmptyIdeal,
    #[error("support function violates the min-of-linear convention: {0}")]
    ConventionViolation(String),
    #[error("element is not a generator of the ideal")]
    NotAGenerator,
    #[error("extended ideal is not principal on chart {0}")]
    InvertibilityFailure(String),
    #[error("fan is not a subdivision of the cone: {0}")]
    NotASubdivision(String),
    #[error("no strictly convex support function with ray values <= {0}")]
    NoStrictFunctionWithinBound(u64),
    #[error("vector is not in the cone")]
    NotInCone,
    #[error("homomorphism is not injective on groups")]
    NotInjective,
    #[error("homomorphism is not local")]
    NotLocal,
    #[error("fallback subdivision loop exceeded {0} iterations")]
    IterationCapExceeded(usize),
    #[error("rendering is only supported for rank 2 fans, got rank {0}")]
    UnsupportedRank(usize),
    #[error("invalid fan: {0}")]
    InvalidFan(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
