use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series is not invertible under composition (linear coefficient is zero)")]
    NotInvertible,
    #[error("germ is not parabolic: {0}")]
    NotParabolic(String),
    #[error("truncation order {got} is below the required {needed}")]
    InsufficientOrder { needed: usize, got: usize },
    #[error("initial point lies on a repelling direction; no attracting sector can be selected")]
    AmbiguousSector,
    #[error("orbit left the attracting sector at iterate {index} (|z| = {modulus:e})")]
    LeftSector { index: usize, modulus: f64 },
    #[error("stop radius not reached within {cap} iterations")]
    IterationCap { cap: usize },
    #[error("orbit too short: {0}")]
    OrbitTooShort(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("closure error bound {bound:e} exceeds budget {allowed:e}")]
    BudgetUnreachable { bound: f64, allowed: f64 },
    #[error("insufficient samples: need {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("least-squares system is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("degenerate value: {0}")]
    Degenerate(String),
    #[error("closed form requires vanishing intermediate coefficients a_2..a_k")]
    RequiresNormalForm,
    #[error("multiplicity is ambiguous: dim_B/(1-dim_B) = {0}")]
    AmbiguousK(f64),
    #[error("imaginary part of the formal invariant is indeterminate for k = 1")]
    DegenerateImaginaryPart,
    #[error("center of mass is at the origin; directed area undefined")]
    DegenerateCentroid,
}
