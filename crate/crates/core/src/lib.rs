//! Fractal analysis of orbits of parabolic germs.
//!
//! The crate measures the directed area of ε-neighborhoods of orbits of
//! parabolic germs `f(z) = z + a₁z^{k+1} + …`, fits the asymptotic
//! development of that area in ε, and inverts the fitted coefficients into
//! the formal invariants `(k, a₁, a)` of the germ. A truncated power-series
//! reducer computes the same invariants algebraically, so every fractal
//! recovery can be checked against an independent route.
//!
//! Module map:
//!
//! * [`powerseries`]: truncated series algebra and formal normal forms.
//! * [`dynamics`]: attracting directions and orbit generation.
//! * [`geometry`]: exact area and centroid of ε-neighborhoods.
//! * [`oracle`]: Monte-Carlo estimate of the same quantities.
//! * [`asymptotics`]: scale basis, least-squares fit, Γ and closed forms.
//! * [`recovery`]: invariants from fractal data and the end-to-end pipelines.


// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod asymptotics;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod powerseries;
pub mod recovery;
pub mod sum;

pub mod serde_complex;

pub use num_complex::Complex64;

pub use error::{Error, Result};
