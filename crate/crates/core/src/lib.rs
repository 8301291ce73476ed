//! Analysis of refinement equations `f(x) = Σ_{d∈D} c_d f(Ax − d)` with an
//! arbitrary real expanding dilation `A` and arbitrary translations `D`.
//!
//! The crate computes the iterated masks `D_m`, extremal and runner-up points
//! of `D_m` along generic directions, and three upper bounds on the
//! smoothness exponent of a compactly supported solution, cross-checked
//! against the decay of the truncated infinite product for `f̂`.

pub mod attractor;
pub mod bounds;
pub mod cli;
pub mod equation;
pub mod error;
pub mod fourier;
pub mod hull;
pub mod iterate;
pub mod linalg;
pub mod presets;
pub mod scalar;

pub use equation::{parse_equation, serialize_equation, validate, Diagnostics, RefinementEquation};
pub use error::{Error, Result};
pub use scalar::{Arithmetic, Scalar};
