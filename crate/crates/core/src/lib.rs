//! Spectral-constant bounds for convex domains containing the spectrum of a
//! complex matrix.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`]: dense complex matrix primitives (norms, Hermitian
//!   eigen-extremes, resolvents).
//! * [`geometry`]: convex bodies described by Fourier support functions,
//!   boundary meshes, perimeter, curvature, enclosing circles.
//! * [`ranges`]: numerical range and scaled q-numerical range support
//!   functions, the non-normality profile `m(θ)`.
//! * [`potential`]: the double-layer potential `μ(σ, A)` on a boundary mesh,
//!   `γ(f)`, Cauchy-integral functional calculus, the operator `S`.
//! * [`bounds`]: the spectral-constant expressions and the full report.
//! * [`search`]: empirical Crouzeix ratios and conjecture sweeps.

pub mod bounds;
pub mod ensembles;
pub mod error;
pub mod geometry;
pub mod io;
pub mod poly;
pub mod potential;
pub mod ranges;
pub mod search;
pub mod spectral;
mod sphere;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spectral::{CMatrix, Operator, Tolerances};
