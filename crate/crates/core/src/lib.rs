//! Numerical toolkit for the Bergman projection `T_σ` on the unit ball of `C^d`.
//!
//! The crate evaluates the weighted Bergman projection, its kernel derivatives and
//! the order-`n` Bloch semi-norm, and checks the sharp operator-norm constant
//!
//! ```text
//! ‖T_σ‖_{L^∞ → B} = C · Γ(λ+n) Γ(n) / Γ²((λ+n)/2),   λ = d + 1 + σ,
//! ```
//!
//! where `C` is the maximum of the monomial-vector norm `|Z(ζ)|` over the unit sphere.
//!
//! Module map:
//!
//! - [`multiindex`]: multi-indices of fixed order and the monomial vector `Z(ζ)`.
//! - [`geometry`]: ball points, the Hermitian inner product, Möbius automorphisms.
//! - [`special`]: log-gamma and the Gamma closed forms.
//! - [`quadrature`]: product-rule and Monte Carlo integration over the ball.
//! - [`projection`]: kernels, `T_σ`, derivative tuples and Bloch semi-norm estimates.
//! - [`extremal`]: the extremal sequence `G_m` and the lower-bound convergence table.
//! - [`constants`]: the sphere maximum `C` for a norm, exact and by optimization.
//! - [`config`]: text and JSON parsers for norm descriptors, `ε` lists and rules.

pub mod config;
pub mod constants;
pub mod error;
pub mod extremal;
pub mod geometry;
pub mod multiindex;
pub mod projection;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use geometry::BallPoint;
pub use multiindex::{MonomialVector, MultiIndex};
pub use num_complex::Complex64;
pub use projection::{BoundedFunction, NormSpec};
pub use quadrature::{IntegralResult, QuadratureRule};
pub use special::KernelParams;
