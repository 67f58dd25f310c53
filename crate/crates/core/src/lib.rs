//! Pseudo-spectral calculus and verification machinery for non-local
//! active scalar transport on compact model manifolds.
//!
//! The crate is organized around five pieces:
//!
//! - [`manifold`] / [`field`]: exact eigenbasis calculus on 𝕋¹, 𝕋² and 𝕊²
//!   (transforms, fractional Laplace–Beltrami powers, gradients, norms);
//! - [`dynamics`]: mollified evolution of ∂_t θ + u·∇θ + κΛ^γ θ = 0 with
//!   the constitutive law u = ∇Λ^{-1+α}θ, plus blow-up detection;
//! - [`degiorgi`]: truncation ladders, level-set energies, the nonlinear
//!   recurrence and its closed-form bound, and the decay certificate;
//! - [`ineq`]: numerical verification and constant fitting for the
//!   inequalities the analysis relies on;
//! - [`logdomain`]: log-scale arithmetic so the recurrence is checkable
//!   far below f64 underflow.

// validation guards are written as !(x > 0.0) so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod degiorgi;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod ineq;
pub mod legendre;
pub mod logdomain;
pub mod manifold;
pub mod sphere;
mod transform;
pub mod util;

pub use error::{CoreError, Result};
pub use field::{advect, Coeffs, NodalField, NodalVectorField, SpectralField};
pub use manifold::{ManifoldKind, ManifoldSpec};
pub use num_complex::Complex64;
