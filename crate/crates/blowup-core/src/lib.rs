//! Numerical machinery for finite-time blow-up in radial semilinear
//! reaction-diffusion equations `u_t = Δu + f(u)` on a ball, with `f(u) = e^u`
//! or `f(u) = u^p`.
//!
//! The crate covers four layers:
//!
//! * [`model`]: nonlinearity family, similarity variables
//!   `s = -log(T-t)`, `y = r/sqrt(T-t)`, and the refined near-blow-up scale.
//! * [`profile`]: shooting solver for the radial self-similar profile ODE,
//!   tail-constant extraction, and closed-form singular profiles.
//! * [`field`], [`norms`], [`mehler`], [`lambda`]: radial fields, shifted
//!   Gaussian-weighted `L^q` norms, the Mehler representation of `e^{At}` for
//!   the Hermite operator `A = Δ - (y/2)·∇`, and the perturbed semigroup
//!   `e^{Λt}`, `Λ = A + Φ`, together with numerical checks of their
//!   regularization estimates.
//! * [`evolve`], [`verify`]: method-of-lines evolution of the physical and
//!   rescaled equations, type-I rate fitting, and final-time profile checks.
//!
//! Everything is `f64`, deterministic, and allocation-only (`no_std`
//! compatible with `alloc`).

#![cfg_attr(not(feature = "std"), no_std)]
// Validation uses negated comparisons (`!(x > 0.0)`) on purpose: they reject
// NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod evolve;
pub mod field;
pub mod lambda;
pub mod mehler;
pub mod model;
pub mod norms;
pub mod numeric;
pub mod profile;
pub mod quad;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use model::{DomainSpec, Nonlinearity};
pub use report::{Bound, Report, Verdict};
