//! Numerical laboratory for decay rates of the damped semilinear wave equation
//! `u_tt − Δu + f(u) + a(x)·g(u_t) = 0`.
//!
//! * [`feedback`]: damping laws `g` and the auxiliary concave function `h₀`
//! * [`envelope`]: the decay-envelope ODE, its recursion and closed-form bounds
//! * [`wavesim`]: finite-difference simulator with energy accounting
//! * [`raytrace`]: bicharacteristic ray tracing and geometric control times
//! * [`cli`]: configuration-driven experiment runner

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop, clippy::redundant_guards)]

pub mod cli;
pub mod envelope;
pub mod feedback;
pub mod raytrace;
pub mod wavesim;

pub use envelope::{EnvelopeCurve, EnvelopeError};
pub use feedback::{FeedbackError, FeedbackSpec, MonotoneFn};
