//! Bicharacteristics of `−ρ(x)∂²_t + ∇·K(x)∇`: Hamiltonian ray flow, geodesic
//! checks, and sampled geometric-control entry times.
//!
//! Rays are traced for the normalized symbol `p̃ = ½(−τ² + ξᵀ(K/ρ)ξ)` with RK4 at
//! a fixed step. With `τ = −1` the flow parameter coincides with time `t`.

mod flow;
mod gcc;
mod medium;

pub use flow::{
    flow, flow_with, geodesic_residual, make_null, normalized_symbol, rk4_step, symbol, xi_dot_from_metric,
    xi_dot_hamiltonian, GeodesicResidual, Hamiltonian, PhasePoint, RayPath,
};
pub use gcc::{entry_time, gcc_entry_time, sample_bundle, GccResult};
pub use medium::{Matrix, MediumFields, Vector};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RayError {
    #[error("direction must be a nonzero finite vector")]
    DegenerateDirection,
    #[error("ray left the domain at s = {s}")]
    LeftDomain { s: f64 },
    #[error("ray state became non-finite at s = {s}")]
    NonFinite { s: f64 },
    #[error("invalid medium: {0}")]
    InvalidMedium(String),
    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("path has {0} samples, need at least 3")]
    TooShort(usize),
    #[error("ray bundle is empty")]
    EmptyBundle,
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
}

/// The box `∏ [0, L_i]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDomain<const D: usize> {
    pub extent: [f64; D],
}

impl<const D: usize> BoxDomain<D> {
    pub fn new(extent: [f64; D]) -> Result<Self, RayError> {
        if !(1..=2).contains(&D) {
            return Err(RayError::InvalidDomain(format!("dimension {D} is not supported")));
        }
        if extent.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(RayError::InvalidDomain(format!("extents must be positive, got {extent:?}")));
        }
        Ok(BoxDomain { extent })
    }

    pub fn contains(&self, x: &[f64; D]) -> bool {
        (0..D).all(|a| x[a] >= 0.0 && x[a] <= self.extent[a])
    }

    pub fn dist_to_boundary(&self, x: &[f64; D]) -> f64 {
        (0..D).map(|a| x[a].min(self.extent[a] - x[a])).fold(f64::INFINITY, f64::min)
    }

    /// Indicator of `{x : dist(x, ∂Ω) ≤ width}`.
    pub fn collar(&self, width: f64) -> impl Fn(&[f64; D]) -> bool + Sync + '_ {
        move |x| self.dist_to_boundary(x) <= width
    }
}
