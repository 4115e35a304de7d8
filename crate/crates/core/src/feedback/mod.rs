//! Parametric models of the nonlinear damping law `g` and construction of the
//! auxiliary concave function `h₀` with `h₀(g(s)s) ≥ s² + g(s)²` near the origin.
//!
//! A feedback law is described by its behaviour on `|s| <= 1` (the origin branch)
//! and on `|s| > 1` (the infinity branch). Both branches are extended oddly to
//! negative arguments. The infinity coefficient is normalized to the value of the
//! origin branch at `s = 1` so that `g` is continuous.

mod monotone;

pub(crate) use monotone::bisect_increasing;
pub use monotone::{invert_monotone, MonotoneError, MonotoneFn, BISECTION_CAP, DEFAULT_INVERSION_TOL, DEFAULT_X_MAX};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeedbackError {
    #[error("invalid feedback specification: {0}")]
    InvalidSpec(String),
    #[error("h0 construction failed: grid violation {violation:e} after safety scaling")]
    ConstructionFailed { violation: f64 },
}

/// Behaviour of `g` on `|s| <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OriginBranch {
    /// `m₀s² ≤ g(s)s ≤ M₀s²`; realized as `g(s) = c·s` with `c = (m₀+M₀)/2`.
    Linear { m0: f64, big_m0: f64 },
    /// `m₀|s|^{e+1} ≤ g(s)s ≤ M₀|s|^{e+1}`; realized as `c·|s|^e·sign(s)`.
    Power { exponent: f64, m0: f64, big_m0: f64 },
    /// `g(s) = s³·exp(−1/s²)`.
    ExpCubic,
    /// `g(s) = s·|s|·exp(−1/|s|)`.
    ExpAbs,
}

/// Behaviour of `g` on `|s| > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfinityBranch {
    Linear { m: f64, big_m: f64 },
    Power { r: f64, m: f64, big_m: f64 },
}

/// Growth class of `g` at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthClass {
    Linear,
    Superlinear,
    Sublinear,
}

impl GrowthClass {
    pub fn from_order(r: f64) -> Self {
        if r > 1.0 {
            GrowthClass::Superlinear
        } else if r < 1.0 {
            GrowthClass::Sublinear
        } else {
            GrowthClass::Linear
        }
    }
}

/// Relative tolerance used when matching the two branches at `|s| = 1`.
pub const DEFAULT_MATCHING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackSpec {
    origin: OriginBranch,
    infinity: InfinityBranch,
    infinity_coeff: f64,
}

impl FeedbackSpec {
    pub fn new(origin: OriginBranch, infinity: InfinityBranch) -> Result<Self, FeedbackError> {
        Self::with_matching_tol(origin, infinity, DEFAULT_MATCHING_TOL)
    }

    pub fn with_matching_tol(origin: OriginBranch, infinity: InfinityBranch, tol: f64) -> Result<Self, FeedbackError> {
        let bad = |msg: String| Err(FeedbackError::InvalidSpec(msg));
        match origin {
            OriginBranch::Linear { m0, big_m0 } => {
                if !(m0 > 0.0 && big_m0 >= m0 && big_m0.is_finite()) {
                    return bad(format!("origin bounds need 0 < m0 <= M0, got m0={m0}, M0={big_m0}"));
                }
            }
            OriginBranch::Power { exponent, m0, big_m0 } => {
                if !(exponent > 0.0 && exponent.is_finite()) {
                    return bad(format!("origin exponent must be positive, got {exponent}"));
                }
                if !(m0 > 0.0 && big_m0 >= m0 && big_m0.is_finite()) {
                    return bad(format!("origin bounds need 0 < m0 <= M0, got m0={m0}, M0={big_m0}"));
                }
            }
            OriginBranch::ExpCubic | OriginBranch::ExpAbs => {}
        }
        let (r, m, big_m) = match infinity {
            InfinityBranch::Linear { m, big_m } => (1.0, m, big_m),
            InfinityBranch::Power { r, m, big_m } => (r, m, big_m),
        };
        if !(r > 0.0 && r.is_finite()) {
            return bad(format!("order at infinity must be positive, got {r}"));
        }
        if !(m > 0.0 && big_m >= m && big_m.is_finite()) {
            return bad(format!("infinity bounds need 0 < m <= M, got m={m}, M={big_m}"));
        }
        let coeff = origin_abs(&origin, 1.0);
        if coeff < m * (1.0 - tol) || coeff > big_m * (1.0 + tol) {
            return bad(format!(
                "branches cannot match at |s|=1: g(1)={coeff} lies outside the infinity bounds [{m}, {big_m}]"
            ));
        }
        Ok(FeedbackSpec { origin, infinity, infinity_coeff: coeff })
    }

    pub fn origin(&self) -> OriginBranch {
        self.origin
    }

    pub fn infinity(&self) -> InfinityBranch {
        self.infinity
    }

    /// Coefficient `c∞` in `g(s) = c∞·|s|^r·sign(s)` for `|s| > 1`.
    pub fn infinity_coeff(&self) -> f64 {
        self.infinity_coeff
    }

    /// `Some(c)` when `g(s) = c·s` on all of ℝ.
    pub fn linear_slope(&self) -> Option<f64> {
        let c = match self.origin {
            OriginBranch::Linear { .. } => origin_abs(&self.origin, 1.0),
            OriginBranch::Power { exponent, .. } if exponent == 1.0 => origin_abs(&self.origin, 1.0),
            _ => return None,
        };
        (order_at_infinity(self) == 1.0).then_some(c)
    }

    pub fn growth_class(&self) -> GrowthClass {
        GrowthClass::from_order(order_at_infinity(self))
    }

    fn g_abs(&self, x: f64) -> f64 {
        if x <= 1.0 {
            origin_abs(&self.origin, x)
        } else {
            let r = order_at_infinity(self);
            self.infinity_coeff * x.powf(r)
        }
    }

    /// Sampled checks of monotonicity, sign, branch matching and the growth bounds
    /// at infinity on `n` points of `[-s_max, s_max]`.
    pub fn check_invariants(&self, s_max: f64, n: usize) -> Result<(), String> {
        let n = n.max(3);
        let mut prev = f64::NEG_INFINITY;
        let r = order_at_infinity(self);
        let (m, big_m) = match self.infinity {
            InfinityBranch::Linear { m, big_m } | InfinityBranch::Power { m, big_m, .. } => (m, big_m),
        };
        for i in 0..n {
            let s = -s_max + 2.0 * s_max * i as f64 / (n - 1) as f64;
            let g = eval_g(self, s);
            if g < prev {
                return Err(format!("g decreases near s = {s}"));
            }
            prev = g;
            if s != 0.0 && g * s < 0.0 {
                return Err(format!("g(s)s < 0 at s = {s}"));
            }
            if s.abs() > 1.0 {
                let p = s.abs().powf(r + 1.0);
                let tol = 1e-12 * p;
                if g * s < m * p - tol || g * s > big_m * p + tol {
                    return Err(format!("growth bound at infinity fails at s = {s}"));
                }
            }
        }
        let below = self.g_abs(1.0);
        let above = self.g_abs(1.0 + 1e-12);
        if (above - below).abs() > 1e-9 * below.max(1.0) {
            return Err("branches disagree at |s| = 1".into());
        }
        Ok(())
    }
}

fn origin_abs(origin: &OriginBranch, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    match *origin {
        OriginBranch::Linear { m0, big_m0 } => 0.5 * (m0 + big_m0) * x,
        OriginBranch::Power { exponent, m0, big_m0 } => 0.5 * (m0 + big_m0) * x.powf(exponent),
        OriginBranch::ExpCubic => x.powi(3) * (-1.0 / (x * x)).exp(),
        OriginBranch::ExpAbs => x * x * (-1.0 / x).exp(),
    }
}

/// Evaluates `g(s)` with the odd extension `g(−s) = −g(s)`.
pub fn eval_g(spec: &FeedbackSpec, s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let v = spec.g_abs(s.abs());
    if s > 0.0 {
        v
    } else {
        -v
    }
}

/// Derivative `g'(s)`; even in `s`. At `|s| = 1` the origin branch is used.
pub fn eval_g_prime(spec: &FeedbackSpec, s: f64) -> f64 {
    let x = s.abs();
    if x <= 1.0 {
        match spec.origin {
            OriginBranch::Linear { .. } => origin_abs(&spec.origin, 1.0),
            OriginBranch::Power { exponent, m0, big_m0 } => {
                if x == 0.0 {
                    if exponent < 1.0 {
                        f64::INFINITY
                    } else if exponent == 1.0 {
                        0.5 * (m0 + big_m0)
                    } else {
                        0.0
                    }
                } else {
                    0.5 * (m0 + big_m0) * exponent * x.powf(exponent - 1.0)
                }
            }
            OriginBranch::ExpCubic if x == 0.0 => 0.0,
            OriginBranch::ExpCubic => (3.0 * x * x + 2.0) * (-1.0 / (x * x)).exp(),
            OriginBranch::ExpAbs if x == 0.0 => 0.0,
            OriginBranch::ExpAbs => (2.0 * x + 1.0) * (-1.0 / x).exp(),
        }
    } else {
        let r = order_at_infinity(spec);
        spec.infinity_coeff * r * x.powf(r - 1.0)
    }
}

/// The exponent `r` with `g(s)s ∼ |s|^{r+1}` for `|s| ≥ 1`.
pub fn order_at_infinity(spec: &FeedbackSpec) -> f64 {
    match spec.infinity {
        InfinityBranch::Linear { .. } => 1.0,
        InfinityBranch::Power { r, .. } => r,
    }
}

/// Knobs for [`build_h0_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H0Options {
    /// Upper end of the interval on which `x ↦ √x·g(√x)` is inverted; `0 < δ ≤ 1`.
    pub delta: f64,
    /// Minimum multiplier applied to the inverse.
    pub safety: f64,
    /// Verification grid size.
    pub verify_points: usize,
}

impl Default for H0Options {
    fn default() -> Self {
        H0Options { delta: 1.0, safety: 2.0, verify_points: 10_001 }
    }
}

pub fn build_h0(spec: &FeedbackSpec) -> Result<MonotoneFn, FeedbackError> {
    build_h0_with(spec, &H0Options::default())
}

/// Builds a concave, strictly increasing `h₀` and grid-verifies it.
///
/// * linear origin: `(M₀ + 1/m₀)·x`
/// * power origin with exponent `θ < 1`: `c·x^{2θ/(1+θ)}`, `c = 2(M₀²+1)/m₀^{2θ/(1+θ)}`
/// * power origin with exponent `> 1`, and the two exponential laws: `λ·φ⁻¹` with
///   `φ(x) = √x·g(√x)` on `[0, δ]`, continued affinely with the end slope. `λ` is the
///   larger of the safety factor and `1 + sup g(s)²/s²`.
pub fn build_h0_with(spec: &FeedbackSpec, opts: &H0Options) -> Result<MonotoneFn, FeedbackError> {
    if !(opts.delta > 0.0 && opts.delta <= 1.0) {
        return Err(FeedbackError::InvalidSpec(format!("delta must lie in (0, 1], got {}", opts.delta)));
    }
    let h0 = match spec.origin {
        OriginBranch::Linear { m0, big_m0 } => MonotoneFn::linear(big_m0 + 1.0 / m0),
        OriginBranch::Power { exponent, m0, big_m0 } if exponent == 1.0 => MonotoneFn::linear(big_m0 + 1.0 / m0),
        OriginBranch::Power { exponent, m0, big_m0 } if exponent < 1.0 => {
            let e = 2.0 * exponent / (1.0 + exponent);
            let c = 2.0 * (big_m0 * big_m0 + 1.0) / m0.powf(e);
            MonotoneFn::power(c, e)
        }
        origin => inverse_construction(spec, origin, opts),
    };
    let violation = verify_h0(spec, &h0, opts.verify_points);
    if violation > 1e-12 {
        return Err(FeedbackError::ConstructionFailed { violation });
    }
    Ok(h0)
}

fn inverse_construction(spec: &FeedbackSpec, origin: OriginBranch, opts: &H0Options) -> MonotoneFn {
    let delta = opts.delta;
    // sup of g(s)^2 / s^2 over (0, 1]
    let n = 10_000;
    let ratio = (1..=n)
        .map(|i| {
            let s = i as f64 / n as f64;
            let g = eval_g(spec, s);
            g * g / (s * s)
        })
        .fold(0.0_f64, f64::max);
    let scale = opts.safety.max((1.0 + ratio) * (1.0 + 1e-9));

    let phi = move |x: f64| {
        let r = x.sqrt();
        r * origin_abs(&origin, r)
    };
    let dphi = move |x: f64| -> f64 {
        match origin {
            OriginBranch::Power { exponent, m0, big_m0 } => {
                0.5 * (m0 + big_m0) * 0.5 * (exponent + 1.0) * x.powf(0.5 * (exponent - 1.0))
            }
            OriginBranch::ExpCubic => (2.0 * x + 1.0) * (-1.0 / x).exp(),
            OriginBranch::ExpAbs => {
                let r = x.sqrt();
                0.5 * (3.0 * r + 1.0) * (-1.0 / r).exp()
            }
            OriginBranch::Linear { .. } => unreachable!("linear origin has a closed-form h0"),
        }
    };
    let y_delta = phi(delta);
    let end_slope = 1.0 / dphi(delta);
    let phi_inv = move |y: f64| -> f64 {
        match origin {
            OriginBranch::Power { exponent, m0, big_m0 } => (y / (0.5 * (m0 + big_m0))).powf(2.0 / (exponent + 1.0)),
            _ => bisect_increasing(phi, y, 0.0, delta),
        }
    };
    let forward = move |y: f64| {
        if y <= y_delta {
            scale * phi_inv(y)
        } else {
            scale * (delta + (y - y_delta) * end_slope)
        }
    };
    let inverse = move |x: f64| {
        let w = x / scale;
        if w <= delta {
            phi(w)
        } else {
            y_delta + (w - delta) / end_slope
        }
    };
    MonotoneFn::from_fn_pair(forward, inverse, DEFAULT_X_MAX, true)
}

/// Maximum of `s² + g(s)² − h₀(g(s)s)` over `n` uniform samples of `[−1, 1]`.
/// A value `≤ 0` certifies the defining inequality of `h₀` on the grid.
///
/// Samples with `s ≠ 0` whose `g(s)s` underflows below the smallest normal
/// double are skipped: the exponential laws vanish to all orders at the origin
/// and the inequality is not representable there.
pub fn verify_h0(spec: &FeedbackSpec, h0: &MonotoneFn, n: usize) -> f64 {
    assert!(n >= 2, "verify_h0 needs at least two samples");
    (0..n)
        .filter_map(|i| {
            let s = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            let g = eval_g(spec, s);
            let gs = g * s;
            if s != 0.0 && gs < f64::MIN_POSITIVE {
                return None;
            }
            Some(s * s + g * g - h0.eval(gs))
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
