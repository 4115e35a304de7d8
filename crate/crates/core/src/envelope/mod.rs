//! Decay-envelope calculus for the damped wave equation.
//!
//! From `h₀` (degeneracy of the damping at the origin) and `h₁` (growth at
//! infinity) we build `h = h₁ + h₀(·/meas Q_T)` and the nonlinearity
//! `q = I − (I + (I+h)⁻¹∘(K⁻¹·))⁻¹` of the envelope ODE `S' + q(S) = 0`.
//! The energy then satisfies `E(t) ≤ S(t/T₀ − 1)` for `t ≥ T₀`.

mod closed_form;
mod examples;

pub use closed_form::{closed_form, exp_origin_rate, match_closed_form, ClosedFormParams, ExampleId};
pub use examples::{decay_law_label, feedback_label, ode_label, run_example, ExampleRun, ExampleSettings};

use thiserror::Error;

use crate::feedback::{bisect_increasing, GrowthClass, MonotoneError, MonotoneFn, DEFAULT_X_MAX};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvelopeError {
    #[error("invalid exponents: {0}")]
    InvalidExponents(String),
    #[error("D0 is required when the order at infinity differs from 1")]
    MissingD0,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("RK4 stage went negative (S = {stage:e}); reduce dt")]
    StepTooLarge { stage: f64 },
    #[error("unknown closed-form example '{0}'")]
    UnknownExample(String),
    #[error("invalid closed-form parameters: {0}")]
    InvalidParams(String),
    #[error("h_s is not o(h_b) at the origin: {0}")]
    InvalidSplit(String),
    #[error(transparent)]
    Monotone(#[from] MonotoneError),
}

/// Inputs of the envelope construction.
#[derive(Debug, Clone)]
pub struct DecayProblem {
    pub h0: MonotoneFn,
    /// Order of the feedback at infinity.
    pub r: f64,
    /// Integrability exponent of the velocity.
    pub p0: f64,
    /// Velocity-norm bound; only used when `r != 1`.
    pub d0: Option<f64>,
    pub meas_qt: f64,
    /// Observability constant `C(T, a, meas Q_T)`.
    pub c_obs: f64,
    pub gamma: f64,
    pub e0: f64,
    pub t0: f64,
}

impl DecayProblem {
    pub fn validate(&self) -> Result<(), EnvelopeError> {
        let bad = |m: &str| Err(EnvelopeError::InvalidParameter(m.to_string()));
        if self.r < 1.0 && !(self.p0 > 2.0) {
            return Err(EnvelopeError::InvalidExponents(format!(
                "sublinear order r = {} needs p0 > 2, got {}",
                self.r, self.p0
            )));
        }
        if self.r > 1.0 && !(self.p0 > 2.0 * self.r) {
            return Err(EnvelopeError::InvalidExponents(format!(
                "superlinear order r = {} needs p0 > 2r, got {}",
                self.r, self.p0
            )));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma in (0,1)");
        }
        if !(self.meas_qt > 0.0) {
            return bad("measQT > 0");
        }
        if !(self.c_obs > 0.0) {
            return bad("C_obs > 0");
        }
        if !(self.e0 >= 0.0) {
            return bad("E0 >= 0");
        }
        if !(self.t0 > 0.0) {
            return bad("T0 > 0");
        }
        if self.r != 1.0 && !self.d0.is_some_and(|d| d > 0.0) {
            return Err(EnvelopeError::MissingD0);
        }
        Ok(())
    }

    pub fn growth_class(&self) -> GrowthClass {
        GrowthClass::from_order(self.r)
    }

    pub fn k_constant(&self) -> Result<f64, EnvelopeError> {
        k_constant(self.growth_class(), self.c_obs, self.d0, self.r, self.p0)
    }

    /// `h = h₁ + h₀(·/meas Q_T)` for this problem.
    pub fn h(&self) -> Result<MonotoneFn, EnvelopeError> {
        let h1 = build_h1(self.r, self.p0)?;
        build_h(&self.h0, &h1, self.meas_qt)
    }

    /// `q` with `K` from [`k_constant`].
    pub fn q(&self) -> Result<MonotoneFn, EnvelopeError> {
        build_q(&self.h()?, self.k_constant()?)
    }
}

/// Sampled envelope `S(t)` with `t` in units of the control time.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeCurve {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
}

impl EnvelopeCurve {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// `S` at the sample nearest to `t`.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        if self.t.is_empty() {
            return None;
        }
        let i = self.t.partition_point(|&ti| ti < t).min(self.t.len() - 1);
        let j = if i > 0 && (self.t[i - 1] - t).abs() < (self.t[i] - t).abs() { i - 1 } else { i };
        Some(self.s[j])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceResult {
    pub s: Vec<f64>,
}

/// `h₁` from the order at infinity:
/// `r < 1 → s^{(p₀−2)/(p₀−r−1)}`, `r > 1 → s^{(p₀−2r)/(p₀−r−1)}`, `r = 1 → s`.
pub fn build_h1(r: f64, p0: f64) -> Result<MonotoneFn, EnvelopeError> {
    if !(r > 0.0) {
        return Err(EnvelopeError::InvalidExponents(format!("order r must be positive, got {r}")));
    }
    if r == 1.0 {
        return Ok(MonotoneFn::identity());
    }
    let exponent = if r < 1.0 {
        if !(p0 > 2.0) {
            return Err(EnvelopeError::InvalidExponents(format!("r = {r} < 1 needs p0 > 2, got {p0}")));
        }
        (p0 - 2.0) / (p0 - r - 1.0)
    } else {
        if !(p0 > 2.0 * r) {
            return Err(EnvelopeError::InvalidExponents(format!("r = {r} > 1 needs p0 > 2r, got {p0}")));
        }
        (p0 - 2.0 * r) / (p0 - r - 1.0)
    };
    Ok(MonotoneFn::power(1.0, exponent))
}

/// `h(x) = h₁(x) + h₀(x / meas Q_T)`.
pub fn build_h(h0: &MonotoneFn, h1: &MonotoneFn, meas_qt: f64) -> Result<MonotoneFn, EnvelopeError> {
    if !(meas_qt > 0.0) {
        return Err(EnvelopeError::InvalidParameter("measQT > 0".into()));
    }
    let x_max = h1.x_max().min(h0.x_max() * meas_qt);
    if let (Some(a), Some(b)) = (h0.linear_slope(), h1.linear_slope()) {
        return Ok(MonotoneFn::linear(b + a / meas_qt).with_x_max(x_max));
    }
    let (h0, h1) = (h0.clone(), h1.clone());
    let concave = h0.is_concave() && h1.is_concave();
    Ok(MonotoneFn::from_fn(move |x| h1.eval(x) + h0.eval(x / meas_qt), x_max, concave))
}

/// The constant `K` for each growth class at infinity. The sublinear exponent is
/// `p₀(1−r)/(p₀−r−1)`.
pub fn k_constant(class: GrowthClass, c_obs: f64, d0: Option<f64>, r: f64, p0: f64) -> Result<f64, EnvelopeError> {
    if !(c_obs > 0.0) {
        return Err(EnvelopeError::InvalidParameter("C_obs > 0".into()));
    }
    let d0 = match class {
        GrowthClass::Linear => return Ok(c_obs),
        _ => match d0 {
            Some(d) if d > 0.0 => d,
            _ => return Err(EnvelopeError::MissingD0),
        },
    };
    let exponent = match class {
        GrowthClass::Superlinear => p0 * (r - 1.0) / (p0 - r - 1.0),
        GrowthClass::Sublinear => p0 * (1.0 - r) / (p0 - r - 1.0),
        GrowthClass::Linear => unreachable!(),
    };
    Ok(c_obs * d0.powf(exponent))
}

/// `q = I − (I + ℓ)⁻¹` with `ℓ = (I+h)⁻¹∘(K⁻¹·)`.
///
/// Substituting `x = (K+1)w + K·h(w)` shows `q(x) = w`, so `q` is the single
/// inverse `((K+1)I + K·h)⁻¹`. Linear `h` gives a linear `q`; otherwise each
/// evaluation is one bisection on `[0, x/(K+1)]`.
pub fn build_q(h: &MonotoneFn, k: f64) -> Result<MonotoneFn, EnvelopeError> {
    if !(k > 0.0) {
        return Err(EnvelopeError::InvalidParameter(format!("K must be positive, got {k}")));
    }
    let x_max = (k + 1.0) * h.x_max() + k * h.eval(h.x_max());
    if let Some(beta) = h.linear_slope() {
        return Ok(MonotoneFn::linear(1.0 / (k + 1.0 + k * beta)).with_x_max(x_max));
    }
    let fwd = h.clone();
    let inv = h.clone();
    Ok(MonotoneFn::from_fn_pair(
        move |x| bisect_increasing(|w| (k + 1.0) * w + k * fwd.eval(w), x, 0.0, x / (k + 1.0)),
        move |w| (k + 1.0) * w + k * inv.eval(w),
        x_max,
        false,
    ))
}

/// Tolerance below zero tolerated for an RK4 stage before it is an error.
const STAGE_TOL: f64 = 1e-12;

fn rk4_decay<F>(rate: F, e0: f64, t_max: f64, dt: f64) -> Result<EnvelopeCurve, EnvelopeError>
where
    F: Fn(f64) -> Result<f64, EnvelopeError>,
{
    if !(e0 >= 0.0) || !e0.is_finite() {
        return Err(EnvelopeError::InvalidParameter("E0 >= 0".into()));
    }
    if !(dt > 0.0) || !(t_max >= 0.0) {
        return Err(EnvelopeError::InvalidParameter("dt > 0 and t_max >= 0".into()));
    }
    let steps = (t_max / dt).round() as usize;
    let floor = -STAGE_TOL * e0.max(1e-300);
    let eval = |s: f64| -> Result<f64, EnvelopeError> {
        if s < floor {
            return Err(EnvelopeError::StepTooLarge { stage: s });
        }
        rate(s.max(0.0))
    };
    let mut t = Vec::with_capacity(steps + 1);
    let mut out = Vec::with_capacity(steps + 1);
    let mut s = e0;
    t.push(0.0);
    out.push(s);
    for i in 1..=steps {
        let k1 = -eval(s)?;
        let k2 = -eval(s + 0.5 * dt * k1)?;
        let k3 = -eval(s + 0.5 * dt * k2)?;
        let k4 = -eval(s + dt * k3)?;
        let next = s + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if next < floor {
            return Err(EnvelopeError::StepTooLarge { stage: next });
        }
        // clamp keeps the curve non-negative and non-increasing
        s = next.max(0.0).min(s);
        t.push(i as f64 * dt);
        out.push(s);
    }
    Ok(EnvelopeCurve { t, s: out })
}

/// Classical RK4 for `S' = −q(S)`, `S(0) = E₀`.
pub fn solve_envelope(q: &MonotoneFn, e0: f64, t_max: f64, dt: f64) -> Result<EnvelopeCurve, EnvelopeError> {
    rk4_decay(|s| Ok(q.eval(s)), e0, t_max, dt)
}

/// RK4 for the simplified envelope `S' = −h_b⁻¹(γK⁻¹S)`.
pub fn solve_simplified(
    h_b: &MonotoneFn,
    gamma: f64,
    k: f64,
    e0: f64,
    t_max: f64,
    dt: f64,
) -> Result<EnvelopeCurve, EnvelopeError> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(EnvelopeError::InvalidParameter("gamma in (0,1]".into()));
    }
    if !(k > 0.0) {
        return Err(EnvelopeError::InvalidParameter("K > 0".into()));
    }
    let c = gamma / k;
    rk4_decay(|s| Ok(h_b.inverse(c * s)?), e0, t_max, dt)
}

/// Checks `h_s(x)/h_b(x) → 0` on `x = 2^{−j}` and that `h_b(x)/x` is unbounded
/// as `x → 0⁺` (no upper linear bound).
pub fn validate_split(h_b: &MonotoneFn, h_s: &MonotoneFn) -> Result<(), EnvelopeError> {
    let ratios: Vec<f64> = (1..=60)
        .map(|j| {
            let x = 0.5f64.powi(j);
            h_s.eval(x) / h_b.eval(x)
        })
        .collect();
    let tail = &ratios[30..];
    if tail.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12)) {
        return Err(EnvelopeError::InvalidSplit("ratio h_s/h_b does not decrease".into()));
    }
    if !(ratios[59] < 0.1 * ratios[0]) {
        return Err(EnvelopeError::InvalidSplit(format!("ratio h_s/h_b stalls at {:e}", ratios[59])));
    }
    let slope_far = h_b.eval(0.5) / 0.5;
    let x = 0.5f64.powi(60);
    if !(h_b.eval(x) / x > 10.0 * slope_far) {
        return Err(EnvelopeError::InvalidSplit("h_b has an upper linear bound near 0".into()));
    }
    Ok(())
}

/// `q = I − (I+p)⁻¹`, the envelope nonlinearity matching the recursion
/// `s_{m+1} + p(s_{m+1}) = s_m`.
pub fn sequence_q(p: &MonotoneFn) -> MonotoneFn {
    let p = p.clone();
    MonotoneFn::from_fn(move |x| x - bisect_increasing(|z| z + p.eval(z), x, 0.0, x), DEFAULT_X_MAX, false)
}

/// Equality case of `s_{m+1} + p(s_{m+1}) ≤ s_m`, for `m = 0..=M`.
pub fn lasiecka_sequence(p: &MonotoneFn, s0: f64, m: usize) -> Result<SequenceResult, EnvelopeError> {
    if !(s0 >= 0.0) {
        return Err(EnvelopeError::InvalidParameter("s0 >= 0".into()));
    }
    let mut s = Vec::with_capacity(m + 1);
    s.push(s0);
    for i in 0..m {
        let prev = s[i];
        let next = if prev == 0.0 { 0.0 } else { bisect_increasing(|z| z + p.eval(z), prev, 0.0, prev) };
        s.push(next.min(prev));
    }
    Ok(SequenceResult { s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn h1_cases() {
        assert_eq!(build_h1(1.0, 3.0).unwrap().linear_slope(), Some(1.0));
        let (_, e) = build_h1(3.0, 8.0).unwrap().power_law().unwrap();
        assert_abs_diff_eq!(e, 0.5, epsilon = 1e-15);
        let (_, e) = build_h1(0.5, 4.0).unwrap().power_law().unwrap();
        assert_abs_diff_eq!(e, 0.8, epsilon = 1e-15);
        assert!(matches!(build_h1(3.0, 6.0), Err(EnvelopeError::InvalidExponents(_))));
        assert!(matches!(build_h1(0.5, 2.0), Err(EnvelopeError::InvalidExponents(_))));
    }

    #[test]
    fn h_compositions() {
        let id = MonotoneFn::identity();
        assert_abs_diff_eq!(build_h(&id, &id, 2.0).unwrap().eval(1.0), 1.5);
        let two = MonotoneFn::linear(2.0);
        assert_abs_diff_eq!(build_h(&two, &id, 1.0).unwrap().eval(1.0), 3.0);
        let h0 = MonotoneFn::power(4.0, 2.0 / 3.0);
        assert_abs_diff_eq!(build_h(&h0, &id, 1.0).unwrap().eval(8.0), 24.0, epsilon = 1e-12);
        assert!(build_h(&h0, &id, 0.0).is_err());
    }

    #[test]
    fn k_constants() {
        assert_eq!(k_constant(GrowthClass::Linear, 5.0, None, 1.0, 4.0).unwrap(), 5.0);
        let k = k_constant(GrowthClass::Superlinear, 1.0, Some(2.0), 3.0, 8.0).unwrap();
        assert_abs_diff_eq!(k, 16.0, epsilon = 1e-12);
        let k = k_constant(GrowthClass::Sublinear, 1.0, Some(4.0), 0.5, 4.0).unwrap();
        assert_abs_diff_eq!(k, 4f64.powf(0.8), epsilon = 1e-12);
        assert_abs_diff_eq!(k, 3.031, epsilon = 1e-3);
        assert_eq!(k_constant(GrowthClass::Superlinear, 1.0, None, 3.0, 8.0), Err(EnvelopeError::MissingD0));
    }

    #[test]
    fn q_of_identity_is_a_third() {
        let q = build_q(&MonotoneFn::identity(), 1.0).unwrap();
        for x in [0.0, 0.3, 1.0, 7.5] {
            assert_abs_diff_eq!(q.eval(x), x / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn q_nonlinear_fixes_origin() {
        let h = MonotoneFn::from_fn(f64::sqrt, 1e6, true);
        let q = build_q(&h, 2.0).unwrap();
        assert_eq!(q.eval(0.0), 0.0);
        assert!(q.eval(1.0) > 0.0 && q.eval(1.0) < 1.0);
    }

    #[test]
    fn envelope_linear_and_quadratic() {
        let q = MonotoneFn::linear(1.0 / 3.0);
        let c = solve_envelope(&q, 1.0, 3.0, 1e-3).unwrap();
        assert_abs_diff_eq!(*c.s.last().unwrap(), (-1.0f64).exp(), epsilon = 1e-8);
        let q = MonotoneFn::power(1.0, 2.0);
        let c = solve_envelope(&q, 1.0, 4.0, 1e-3).unwrap();
        assert_abs_diff_eq!(*c.s.last().unwrap(), 0.2, epsilon = 1e-8);
        assert_eq!(c.s[0], 1.0);
    }

    #[test]
    fn step_too_large() {
        let q = MonotoneFn::linear(1.0 / 3.0);
        assert!(matches!(solve_envelope(&q, 1.0, 30.0, 10.0), Err(EnvelopeError::StepTooLarge { .. })));
    }

    #[test]
    fn simplified_examples() {
        let id = MonotoneFn::identity();
        let c = solve_simplified(&id, 1.0, 1.0, 1.0, 2.0, 1e-3).unwrap();
        assert_abs_diff_eq!(*c.s.last().unwrap(), (-2.0f64).exp(), epsilon = 1e-10);
        let c = solve_simplified(&id, 0.5, 2.0, 1.0, 4.0, 1e-3).unwrap();
        assert_abs_diff_eq!(*c.s.last().unwrap(), (-1.0f64).exp(), epsilon = 1e-10);
        // h_b = x^{1/2} (theta = 1/3), so S' = -(gamma S / K)^2
        let hb = MonotoneFn::power(1.0, 0.5);
        let (gamma, k) = (0.9, 1.5);
        let c = solve_simplified(&hb, gamma, k, 1.0, 5.0, 1e-3).unwrap();
        let exact = 1.0 / (1.0 + (gamma / k).powi(2) * 5.0);
        assert_abs_diff_eq!(*c.s.last().unwrap(), exact, epsilon = 1e-10);
    }

    #[test]
    fn sequence_examples() {
        let id = MonotoneFn::identity();
        let seq = lasiecka_sequence(&id, 1.0, 5).unwrap();
        for (m, v) in seq.s.iter().enumerate() {
            assert_abs_diff_eq!(*v, 0.5f64.powi(m as i32), epsilon = 1e-14);
        }
        let q = sequence_q(&id);
        assert_abs_diff_eq!(q.eval(1.0), 0.5, epsilon = 1e-14);
        for m in 0..=5 {
            assert!(0.5f64.powi(m) <= (-(m as f64) / 2.0).exp());
        }
        let zero = lasiecka_sequence(&id, 0.0, 4).unwrap();
        assert!(zero.s.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn split_validation() {
        let hb = MonotoneFn::power(1.0, 0.8);
        assert!(validate_split(&hb, &MonotoneFn::linear(3.0)).is_ok());
        assert!(validate_split(&MonotoneFn::identity(), &MonotoneFn::linear(3.0)).is_err());
        assert!(validate_split(&hb, &MonotoneFn::power(1.0, 0.5)).is_err());
    }

    #[test]
    fn problem_validation() {
        let base = DecayProblem {
            h0: MonotoneFn::linear(2.0),
            r: 1.0,
            p0: 4.0,
            d0: None,
            meas_qt: 1.0,
            c_obs: 1.0,
            gamma: 0.9,
            e0: 1.0,
            t0: 1.0,
        };
        base.validate().unwrap();
        assert!(DecayProblem { gamma: 1.5, ..base.clone() }.validate().is_err());
        assert!(matches!(
            DecayProblem { r: 3.0, p0: 5.0, d0: Some(1.0), ..base.clone() }.validate(),
            Err(EnvelopeError::InvalidExponents(_))
        ));
        assert_eq!(DecayProblem { r: 3.0, p0: 8.0, ..base.clone() }.validate(), Err(EnvelopeError::MissingD0));
        // h = 3x, q = x / (K(1+3) + 1) = x/5 for K = 1
        let q = base.q().unwrap();
        assert_abs_diff_eq!(q.eval(1.0), 0.2, epsilon = 1e-15);
    }
}
