//! Closed-form decay bounds for the standard feedback families.

use std::fmt;
use std::str::FromStr;

use super::{EnvelopeCurve, EnvelopeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExampleId {
    /// Linearly bounded at the origin: exponential decay.
    ExpOrigin,
    /// `s^p`, `p > 1`, at the origin: polynomial decay.
    PolyOrigin,
    /// `s^θ`, `θ < 1`, at the origin: polynomial decay.
    SublinOrigin,
    /// `s³·exp(−1/s²)` at the origin: logarithmic decay.
    ExpCubic,
    /// `s·|s|·exp(−1/|s|)` at the origin: squared-logarithmic decay.
    ExpAbs,
    /// Linear at the origin, order `θ < 1` at infinity.
    SublinInfinity,
    /// Linear at the origin, order `r > 1` at infinity.
    SuperlinInfinity,
}

impl ExampleId {
    pub const ALL: [ExampleId; 7] = [
        ExampleId::ExpOrigin,
        ExampleId::PolyOrigin,
        ExampleId::SublinOrigin,
        ExampleId::ExpCubic,
        ExampleId::ExpAbs,
        ExampleId::SublinInfinity,
        ExampleId::SuperlinInfinity,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExampleId::ExpOrigin => "exp_origin",
            ExampleId::PolyOrigin => "poly_origin",
            ExampleId::SublinOrigin => "sublin_origin",
            ExampleId::ExpCubic => "exp_cubic",
            ExampleId::ExpAbs => "exp_abs",
            ExampleId::SublinInfinity => "sublin_infinity",
            ExampleId::SuperlinInfinity => "superlin_infinity",
        }
    }

    /// Whether the family is linearly bounded at infinity.
    pub fn linearly_bounded_at_infinity(&self) -> bool {
        !matches!(self, ExampleId::SublinInfinity | ExampleId::SuperlinInfinity)
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExampleId {
    type Err = EnvelopeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExampleId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| EnvelopeError::UnknownExample(s.to_string()))
    }
}

/// Constants for the closed forms. `e0` and `t0` are always required; the
/// others only by the families that use them.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClosedFormParams {
    pub e0: f64,
    /// `T₀` for the origin families, `t₀` for the two at-infinity families.
    pub t0: f64,
    pub ctilde: Option<f64>,
    pub p: Option<f64>,
    pub theta: Option<f64>,
    pub r: Option<f64>,
    pub p0: Option<f64>,
    pub alpha: Option<f64>,
}

/// `C̃ = K⁻¹·meas Q_T / (meas Q_T·(2 + K⁻¹) + M₀ + m₀⁻¹)`.
pub fn exp_origin_rate(k: f64, meas_qt: f64, m0: f64, big_m0: f64) -> f64 {
    let kinv = 1.0 / k;
    kinv * meas_qt / (meas_qt * (2.0 + kinv) + big_m0 + 1.0 / m0)
}

fn need(v: Option<f64>, name: &str) -> Result<f64, EnvelopeError> {
    match v {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(EnvelopeError::InvalidParams(format!("missing parameter {name}"))),
    }
}

fn check(cond: bool, msg: &str) -> Result<(), EnvelopeError> {
    if cond {
        Ok(())
    } else {
        Err(EnvelopeError::InvalidParams(msg.to_string()))
    }
}

/// Evaluates the decay bound of `id` at time `t ≥ t0`.
pub fn closed_form(id: ExampleId, params: &ClosedFormParams, t: f64) -> Result<f64, EnvelopeError> {
    let e0 = params.e0;
    check(e0 >= 0.0 && e0.is_finite(), "E0 >= 0")?;
    check(params.t0 > 0.0, "T0 > 0")?;
    let tau = t / params.t0 - 1.0;
    check(tau >= -1e-12, "t must not precede T0")?;
    let tau = tau.max(0.0);
    let value = match id {
        ExampleId::ExpOrigin => {
            let c = need(params.ctilde, "ctilde")?;
            e0 * (-c * tau).exp()
        }
        ExampleId::PolyOrigin => {
            let c = need(params.ctilde, "ctilde")?;
            let p = need(params.p, "p")?;
            check(p > 1.0, "p > 1")?;
            (e0.powf((1.0 - p) / 2.0) + (p - 1.0) * c / 2.0 * tau).powf(-2.0 / (p - 1.0))
        }
        ExampleId::SublinOrigin => {
            let c = need(params.ctilde, "ctilde")?;
            let th = need(params.theta, "theta")?;
            check(th > 0.0 && th < 1.0, "theta in (0,1)")?;
            let base = (1.0 - th) / (2.0 * th) * (c / 2.0) * tau + e0.powf((th - 1.0) / (2.0 * th));
            base.powf(-2.0 * th / (1.0 - th))
        }
        ExampleId::ExpCubic => {
            let c = need(params.ctilde, "ctilde")?;
            check(c > 0.0 && e0 > 0.0, "ctilde > 0 and E0 > 0")?;
            // ln(c·tau + e^a) = a + ln(1 + c·tau·e^{-a})
            let a = 1.0 / (c * e0);
            let log = a + (c * tau * (-a).exp()).ln_1p();
            1.0 / (c * log)
        }
        ExampleId::ExpAbs => {
            let c = need(params.ctilde, "ctilde")?;
            check(c > 0.0 && e0 > 0.0, "ctilde > 0 and E0 > 0")?;
            let b = 1.0 / (c * e0).sqrt();
            let log = b + (0.5 * c * tau * (-b).exp()).ln_1p();
            1.0 / (c * log * log)
        }
        ExampleId::SublinInfinity => {
            let th = need(params.theta, "theta")?;
            let p0 = need(params.p0, "p0")?;
            let alpha = need(params.alpha, "alpha")?;
            check(th > 0.0 && th < 1.0, "theta in (0,1)")?;
            check(p0 > 2.0, "p0 > 2")?;
            check(alpha > 0.0, "alpha > 0")?;
            let rho = (p0 - th - 1.0) / (p0 - 2.0);
            (e0.powf(1.0 - rho) + alpha.powf(rho) * (rho - 1.0) * tau).powf(-(p0 - 2.0) / (1.0 - th))
        }
        ExampleId::SuperlinInfinity => {
            let r = need(params.r, "r")?;
            let p0 = need(params.p0, "p0")?;
            let alpha = need(params.alpha, "alpha")?;
            check(r > 1.0, "r > 1")?;
            check(p0 > 2.0 * r, "p0 > 2r")?;
            check(alpha > 0.0, "alpha > 0")?;
            let rho = (p0 - r - 1.0) / (p0 - 2.0 * r);
            let rate = (r - 1.0) / (p0 - 2.0 * r);
            (e0.powf(1.0 - rho) + alpha.powf(rho) * rate * tau).powf(-(p0 - 2.0 * r) / (r - 1.0))
        }
    };
    Ok(value)
}

/// Maximum relative deviation between an envelope solved in shifted time
/// `τ = t/t0 − 1` and the closed form of `id`.
pub fn match_closed_form(
    curve: &EnvelopeCurve,
    id: ExampleId,
    params: &ClosedFormParams,
) -> Result<f64, EnvelopeError> {
    let mut worst = 0.0_f64;
    for (&tau, &s) in curve.t.iter().zip(&curve.s) {
        let c = closed_form(id, params, params.t0 * (tau + 1.0))?;
        let dev = if c != 0.0 { ((s - c) / c).abs() } else { s.abs() };
        worst = worst.max(dev);
    }
    Ok(worst)
}
