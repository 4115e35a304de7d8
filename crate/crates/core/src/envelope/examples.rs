//! Ready-made envelope problems for the seven standard feedback families.

use crate::feedback::{
    bisect_increasing, build_h0, FeedbackSpec, InfinityBranch, MonotoneFn, OriginBranch, DEFAULT_X_MAX,
};

use super::{
    build_h, build_h1, build_q, closed_form::exp_origin_rate, match_closed_form, solve_envelope, solve_simplified,
    ClosedFormParams, EnvelopeCurve, EnvelopeError, ExampleId,
};

/// Parameters shared by the example problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleSettings {
    pub e0: f64,
    pub t0: f64,
    pub k: f64,
    pub gamma: f64,
    pub meas_qt: f64,
    pub m0: f64,
    pub big_m0: f64,
    /// Origin exponent for `poly_origin`.
    pub p: f64,
    /// Origin exponent for `sublin_origin`.
    pub theta: f64,
    /// Order at infinity for `sublin_infinity`.
    pub r_sub: f64,
    /// Order at infinity for `superlin_infinity`.
    pub r_super: f64,
    pub p0: f64,
    /// Horizon in shifted time `τ = t/T₀ − 1`.
    pub tau_max: f64,
    pub dt: f64,
}

impl Default for ExampleSettings {
    fn default() -> Self {
        ExampleSettings {
            e0: 1.0,
            t0: 1.0,
            k: 1.0,
            gamma: 0.5,
            meas_qt: 1.0,
            m0: 1.0,
            big_m0: 1.0,
            p: 3.0,
            theta: 0.5,
            r_sub: 0.5,
            r_super: 2.0,
            p0: 8.0,
            tau_max: 19.0,
            dt: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExampleRun {
    pub id: ExampleId,
    /// Envelope in shifted time `τ`.
    pub curve: EnvelopeCurve,
    pub params: ClosedFormParams,
    /// Largest relative deviation from the closed form over the curve.
    pub max_rel_err: f64,
}

/// `h_b = φ⁻¹` for `φ(x) = √x·g(√x)`, keeping `φ` as the exact inverse.
fn inverse_of(phi: fn(f64) -> f64) -> MonotoneFn {
    MonotoneFn::from_fn_pair(move |y| bisect_increasing(phi, y, 0.0, DEFAULT_X_MAX), phi, DEFAULT_X_MAX, false)
}

fn exp_cubic_phi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x * (-1.0 / x).exp()
    }
}

fn exp_abs_phi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.sqrt() * (-1.0 / x.sqrt()).exp()
    }
}

/// Short description of the feedback family.
pub fn feedback_label(id: ExampleId) -> &'static str {
    match id {
        ExampleId::ExpOrigin => "g(s)=s near 0",
        ExampleId::PolyOrigin => "g(s)=s^p (p>1) near 0",
        ExampleId::SublinOrigin => "g(s)=s^theta (theta<1) near 0",
        ExampleId::ExpCubic => "g(s)=s^3 exp(-1/s^2) near 0",
        ExampleId::ExpAbs => "g(s)=s|s| exp(-1/|s|) near 0",
        ExampleId::SublinInfinity => "g(s)=s^theta (theta<1) for |s|>1",
        ExampleId::SuperlinInfinity => "g(s)=s^r (r>1) for |s|>1",
    }
}

/// The envelope ODE of the family, `S_t + y = 0`.
pub fn ode_label(id: ExampleId) -> &'static str {
    match id {
        ExampleId::ExpOrigin => "S_t+C*S=0",
        ExampleId::PolyOrigin => "S_t+C*S^((p+1)/2)=0",
        ExampleId::SublinOrigin => "S_t+C*S^((theta+1)/(2theta))=0",
        ExampleId::ExpCubic => "S_t+C^2*S^2*exp(-1/(C*S))=0",
        ExampleId::ExpAbs => "S_t+(C*S)^(3/2)*exp(-1/sqrt(C*S))=0",
        ExampleId::SublinInfinity => "S_t+(a*S)^((p0-theta-1)/(p0-2))=0",
        ExampleId::SuperlinInfinity => "S_t+(a*S)^((p0-r-1)/(p0-2r))=0",
    }
}

/// Shape of the closed-form bound.
pub fn decay_law_label(id: ExampleId) -> &'static str {
    match id {
        ExampleId::ExpOrigin => "exponential",
        ExampleId::PolyOrigin => "polynomial t^(-2/(p-1))",
        ExampleId::SublinOrigin => "polynomial t^(-2theta/(1-theta))",
        ExampleId::ExpCubic => "logarithmic 1/ln(t)",
        ExampleId::ExpAbs => "logarithmic 1/ln^2(t)",
        ExampleId::SublinInfinity => "polynomial t^(-(p0-2)/(1-theta))",
        ExampleId::SuperlinInfinity => "polynomial t^(-(p0-2r)/(r-1))",
    }
}

/// Solves the envelope of `id` and compares it with its closed form.
///
/// `exp_origin` goes through the full `h₀ → h → q` pipeline; the other families
/// use the simplified equation `S' = −h_b⁻¹(γK⁻¹S)` with the dominant part `h_b`
/// of `h`. For `sublin_origin` the closed form is evaluated with twice the ODE
/// rate: the printed bound `[((1−θ)/2θ)(C̃/2)τ + E₀^{(θ−1)/2θ}]^{−2θ/(1−θ)}`
/// solves the ODE with rate `C̃/2`.
pub fn run_example(id: ExampleId, st: &ExampleSettings) -> Result<ExampleRun, EnvelopeError> {
    let mut params = ClosedFormParams { e0: st.e0, t0: st.t0, ..Default::default() };
    let alpha = st.gamma / st.k;
    let curve = match id {
        ExampleId::ExpOrigin => {
            let spec = FeedbackSpec::new(
                OriginBranch::Linear { m0: st.m0, big_m0: st.big_m0 },
                InfinityBranch::Linear { m: st.m0, big_m: st.big_m0 },
            )
            .map_err(|e| EnvelopeError::InvalidParams(e.to_string()))?;
            let h0 = build_h0(&spec).map_err(|e| EnvelopeError::InvalidParams(e.to_string()))?;
            let h = build_h(&h0, &build_h1(1.0, st.p0)?, st.meas_qt)?;
            let q = build_q(&h, st.k)?;
            params.ctilde = Some(exp_origin_rate(st.k, st.meas_qt, st.m0, st.big_m0));
            solve_envelope(&q, st.e0, st.tau_max, st.dt)?
        }
        ExampleId::PolyOrigin => {
            let p = st.p;
            let h_b = MonotoneFn::power(1.0, 2.0 / (p + 1.0));
            params.p = Some(p);
            params.ctilde = Some(alpha.powf((p + 1.0) / 2.0));
            solve_simplified(&h_b, st.gamma, st.k, st.e0, st.tau_max, st.dt)?
        }
        ExampleId::SublinOrigin => {
            let th = st.theta;
            let spec = FeedbackSpec::new(
                OriginBranch::Power { exponent: th, m0: st.m0, big_m0: st.big_m0 },
                InfinityBranch::Linear { m: st.m0, big_m: st.big_m0 },
            )
            .map_err(|e| EnvelopeError::InvalidParams(e.to_string()))?;
            let h_b = build_h0(&spec).map_err(|e| EnvelopeError::InvalidParams(e.to_string()))?;
            let (c, _) = h_b.power_law().ok_or_else(|| EnvelopeError::InvalidParams("h0 is not a power law".into()))?;
            params.theta = Some(th);
            params.ctilde = Some(2.0 * (alpha / c).powf((1.0 + th) / (2.0 * th)));
            solve_simplified(&h_b, st.gamma, st.k, st.e0, st.tau_max, st.dt)?
        }
        ExampleId::ExpCubic | ExampleId::ExpAbs => {
            let phi = if id == ExampleId::ExpCubic { exp_cubic_phi } else { exp_abs_phi };
            params.ctilde = Some(alpha);
            solve_simplified(&inverse_of(phi), st.gamma, st.k, st.e0, st.tau_max, st.dt)?
        }
        ExampleId::SublinInfinity | ExampleId::SuperlinInfinity => {
            let r = if id == ExampleId::SublinInfinity { st.r_sub } else { st.r_super };
            let h_b = build_h1(r, st.p0)?;
            if id == ExampleId::SublinInfinity {
                params.theta = Some(r);
            } else {
                params.r = Some(r);
            }
            params.p0 = Some(st.p0);
            params.alpha = Some(alpha);
            solve_simplified(&h_b, st.gamma, st.k, st.e0, st.tau_max, st.dt)?
        }
    };
    let max_rel_err = match_closed_form(&curve, id, &params)?;
    Ok(ExampleRun { id, curve, params, max_rel_err })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_examples_match() {
        let st = ExampleSettings { tau_max: 4.0, ..Default::default() };
        for id in ExampleId::ALL {
            let run = run_example(id, &st).unwrap();
            assert!(run.max_rel_err < 1e-6, "{id}: {}", run.max_rel_err);
        }
    }

    #[test]
    fn phi_inverse_roundtrip() {
        let h_b = inverse_of(exp_abs_phi);
        for y in [1e-6, 0.01, 0.5, 3.0] {
            let x = h_b.eval(y);
            assert!((exp_abs_phi(x) - y).abs() < 1e-12 * y.max(1e-3));
        }
    }
}
