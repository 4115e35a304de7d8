//! Diagnostics on simulated traces.

use std::fmt;
use std::str::FromStr;

use super::{SimError, Trace};

/// `(E(t₂) + ∫_{t₁}^{t₂}∫ a·g(u_t)·u_t − E(t₁)) / E(t₁)`.
pub fn energy_identity_residual(trace: &Trace, i1: usize, i2: usize) -> Result<f64, SimError> {
    if i1 >= i2 || i2 >= trace.len() {
        return Err(SimError::InvalidIndex { i1, i2 });
    }
    let e1 = trace.energy[i1];
    if !(e1 > 0.0) {
        return Err(SimError::ZeroDenominator { t: trace.times[i1] });
    }
    Ok((trace.energy[i2] + (trace.damping[i2] - trace.damping[i1]) - e1) / e1)
}

/// `E(0) / ∫₀ᵀ∫ a·(|u_t|² + |g(u_t)|²)`, an empirical lower bound for the
/// observability constant.
pub fn observability_quotient(trace: &Trace, t: f64) -> Result<f64, SimError> {
    let idx = trace.index_at(t).ok_or_else(|| SimError::InsufficientData(format!("trace ends before T = {t}")))?;
    let denom = trace.obs_num[idx];
    if !(denom > 0.0) {
        return Err(SimError::ZeroDenominator { t });
    }
    Ok(trace.energy[0] / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecayModel {
    /// `ln E = c − λt`; parameter is `λ`.
    Exponential,
    /// `ln E = c + β·ln t`; parameter is `β`.
    Power,
    /// `E = c + b/ln t`; parameter is `b`.
    Log,
    /// `E = c + b/ln² t`; parameter is `b`.
    Log2,
}

impl DecayModel {
    pub const ALL: [DecayModel; 4] = [DecayModel::Exponential, DecayModel::Power, DecayModel::Log, DecayModel::Log2];

    pub fn as_str(&self) -> &'static str {
        match self {
            DecayModel::Exponential => "exponential",
            DecayModel::Power => "power",
            DecayModel::Log => "log",
            DecayModel::Log2 => "log2",
        }
    }
}

impl fmt::Display for DecayModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecayModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DecayModel::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| format!("unknown decay model '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub model: DecayModel,
    pub parameter: f64,
    pub intercept: f64,
    pub r2: f64,
    pub samples: usize,
}

/// Least-squares fit of the transformed trace on samples with `t ≥ burn_in`.
pub fn fit_decay(trace: &Trace, model: DecayModel, burn_in: f64) -> Result<DecayFit, SimError> {
    fit_series(&trace.times, &trace.energy, model, burn_in)
}

/// [`fit_decay`] on bare `(t, E)` columns.
pub fn fit_series(times: &[f64], values: &[f64], model: DecayModel, burn_in: f64) -> Result<DecayFit, SimError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &e) in times.iter().zip(values) {
        if t < burn_in || !(e > 0.0) {
            continue;
        }
        let point = match model {
            DecayModel::Exponential => Some((t, e.ln())),
            DecayModel::Power => (t > 0.0).then(|| (t.ln(), e.ln())),
            DecayModel::Log => (t > 1.0).then(|| (1.0 / t.ln(), e)),
            DecayModel::Log2 => (t > 1.0).then(|| (1.0 / t.ln().powi(2), e)),
        };
        if let Some((x, y)) = point {
            xs.push(x);
            ys.push(y);
        }
    }
    if xs.len() < 10 {
        return Err(SimError::InsufficientData(format!("{} usable samples past t = {burn_in}, need 10", xs.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(SimError::InsufficientData("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).min(1.0) };
    let parameter = match model {
        DecayModel::Exponential => -slope,
        _ => slope,
    };
    Ok(DecayFit { model, parameter, intercept, r2, samples: xs.len() })
}
