//! TOML experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::envelope::ExampleId;
use crate::feedback::{FeedbackSpec, InfinityBranch, OriginBranch};
use crate::wavesim::{CollarSpec, Grid, InitialData, SimConfig, SourceSpec};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Envelope,
    Simulate,
    Raytrace,
    Verify,
    Reproduce,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Envelope => "envelope",
            Mode::Simulate => "simulate",
            Mode::Raytrace => "raytrace",
            Mode::Verify => "verify",
            Mode::Reproduce => "reproduce",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Mode::Envelope, Mode::Simulate, Mode::Raytrace, Mode::Verify, Mode::Reproduce]
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Option<Mode>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
    pub feedback: Option<FeedbackConfig>,
    pub envelope: Option<EnvelopeConfig>,
    pub simulate: Option<SimulateConfig>,
    pub source: Option<SourceConfig>,
    pub damping: Option<DampingConfig>,
    pub initial: Option<InitialConfig>,
    pub raytrace: Option<RaytraceConfig>,
    pub verify: Option<VerifyConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "yes")]
    pub plots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_out_dir(), plots: true }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OriginConfig {
    Linear {
        m0: f64,
        #[serde(rename = "M0")]
        big_m0: f64,
    },
    Power {
        exponent: f64,
        m0: f64,
        #[serde(rename = "M0")]
        big_m0: f64,
    },
    ExpCubic,
    ExpAbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InfinityConfig {
    Linear {
        m: f64,
        #[serde(rename = "M")]
        big_m: f64,
    },
    Power {
        r: f64,
        m: f64,
        #[serde(rename = "M")]
        big_m: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackConfig {
    pub origin: OriginConfig,
    pub infinity: InfinityConfig,
    /// Upper end of the interval where `h₀` is constructed.
    pub delta: Option<f64>,
}

/// Explicit `h₀` for envelope runs that do not start from a feedback law.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum H0Config {
    Linear { slope: f64 },
    Power { coeff: f64, exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    pub h0: Option<H0Config>,
    /// Order at infinity when no `[feedback]` section is given.
    pub r: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "C_obs")]
    pub c_obs: Option<f64>,
    #[serde(rename = "D0")]
    pub d0: Option<f64>,
    #[serde(default = "default_p0")]
    pub p0: f64,
    #[serde(rename = "measQT", default = "one")]
    pub meas_qt: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    #[serde(rename = "T0", default = "one")]
    pub t0: f64,
    /// Horizon in the envelope variable `τ = t/T₀ − 1`.
    #[serde(default = "default_tau_max")]
    pub t_max: f64,
    #[serde(default = "default_envelope_dt")]
    pub dt: f64,
    /// Closed-form families to solve and compare; all of them by default.
    pub examples: Option<Vec<String>>,
    #[serde(default = "default_golden_tol")]
    pub golden_tol: f64,
}

fn default_p0() -> f64 {
    8.0
}
fn one() -> f64 {
    1.0
}
fn default_gamma() -> f64 {
    0.5
}
fn default_tau_max() -> f64 {
    19.0
}
fn default_envelope_dt() -> f64 {
    1e-3
}
fn default_golden_tol() -> f64 {
    1e-5
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub extent: Vec<f64>,
    pub points: Vec<usize>,
    pub dt: f64,
    pub t_max: f64,
    #[serde(default = "one_usize")]
    pub sample_every: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Samples before this time are ignored by the decay fits; `t_max/4` by default.
    pub fit_burn_in: Option<f64>,
    /// Horizon of the observability quotient; `min(4, t_max)` by default.
    pub observability_time: Option<f64>,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
}

fn one_usize() -> usize {
    1
}
fn default_cfl() -> f64 {
    crate::wavesim::DEFAULT_CFL
}
fn default_residual_tol() -> f64 {
    1e-4
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub p: f64,
    /// Truncation level; untruncated when absent.
    pub k: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingConfig {
    pub width: f64,
    pub a0: f64,
    pub a_max: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Mode {
        amplitude: f64,
        #[serde(default = "one_usize")]
        kx: usize,
        #[serde(default = "one_usize")]
        ky: usize,
    },
    Gaussian {
        amplitude: f64,
        center: Vec<f64>,
        width: f64,
    },
    Random {
        amplitude: f64,
        modes: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MediumConfig {
    Constant {
        #[serde(default = "one")]
        rho: f64,
        /// Row-major stiffness matrix; identity when absent.
        k: Option<Vec<Vec<f64>>>,
    },
    Radial {
        #[serde(default = "default_curvature")]
        curvature: f64,
        center: Option<Vec<f64>>,
    },
    Anisotropic {
        #[serde(default = "one")]
        rho: f64,
        base: Vec<f64>,
        slope: Vec<f64>,
    },
}

fn default_curvature() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub x: Vec<f64>,
    pub dir: Vec<f64>,
    #[serde(default = "default_probe_s")]
    pub s_max: f64,
}

fn default_probe_s() -> f64 {
    5.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaytraceConfig {
    pub extent: Vec<f64>,
    pub medium: MediumConfig,
    pub collar_width: f64,
    #[serde(default = "default_n_pos")]
    pub n_pos: usize,
    #[serde(default = "default_n_dir")]
    pub n_dir: usize,
    #[serde(default = "default_ds")]
    pub ds: f64,
    #[serde(default = "default_ray_t_max")]
    pub t_max: f64,
    pub probe: Option<ProbeConfig>,
    #[serde(default = "default_drift_tol")]
    pub drift_tol: f64,
}

fn default_n_pos() -> usize {
    99
}
fn default_n_dir() -> usize {
    8
}
fn default_ds() -> f64 {
    1e-3
}
fn default_ray_t_max() -> f64 {
    10.0
}
fn default_drift_tol() -> f64 {
    1e-8
}

/// Sizes of the verify-mode checks; the defaults are the full acceptance sizes.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "yes")]
    pub decay_forms: bool,
    #[serde(default = "default_random_cases")]
    pub random_cases: usize,
}

fn default_random_cases() -> usize {
    20
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { decay_forms: true, random_cases: default_random_cases() }
    }
}

fn invalid(key: &str, constraint: impl Into<String>) -> CliError {
    CliError::Validation { key: key.to_string(), constraint: constraint.into() }
}

fn positive(key: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("{key} > 0")))
    }
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

impl ExperimentConfig {
    pub fn parse_str(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
            CliError::Parse { line, column, message: e.message().trim().to_string() }
        })?;
        Ok(cfg)
    }

    pub fn feedback_spec(&self) -> Result<Option<FeedbackSpec>, CliError> {
        let Some(fb) = self.feedback else { return Ok(None) };
        let origin = match fb.origin {
            OriginConfig::Linear { m0, big_m0 } => OriginBranch::Linear { m0, big_m0 },
            OriginConfig::Power { exponent, m0, big_m0 } => OriginBranch::Power { exponent, m0, big_m0 },
            OriginConfig::ExpCubic => OriginBranch::ExpCubic,
            OriginConfig::ExpAbs => OriginBranch::ExpAbs,
        };
        let infinity = match fb.infinity {
            InfinityConfig::Linear { m, big_m } => InfinityBranch::Linear { m, big_m },
            InfinityConfig::Power { r, m, big_m } => InfinityBranch::Power { r, m, big_m },
        };
        if let Some(d) = fb.delta {
            if !(d > 0.0 && d <= 1.0) {
                return Err(invalid("feedback.delta", "delta in (0,1]"));
            }
        }
        FeedbackSpec::new(origin, infinity).map(Some).map_err(|e| invalid("feedback", e.to_string()))
    }

    /// Simulation setup from the `simulate`, `feedback`, `initial`, `source`
    /// and `damping` sections. Expects a config validated for `simulate`.
    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let sim = self.simulate.as_ref().ok_or_else(|| invalid("simulate", "section required"))?;
        let feedback = self.feedback_spec()?.ok_or_else(|| invalid("feedback", "section required"))?;
        let grid = if sim.extent.len() == 1 {
            Grid::new_1d(sim.extent[0], sim.points[0])?
        } else {
            Grid::new_2d([sim.extent[0], sim.extent[1]], [sim.points[0], sim.points[1]])?
        };
        let initial = match self.initial.as_ref().ok_or_else(|| invalid("initial", "section required"))? {
            InitialConfig::Mode { amplitude, kx, ky } => InitialData::Mode { amplitude: *amplitude, kx: *kx, ky: *ky },
            InitialConfig::Gaussian { amplitude, center, width } => InitialData::Gaussian {
                amplitude: *amplitude,
                center: [center[0], center.get(1).copied().unwrap_or(0.0)],
                width: *width,
            },
            InitialConfig::Random { amplitude, modes } => {
                InitialData::Random { amplitude: *amplitude, modes: *modes, seed: self.seed }
            }
        };
        let mut config = SimConfig::new(grid, feedback, sim.dt, sim.t_max, initial);
        config.sample_every = sim.sample_every;
        config.cfl = sim.cfl;
        config.source = self.source.map(|s| SourceSpec::new(s.p, s.k)).transpose()?;
        config.collar = self.damping.map(|d| CollarSpec { width: d.width, a0: d.a0, a_max: d.a_max });
        Ok(config)
    }

    /// Checks that the sections needed by `mode` are present and in range.
    pub fn validate(&self, mode: Mode) -> Result<(), CliError> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(invalid("mode", format!("config is for mode {m}, invoked as {mode}")));
            }
        }
        let fb = self.feedback_spec()?;
        if let Some(env) = &self.envelope {
            validate_envelope(env, fb.is_some())?;
        }
        match mode {
            Mode::Envelope => {
                let env = self.envelope.as_ref().ok_or_else(|| invalid("envelope", "section required"))?;
                if fb.is_none() && env.h0.is_none() {
                    return Err(invalid("envelope.h0", "give envelope.h0 or a [feedback] section"));
                }
            }
            Mode::Simulate => {
                if fb.is_none() {
                    return Err(invalid("feedback", "section required"));
                }
                let sim = self.simulate.as_ref().ok_or_else(|| invalid("simulate", "section required"))?;
                let dim = sim.extent.len();
                if !(1..=2).contains(&dim) || sim.points.len() != dim {
                    return Err(invalid("simulate.extent", "extent and points must both have 1 or 2 entries"));
                }
                for &l in &sim.extent {
                    positive("simulate.extent", l)?;
                }
                if sim.points.iter().any(|&n| n < 3) {
                    return Err(invalid("simulate.points", "points >= 3"));
                }
                positive("simulate.dt", sim.dt)?;
                positive("simulate.t_max", sim.t_max)?;
                positive("simulate.cfl", sim.cfl)?;
                positive("simulate.residual_tol", sim.residual_tol)?;
                if sim.sample_every == 0 {
                    return Err(invalid("simulate.sample_every", "sample_every >= 1"));
                }
                if let Some(src) = self.source {
                    if !(src.p >= 1.0) {
                        return Err(invalid("source.p", "p >= 1"));
                    }
                    if let Some(k) = src.k {
                        positive("source.k", k)?;
                    }
                }
                if let Some(d) = self.damping {
                    positive("damping.width", d.width)?;
                    positive("damping.a0", d.a0)?;
                    if !(d.a_max >= d.a0) {
                        return Err(invalid("damping.a_max", "a_max >= a0"));
                    }
                }
                match self.initial.as_ref().ok_or_else(|| invalid("initial", "section required"))? {
                    InitialConfig::Gaussian { center, width, .. } => {
                        if center.len() != dim {
                            return Err(invalid("initial.center", format!("center needs {dim} entries")));
                        }
                        positive("initial.width", *width)?;
                    }
                    InitialConfig::Random { modes, .. } if *modes == 0 => {
                        return Err(invalid("initial.modes", "modes >= 1"));
                    }
                    InitialConfig::Mode { kx, ky, .. } if *kx == 0 || *ky == 0 => {
                        return Err(invalid("initial.kx", "mode numbers >= 1"));
                    }
                    _ => {}
                }
            }
            Mode::Raytrace => {
                let rt = self.raytrace.as_ref().ok_or_else(|| invalid("raytrace", "section required"))?;
                let dim = rt.extent.len();
                if !(1..=2).contains(&dim) {
                    return Err(invalid("raytrace.extent", "extent must have 1 or 2 entries"));
                }
                for &l in &rt.extent {
                    positive("raytrace.extent", l)?;
                }
                positive("raytrace.collar_width", rt.collar_width)?;
                positive("raytrace.ds", rt.ds)?;
                positive("raytrace.t_max", rt.t_max)?;
                positive("raytrace.drift_tol", rt.drift_tol)?;
                if rt.n_pos == 0 || rt.n_dir == 0 {
                    return Err(invalid("raytrace.n_pos", "n_pos >= 1 and n_dir >= 1"));
                }
                match &rt.medium {
                    MediumConfig::Constant { rho, k } => {
                        positive("raytrace.medium.rho", *rho)?;
                        if let Some(k) = k {
                            if k.len() != dim || k.iter().any(|row| row.len() != dim) {
                                return Err(invalid("raytrace.medium.k", format!("k must be {dim}x{dim}")));
                            }
                        }
                    }
                    MediumConfig::Radial { curvature, center } => {
                        if !(*curvature >= 0.0) {
                            return Err(invalid("raytrace.medium.curvature", "curvature >= 0"));
                        }
                        if center.as_ref().is_some_and(|c| c.len() != dim) {
                            return Err(invalid("raytrace.medium.center", format!("center needs {dim} entries")));
                        }
                    }
                    MediumConfig::Anisotropic { rho, base, slope } => {
                        positive("raytrace.medium.rho", *rho)?;
                        if base.len() != dim || slope.len() != dim {
                            return Err(invalid("raytrace.medium.base", format!("base and slope need {dim} entries")));
                        }
                        for &b in base {
                            positive("raytrace.medium.base", b)?;
                        }
                    }
                }
                if let Some(p) = &rt.probe {
                    if p.x.len() != dim || p.dir.len() != dim {
                        return Err(invalid("raytrace.probe", format!("x and dir need {dim} entries")));
                    }
                    positive("raytrace.probe.s_max", p.s_max)?;
                }
            }
            Mode::Verify => {
                if let Some(v) = &self.verify {
                    if v.random_cases == 0 {
                        return Err(invalid("verify.random_cases", "random_cases >= 1"));
                    }
                }
            }
            Mode::Reproduce => {}
        }
        Ok(())
    }

    /// Example ids listed in `[envelope] examples`, or all of them.
    pub fn example_ids(&self) -> Result<Vec<ExampleId>, CliError> {
        match self.envelope.as_ref().and_then(|e| e.examples.as_ref()) {
            None => Ok(ExampleId::ALL.to_vec()),
            Some(list) => list
                .iter()
                .map(|s| s.parse().map_err(|_| invalid("envelope.examples", format!("unknown example '{s}'"))))
                .collect(),
        }
    }
}

fn validate_envelope(env: &EnvelopeConfig, has_feedback: bool) -> Result<(), CliError> {
    if !(env.gamma > 0.0 && env.gamma < 1.0) {
        return Err(invalid("envelope.gamma", "gamma in (0,1)"));
    }
    match (env.k, env.c_obs) {
        (Some(k), None) => positive("envelope.K", k)?,
        (None, Some(c)) => positive("envelope.C_obs", c)?,
        _ => return Err(invalid("envelope.K", "give exactly one of K and C_obs")),
    }
    if let Some(d) = env.d0 {
        positive("envelope.D0", d)?;
    }
    if has_feedback && env.r.is_some() {
        return Err(invalid("envelope.r", "r comes from [feedback] when that section is present"));
    }
    if let Some(r) = env.r {
        positive("envelope.r", r)?;
    }
    match env.h0 {
        Some(H0Config::Linear { slope }) => positive("envelope.h0.slope", slope)?,
        Some(H0Config::Power { coeff, exponent }) => {
            positive("envelope.h0.coeff", coeff)?;
            if !(exponent > 0.0 && exponent <= 1.0) {
                return Err(invalid("envelope.h0.exponent", "exponent in (0,1] (h0 is concave)"));
            }
        }
        None => {}
    }
    positive("envelope.measQT", env.meas_qt)?;
    if !(env.e0 >= 0.0 && env.e0.is_finite()) {
        return Err(invalid("envelope.E0", "E0 >= 0"));
    }
    positive("envelope.T0", env.t0)?;
    positive("envelope.t_max", env.t_max)?;
    positive("envelope.dt", env.dt)?;
    positive("envelope.golden_tol", env.golden_tol)?;
    Ok(())
}

/// Reads and validates a configuration file for `mode`.
pub fn parse_config(path: &Path, mode: Mode) -> Result<ExperimentConfig, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    let cfg = ExperimentConfig::parse_str(&text)?;
    cfg.validate(mode)?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[envelope]\nh0 = { kind = \"linear\", slope = 1.0 }\nK = 1.0\nE0 = 1.0\n";

    #[test]
    fn minimal_envelope_parses() {
        let cfg = ExperimentConfig::parse_str(MINIMAL).unwrap();
        cfg.validate(Mode::Envelope).unwrap();
        assert_eq!(cfg.envelope.unwrap().gamma, 0.5);
    }

    #[test]
    fn gamma_out_of_range() {
        let cfg = ExperimentConfig::parse_str(&format!("{MINIMAL}gamma = 1.5\n")).unwrap();
        match cfg.validate(Mode::Envelope) {
            Err(CliError::Validation { key, constraint }) => {
                assert_eq!(key, "envelope.gamma");
                assert_eq!(constraint, "gamma in (0,1)");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_has_position() {
        let err = ExperimentConfig::parse_str(&format!("{MINIMAL}measQt = 1.0\n")).unwrap_err();
        match err {
            CliError::Parse { line, message, .. } => {
                assert_eq!(line, 5);
                assert!(message.contains("unknown field"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_sections() {
        let cfg = ExperimentConfig::parse_str("seed = 3\n").unwrap();
        assert!(cfg.validate(Mode::Envelope).is_err());
        assert!(cfg.validate(Mode::Simulate).is_err());
        assert!(cfg.validate(Mode::Verify).is_ok());
        assert!(cfg.validate(Mode::Reproduce).is_ok());
    }

    #[test]
    fn line_col_counts_from_one() {
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
        assert_eq!(line_col("ab", 0), (1, 1));
    }
}
