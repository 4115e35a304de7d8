use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::feedback::FeedbackSpec;

use super::{
    build_damping, energy, DampingField, Grid, SimError, SourceSpec, Stepper, Trace, WaveProblem, WaveState,
    DEFAULT_CFL,
};

/// Initial data families.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `A·sin(k₁πx/L₁)·sin(k₂πy/L₂)`, zero velocity.
    Mode { amplitude: f64, kx: usize, ky: usize },
    /// Gaussian bump times the boundary taper `Π sin(πx_i/L_i)`, zero velocity.
    Gaussian { amplitude: f64, center: [f64; 2], width: f64 },
    /// Seeded sine series with coefficients `~ 1/k²` for `u` and `~ 1/k` for `v`.
    Random { amplitude: f64, modes: usize, seed: u64 },
}

impl InitialData {
    pub fn build(&self, grid: &Grid) -> Result<WaveState, SimError> {
        let mut state = WaveState::zeros(grid);
        let sine = |axis: usize, k: usize, x: f64| (k as f64 * PI * x / grid.extent(axis)).sin();
        match *self {
            InitialData::Mode { amplitude, kx, ky } => {
                if kx == 0 || (grid.dim() == 2 && ky == 0) {
                    return Err(SimError::InvalidConfig("mode numbers must be positive".into()));
                }
                for idx in 0..grid.len() {
                    let [x, y] = grid.position(idx);
                    let mut u = amplitude * sine(0, kx, x);
                    if grid.dim() == 2 {
                        u *= sine(1, ky, y);
                    }
                    state.u[idx] = u;
                }
            }
            InitialData::Gaussian { amplitude, center, width } => {
                if !(width > 0.0) {
                    return Err(SimError::InvalidConfig("gaussian width must be positive".into()));
                }
                for idx in 0..grid.len() {
                    let p = grid.position(idx);
                    let mut r2 = 0.0;
                    let mut taper = 1.0;
                    for axis in 0..grid.dim() {
                        r2 += (p[axis] - center[axis]).powi(2);
                        taper *= sine(axis, 1, p[axis]);
                    }
                    state.u[idx] = amplitude * (-0.5 * r2 / (width * width)).exp() * taper;
                }
            }
            InitialData::Random { amplitude, modes, seed } => {
                if modes == 0 {
                    return Err(SimError::InvalidConfig("random data needs at least one mode".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let ky_max = if grid.dim() == 2 { modes } else { 1 };
                for ky in 1..=ky_max {
                    for kx in 1..=modes {
                        let k2 = (kx * kx + if grid.dim() == 2 { ky * ky } else { 0 }) as f64;
                        let cu: f64 = rng.gen_range(-1.0..1.0) / k2;
                        let cv: f64 = rng.gen_range(-1.0..1.0) / k2.sqrt();
                        for idx in 0..grid.len() {
                            let [x, y] = grid.position(idx);
                            let mut basis = sine(0, kx, x);
                            if grid.dim() == 2 {
                                basis *= sine(1, ky, y);
                            }
                            state.u[idx] += amplitude * cu * basis;
                            state.v[idx] += amplitude * cv * basis;
                        }
                    }
                }
            }
        }
        for idx in 0..grid.len() {
            if grid.is_boundary(idx) {
                state.u[idx] = 0.0;
                state.v[idx] = 0.0;
            }
        }
        Ok(state)
    }
}

/// Collar damping parameters; `None` in [`SimConfig`] means `a ≡ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollarSpec {
    pub width: f64,
    pub a0: f64,
    pub a_max: f64,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub grid: Grid,
    pub source: Option<SourceSpec>,
    pub collar: Option<CollarSpec>,
    pub feedback: FeedbackSpec,
    pub dt: f64,
    pub t_max: f64,
    pub sample_every: usize,
    pub cfl: f64,
    pub initial: InitialData,
}

impl SimConfig {
    pub fn new(grid: Grid, feedback: FeedbackSpec, dt: f64, t_max: f64, initial: InitialData) -> Self {
        SimConfig { grid, source: None, collar: None, feedback, dt, t_max, sample_every: 1, cfl: DEFAULT_CFL, initial }
    }

    pub fn damping_field(&self) -> Result<DampingField, SimError> {
        match self.collar {
            Some(c) => build_damping(&self.grid, c.width, c.a0, c.a_max),
            None => Ok(DampingField::zero(&self.grid)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub trace: Trace,
    pub final_state: WaveState,
    /// Largest `|u|` seen at any step.
    pub max_abs_u: f64,
}

pub fn run(config: &SimConfig) -> Result<Trace, SimError> {
    run_full(config).map(|out| out.trace)
}

pub fn run_full(config: &SimConfig) -> Result<SimOutput, SimError> {
    if !(config.t_max >= 0.0) || config.sample_every == 0 {
        return Err(SimError::InvalidConfig("t_max >= 0 and sample_every >= 1".into()));
    }
    let problem = WaveProblem {
        grid: config.grid.clone(),
        source: config.source,
        damping: config.damping_field()?,
        feedback: config.feedback,
    };
    let mut stepper = Stepper::with_cfl(problem, config.dt, config.cfl)?;
    let mut state = config.initial.build(&config.grid)?;
    let src = config.source.as_ref();
    let steps = (config.t_max / config.dt).round() as usize;
    let mut trace = Trace::default();
    let (mut d, mut obs) = (0.0, 0.0);
    let mut max_abs_u = state.max_abs_u();
    trace.push(0.0, energy(&state, &config.grid, src), d, obs);
    for n in 1..=steps {
        let flux = stepper.advance(&mut state)?;
        d += flux.damping;
        obs += flux.obs;
        max_abs_u = max_abs_u.max(state.max_abs_u());
        if n % config.sample_every == 0 || n == steps {
            let t = n as f64 * config.dt;
            state.t = t;
            trace.push(t, energy(&state, &config.grid, src), d, obs);
        }
    }
    Ok(SimOutput { trace, final_state: state, max_abs_u })
}
