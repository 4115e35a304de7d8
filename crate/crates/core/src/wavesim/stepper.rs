use crate::feedback::{eval_g, eval_g_prime, FeedbackSpec, BISECTION_CAP};

use super::{DampingField, Grid, SimError, SourceSpec, WaveState, DEFAULT_CFL};

/// Everything except the state: domain, source, damping field and feedback law.
#[derive(Debug, Clone)]
pub struct WaveProblem {
    pub grid: Grid,
    pub source: Option<SourceSpec>,
    pub damping: DampingField,
    pub feedback: FeedbackSpec,
}

/// Energy removed by damping and observability integrand over one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepFlux {
    /// `dt·∫ a·g(v)·v` at the half step.
    pub damping: f64,
    /// `dt·∫ a·(v² + g(v)²)` at the half step.
    pub obs: f64,
}

/// Solves `v + c·g(v) = w` for `v`, `c ≥ 0`.
///
/// The root lies between 0 and `w` because `g` is odd and increasing. Linear
/// feedback is solved in closed form; otherwise Newton steps are taken inside a
/// shrinking bracket, falling back to bisection whenever a step leaves it, until
/// the update is at round-off size relative to `|w|`.
pub fn solve_node(w: f64, c: f64, fb: &FeedbackSpec) -> Option<f64> {
    if !w.is_finite() || !c.is_finite() {
        return None;
    }
    if c == 0.0 || w == 0.0 {
        return Some(w);
    }
    if let Some(slope) = fb.linear_slope() {
        return Some(w / (1.0 + c * slope));
    }
    let (mut lo, mut hi) = if w > 0.0 { (0.0, w) } else { (w, 0.0) };
    let tol = 4.0 * f64::EPSILON * w.abs();
    let mut x = w / (1.0 + c * eval_g_prime(fb, w).min(1e300));
    for _ in 0..BISECTION_CAP {
        let res = x + c * eval_g(fb, x) - w;
        if res == 0.0 {
            return Some(x);
        }
        if res < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = 1.0 + c * eval_g_prime(fb, x);
        let mut next = x - res / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= tol || hi - lo <= tol {
            return Some(next);
        }
        x = next;
    }
    None
}

/// Integrates one problem with a fixed step and caches the acceleration of the
/// current state between steps.
#[derive(Debug, Clone)]
pub struct Stepper {
    problem: WaveProblem,
    dt: f64,
    accel: Vec<f64>,
    accel_valid: bool,
    // a·dt/2 per node
    half_coeff: Vec<f64>,
    force: Vec<f64>,
}

impl Stepper {
    pub fn new(problem: WaveProblem, dt: f64) -> Result<Self, SimError> {
        Self::with_cfl(problem, dt, DEFAULT_CFL)
    }

    pub fn with_cfl(problem: WaveProblem, dt: f64, cfl: f64) -> Result<Self, SimError> {
        let limit = cfl * problem.grid.min_spacing();
        if !(dt > 0.0) || dt > limit {
            return Err(SimError::CflViolation { dt, limit });
        }
        if problem.damping.a.len() != problem.grid.len() {
            return Err(SimError::InvalidConfig("damping field does not match the grid".into()));
        }
        let half_coeff = problem.damping.a.iter().map(|a| 0.5 * dt * a).collect();
        let n = problem.grid.len();
        Ok(Stepper { problem, dt, accel: vec![0.0; n], accel_valid: false, half_coeff, force: vec![0.0; n] })
    }

    pub fn problem(&self) -> &WaveProblem {
        &self.problem
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `Δu − f_k(u)` at interior nodes, zero on the boundary.
    fn acceleration(&self, u: &[f64], out: &mut [f64]) {
        let grid = &self.problem.grid;
        let nx = grid.points(0);
        let hx2 = 1.0 / (grid.spacing(0) * grid.spacing(0));
        out.iter_mut().for_each(|a| *a = 0.0);
        if grid.dim() == 1 {
            for i in 1..nx - 1 {
                out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * hx2;
            }
        } else {
            let ny = grid.points(1);
            let hy2 = 1.0 / (grid.spacing(1) * grid.spacing(1));
            for j in 1..ny - 1 {
                for i in 1..nx - 1 {
                    let c = i + nx * j;
                    out[c] = (u[c - 1] - 2.0 * u[c] + u[c + 1]) * hx2 + (u[c - nx] - 2.0 * u[c] + u[c + nx]) * hy2;
                }
            }
        }
        if let Some(src) = &self.problem.source {
            for (idx, a) in out.iter_mut().enumerate() {
                if !grid.is_boundary(idx) {
                    *a -= src.fk(u[idx]);
                }
            }
        }
    }

    /// Advances `state` by one step in place.
    pub fn advance(&mut self, state: &mut WaveState) -> Result<StepFlux, SimError> {
        let dt = self.dt;
        let n = self.problem.grid.len();
        if !self.accel_valid {
            let mut accel = std::mem::take(&mut self.accel);
            self.acceleration(&state.u, &mut accel);
            self.accel = accel;
        }
        let cell = self.problem.grid.cell();
        let mut flux = StepFlux::default();
        // kick (implicit damping) + drift; `force` keeps w − v_half = (dt/2)·a·g(v_half)
        let mut force = std::mem::take(&mut self.force);
        for idx in 0..n {
            if self.problem.grid.is_boundary(idx) {
                continue;
            }
            let w = state.v[idx] + 0.5 * dt * self.accel[idx];
            let c = self.half_coeff[idx];
            let v_half =
                solve_node(w, c, &self.problem.feedback).ok_or(SimError::NodeSolveFailure { node: idx, target: w })?;
            force[idx] = w - v_half;
            if c > 0.0 {
                let g = eval_g(&self.problem.feedback, v_half);
                let a = self.problem.damping.a[idx];
                let weight = self.problem.grid.weight(idx) * cell;
                flux.damping += dt * a * g * v_half * weight;
                flux.obs += dt * a * (v_half * v_half + g * g) * weight;
            }
            state.v[idx] = v_half;
            state.u[idx] += dt * v_half;
        }
        let mut accel = std::mem::take(&mut self.accel);
        self.acceleration(&state.u, &mut accel);
        self.accel = accel;
        self.accel_valid = true;
        for idx in 0..n {
            if self.problem.grid.is_boundary(idx) {
                continue;
            }
            state.v[idx] += 0.5 * dt * self.accel[idx] - force[idx];
        }
        self.force = force;
        state.t += dt;
        Ok(flux)
    }

    /// Forget the cached acceleration (call after editing the state externally).
    pub fn invalidate(&mut self) {
        self.accel_valid = false;
    }
}

/// One step of the scheme from `state`; see [`Stepper`] for repeated stepping.
pub fn step(
    state: &WaveState,
    grid: &Grid,
    src: Option<&SourceSpec>,
    damp: &DampingField,
    fb: &FeedbackSpec,
    dt: f64,
) -> Result<WaveState, SimError> {
    let problem = WaveProblem { grid: grid.clone(), source: src.copied(), damping: damp.clone(), feedback: *fb };
    let mut stepper = Stepper::new(problem, dt)?;
    let mut next = state.clone();
    stepper.advance(&mut next)?;
    Ok(next)
}

/// Discrete energy `½∫(v² + |∇u|²) + ∫F_k(u)`.
///
/// Kinetic and potential parts use trapezoidal weights. The gradient term sums
/// squared forward differences over grid edges, which pairs exactly with the
/// three-point Laplacian under summation by parts.
pub fn energy(state: &WaveState, grid: &Grid, src: Option<&SourceSpec>) -> f64 {
    let cell = grid.cell();
    let nx = grid.points(0);
    let ny = grid.points(1);
    let mut kinetic = 0.0;
    let mut potential = 0.0;
    for idx in 0..grid.len() {
        let w = grid.weight(idx);
        kinetic += w * state.v[idx] * state.v[idx];
        if let Some(s) = src {
            potential += w * s.big_fk(state.u[idx]);
        }
    }
    let u = &state.u;
    let mut gradient = 0.0;
    let hx = grid.spacing(0);
    if grid.dim() == 1 {
        for i in 0..nx - 1 {
            let d = (u[i + 1] - u[i]) / hx;
            gradient += d * d;
        }
    } else {
        let hy = grid.spacing(1);
        let edge_w = |k: usize, n: usize| if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        for j in 0..ny {
            for i in 0..nx - 1 {
                let c = i + nx * j;
                let d = (u[c + 1] - u[c]) / hx;
                gradient += edge_w(j, ny) * d * d;
            }
        }
        for j in 0..ny - 1 {
            for i in 0..nx {
                let c = i + nx * j;
                let d = (u[c + nx] - u[c]) / hy;
                gradient += edge_w(i, nx) * d * d;
            }
        }
    }
    (0.5 * kinetic + 0.5 * gradient + potential) * cell
}
