use super::medium::{mat_vec, quad, MediumFields, Vector};
use super::{BoxDomain, RayError};

/// A point `(t, x, τ, ξ)` of the cotangent bundle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint<const D: usize> {
    pub t: f64,
    pub x: Vector<D>,
    pub tau: f64,
    pub xi: Vector<D>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayPath<const D: usize> {
    pub s: Vec<f64>,
    pub points: Vec<PhasePoint<D>>,
    /// First parameter at which `x` lies in the control region, when tracked.
    pub entered_omega_at: Option<f64>,
    /// `max_s |p̃(s) − p̃(0)|`.
    pub symbol_drift: f64,
}

/// Which Hamiltonian generates the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hamiltonian {
    /// `p̃ = ½(−τ² + ξᵀ(K/ρ)ξ)`; with `τ = −1` the parameter equals `t`.
    Normalized,
    /// `p = −ρτ² + ξᵀKξ`.
    Principal,
}

/// `p(t, x, τ, ξ) = −ρ(x)τ² + ξᵀK(x)ξ`.
pub fn symbol<const D: usize>(med: &MediumFields<D>, pp: &PhasePoint<D>) -> f64 {
    -med.rho(&pp.x) * pp.tau * pp.tau + quad(&med.k(&pp.x), &pp.xi, &pp.xi)
}

/// `p̃ = p/(2ρ)`.
pub fn normalized_symbol<const D: usize>(med: &MediumFields<D>, pp: &PhasePoint<D>) -> f64 {
    0.5 * (-pp.tau * pp.tau + quad(&med.speed_matrix(&pp.x), &pp.xi, &pp.xi))
}

/// Null phase point at `(0, x)` with `ξ` parallel to `direction`.
pub fn make_null<const D: usize>(
    med: &MediumFields<D>,
    x: Vector<D>,
    tau: f64,
    direction: Vector<D>,
) -> Result<PhasePoint<D>, RayError> {
    let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(RayError::DegenerateDirection);
    }
    let mut d = direction;
    d.iter_mut().for_each(|v| *v /= norm);
    let dkd = quad(&med.k(&x), &d, &d);
    let lambda = tau.abs() * (med.rho(&x) / dkd).sqrt();
    if !lambda.is_finite() {
        return Err(RayError::DegenerateDirection);
    }
    d.iter_mut().for_each(|v| *v *= lambda);
    Ok(PhasePoint { t: 0.0, x, tau, xi: d })
}

#[derive(Clone, Copy)]
struct Deriv<const D: usize> {
    t: f64,
    x: Vector<D>,
    xi: Vector<D>,
}

fn rhs<const D: usize>(med: &MediumFields<D>, ham: Hamiltonian, pp: &PhasePoint<D>) -> Deriv<D> {
    let tau = pp.tau;
    match ham {
        Hamiltonian::Normalized => {
            let dm = med.grad_speed_matrix(&pp.x);
            let mut xi = [0.0; D];
            for m in 0..D {
                xi[m] = -0.5 * quad(&dm[m], &pp.xi, &pp.xi);
            }
            Deriv { t: -tau, x: mat_vec(&med.speed_matrix(&pp.x), &pp.xi), xi }
        }
        Hamiltonian::Principal => {
            let k = med.k(&pp.x);
            let dk = med.grad_k(&pp.x);
            let grho = med.grad_rho(&pp.x);
            let mut x = mat_vec(&k, &pp.xi);
            x.iter_mut().for_each(|v| *v *= 2.0);
            let mut xi = [0.0; D];
            for m in 0..D {
                xi[m] = tau * tau * grho[m] - quad(&dk[m], &pp.xi, &pp.xi);
            }
            Deriv { t: -2.0 * med.rho(&pp.x) * tau, x, xi }
        }
    }
}

fn shifted<const D: usize>(pp: &PhasePoint<D>, k: &Deriv<D>, h: f64) -> PhasePoint<D> {
    let mut out = *pp;
    out.t += h * k.t;
    for i in 0..D {
        out.x[i] += h * k.x[i];
        out.xi[i] += h * k.xi[i];
    }
    out
}

/// One classical RK4 step; `τ` is carried over unchanged.
pub fn rk4_step<const D: usize>(med: &MediumFields<D>, ham: Hamiltonian, pp: &PhasePoint<D>, ds: f64) -> PhasePoint<D> {
    let k1 = rhs(med, ham, pp);
    let k2 = rhs(med, ham, &shifted(pp, &k1, 0.5 * ds));
    let k3 = rhs(med, ham, &shifted(pp, &k2, 0.5 * ds));
    let k4 = rhs(med, ham, &shifted(pp, &k3, ds));
    let mut out = *pp;
    out.t += ds / 6.0 * (k1.t + 2.0 * k2.t + 2.0 * k3.t + k4.t);
    for i in 0..D {
        out.x[i] += ds / 6.0 * (k1.x[i] + 2.0 * k2.x[i] + 2.0 * k3.x[i] + k4.x[i]);
        out.xi[i] += ds / 6.0 * (k1.xi[i] + 2.0 * k2.xi[i] + 2.0 * k3.xi[i] + k4.xi[i]);
    }
    out
}

/// Integrates the normalized Hamilton system for `n` steps of size `ds`.
pub fn flow<const D: usize>(
    med: &MediumFields<D>,
    pp0: PhasePoint<D>,
    ds: f64,
    n: usize,
) -> Result<RayPath<D>, RayError> {
    flow_with(med, Hamiltonian::Normalized, pp0, ds, n, None)
}

/// [`flow`] with a choice of Hamiltonian and an optional bounding box; leaving
/// the box is an error.
pub fn flow_with<const D: usize>(
    med: &MediumFields<D>,
    ham: Hamiltonian,
    pp0: PhasePoint<D>,
    ds: f64,
    n: usize,
    domain: Option<&BoxDomain<D>>,
) -> Result<RayPath<D>, RayError> {
    if !(ds > 0.0 && ds.is_finite()) {
        return Err(RayError::InvalidStep(ds));
    }
    if pp0.tau == 0.0 && pp0.xi.iter().all(|&v| v == 0.0) {
        return Err(RayError::DegenerateDirection);
    }
    med.validate(&[pp0.x])?;
    let p0 = normalized_symbol(med, &pp0);
    let mut s = Vec::with_capacity(n + 1);
    let mut points = Vec::with_capacity(n + 1);
    s.push(0.0);
    points.push(pp0);
    let mut drift: f64 = 0.0;
    let mut pp = pp0;
    for i in 1..=n {
        pp = rk4_step(med, ham, &pp, ds);
        let si = i as f64 * ds;
        if pp.x.iter().chain(&pp.xi).any(|v| !v.is_finite()) {
            return Err(RayError::NonFinite { s: si });
        }
        if let Some(dom) = domain {
            if !dom.contains(&pp.x) {
                return Err(RayError::LeftDomain { s: si });
            }
        }
        drift = drift.max((normalized_symbol(med, &pp) - p0).abs());
        s.push(si);
        points.push(pp);
    }
    Ok(RayPath { s, points, entered_omega_at: None, symbol_drift: drift })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicResidual {
    /// `max |ξ − G·ẋ|`.
    pub max_xi_res: f64,
    /// `max |ẋᵀG·ẋ − τ²|`.
    pub max_speed_res: f64,
}

/// Checks the geodesic relations `ξ = G(x)ẋ` and `ẋᵀG(x)ẋ = τ²` with `ẋ` from
/// centered differences of a path sampled at uniform `ds`.
pub fn geodesic_residual<const D: usize>(
    med: &MediumFields<D>,
    path: &RayPath<D>,
) -> Result<GeodesicResidual, RayError> {
    let n = path.points.len();
    if n < 3 {
        return Err(RayError::TooShort(n));
    }
    let mut res = GeodesicResidual { max_xi_res: 0.0, max_speed_res: 0.0 };
    for i in 1..n - 1 {
        let (prev, cur, next) = (&path.points[i - 1], &path.points[i], &path.points[i + 1]);
        let h = path.s[i + 1] - path.s[i - 1];
        let mut xdot = [0.0; D];
        for j in 0..D {
            xdot[j] = (next.x[j] - prev.x[j]) / h;
        }
        let g = med.metric(&cur.x).ok_or_else(|| RayError::InvalidMedium(format!("singular K at {:?}", cur.x)))?;
        let gx = mat_vec(&g, &xdot);
        let xi_err = (0..D).map(|j| (cur.xi[j] - gx[j]).powi(2)).sum::<f64>().sqrt();
        let speed_err = (quad(&g, &xdot, &xdot) - cur.tau * cur.tau).abs();
        res.max_xi_res = res.max_xi_res.max(xi_err);
        res.max_speed_res = res.max_speed_res.max(speed_err);
    }
    Ok(res)
}

/// Right-hand side of the Euler-Lagrange form `ξ̇_k = ½ẋᵀ(∂G/∂x_k)ẋ`, with
/// `∂G = −G·∂(K/ρ)·G`.
pub fn xi_dot_from_metric<const D: usize>(med: &MediumFields<D>, x: &Vector<D>, xdot: &Vector<D>) -> Option<Vector<D>> {
    let g = med.metric(x)?;
    let gx = mat_vec(&g, xdot);
    let dm = med.grad_speed_matrix(x);
    let mut out = [0.0; D];
    for k in 0..D {
        out[k] = -0.5 * quad(&dm[k], &gx, &gx);
    }
    Some(out)
}

/// `ξ̇` as integrated by the normalized flow.
pub fn xi_dot_hamiltonian<const D: usize>(med: &MediumFields<D>, pp: &PhasePoint<D>) -> Vector<D> {
    rhs(med, Hamiltonian::Normalized, pp).xi
}
