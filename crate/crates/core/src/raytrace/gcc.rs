use rayon::prelude::*;

use super::flow::{make_null, rk4_step, Hamiltonian, PhasePoint};
use super::medium::{mat_vec, quad, MediumFields, Vector};
use super::{BoxDomain, RayError};

/// Maximum entry time over a bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct GccResult {
    /// `T₀`, infinite when some ray never reaches the control region.
    pub t0: f64,
    /// Index of the first ray attaining `t0`.
    pub worst_ray: usize,
    /// Entry time of every ray, in bundle order.
    pub entry_times: Vec<f64>,
}

/// Positions on a uniform interior grid times unit directions: `±1` in 1D, angles
/// `2πk/n_dir` in 2D. Positions are `L·i/(n_pos+1)` along each axis.
pub fn sample_bundle<const D: usize>(
    domain: &BoxDomain<D>,
    n_pos: usize,
    n_dir: usize,
) -> Result<Vec<(Vector<D>, Vector<D>)>, RayError> {
    if n_pos == 0 || n_dir == 0 {
        return Err(RayError::EmptyBundle);
    }
    let coord = |axis: usize, i: usize| domain.extent[axis] * i as f64 / (n_pos + 1) as f64;
    let mut rays = Vec::new();
    match D {
        1 => {
            let dirs: &[f64] = if n_dir == 1 { &[1.0] } else { &[1.0, -1.0] };
            for i in 1..=n_pos {
                for &d in dirs {
                    let mut x = [0.0; D];
                    let mut dir = [0.0; D];
                    x[0] = coord(0, i);
                    dir[0] = d;
                    rays.push((x, dir));
                }
            }
        }
        2 => {
            for j in 1..=n_pos {
                for i in 1..=n_pos {
                    for k in 0..n_dir {
                        let angle = 2.0 * std::f64::consts::PI * k as f64 / n_dir as f64;
                        let mut x = [0.0; D];
                        let mut dir = [0.0; D];
                        x[0] = coord(0, i);
                        x[1] = coord(1, j);
                        dir[0] = angle.cos();
                        dir[1] = angle.sin();
                        rays.push((x, dir));
                    }
                }
            }
        }
        _ => return Err(RayError::InvalidMedium(format!("dimension {D} is not supported"))),
    }
    Ok(rays)
}

/// Straight-line motion with specular reflection in a constant medium. A crossing
/// of the wall `x_a ∈ {0, L_a}` flips the normal component of the velocity while
/// keeping the symbol: `ξ ← ξ − 2(e_aᵀMξ / e_aᵀMe_a)·e_a`.
fn advance_reflecting<const D: usize>(med: &MediumFields<D>, domain: &BoxDomain<D>, pp: &mut PhasePoint<D>, ds: f64) {
    let m = med.speed_matrix(&pp.x);
    let mut left = ds;
    // Each pass either finishes the step or hits one wall; bounded for safety.
    for _ in 0..64 {
        let vel = mat_vec(&m, &pp.xi);
        let mut hit: Option<(usize, f64, f64)> = None;
        for a in 0..D {
            let wall = if vel[a] > 0.0 {
                domain.extent[a]
            } else if vel[a] < 0.0 {
                0.0
            } else {
                continue;
            };
            let frac = (wall - pp.x[a]) / vel[a];
            if frac < left && hit.is_none_or(|(_, f, _)| frac < f) {
                hit = Some((a, frac.max(0.0), wall));
            }
        }
        match hit {
            None => {
                for a in 0..D {
                    pp.x[a] += left * vel[a];
                }
                pp.t += -pp.tau * left;
                return;
            }
            Some((axis, frac, wall)) => {
                for a in 0..D {
                    pp.x[a] += frac * vel[a];
                }
                pp.x[axis] = wall;
                pp.t += -pp.tau * frac;
                left -= frac;
                let mut e = [0.0; D];
                e[axis] = 1.0;
                let mu = 2.0 * quad(&m, &e, &pp.xi) / m[axis][axis];
                pp.xi[axis] -= mu;
            }
        }
    }
}

/// First time at which a ray started at `x` with direction `dir` lies in `ω`,
/// with `τ = −1` so that the flow parameter is physical time.
pub fn entry_time<const D: usize, F>(
    med: &MediumFields<D>,
    domain: &BoxDomain<D>,
    omega: &F,
    x: Vector<D>,
    dir: Vector<D>,
    t_max: f64,
    ds: f64,
) -> Result<f64, RayError>
where
    F: Fn(&Vector<D>) -> bool + ?Sized,
{
    let mut pp = make_null(med, x, -1.0, dir)?;
    if omega(&pp.x) {
        return Ok(0.0);
    }
    let reflect = med.is_constant();
    let steps = (t_max / ds).ceil() as usize;
    for i in 1..=steps {
        if reflect {
            advance_reflecting(med, domain, &mut pp, ds);
        } else {
            pp = rk4_step(med, Hamiltonian::Normalized, &pp, ds);
            if !domain.contains(&pp.x) {
                // no reflection law off constant media: the ray is lost
                return Ok(f64::INFINITY);
            }
        }
        if omega(&pp.x) {
            return Ok(i as f64 * ds);
        }
    }
    Ok(f64::INFINITY)
}

/// Traces the bundle in parallel and returns the worst entry time. Reflection at
/// `∂Ω` is used for constant media; otherwise a ray that leaves the box before
/// entering `ω` counts as never entering.
pub fn gcc_entry_time<const D: usize, F>(
    med: &MediumFields<D>,
    domain: &BoxDomain<D>,
    omega: &F,
    bundle: &[(Vector<D>, Vector<D>)],
    t_max: f64,
    ds: f64,
) -> Result<GccResult, RayError>
where
    F: Fn(&Vector<D>) -> bool + Sync + ?Sized,
{
    if bundle.is_empty() {
        return Err(RayError::EmptyBundle);
    }
    if !(ds > 0.0 && ds.is_finite()) {
        return Err(RayError::InvalidStep(ds));
    }
    let entry_times = bundle
        .par_iter()
        .map(|&(x, dir)| entry_time(med, domain, omega, x, dir, t_max, ds))
        .collect::<Result<Vec<_>, _>>()?;
    let mut worst_ray = 0;
    for (i, &t) in entry_times.iter().enumerate() {
        if t > entry_times[worst_ray] {
            worst_ray = i;
        }
    }
    Ok(GccResult { t0: entry_times[worst_ray], worst_ray, entry_times })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundle_shapes() {
        let d1 = BoxDomain::new([1.0]).unwrap();
        let b = sample_bundle(&d1, 3, 2).unwrap();
        assert_eq!(b.len(), 6);
        assert!(b.iter().all(|(x, _)| x[0] > 0.0 && x[0] < 1.0));
        let d2 = BoxDomain::new([1.0, 2.0]).unwrap();
        let b = sample_bundle(&d2, 2, 8).unwrap();
        assert_eq!(b.len(), 32);
        let (_, dir) = b[1];
        assert!((dir[0] - dir[1]).abs() < 1e-15 && dir[0] > 0.0);
        assert!(sample_bundle(&d1, 0, 2).is_err());
    }

    #[test]
    fn inside_omega_and_full_omega() {
        let med = MediumFields::<1>::trivial();
        let dom = BoxDomain::new([1.0]).unwrap();
        let collar = dom.collar(0.1);
        assert_eq!(entry_time(&med, &dom, &collar, [0.05], [1.0], 5.0, 1e-3).unwrap(), 0.0);
        let bundle = sample_bundle(&dom, 9, 2).unwrap();
        let full = gcc_entry_time(&med, &dom, &|_: &[f64; 1]| true, &bundle, 5.0, 1e-3).unwrap();
        assert_eq!(full.t0, 0.0);
        let none = gcc_entry_time(&med, &dom, &|_: &[f64; 1]| false, &bundle, 1.0, 1e-2).unwrap();
        assert!(none.t0.is_infinite());
    }

    #[test]
    fn reflection_keeps_symbol_and_returns() {
        let med = MediumFields::<2>::Constant { rho: 1.0, k: [[2.0, 0.5], [0.5, 1.0]] };
        let dom = BoxDomain::new([1.0, 1.0]).unwrap();
        let mut pp = make_null(&med, [0.5, 0.5], -1.0, [1.0, 0.3]).unwrap();
        for _ in 0..5000 {
            advance_reflecting(&med, &dom, &mut pp, 1e-3);
            assert!(dom.contains(&pp.x));
            assert!(super::super::flow::symbol(&med, &pp).abs() < 1e-12);
        }
        assert!((pp.t - 5.0).abs() < 1e-9);
    }
}
