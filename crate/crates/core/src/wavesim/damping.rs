use super::{Grid, SimError};

/// Locally distributed damping coefficient `a(x)` supported near `∂Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingField {
    pub a: Vec<f64>,
    /// Collar `ω = {dist(x, ∂Ω) ≤ width}`.
    pub omega_mask: Vec<bool>,
    pub a0: f64,
    pub a_max: f64,
    pub width: f64,
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Radial profile of the damping as a function of the distance `d` to the
/// boundary: `a_max` up to `w/2`, a cubic Hermite ramp down to `a₀` at `w`, and a
/// second ramp to zero at `2w`. Both ramps have zero end slopes, so the profile
/// is C¹.
pub fn damping_profile(d: f64, width: f64, a0: f64, a_max: f64) -> f64 {
    let half = 0.5 * width;
    if d <= half {
        a_max
    } else if d <= width {
        a0 + (a_max - a0) * (1.0 - smoothstep((d - half) / half))
    } else if d < 2.0 * width {
        a0 * (1.0 - smoothstep((d - width) / width))
    } else {
        0.0
    }
}

impl DampingField {
    /// Damping identically zero, with an empty collar.
    pub fn zero(grid: &Grid) -> Self {
        DampingField { a: vec![0.0; grid.len()], omega_mask: vec![false; grid.len()], a0: 0.0, a_max: 0.0, width: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|&a| a == 0.0)
    }
}

pub fn build_damping(grid: &Grid, width: f64, a0: f64, a_max: f64) -> Result<DampingField, SimError> {
    let half_min = (0..grid.dim()).map(|ax| 0.5 * grid.extent(ax)).fold(f64::INFINITY, f64::min);
    if !(width > 0.0 && width < half_min) {
        return Err(SimError::InvalidCollar(format!("collar width must lie in (0, {half_min}), got {width}")));
    }
    if !(a0 > 0.0 && a_max >= a0 && a_max.is_finite()) {
        return Err(SimError::InvalidCollar(format!("need 0 < a0 <= a_max, got a0 = {a0}, a_max = {a_max}")));
    }
    let (a, omega_mask) = (0..grid.len())
        .map(|idx| {
            let d = grid.dist_to_boundary(idx);
            (damping_profile(d, width, a0, a_max), d <= width)
        })
        .unzip();
    Ok(DampingField { a, omega_mask, a0, a_max, width })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_d_profile() {
        assert_eq!(damping_profile(0.05, 0.1, 0.5, 2.0), 2.0);
        assert_eq!(damping_profile(0.2, 0.1, 0.5, 2.0), 0.0);
        assert_eq!(damping_profile(0.1, 0.1, 0.5, 2.0), 0.5);
        let grid = Grid::new_1d(1.0, 201).unwrap();
        let field = build_damping(&grid, 0.1, 0.5, 2.0).unwrap();
        for idx in 0..grid.len() {
            let d = grid.dist_to_boundary(idx);
            assert!(field.a[idx] >= 0.0);
            if d <= 0.1 {
                assert!(field.omega_mask[idx]);
                assert!(field.a[idx] >= 0.5);
            } else {
                assert!(!field.omega_mask[idx]);
            }
        }
    }

    #[test]
    fn profile_is_c1() {
        let (w, a0, am) = (0.1, 0.5, 2.0);
        let h = 1e-7;
        for knot in [0.05, 0.1, 0.2] {
            let left = (damping_profile(knot, w, a0, am) - damping_profile(knot - h, w, a0, am)) / h;
            let right = (damping_profile(knot + h, w, a0, am) - damping_profile(knot, w, a0, am)) / h;
            assert!(left.abs() < 1e-3 && right.abs() < 1e-3, "knot {knot}");
        }
    }

    #[test]
    fn two_d_mask() {
        let grid = Grid::new_2d([1.0, 1.0], [41, 41]).unwrap();
        let field = build_damping(&grid, 0.1, 1.0, 1.0).unwrap();
        for idx in 0..grid.len() {
            let [x, y] = grid.position(idx);
            let d = x.min(1.0 - x).min(y).min(1.0 - y);
            assert_eq!(field.omega_mask[idx], d <= 0.1 + 1e-12, "({x}, {y})");
        }
    }

    #[test]
    fn invalid_collar() {
        let grid = Grid::new_1d(1.0, 11).unwrap();
        assert!(matches!(build_damping(&grid, 0.6, 1.0, 1.0), Err(SimError::InvalidCollar(_))));
        assert!(matches!(build_damping(&grid, 0.1, 0.0, 1.0), Err(SimError::InvalidCollar(_))));
    }
}
