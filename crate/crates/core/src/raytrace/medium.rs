use std::fmt;
use std::sync::Arc;

use super::RayError;

pub type Vector<const D: usize> = [f64; D];
pub type Matrix<const D: usize> = [[f64; D]; D];

type ScalarField<const D: usize> = Arc<dyn Fn(&Vector<D>) -> f64 + Send + Sync>;
type MatrixField<const D: usize> = Arc<dyn Fn(&Vector<D>) -> Matrix<D> + Send + Sync>;

/// Density `ρ(x)` and stiffness `K(x)` of an inhomogeneous medium, together with
/// their first derivatives.
#[derive(Clone)]
pub enum MediumFields<const D: usize> {
    /// Constant `ρ` and `K`.
    Constant { rho: f64, k: Matrix<D> },
    /// `ρ(x) = 1 + curvature·|x − center|²`, `K = I`.
    RadialDensity { center: Vector<D>, curvature: f64 },
    /// Constant `ρ`, `K = diag(base_i·exp(slope_i·x_i))`.
    DiagonalAnisotropic { rho: f64, base: Vector<D>, slope: Vector<D> },
    /// User-supplied fields; derivatives by centered differences with step `fd_step`.
    Sampled { rho: ScalarField<D>, k: MatrixField<D>, fd_step: f64 },
}

impl<const D: usize> fmt::Debug for MediumFields<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MediumFields::Constant { rho, k } => f.debug_struct("Constant").field("rho", rho).field("k", k).finish(),
            MediumFields::RadialDensity { center, curvature } => {
                f.debug_struct("RadialDensity").field("center", center).field("curvature", curvature).finish()
            }
            MediumFields::DiagonalAnisotropic { rho, base, slope } => f
                .debug_struct("DiagonalAnisotropic")
                .field("rho", rho)
                .field("base", base)
                .field("slope", slope)
                .finish(),
            MediumFields::Sampled { fd_step, .. } => {
                f.debug_struct("Sampled").field("fd_step", fd_step).finish_non_exhaustive()
            }
        }
    }
}

pub(crate) fn identity<const D: usize>() -> Matrix<D> {
    let mut m = [[0.0; D]; D];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub(crate) fn quad<const D: usize>(m: &Matrix<D>, a: &Vector<D>, b: &Vector<D>) -> f64 {
    let mut acc = 0.0;
    for i in 0..D {
        for j in 0..D {
            acc += a[i] * m[i][j] * b[j];
        }
    }
    acc
}

pub(crate) fn mat_vec<const D: usize>(m: &Matrix<D>, v: &Vector<D>) -> Vector<D> {
    let mut out = [0.0; D];
    for i in 0..D {
        out[i] = (0..D).map(|j| m[i][j] * v[j]).sum();
    }
    out
}

/// Inverse of a small SPD matrix by Gauss-Jordan elimination with partial pivoting.
pub(crate) fn invert<const D: usize>(m: &Matrix<D>) -> Option<Matrix<D>> {
    let mut a = *m;
    let mut inv = identity::<D>();
    for col in 0..D {
        let pivot = (col..D).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col] == 0.0 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..D {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for row in 0..D {
            if row != col {
                let factor = a[row][col];
                for j in 0..D {
                    a[row][j] -= factor * a[col][j];
                    inv[row][j] -= factor * inv[col][j];
                }
            }
        }
    }
    Some(inv)
}

/// Sylvester's criterion on leading minors (exact for `D ≤ 2`, which is all the
/// tracer supports).
fn is_spd<const D: usize>(m: &Matrix<D>) -> bool {
    for i in 0..D {
        for j in 0..i {
            if (m[i][j] - m[j][i]).abs() > 1e-12 * (m[i][j].abs() + m[j][i].abs()).max(1.0) {
                return false;
            }
        }
    }
    match D {
        1 => m[0][0] > 0.0,
        2 => m[0][0] > 0.0 && m[0][0] * m[1][1] - m[0][1] * m[1][0] > 0.0,
        _ => false,
    }
}

impl<const D: usize> MediumFields<D> {
    /// The test medium `ρ(x) = 1 + |x|²/4`, `K = I`.
    pub fn radial() -> Self {
        MediumFields::RadialDensity { center: [0.0; D], curvature: 0.25 }
    }

    pub fn trivial() -> Self {
        MediumFields::Constant { rho: 1.0, k: identity() }
    }

    pub fn sampled<R, K>(rho: R, k: K, extent: f64) -> Self
    where
        R: Fn(&Vector<D>) -> f64 + Send + Sync + 'static,
        K: Fn(&Vector<D>) -> Matrix<D> + Send + Sync + 'static,
    {
        MediumFields::Sampled { rho: Arc::new(rho), k: Arc::new(k), fd_step: 1e-6 * extent }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, MediumFields::Constant { .. })
    }

    pub fn rho(&self, x: &Vector<D>) -> f64 {
        match self {
            MediumFields::Constant { rho, .. } | MediumFields::DiagonalAnisotropic { rho, .. } => *rho,
            MediumFields::RadialDensity { center, curvature } => {
                let r2: f64 = (0..D).map(|i| (x[i] - center[i]).powi(2)).sum();
                1.0 + curvature * r2
            }
            MediumFields::Sampled { rho, .. } => rho(x),
        }
    }

    pub fn k(&self, x: &Vector<D>) -> Matrix<D> {
        match self {
            MediumFields::Constant { k, .. } => *k,
            MediumFields::RadialDensity { .. } => identity(),
            MediumFields::DiagonalAnisotropic { base, slope, .. } => {
                let mut m = [[0.0; D]; D];
                for i in 0..D {
                    m[i][i] = base[i] * (slope[i] * x[i]).exp();
                }
                m
            }
            MediumFields::Sampled { k, .. } => k(x),
        }
    }

    pub fn grad_rho(&self, x: &Vector<D>) -> Vector<D> {
        match self {
            MediumFields::Constant { .. } | MediumFields::DiagonalAnisotropic { .. } => [0.0; D],
            MediumFields::RadialDensity { center, curvature } => {
                let mut g = [0.0; D];
                for i in 0..D {
                    g[i] = 2.0 * curvature * (x[i] - center[i]);
                }
                g
            }
            MediumFields::Sampled { rho, fd_step, .. } => {
                let mut g = [0.0; D];
                for (m, gm) in g.iter_mut().enumerate() {
                    let (mut xp, mut xm) = (*x, *x);
                    xp[m] += fd_step;
                    xm[m] -= fd_step;
                    *gm = (rho(&xp) - rho(&xm)) / (2.0 * fd_step);
                }
                g
            }
        }
    }

    /// `∂K/∂x_m` for each `m`.
    pub fn grad_k(&self, x: &Vector<D>) -> [Matrix<D>; D] {
        let mut out = [[[0.0; D]; D]; D];
        match self {
            MediumFields::Constant { .. } | MediumFields::RadialDensity { .. } => {}
            MediumFields::DiagonalAnisotropic { base, slope, .. } => {
                for m in 0..D {
                    out[m][m][m] = slope[m] * base[m] * (slope[m] * x[m]).exp();
                }
            }
            MediumFields::Sampled { k, fd_step, .. } => {
                for (m, dm) in out.iter_mut().enumerate() {
                    let (mut xp, mut xm) = (*x, *x);
                    xp[m] += fd_step;
                    xm[m] -= fd_step;
                    let (kp, km) = (k(&xp), k(&xm));
                    for i in 0..D {
                        for j in 0..D {
                            dm[i][j] = (kp[i][j] - km[i][j]) / (2.0 * fd_step);
                        }
                    }
                }
            }
        }
        out
    }

    /// `M = K/ρ`, the inverse of the metric `G`.
    pub fn speed_matrix(&self, x: &Vector<D>) -> Matrix<D> {
        let rho = self.rho(x);
        let mut m = self.k(x);
        m.iter_mut().flatten().for_each(|v| *v /= rho);
        m
    }

    /// `G = (K/ρ)⁻¹`.
    pub fn metric(&self, x: &Vector<D>) -> Option<Matrix<D>> {
        invert(&self.speed_matrix(x))
    }

    /// `∂(K/ρ)/∂x_m = ∂K/ρ − K·∂ρ/ρ²`.
    pub fn grad_speed_matrix(&self, x: &Vector<D>) -> [Matrix<D>; D] {
        let rho = self.rho(x);
        let k = self.k(x);
        let grho = self.grad_rho(x);
        let mut dk = self.grad_k(x);
        for (m, dm) in dk.iter_mut().enumerate() {
            for i in 0..D {
                for j in 0..D {
                    dm[i][j] = dm[i][j] / rho - k[i][j] * grho[m] / (rho * rho);
                }
            }
        }
        dk
    }

    /// Checks `ρ > 0` and `K` SPD at the given points.
    pub fn validate(&self, points: &[Vector<D>]) -> Result<(), RayError> {
        if !(1..=2).contains(&D) {
            return Err(RayError::InvalidMedium(format!("dimension {D} is not supported")));
        }
        for x in points {
            let rho = self.rho(x);
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(RayError::InvalidMedium(format!("rho = {rho} at {x:?}")));
            }
            if !is_spd(&self.k(x)) {
                return Err(RayError::InvalidMedium(format!("K is not SPD at {x:?}")));
            }
        }
        Ok(())
    }
}
