//! Scalar monotone-increasing maps on `[0, x_max]` and their numeric inverses.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Iteration cap shared by every bisection in the crate.
pub const BISECTION_CAP: usize = 200;

/// Default absolute tolerance for [`invert_monotone`].
pub const DEFAULT_INVERSION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonotoneError {
    #[error("value {y} outside the range [0, {max}] of the function")]
    OutOfRange { y: f64, max: f64 },
    #[error("bisection did not reach tolerance {tol} for target {y}")]
    NoConvergence { y: f64, tol: f64 },
    #[error("invalid samples: {0}")]
    InvalidSamples(String),
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Linear { slope: f64 },
    Power { coeff: f64, exponent: f64 },
    Grid { xs: Arc<[f64]>, ys: Arc<[f64]> },
    Closure { forward: ScalarFn, inverse: Option<ScalarFn> },
}

/// A monotone increasing map with `f(0) = 0`.
///
/// Closed forms (linear, power) carry exact inverses. Grid-backed functions use
/// piecewise-linear interpolation and extend beyond the last node with the last
/// slope. Closures may optionally carry an inverse; otherwise inversion falls
/// back to bisection on `[0, x_max]`.
#[derive(Clone)]
pub struct MonotoneFn {
    repr: Repr,
    x_max: f64,
    concave: bool,
}

impl fmt::Debug for MonotoneFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Linear { slope } => format!("Linear({slope})"),
            Repr::Power { coeff, exponent } => format!("Power({coeff}·x^{exponent})"),
            Repr::Grid { xs, .. } => format!("Grid({} nodes)", xs.len()),
            Repr::Closure { inverse, .. } => {
                format!("Closure(inverse: {})", inverse.is_some())
            }
        };
        f.debug_struct("MonotoneFn")
            .field("kind", &kind)
            .field("x_max", &self.x_max)
            .field("concave", &self.concave)
            .finish()
    }
}

/// Domain bound used when a caller does not supply one.
pub const DEFAULT_X_MAX: f64 = 1e9;

impl MonotoneFn {
    pub fn identity() -> Self {
        Self::linear(1.0)
    }

    pub fn linear(slope: f64) -> Self {
        assert!(slope > 0.0, "linear MonotoneFn needs a positive slope");
        MonotoneFn { repr: Repr::Linear { slope }, x_max: DEFAULT_X_MAX, concave: true }
    }

    /// `coeff · x^exponent`; concave when `exponent <= 1`.
    pub fn power(coeff: f64, exponent: f64) -> Self {
        assert!(coeff > 0.0 && exponent > 0.0, "power MonotoneFn needs positive parameters");
        MonotoneFn { repr: Repr::Power { coeff, exponent }, x_max: DEFAULT_X_MAX, concave: exponent <= 1.0 }
    }

    pub fn from_fn<F>(forward: F, x_max: f64, concave: bool) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        MonotoneFn { repr: Repr::Closure { forward: Arc::new(forward), inverse: None }, x_max, concave }
    }

    /// Closure with a known inverse.
    pub fn from_fn_pair<F, G>(forward: F, inverse: G, x_max: f64, concave: bool) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        MonotoneFn {
            repr: Repr::Closure { forward: Arc::new(forward), inverse: Some(Arc::new(inverse)) },
            x_max,
            concave,
        }
    }

    /// Piecewise-linear interpolant through `(xs[i], ys[i])`. The first node must be
    /// `(0, 0)` and both coordinates strictly increasing.
    pub fn from_samples(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, MonotoneError> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(MonotoneError::InvalidSamples("need at least two (x, y) pairs of equal length".into()));
        }
        if xs[0] != 0.0 || ys[0] != 0.0 {
            return Err(MonotoneError::InvalidSamples("first node must be (0, 0)".into()));
        }
        for w in xs.windows(2).zip(ys.windows(2)) {
            let (xw, yw) = w;
            if !(xw[1] > xw[0]) || !(yw[1] > yw[0]) {
                return Err(MonotoneError::InvalidSamples("samples must be strictly increasing".into()));
            }
        }
        let slopes: Vec<f64> = xs.windows(2).zip(ys.windows(2)).map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0])).collect();
        let concave = slopes.windows(2).all(|s| s[1] <= s[0] * (1.0 + 1e-12));
        let x_max = *xs.last().unwrap();
        Ok(MonotoneFn { repr: Repr::Grid { xs: xs.into(), ys: ys.into() }, x_max, concave })
    }

    pub fn with_x_max(mut self, x_max: f64) -> Self {
        self.x_max = x_max;
        self
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn is_concave(&self) -> bool {
        self.concave
    }

    /// Slope when the map is exactly linear.
    pub fn linear_slope(&self) -> Option<f64> {
        match self.repr {
            Repr::Linear { slope } => Some(slope),
            Repr::Power { coeff, exponent } if exponent == 1.0 => Some(coeff),
            _ => None,
        }
    }

    /// `(coeff, exponent)` when the map is an exact power law.
    pub fn power_law(&self) -> Option<(f64, f64)> {
        match self.repr {
            Repr::Linear { slope } => Some((slope, 1.0)),
            Repr::Power { coeff, exponent } => Some((coeff, exponent)),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match &self.repr {
            Repr::Linear { slope } => slope * x,
            Repr::Power { coeff, exponent } => coeff * x.powf(*exponent),
            Repr::Grid { xs, ys } => interpolate(xs, ys, x),
            Repr::Closure { forward, .. } => forward(x),
        }
    }

    /// Has an exact inverse available without bisection.
    pub fn has_closed_inverse(&self) -> bool {
        !matches!(&self.repr, Repr::Closure { inverse: None, .. })
    }

    /// Inverse evaluated to full double precision.
    ///
    /// Closed forms are exact. Otherwise bisection on `[0, x_max]` runs until the
    /// bracket is below one part in 10^15 of its upper end.
    pub fn inverse(&self, y: f64) -> Result<f64, MonotoneError> {
        if y < 0.0 || y.is_nan() {
            return Err(MonotoneError::OutOfRange { y, max: self.eval(self.x_max) });
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        match &self.repr {
            Repr::Linear { slope } => Ok(y / slope),
            Repr::Power { coeff, exponent } => Ok((y / coeff).powf(1.0 / exponent)),
            Repr::Grid { xs, ys } => Ok(interpolate(ys, xs, y)),
            Repr::Closure { inverse: Some(inv), .. } => Ok(inv(y)),
            Repr::Closure { forward, inverse: None } => {
                let top = forward(self.x_max);
                if y > top {
                    return Err(MonotoneError::OutOfRange { y, max: top });
                }
                Ok(bisect_increasing(|x| forward(x), y, 0.0, self.x_max))
            }
        }
    }

    /// Sampled invariant check: `f(0)=0`, strict increase, and midpoint
    /// concavity when flagged. Returns a description of the first failure.
    pub fn check_invariants(&self, upto: f64, n: usize) -> Result<(), String> {
        if self.eval(0.0) != 0.0 {
            return Err("f(0) != 0".into());
        }
        let n = n.max(3);
        let xs: Vec<f64> = (0..n).map(|i| upto * i as f64 / (n - 1) as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| self.eval(x)).collect();
        for i in 1..n {
            if !(ys[i] > ys[i - 1]) {
                return Err(format!("not strictly increasing near x = {}", xs[i]));
            }
        }
        if self.concave {
            for i in 1..n - 1 {
                let mid = 0.5 * (ys[i - 1] + ys[i + 1]);
                if ys[i] < mid - 1e-12 * ys[i + 1].abs().max(1.0) {
                    return Err(format!("midpoint concavity fails near x = {}", xs[i]));
                }
            }
        }
        Ok(())
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x >= xs[n - 1] {
        let slope = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
        return ys[n - 1] + slope * (x - xs[n - 1]);
    }
    let j = xs.partition_point(|&xi| xi <= x).max(1);
    let (x0, x1, y0, y1) = (xs[j - 1], xs[j], ys[j - 1], ys[j]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// High-precision bisection for an increasing `f` with `f(lo) <= y <= f(hi)`.
///
/// Stops when the bracket width drops below `1e-15·hi` (plus a denormal floor),
/// when the midpoint stagnates, or at [`BISECTION_CAP`] iterations.
pub(crate) fn bisect_increasing<F: Fn(f64) -> f64>(f: F, y: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi + 1e-300 {
            break;
        }
        if f(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bracketed bisection for `x` with `|f(x) − y| <= tol`.
///
/// The bracket is `[0, x_max]`. Bisection continues until the residual is within
/// `tol` and the bracket is no wider than `tol`, so the result is accurate in
/// both `x` and `y`. Capped at [`BISECTION_CAP`] iterations.
pub fn invert_monotone(f: &MonotoneFn, y: f64, tol: f64) -> Result<f64, MonotoneError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let top = f.eval(f.x_max());
    if y.is_nan() || y < 0.0 || y > top + tol {
        return Err(MonotoneError::OutOfRange { y, max: top });
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, f.x_max());
    for _ in 0..BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        let fm = f.eval(mid);
        if (fm - y).abs() <= tol && hi - lo <= tol {
            return Ok(mid);
        }
        if mid <= lo || mid >= hi {
            break;
        }
        if fm < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    if (f.eval(mid) - y).abs() <= tol {
        Ok(mid)
    } else {
        Err(MonotoneError::NoConvergence { y, tol })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear_inverse() {
        let f = MonotoneFn::linear(2.0);
        assert_abs_diff_eq!(invert_monotone(&f, 1.0, 1e-12).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn origin_is_fixed() {
        let f = MonotoneFn::identity();
        assert_eq!(invert_monotone(&f, 0.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn sqrt_plus_identity() {
        // x + sqrt(x) = 2 at x = 1
        let f = MonotoneFn::from_fn(|x| x + x.sqrt(), 100.0, false);
        let x = invert_monotone(&f, 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(x, 1.0, epsilon = 1e-11);
        assert_abs_diff_eq!(f.inverse(2.0).unwrap(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn out_of_range() {
        let f = MonotoneFn::from_fn(|x| x, 1.0, true);
        assert!(matches!(invert_monotone(&f, 2.0, 1e-10), Err(MonotoneError::OutOfRange { .. })));
        assert!(matches!(f.inverse(-1.0), Err(MonotoneError::OutOfRange { .. })));
    }

    #[test]
    fn discontinuity_reports_no_convergence() {
        let f = MonotoneFn::from_fn(|x| if x < 0.5 { x } else { x + 1.0 }, 2.0, false);
        assert!(matches!(invert_monotone(&f, 1.0, 1e-10), Err(MonotoneError::NoConvergence { .. })));
    }

    #[test]
    fn grid_interpolant() {
        let f = MonotoneFn::from_samples(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 3.0]).unwrap();
        assert!(f.is_concave());
        assert_abs_diff_eq!(f.eval(0.5), 1.0);
        assert_abs_diff_eq!(f.eval(2.0), 2.5);
        assert_abs_diff_eq!(f.eval(5.0), 4.0);
        assert_abs_diff_eq!(f.inverse(2.5).unwrap(), 2.0);
        assert!(MonotoneFn::from_samples(vec![0.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(MonotoneFn::from_samples(vec![0.5, 1.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn invariant_check_flags_convexity() {
        let f = MonotoneFn::from_fn(|x| x * x, 10.0, true);
        assert!(f.check_invariants(2.0, 50).is_err());
        let g = MonotoneFn::power(1.0, 0.5);
        assert!(g.check_invariants(2.0, 50).is_ok());
    }
}
