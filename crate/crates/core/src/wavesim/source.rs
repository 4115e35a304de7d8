//! The source `f(u) = |u|^{p−1}u`, its truncation `f_k` and primitive `F_k`.

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    /// Growth exponent, `p ≥ 1`.
    pub p: f64,
    /// Truncation level; `f64::INFINITY` for the untruncated source.
    pub k: f64,
}

impl SourceSpec {
    pub fn new(p: f64, k: Option<f64>) -> Result<Self, SimError> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(SimError::InvalidConfig(format!("source exponent p >= 1, got {p}")));
        }
        let k = k.unwrap_or(f64::INFINITY);
        if !(k > 0.0) {
            return Err(SimError::InvalidConfig(format!("truncation level k > 0, got {k}")));
        }
        Ok(SourceSpec { p, k })
    }

    /// Untruncated `f(s)`.
    pub fn f(&self, s: f64) -> f64 {
        if self.p == 3.0 {
            s * s * s
        } else if self.p == 1.0 {
            s
        } else {
            s.abs().powf(self.p - 1.0) * s
        }
    }

    fn potential(&self, s: f64) -> f64 {
        let a = s.abs();
        if self.p == 3.0 {
            let a2 = a * a;
            a2 * a2 / 4.0
        } else {
            a.powf(self.p + 1.0) / (self.p + 1.0)
        }
    }

    pub fn fk(&self, s: f64) -> f64 {
        truncate_f(self, self.k, s)
    }

    pub fn big_fk(&self, s: f64) -> f64 {
        primitive_f(self, self.k, s)
    }
}

/// `f(s)` for `|s| ≤ k`, `f(±k)` beyond.
pub fn truncate_f(src: &SourceSpec, k: f64, s: f64) -> f64 {
    if s > k {
        src.f(k)
    } else if s < -k {
        src.f(-k)
    } else {
        src.f(s)
    }
}

/// `F_k(s) = ∫₀ˢ f_k`: `|s|^{p+1}/(p+1)` inside `[−k, k]`, continued linearly with
/// slope `f(±k)` outside.
pub fn primitive_f(src: &SourceSpec, k: f64, s: f64) -> f64 {
    if s.abs() <= k {
        src.potential(s)
    } else {
        src.potential(k) + src.f(k) * (s.abs() - k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cubic() -> SourceSpec {
        SourceSpec::new(3.0, None).unwrap()
    }

    #[test]
    fn truncation_examples() {
        let src = cubic();
        assert_eq!(truncate_f(&src, 2.0, 3.0), 8.0);
        assert_eq!(truncate_f(&src, 2.0, 1.0), 1.0);
        assert_eq!(truncate_f(&src, 2.0, -3.0), -8.0);
    }

    #[test]
    fn primitive_examples() {
        let src = cubic();
        assert_eq!(primitive_f(&src, 2.0, 3.0), 12.0);
        assert_eq!(primitive_f(&src, 2.0, 1.0), 0.25);
        assert_eq!(primitive_f(&src, 2.0, 0.0), 0.0);
        assert_eq!(primitive_f(&src, 2.0, -3.0), 12.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SourceSpec::new(0.5, None).is_err());
        assert!(SourceSpec::new(2.0, Some(0.0)).is_err());
    }

    proptest! {
        #[test]
        fn primitive_bounds(p in 1.0f64..5.0, k in 0.1f64..10.0, s in -20.0f64..20.0) {
            let src = SourceSpec::new(p, Some(k)).unwrap();
            let big = primitive_f(&src, k, s);
            prop_assert!(big >= 0.0);
            // |F_k(s)| <= c (|s|^2 + |s|^{p+1}) with c = 1
            let a = s.abs();
            prop_assert!(big <= (a * a + a.powf(p + 1.0)) * (1.0 + 1e-12));
            // 0 <= F(s) <= f(s) s for the untruncated source
            let full = primitive_f(&src, f64::INFINITY, s);
            prop_assert!(full <= src.f(s) * s * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn truncation_is_lipschitz(p in 1.0f64..4.0, k in 0.1f64..3.0, a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let src = SourceSpec::new(p, Some(k)).unwrap();
            let lip = p * k.powf(p - 1.0);
            let diff = (truncate_f(&src, k, a) - truncate_f(&src, k, b)).abs();
            prop_assert!(diff <= lip * (a - b).abs() * (1.0 + 1e-9) + 1e-12);
        }
    }
}
