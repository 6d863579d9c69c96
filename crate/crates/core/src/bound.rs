//! Sample-compression generalization bound and confidence schedule.
//!
//! For an `(α, m)`-compression of a sample of size `n`,
//!
//! ```text
//! Q(n, α, m, δ) = n/(n−m)·α
//!               + c_linear·(m·ln n + ln(1/δ))/(n−m)
//!               + sqrt(c_sqrt·((n·m/(n−m))·α·ln n + ln(1/δ))/(n−m))
//! ```
//!
//! The constants are configurable; both default to 2.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub c_linear: f64,
    pub c_sqrt: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self { c_linear: 2.0, c_sqrt: 2.0 }
    }
}

impl BoundParams {
    pub fn new(c_linear: f64, c_sqrt: f64) -> Result<Self> {
        if !(c_linear > 0.0 && c_linear.is_finite() && c_sqrt > 0.0 && c_sqrt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bound constants must be positive, got ({c_linear}, {c_sqrt})"
            )));
        }
        Ok(Self { c_linear, c_sqrt })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInput {
    pub n: usize,
    pub alpha: f64,
    pub m: usize,
    pub delta: f64,
}

impl BoundInput {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("sample size must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!("alpha {} outside [0,1]", self.alpha)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta {} outside (0,1)", self.delta)));
        }
        if self.m >= self.n {
            return Err(Error::CompressionTooLarge { m: self.m, n: self.n });
        }
        Ok(())
    }
}

pub fn q_bound(input: BoundInput, params: BoundParams) -> Result<f64> {
    input.validate()?;
    let BoundInput { n, alpha, m, delta } = input;
    let (nf, mf) = (n as f64, m as f64);
    let rest = nf - mf;
    let ln_n = nf.ln();
    let ln_inv_delta = (1.0 / delta).ln();
    let scaled = nf / rest * alpha;
    let linear = params.c_linear * (mf * ln_n + ln_inv_delta) / rest;
    let radical = params.c_sqrt * ((nf * mf / rest) * alpha * ln_n + ln_inv_delta) / rest;
    Ok(scaled + linear + radical.sqrt())
}

/// `δ_n = min(1/2, n⁻²)`: summable, and decays slower than any `e^{−cn}`.
pub fn delta_schedule(n: usize) -> f64 {
    let n = n.max(1) as f64;
    (1.0 / (n * n)).min(0.5)
}

/// Number of points in the α grid used by [`property3_gap`].
pub const ALPHA_GRID: usize = 1001;

/// `max_α Q(n, α, 2m, δ_n) − α` over an evenly spaced grid on `[0,1]`.
pub fn property3_gap(n: usize, m: usize, params: BoundParams) -> Result<f64> {
    let delta = delta_schedule(n);
    let mut gap = f64::NEG_INFINITY;
    for i in 0..ALPHA_GRID {
        let alpha = i as f64 / (ALPHA_GRID - 1) as f64;
        let q = q_bound(BoundInput { n, alpha, m: 2 * m, delta }, params)?;
        gap = gap.max(q - alpha);
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: usize, alpha: f64, m: usize, delta: f64) -> f64 {
        q_bound(BoundInput { n, alpha, m, delta }, BoundParams::default()).unwrap()
    }

    #[test]
    fn collapses_without_compression_or_error() {
        for &(n, delta) in &[(10usize, 0.1f64), (1000, 0.01), (12345, 1e-6)] {
            let l = (1.0 / delta).ln();
            let nf = n as f64;
            let expected = 2.0 * l / nf + (2.0 * l / nf).sqrt();
            assert!((q(n, 0.0, 0, delta) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn monotone_examples() {
        assert!(q(1000, 0.2, 10, 0.01) < q(1000, 0.3, 10, 0.01));
        assert!(q(1000, 0.1, 5, 0.01) < q(1000, 0.1, 50, 0.01));
    }

    #[test]
    fn undefined_when_compression_too_large() {
        let r = q_bound(BoundInput { n: 10, alpha: 0.0, m: 10, delta: 0.1 }, BoundParams::default());
        assert!(matches!(r, Err(Error::CompressionTooLarge { m: 10, n: 10 })));
        assert!(q_bound(BoundInput { n: 10, alpha: 1.5, m: 1, delta: 0.1 }, BoundParams::default()).is_err());
        assert!(q_bound(BoundInput { n: 10, alpha: 0.5, m: 1, delta: 1.0 }, BoundParams::default()).is_err());
        assert!(BoundParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn delta_schedule_examples() {
        assert_eq!(delta_schedule(1), 0.5);
        assert!((delta_schedule(10) - 0.01).abs() < 1e-18);
        assert!((delta_schedule(1000) - 1e-6).abs() < 1e-20);
    }

    #[test]
    fn property3_gap_shrinks() {
        let p = BoundParams::default();
        let small = property3_gap(1000, 10, p).unwrap();
        let large = property3_gap(1_000_000, 10, p).unwrap();
        assert!(large < small);
        assert!(large >= 0.0);
        assert!(large <= 0.1, "gap at n=1e6, m=10 is {large}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]
        #[test]
        fn dominates_scaled_error(n in 2usize..100_000, a in 0.0f64..=1.0, frac in 0.0f64..1.0, d in 1e-9f64..0.999) {
            let m = ((n - 1) as f64 * frac) as usize;
            let v = q(n, a, m, d);
            let scaled = n as f64 / (n - m) as f64 * a;
            prop_assert!(v >= scaled);
            prop_assert!(scaled >= a);
        }
    }
}
