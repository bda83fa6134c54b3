//! Natural-log binary entropy, linear enclosures of it, and log-binomials.
//!
//! `H(x) = -x ln x - (1-x) ln(1-x)` with `H(0) = H(1) = 0`. `H` is concave, so
//! the chord through two points lies below it on that interval and every
//! tangent lies above it on all of `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real number known to lie in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct UnitValue(f64);

impl UnitValue {
    pub fn new(x: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&x) {
            Ok(Self(x))
        } else {
            Err(Error::Domain {
                value: x,
                domain: "[0, 1]",
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Binary entropy in nats.
pub fn entropy(x: UnitValue) -> f64 {
    entropy_unchecked(x.0)
}

/// Binary entropy without the domain check. Arguments outside `(0, 1)` map to 0.
#[inline]
pub fn entropy_unchecked(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.ln() - (1.0 - x) * (-x).ln_1p()
    }
}

/// `H'(x) = ln((1-x)/x)`.
#[inline]
pub fn entropy_derivative(x: f64) -> f64 {
    ((1.0 - x) / x).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSide {
    Lower,
    Upper,
}

/// An affine function `intercept + slope * x` bounding `H` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearBound {
    pub intercept: f64,
    pub slope: f64,
    pub lo: f64,
    pub hi: f64,
    pub side: BoundSide,
}

impl LinearBound {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

fn check_interval(p: f64, q: f64) -> Result<()> {
    UnitValue::new(p)?;
    UnitValue::new(q)?;
    if p > q {
        return Err(Error::InvalidParameter(format!(
            "interval [{p}, {q}] is reversed"
        )));
    }
    Ok(())
}

/// The chord of `H` over `[p, q]`. Lies at or below `H` on that interval.
pub fn chord_lower(p: f64, q: f64) -> Result<LinearBound> {
    check_interval(p, q)?;
    let hp = entropy_unchecked(p);
    let hq = entropy_unchecked(q);
    let slope = if q > p { (hq - hp) / (q - p) } else { 0.0 };
    Ok(LinearBound {
        intercept: hp - slope * p,
        slope,
        lo: p,
        hi: q,
        side: BoundSide::Lower,
    })
}

/// The tangent of `H` at the midpoint of `[p, q]`. Lies at or above `H`
/// everywhere on `[0, 1]`.
pub fn tangent_upper(p: f64, q: f64) -> Result<LinearBound> {
    check_interval(p, q)?;
    let m = 0.5 * (p + q);
    if m <= 0.0 || m >= 1.0 {
        return Err(Error::Domain {
            value: m,
            domain: "(0, 1) for the tangent point",
        });
    }
    let slope = entropy_derivative(m);
    Ok(LinearBound {
        intercept: entropy_unchecked(m) - slope * m,
        slope,
        lo: p,
        hi: q,
        side: BoundSide::Upper,
    })
}

/// `ln C(n, k)`, or `-inf` when `k < 0` or `k > n` (the coefficient is zero).
pub fn log_binomial(n: i64, k: i64) -> f64 {
    if n < 0 || k < 0 || k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k) as u64;
    if k == 0 {
        return 0.0;
    }
    statrs::function::factorial::ln_binomial(n as u64, k)
}

/// `|ln C(n, k) / n - H(k / n)|`.
pub fn stirling_gap(n: u64, k: u64) -> Result<f64> {
    if n == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "stirling_gap needs 0 <= k <= n, n >= 1 (got n={n}, k={k})"
        )));
    }
    if k == 0 || k == n {
        return Ok(0.0);
    }
    let nf = n as f64;
    Ok((log_binomial(n as i64, k as i64) / nf - entropy_unchecked(k as f64 / nf)).abs())
}

/// The Stirling-type envelope `2 ln(n) / n`.
pub fn stirling_envelope(n: u64) -> f64 {
    2.0 * (n as f64).ln() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn h(x: f64) -> f64 {
        entropy(UnitValue::new(x).unwrap())
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(h(0.0), 0.0);
        assert_eq!(h(1.0), 0.0);
        assert!((h(0.5) - LN_2).abs() < 1e-15);
        // 0.2301 -> 0.5393971443..., from a 30-digit evaluation of the formula
        assert!((h(0.2301) - 0.539_397_144_387_874_7).abs() < 1e-14, "{}", h(0.2301));
    }

    #[test]
    fn domain_is_enforced() {
        assert!(UnitValue::new(-0.01).is_err());
        assert!(UnitValue::new(1.5).is_err());
        assert!(UnitValue::new(f64::NAN).is_err());
    }

    #[test]
    fn chord_examples() {
        let c = chord_lower(0.0, 1.0).unwrap();
        assert_eq!((c.intercept, c.slope), (0.0, 0.0));
        let c = chord_lower(0.37, 0.37).unwrap();
        assert_eq!(c.slope, 0.0);
        assert_eq!(c.eval(0.37), h(0.37));
        let c = chord_lower(0.3, 0.4).unwrap();
        assert!(c.eval(0.35) < h(0.35));
        assert!(chord_lower(0.4, 0.3).is_err());
    }

    #[test]
    fn tangent_examples() {
        let t = tangent_upper(0.0, 1.0).unwrap();
        assert_eq!(t.slope, 0.0);
        assert!((t.intercept - LN_2).abs() < 1e-15);
        let t = tangent_upper(0.2, 0.4).unwrap();
        assert!((t.slope - (7.0f64 / 3.0).ln()).abs() < 1e-12);
        let t = tangent_upper(0.6, 0.6).unwrap();
        assert!((t.eval(0.6) - h(0.6)).abs() < 1e-15);
        assert!(tangent_upper(0.0, 0.0).is_err());
        assert!(tangent_upper(1.0, 1.0).is_err());
    }

    #[test]
    fn log_binomial_examples() {
        assert!((log_binomial(4, 2) - 6f64.ln()).abs() < 1e-12);
        assert_eq!(log_binomial(17, 0), 0.0);
        assert_eq!(log_binomial(5, 6), f64::NEG_INFINITY);
        assert_eq!(log_binomial(5, -1), f64::NEG_INFINITY);
    }

    #[test]
    fn stirling_examples() {
        assert!(stirling_gap(1000, 500).unwrap() < 0.013_816);
        assert_eq!(stirling_gap(64, 0).unwrap(), 0.0);
        let g = stirling_gap(128, 1).unwrap();
        assert!(g < 1.0 / 128.0 && g > 0.9 / 128.0, "{g}");
        assert!(g < stirling_envelope(128));
        assert!(stirling_gap(0, 0).is_err());
    }

    #[test]
    fn stirling_property_holds() {
        for n in [128u64, 512, 2048] {
            let env = stirling_envelope(n);
            for k in 0..=n {
                assert!(stirling_gap(n, k).unwrap() < env, "n={n} k={k}");
            }
        }
    }
}
