//! Scalar arithmetic shared by the fast (`f64`) and refined (120-bit binary
//! float) cell evaluations.

use std::ops::{Add, Div, Mul, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

pub(crate) const REFINED_BITS: usize = 120;

pub(crate) trait Real:
    Clone
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn ln(&self) -> Self;
    fn to_f64(&self) -> f64;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn ln(&self) -> Self {
        f64::ln(*self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

pub(crate) type Big = FBig<HalfEven, 2>;

#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub(crate) struct Refined(pub Big);

impl Real for Refined {
    fn from_f64(x: f64) -> Self {
        // f64 values convert exactly
        let v = Big::try_from(x).expect("finite value");
        Refined(v.with_precision(REFINED_BITS).value())
    }

    fn ln(&self) -> Self {
        Refined(self.0.ln())
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
}

macro_rules! refined_op {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr for Refined {
            type Output = Refined;
            fn $f(self, rhs: Refined) -> Refined {
                Refined(self.0 $op rhs.0)
            }
        }
    };
}
refined_op!(Add, add, +);
refined_op!(Sub, sub, -);
refined_op!(Mul, mul, *);
refined_op!(Div, div, /);

pub(crate) fn entropy<R: Real>(x: &R) -> R {
    let one = R::one();
    if *x <= R::zero() || *x >= one {
        return R::zero();
    }
    let y = one - x.clone();
    R::zero() - x.clone() * x.ln() - y.clone() * y.ln()
}

/// `a + b·v`.
#[derive(Debug, Clone)]
pub(crate) struct Affine<R> {
    pub a: R,
    pub b: R,
}

#[cfg(test)]
impl<R: Real> Affine<R> {
    pub fn eval(&self, v: R) -> R {
        self.a.clone() + self.b.clone() * v
    }
}

pub(crate) fn chord<R: Real>(p: &R, q: &R) -> Affine<R> {
    let hp = entropy(p);
    if q <= p {
        return Affine { a: hp, b: R::zero() };
    }
    let b = (entropy(q) - hp.clone()) / (q.clone() - p.clone());
    Affine {
        a: hp - b.clone() * p.clone(),
        b,
    }
}

/// Midpoint tangent; on a degenerate interval at 0 or 1 the constant 0,
/// which is exact there.
pub(crate) fn tangent<R: Real>(p: &R, q: &R) -> Affine<R> {
    let one = R::one();
    let m = (p.clone() + q.clone()) / R::from_f64(2.0);
    if m <= R::zero() || m >= one {
        return Affine {
            a: R::zero(),
            b: R::zero(),
        };
    }
    let b = ((one - m.clone()) / m.clone()).ln();
    Affine {
        a: entropy(&m) - b.clone() * m,
        b,
    }
}

/// `[lo, hi]` clamped to `[0, 1]`.
pub(crate) fn unit<R: Real>(lo: R, hi: R) -> (R, R) {
    let clamp = |v: R| {
        if v < R::zero() {
            R::zero()
        } else if v > R::one() {
            R::one()
        } else {
            v
        }
    };
    (clamp(lo), clamp(hi))
}

pub(crate) fn min_r<R: Real>(a: R, b: R) -> R {
    if b < a {
        b
    } else {
        a
    }
}

pub(crate) fn max_r<R: Real>(a: R, b: R) -> R {
    if b > a {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refined_entropy_agrees_with_f64() {
        for x in [1e-6, 0.1, 0.2301, 0.5, 0.9] {
            let a = entropy(&x);
            let b = entropy(&Refined::from_f64(x)).to_f64();
            assert!((a - b).abs() < 1e-15, "{x}: {a} vs {b}");
        }
        assert_eq!(entropy(&Refined::from_f64(0.0)).to_f64(), 0.0);
    }

    #[test]
    fn bounds_bracket_entropy() {
        let (p, q) = (0.21, 0.37);
        let c = chord(&p, &q);
        let t = tangent(&p, &q);
        for i in 0..=20 {
            let v = p + (q - p) * i as f64 / 20.0;
            assert!(c.eval(v) <= entropy(&v) + 1e-15);
            assert!(t.eval(v) >= entropy(&v) - 1e-15);
        }
        let t0 = tangent(&0.0, &0.0);
        assert_eq!((t0.a, t0.b), (0.0, 0.0));
    }
}
