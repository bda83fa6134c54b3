//! Expansion profiles `e(α)`, the overlap profile `o(α)`, the six breakpoint
//! constants, and the closed-form side conditions they must satisfy.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::certifier::check_pairexp_degree;
use crate::error::{invalid, Error, Result};

/// A continuous piecewise-linear function given by its breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    points: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid("a profile needs at least two breakpoints"));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(invalid("breakpoints must be finite"));
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(invalid("breakpoint x-coordinates must strictly increase"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    /// Index of the segment holding `x`; breakpoints belong to the segment on
    /// their right, except the last one.
    fn segment(&self, x: f64) -> Result<usize> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return Err(Error::Domain {
                value: x,
                domain: "profile domain",
            });
        }
        let idx = self.points.partition_point(|p| p.0 <= x);
        Ok(idx.clamp(1, self.points.len() - 1) - 1)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let i = self.segment(x)?;
        let (x0, y0) = self.points[i];
        let (x1, y1) = self.points[i + 1];
        if x == x1 {
            return Ok(y1);
        }
        Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }

    /// Slope of the segment containing `x`, using the right-hand segment at
    /// interior breakpoints and the last segment at the right endpoint.
    pub fn slope(&self, x: f64) -> Result<f64> {
        let i = self.segment(x)?;
        let (x0, y0) = self.points[i];
        let (x1, y1) = self.points[i + 1];
        Ok((y1 - y0) / (x1 - x0))
    }

    /// One `x y` pair per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (x, y) in &self.points {
            let _ = writeln!(out, "{x} {y}");
        }
        out
    }

    /// Parses the `x y` line format; blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<f64> {
                tok.ok_or_else(|| Error::Parse {
                    line: i + 1,
                    msg: "expected two numbers".into(),
                })?
                .parse::<f64>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                })
            };
            let x = parse(it.next())?;
            let y = parse(it.next())?;
            if it.next().is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "trailing tokens".into(),
                });
            }
            points.push((x, y));
        }
        Self::new(points)
    }
}

/// Parses a decimal literal such as `0.2301` into an exact rational.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || invalid(format!("not a decimal number: {s:?}"));
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = BigRational::new(numer, denom);
    Ok(if neg { -value } else { value })
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn f(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// The six breakpoint constants together with the degree parameters the side
/// conditions are evaluated at.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileConstants {
    /// `C1..C6`, exact.
    pub c: [BigRational; 6],
    /// Integer part of the average degree (number of permutation overlays).
    pub degree: u32,
    /// Fractional part of the average degree.
    pub delta: f64,
    /// Pair-expansion ratio used by the pair degree condition.
    pub gamma: f64,
    /// Lower end of the interval on which the fractional bonus is applied in
    /// the pair-expansion argument.
    pub pair_eps1: f64,
}

impl ProfileConstants {
    /// `C2 = C5 = 1 - C1 - C3`, `C4 = 1 - C2`, `C6 = 1 - C3`.
    pub fn from_c1_c3(c1: BigRational, c3: BigRational) -> Self {
        let one = BigRational::one();
        let c2 = &one - &c1 - &c3;
        let c4 = &one - &c2;
        let c5 = c2.clone();
        let c6 = &one - &c3;
        Self {
            c: [c1, c2, c3, c4, c5, c6],
            degree: 5,
            delta: 0.325,
            gamma: 1.0,
            pair_eps1: 0.3,
        }
    }

    /// `C1 = 0.2301`, `C3 = 0.3322`, degree 5 + 0.325, `γ = 1`, `ε1 = 0.3`.
    pub fn theorem3() -> Self {
        Self::from_c1_c3(q(2301, 10_000), q(3322, 10_000))
    }

    pub fn c_f64(&self) -> [f64; 6] {
        std::array::from_fn(|i| f(&self.c[i]))
    }

    pub fn average_degree(&self) -> f64 {
        self.degree as f64 + self.delta
    }

    fn validate(&self) -> Result<()> {
        let zero = BigRational::zero();
        let one = BigRational::one();
        if self.c.iter().any(|v| *v <= zero || *v >= one) {
            return Err(invalid("profile constants must lie in (0, 1)"));
        }
        let [c1, _, c3, _, c5, _] = &self.c;
        if !(c1 < c3 && c3 < c5) {
            return Err(invalid("profile constants need C1 < C3 < C5"));
        }
        Ok(())
    }
}

/// `e(α)` through `[0,0], [C1,C2], [C3,C4], [C5,C6], [1,1]`.
pub fn make_e_profile(c: &ProfileConstants) -> Result<PiecewiseLinear> {
    c.validate()?;
    let v = c.c_f64();
    PiecewiseLinear::new(vec![
        (0.0, 0.0),
        (v[0], v[1]),
        (v[2], v[3]),
        (v[4], v[5]),
        (1.0, 1.0),
    ])
}

/// The profile through `[0,0], [1/4,1/2], [1/2,3/4], [1,1]`.
pub fn make_alon_capalbo_profile() -> PiecewiseLinear {
    PiecewiseLinear::new(vec![(0.0, 0.0), (0.25, 0.5), (0.5, 0.75), (1.0, 1.0)])
        .expect("static breakpoints are ordered")
}

/// `o(α)` on `[C3, 1]` through `[C3, C3-C1], [C5, C5-C1], [1, 1]`.
pub fn make_o_profile(c: &ProfileConstants) -> Result<PiecewiseLinear> {
    c.validate()?;
    let [c1, _, c3, _, c5, _] = &c.c;
    PiecewiseLinear::new(vec![
        (f(c3), f(&(c3 - c1))),
        (f(c5), f(&(c5 - c1))),
        (1.0, 1.0),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub holds: bool,
    /// Distance to violation; `0` means the condition is met with equality.
    pub slack: f64,
    /// Whether `holds` was decided in exact rational arithmetic.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub conditions: Vec<Condition>,
    pub pass: bool,
}

impl ConditionReport {
    pub fn get(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Evaluates every closed-form condition on the constants: the four ordering
/// and slope conditions on `C1..C6`, `α < e(α)`, the two degree conditions
/// near `α = 0` and `α = 1`, and the pair-expansion degree condition.
pub fn check_conditions(c: &ProfileConstants) -> ConditionReport {
    let mut out = Vec::new();
    let exact = |name: &str, holds: bool, slack: &BigRational| Condition {
        name: name.to_string(),
        holds,
        slack: f(slack),
        exact: true,
    };
    let zero = BigRational::zero();
    let one = BigRational::one();
    let [c1, c2, c3, c4, c5, c6] = &c.c;

    let in_unit = c
        .c
        .iter()
        .map(|v| v.clone().min(&one - v))
        .min()
        .expect("six constants");
    out.push(exact("constants in (0,1)", in_unit > zero, &in_unit));

    let s = (c3 - c1).min(c5 - c3);
    out.push(exact("numeq1: C1 < C3 < C5", s > zero, &s));

    let s = c2 + c4 - &one;
    out.push(exact("numeq2: C2 + C4 >= 1", s >= zero, &s));

    let s = &one - c1 - c2 - c3;
    out.push(exact("numeq3: C1 + C2 + C3 <= 1", s >= zero, &s));

    let ordered = c1 < c3 && c3 < c5 && c5 < &one;
    if ordered {
        let s1 = c2 / c1;
        let s2 = (c4 - c2) / (c3 - c1);
        let s3 = (c6 - c4) / (c5 - c3);
        let s4 = (&one - c6) / (&one - c5);
        let gaps = (&s1 - &s2).min(&s2 - &s3).min(&s3 - &s4);
        let holds = gaps > zero && s3 == one;
        let slack = if s3 == one { gaps } else { -(&s3 - &one).abs() };
        out.push(exact("numeq4: slope chain with middle slope 1", holds, &slack));
    } else {
        out.push(Condition {
            name: "numeq4: slope chain with middle slope 1".into(),
            holds: false,
            slack: f64::NAN,
            exact: true,
        });
    }

    let s = (c2 - c1).min(c4 - c3).min(c6 - c5);
    out.push(exact("e(a) > a on (0,1)", s > zero, &s));

    if ordered && *c1 > zero {
        let e0 = f(&(c2 / c1));
        let e1 = f(&((&one - c6) / (&one - c5)));
        let mut degree_row = |name: &str, d: f64, bound: f64| {
            let slack = d - bound;
            out.push(Condition {
                name: name.to_string(),
                holds: slack > 0.0,
                slack,
                exact: false,
            });
        };
        let avg = c.average_degree();
        let int = c.degree as f64;
        degree_row("d > 2 + e'(0)", avg, 2.0 + e0);
        degree_row("d > 1 + 2/e'(1)", avg, 1.0 + 2.0 / e1);
        degree_row("d_int > 2 + e'(0)", int, 2.0 + e0);
        degree_row("d_int > 1 + 2/e'(1)", int, 1.0 + 2.0 / e1);
    }

    let pair = match check_pairexp_degree(c.degree as f64, c.gamma, c.pair_eps1) {
        Ok(r) => Condition {
            name: "pairexp1: d > 1 + g(1-eps1)/(1-2 g eps1)".into(),
            holds: r.pass,
            slack: r.slack,
            exact: false,
        },
        Err(_) => Condition {
            name: "pairexp1: d > 1 + g(1-eps1)/(1-2 g eps1)".into(),
            holds: false,
            slack: f64::NEG_INFINITY,
            exact: false,
        },
    };
    out.push(pair);

    let pass = out.iter().all(|c| c.holds);
    ConditionReport {
        conditions: out,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theorem_profile() -> (ProfileConstants, PiecewiseLinear) {
        let c = ProfileConstants::theorem3();
        let e = make_e_profile(&c).unwrap();
        (c, e)
    }

    #[test]
    fn theorem3_constants_are_exact() {
        let (c, _) = theorem_profile();
        assert_eq!(c.c[1], q(4377, 10_000));
        assert_eq!(c.c[3], q(5623, 10_000));
        assert_eq!(c.c[4], q(4377, 10_000));
        assert_eq!(c.c[5], q(6678, 10_000));
        assert!((c.average_degree() - 5.325).abs() < 1e-15);
    }

    #[test]
    fn e_profile_examples() {
        let (_, e) = theorem_profile();
        assert_eq!(e.eval(0.2301).unwrap(), 0.4377);
        assert_eq!(e.eval(0.0).unwrap(), 0.0);
        assert_eq!(e.eval(1.0).unwrap(), 1.0);
        // e(0.5) = C6 + (0.5 - C5)(1 - C6)/(1 - C5)
        let expect = 0.6678 + (0.5 - 0.4377) * (1.0 - 0.6678) / (1.0 - 0.4377);
        assert!((e.eval(0.5).unwrap() - expect).abs() < 1e-15);
        assert!((e.eval(0.5).unwrap() - 0.704_60).abs() < 1e-5);
        assert!(e.eval(1.01).is_err());
        assert!(e.eval(-0.01).is_err());
    }

    #[test]
    fn alon_capalbo_examples() {
        let e = make_alon_capalbo_profile();
        assert_eq!(e.eval(0.25).unwrap(), 0.5);
        assert_eq!(e.eval(0.0).unwrap(), 0.0);
        assert_eq!(e.eval(0.375).unwrap(), 0.625);
    }

    #[test]
    fn o_profile_examples() {
        let (c, _) = theorem_profile();
        let o = make_o_profile(&c).unwrap();
        assert_eq!(o.eval(1.0).unwrap(), 1.0);
        assert!((o.eval(0.3322).unwrap() - 0.1021).abs() < 1e-15);
        assert!((o.eval(0.4377).unwrap() - 0.2076).abs() < 1e-15);
        assert!(o.eval(0.3).is_err());
    }

    #[test]
    fn slopes() {
        let (_, e) = theorem_profile();
        assert!((e.slope(0.4).unwrap() - 1.0).abs() < 1e-12);
        assert!((e.slope(0.1).unwrap() - 0.4377 / 0.2301).abs() < 1e-12);
        assert!((e.slope(0.1).unwrap() - 1.902_22).abs() < 1e-5);
        // right-continuous at a breakpoint
        assert_eq!(e.slope(0.2301).unwrap(), e.slope(0.25).unwrap());
        assert_eq!(e.slope(1.0).unwrap(), e.slope(0.9).unwrap());
        assert_eq!(e.eval(0.3322).unwrap(), 0.5623);
    }

    #[test]
    fn conditions_on_theorem3() {
        let (c, _) = theorem_profile();
        let r = check_conditions(&c);
        assert!(r.pass, "{r:#?}");
        assert_eq!(r.get("numeq2: C2 + C4 >= 1").unwrap().slack, 0.0);
        assert_eq!(r.get("numeq3: C1 + C2 + C3 <= 1").unwrap().slack, 0.0);
        let s = r.get("d > 2 + e'(0)").unwrap().slack;
        assert!((s - (5.325 - 2.0 - 0.4377 / 0.2301)).abs() < 1e-12);
        assert!((2.0 + 0.4377 / 0.2301 - 3.9022).abs() < 1e-4);
        let s = r.get("d > 1 + 2/e'(1)").unwrap().slack;
        let e1 = 0.3322 / (0.2301 + 0.3322);
        assert!((s - (5.325 - 1.0 - 2.0 / e1)).abs() < 1e-12);
    }

    #[test]
    fn conditions_detect_violations() {
        let mut c = ProfileConstants::theorem3();
        c.c[3] = q(5000, 10_000);
        let r = check_conditions(&c);
        assert!(!r.pass);
        assert!(!r.get("numeq2: C2 + C4 >= 1").unwrap().holds);
        let mut c = ProfileConstants::theorem3();
        c.degree = 3;
        c.delta = 0.0;
        let r = check_conditions(&c);
        assert!(!r.get("d > 2 + e'(0)").unwrap().holds);
    }

    #[test]
    fn ordering_violation_rejected() {
        let c = ProfileConstants::from_c1_c3(q(4, 10), q(3, 10));
        assert!(make_e_profile(&c).is_err());
    }

    #[test]
    fn text_format() {
        let (_, e) = theorem_profile();
        let back = PiecewiseLinear::from_text(&e.to_text()).unwrap();
        assert_eq!(back, e);
        assert!(PiecewiseLinear::from_text("0 0\n0 1\n").is_err());
        assert!(PiecewiseLinear::from_text("0 0\n1\n").is_err());
        let p = PiecewiseLinear::from_text("# comment\n0 0\n\n1 1\n").unwrap();
        assert_eq!(p.points().len(), 2);
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(parse_decimal("0.2301").unwrap(), q(2301, 10_000));
        assert_eq!(parse_decimal("-1.5").unwrap(), q(-3, 2));
        assert_eq!(parse_decimal("5").unwrap(), q(5, 1));
        assert!(parse_decimal("1e-3").is_err());
        assert!(parse_decimal(".").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn e_is_increasing_and_above_diagonal(a in 0.0005f64..0.9995, h in 1e-4f64..1e-3) {
                let (_, e) = theorem_profile();
                let b = (a + h).min(1.0);
                prop_assert!(e.eval(a).unwrap() > a);
                prop_assert!(e.eval(b).unwrap() > e.eval(a).unwrap());
            }

            #[test]
            fn o_profile_gap_is_c1_on_middle_segment(a in 0.3322f64..=0.4377) {
                let (c, _) = theorem_profile();
                let o = make_o_profile(&c).unwrap();
                prop_assert!((a - o.eval(a).unwrap() - 0.2301).abs() < 1e-12);
            }
        }

        #[test]
        fn slope_chain_decreases() {
            let (_, e) = theorem_profile();
            let p = e.points();
            let slopes: Vec<f64> = p.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
            assert!(slopes.windows(2).all(|w| w[0] > w[1]));
            assert!((slopes[2] - 1.0).abs() < 1e-12);
        }
    }
}
