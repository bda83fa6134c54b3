//! Failure probabilities for random permutation expanders: the union bounds
//! used in the existence proofs, the exact inclusion-exclusion value of
//! `p_{ℓr}`, the Bassalygo estimate, and a Monte Carlo oracle.

use std::fmt;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::log_binomial;
use crate::error::{invalid, Result};
use crate::randgraph::extra_edge_count;
use crate::rng::substream;

/// Largest `N` for which bounds are also assembled in exact rationals.
pub const EXACT_LIMIT: usize = 200;

/// An exact probability in `[0, 1]`, always reduced.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactProb(BigRational);

impl ExactProb {
    pub fn new(value: BigRational) -> Result<Self> {
        if value.is_negative() || value > BigRational::one() {
            return Err(invalid(format!("{value} is not a probability")));
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.0)
    }
}

impl fmt::Display for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Exact,
    LogDomain,
}

/// A union bound: natural log always, exact rational when `N ≤ EXACT_LIMIT`.
/// The bound may exceed 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundValue {
    pub log_value: f64,
    pub exact: Option<BigRational>,
    pub regime: Regime,
}

impl BoundValue {
    pub fn value(&self) -> f64 {
        match &self.exact {
            Some(q) => rational_to_f64(q),
            None => self.log_value.exp(),
        }
    }
}

fn ln_bigint(x: &BigInt) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x.abs() >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational without overflow; `-inf` for 0.
pub fn ln_rational(q: &BigRational) -> f64 {
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let v = q.to_f64().unwrap_or(f64::NAN);
    if v.is_finite() && v != 0.0 {
        v
    } else {
        let l = ln_rational(&q.abs());
        if q.is_negative() {
            -l.exp()
        } else {
            l.exp()
        }
    }
}

/// `C(n, k)` as a big integer, zero outside `0 ≤ k ≤ n`.
pub fn binom(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    binomial(BigInt::from(n), BigInt::from(k))
}

fn ratio(a: BigInt, b: BigInt) -> BigRational {
    BigRational::new(a, b)
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

// prefactor · (C(top, k)/C(N, k))^d · Σ_i C(t,i) C(N−t,k−i) C(m−1,i)/C(N,i)
fn union_bound(
    n: usize,
    d: u32,
    t: usize,
    k: usize,
    m: usize,
    prefactor: (i64, i64),
    top: i64,
    sum_to: usize,
) -> BoundValue {
    let (nn, kk, tt, m1) = (n as i64, k as i64, t as i64, m as i64 - 1);
    let terms: Vec<f64> = (0..=sum_to as i64)
        .map(|i| {
            log_binomial(tt, i) + log_binomial(nn - tt, kk - i) + log_binomial(m1, i)
                - log_binomial(nn, i)
        })
        .collect();
    let log_value = log_binomial(prefactor.0, prefactor.1)
        + d as f64 * (log_binomial(top, kk) - log_binomial(nn, kk))
        + log_sum_exp(&terms);
    let log_value = if log_value.is_nan() {
        f64::NEG_INFINITY
    } else {
        log_value
    };
    if n > EXACT_LIMIT {
        return BoundValue {
            log_value,
            exact: None,
            regime: Regime::LogDomain,
        };
    }
    let sum: BigRational = (0..=sum_to as i64)
        .map(|i| {
            ratio(
                binom(tt, i) * binom(nn - tt, kk - i) * binom(m1, i),
                binom(nn, i),
            )
        })
        .sum();
    let base = ratio(binom(top, kk), binom(nn, kk));
    let exact = BigRational::from_integer(binom(prefactor.0, prefactor.1))
        * num_traits::pow(base, d as usize)
        * sum;
    BoundValue {
        log_value,
        exact: Some(exact),
        regime: Regime::Exact,
    }
}

/// Union bound on the probability that some `k`-set of `G(N, d, δ)` touches
/// fewer than `m` right pairs. Requires `0 ≤ δ < 1/2` and `k/2 < m < N/2`.
pub fn pair_fail_bound(n: usize, d: u32, delta: f64, k: usize, m: usize) -> Result<BoundValue> {
    if !(0.0..0.5).contains(&delta) {
        return Err(invalid(format!("pair bound needs 0 <= delta < 1/2, got {delta}")));
    }
    if !n.is_multiple_of(2) || k > n || 2 * m <= k || 2 * m >= n || d == 0 {
        return Err(invalid(format!(
            "pair bound needs even N, d >= 1, k <= N and k/2 < m < N/2 (N={n}, d={d}, k={k}, m={m})"
        )));
    }
    let t = extra_edge_count(n, delta);
    Ok(union_bound(
        n,
        d,
        t,
        k,
        m,
        ((n / 2) as i64, m as i64 - 1),
        2 * m as i64 - 2,
        m - 1,
    ))
}

/// Union bound on the probability that some `k`-set of `G(N, d, δ)` has
/// fewer than `m` neighbours. Requires `1 ≤ k, m ≤ N` and `0 ≤ δ < 1`.
pub fn expansion_fail_bound(
    n: usize,
    d: u32,
    delta: f64,
    k: usize,
    m: usize,
) -> Result<BoundValue> {
    if !(0.0..1.0).contains(&delta) {
        return Err(invalid(format!("expansion bound needs 0 <= delta < 1, got {delta}")));
    }
    if k == 0 || k > n || m == 0 || m > n || d == 0 {
        return Err(invalid(format!(
            "expansion bound needs d >= 1 and 1 <= k, m <= N (N={n}, d={d}, k={k}, m={m})"
        )));
    }
    let t = extra_edge_count(n, delta);
    Ok(union_bound(
        n,
        d,
        t,
        k,
        m,
        (n as i64, m as i64 - 1),
        m as i64 - 1,
        k,
    ))
}

/// `(k/(n−k+m))^m`, checked against the exact ratio `C(n, k−m)/C(n, k)`.
/// Requires `n + m > 2k > 2m`.
pub fn binom_ratio_bound(n: u64, k: u64, m: u64) -> Result<f64> {
    if !(n + m > 2 * k && k > m) {
        return Err(invalid(format!("need n + m > 2k > 2m (n={n}, k={k}, m={m})")));
    }
    let (n, k, m) = (n as i64, k as i64, m as i64);
    let exact_ratio = ratio(binom(n, k - m), binom(n, k));
    let bound = num_traits::pow(ratio(k.into(), (n - k + m).into()), m as usize);
    if exact_ratio > bound {
        return Err(invalid(format!(
            "binomial ratio {exact_ratio} exceeds {bound}"
        )));
    }
    Ok(rational_to_f64(&bound))
}

/// `C(n, k−m)/C(n, k)` in floating point.
pub fn binom_ratio(n: u64, k: u64, m: u64) -> f64 {
    (log_binomial(n as i64, k as i64 - m as i64) - log_binomial(n as i64, k as i64)).exp()
}

fn alpha_unsimplified(n: usize, r: usize) -> Vec<BigInt> {
    let (n, r) = (n as i64, r as i64);
    (0..=r)
        .map(|k| {
            (k..=r)
                .map(|i| {
                    let t = binom(n, i) * binom(i, k);
                    if (i - k) % 2 == 0 {
                        t
                    } else {
                        -t
                    }
                })
                .sum()
        })
        .collect()
}

/// `α_0..α_r` with `α_k = (−1)^{r−k} C(n,k) C(n−k−1, r−k)`, cross-checked
/// against `Σ_{i=k}^{r} (−1)^{i−k} C(n,i) C(i,k)`. For `r = n` only the
/// second form applies.
pub fn alpha_coefficients(n: usize, r: usize) -> Result<Vec<BigInt>> {
    if r > n {
        return Err(invalid(format!("need r <= n (n={n}, r={r})")));
    }
    let sum_form = alpha_unsimplified(n, r);
    if r == n {
        return Ok(sum_form);
    }
    let (ni, ri) = (n as i64, r as i64);
    let closed: Vec<BigInt> = (0..=ri)
        .map(|k| {
            let t = binom(ni, k) * binom(ni - k - 1, ri - k);
            if (ri - k) % 2 == 0 {
                t
            } else {
                -t
            }
        })
        .collect();
    if closed != sum_form {
        return Err(invalid(format!(
            "alpha coefficient forms disagree for n={n}, r={r}"
        )));
    }
    Ok(closed)
}

/// How `p_k = P(Γ(U) ⊆ X)` for `|X| = k` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PkConvention {
    /// `(C(k,ℓ)/C(n,ℓ))^d`.
    #[default]
    Overlay,
    /// `C(n−k,ℓ)/C(n,ℓ)` with no degree exponent, as printed in the source
    /// derivation. Kept only for comparison.
    Complement,
}

pub fn p_k(n: usize, ell: usize, k: usize, d: u32, conv: PkConvention) -> BigRational {
    let (n, ell, k) = (n as i64, ell as i64, k as i64);
    match conv {
        PkConvention::Overlay => {
            num_traits::pow(ratio(binom(k, ell), binom(n, ell)), d as usize)
        }
        PkConvention::Complement => ratio(binom(n - k, ell), binom(n, ell)),
    }
}

fn check_plr_args(n: usize, ell: usize, r: usize, d: u32) -> Result<()> {
    if ell == 0 || ell > n || r >= n || d == 0 {
        return Err(invalid(format!(
            "need 1 <= ell <= n, r < n and d >= 1 (n={n}, ell={ell}, r={r}, d={d})"
        )));
    }
    Ok(())
}

/// `Σ_k α_k p_k` with an explicit `p_k` convention. The complement
/// variant can leave `[0, 1]`, so the raw rational is returned.
pub fn plr_with(n: usize, ell: usize, r: usize, d: u32, conv: PkConvention) -> Result<BigRational> {
    check_plr_args(n, ell, r, d)?;
    let alpha = alpha_coefficients(n, r)?;
    Ok(alpha
        .into_iter()
        .enumerate()
        .map(|(k, a)| BigRational::from_integer(a) * p_k(n, ell, k, d, conv))
        .sum())
}

/// Exact probability that a fixed `ℓ`-set has at most `r` neighbours in an
/// overlay of `d` uniform random permutations of `[n]`.
pub fn exact_plr(n: usize, ell: usize, r: usize, d: u32) -> Result<ExactProb> {
    ExactProb::new(plr_with(n, ell, r, d, PkConvention::Overlay)?)
}

/// `C(n, r) · p_r`.
pub fn bassalygo_bound(n: usize, ell: usize, r: usize, d: u32) -> Result<BigRational> {
    check_plr_args(n, ell, r, d)?;
    Ok(BigRational::from_integer(binom(n as i64, r as i64))
        * p_k(n, ell, r, d, PkConvention::Overlay))
}

/// Evaluates both sides of `Σ_k α_k q^{n−k} = Σ_{i≤r} C(n,i)(1−q)^i q^{n−i}`.
pub fn boolean_identity_sides(n: usize, r: usize, q: &BigRational) -> Result<(BigRational, BigRational)> {
    if q.is_negative() || *q > BigRational::one() {
        return Err(invalid(format!("q = {q} is not in [0, 1]")));
    }
    let alpha = alpha_coefficients(n, r)?;
    let lhs = alpha
        .into_iter()
        .enumerate()
        .map(|(k, a)| BigRational::from_integer(a) * num_traits::pow(q.clone(), n - k))
        .sum();
    let p = BigRational::one() - q;
    let rhs = (0..=r)
        .map(|i| {
            BigRational::from_integer(binom(n as i64, i as i64))
                * num_traits::pow(p.clone(), i)
                * num_traits::pow(q.clone(), n - i)
        })
        .sum();
    Ok((lhs, rhs))
}

pub fn boolean_identity_check(n: usize, r: usize, q: &BigRational) -> Result<bool> {
    let (l, r) = boolean_identity_sides(n, r, q)?;
    Ok(l == r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
    pub hits: u64,
}

/// Fraction of trials in which `U = {0..ℓ−1}` has at most `r` neighbours
/// in a fresh overlay of `d` permutations; trial `i` uses substream `i`.
pub fn montecarlo_plr(n: usize, ell: usize, r: usize, d: u32, trials: u64, seed: u64) -> Result<MonteCarlo> {
    if ell == 0 || ell > n || d == 0 || trials == 0 {
        return Err(invalid("need 1 <= ell <= n, d >= 1 and trials >= 1"));
    }
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map_init(
            || vec![false; n],
            |seen, trial| {
                let mut rng = substream(seed, trial);
                seen.iter_mut().for_each(|s| *s = false);
                let mut size = 0;
                for _ in 0..d {
                    // images of U under a uniform permutation form a uniform ℓ-set
                    for v in sample(&mut rng, n, ell) {
                        if !seen[v] {
                            seen[v] = true;
                            size += 1;
                        }
                    }
                }
                u64::from(size <= r)
            },
        )
        .sum();
    let p = hits as f64 / trials as f64;
    Ok(MonteCarlo {
        estimate: p,
        stderr: (p * (1.0 - p) / trials as f64).sqrt(),
        trials,
        hits,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlrRow {
    pub n: usize,
    pub ell: usize,
    pub r: usize,
    pub d: u32,
    pub exact: ExactProb,
    pub bassalygo: BigRational,
    pub montecarlo: Option<MonteCarlo>,
}

impl PlrRow {
    pub fn compute(n: usize, ell: usize, r: usize, d: u32, mc: Option<(u64, u64)>) -> Result<Self> {
        Ok(Self {
            n,
            ell,
            r,
            d,
            exact: exact_plr(n, ell, r, d)?,
            bassalygo: bassalygo_bound(n, ell, r, d)?,
            montecarlo: mc
                .map(|(trials, seed)| montecarlo_plr(n, ell, r, d, trials, seed))
                .transpose()?,
        })
    }
}

/// CSV with columns `n,ell,r,d,exact,bassalygo,montecarlo,stderr`; exact
/// values as `num/den`, missing Monte Carlo columns left empty.
pub fn plr_table_csv(rows: &[PlrRow]) -> String {
    let mut out = String::from("n,ell,r,d,exact,bassalygo,montecarlo,stderr\n");
    for row in rows {
        let (mc, se) = match &row.montecarlo {
            Some(m) => (m.estimate.to_string(), m.stderr.to_string()),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{}/{},{},{}\n",
            row.n,
            row.ell,
            row.r,
            row.d,
            row.exact,
            row.bassalygo.numer(),
            row.bassalygo.denom(),
            mc,
            se
        ));
    }
    out
}
