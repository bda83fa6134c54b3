use serde::{Deserialize, Serialize};

use crate::entropy::entropy_unchecked as h;
use crate::error::{invalid, Result};
use crate::profiles::PiecewiseLinear;

/// Which closed-form ratio [`direct_check_ratio`] evaluates.
#[derive(Debug, Clone, Copy)]
pub enum RatioForm<'a> {
    /// `(H(α) + H(e(α))) / (H(α) − e(α)·H(α/e(α)))`.
    Expansion(&'a PiecewiseLinear),
    /// `(H(α) + ½H(2γα)) / (H(α) − 2γα·H(1/2γ))`.
    Pair { gamma: f64 },
}

/// Pointwise evaluation only; nothing between grid points is certified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectReport {
    pub form: String,
    pub d_plus_c: f64,
    pub alpha_range: (f64, f64),
    pub points: usize,
    pub min_slack: f64,
    pub argmin_alpha: f64,
    pub ratio_at_argmin: f64,
    pub pass: bool,
    pub certified: bool,
}

/// The degree a graph needs at `α` for the given form.
pub fn ratio_at(form: RatioForm<'_>, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha = {alpha} is not in (0, 1)")));
    }
    let (num, den) = match form {
        RatioForm::Expansion(e) => {
            let ea = e.eval(alpha)?;
            if !(ea > 0.0 && ea <= 1.0 && alpha <= ea) {
                return Err(invalid(format!(
                    "e({alpha}) = {ea} must satisfy alpha <= e(alpha) <= 1"
                )));
            }
            (h(alpha) + h(ea), h(alpha) - ea * h(alpha / ea))
        }
        RatioForm::Pair { gamma } => {
            if !(gamma > 0.5 && 2.0 * gamma * alpha <= 1.0) {
                return Err(invalid(format!(
                    "pair form needs gamma > 1/2 and 2·gamma·alpha <= 1 (gamma={gamma}, alpha={alpha})"
                )));
            }
            (
                h(alpha) + 0.5 * h(2.0 * gamma * alpha),
                h(alpha) - 2.0 * gamma * alpha * h(1.0 / (2.0 * gamma)),
            )
        }
    };
    if den <= 0.0 {
        return Err(invalid(format!(
            "denominator {den} is not positive at alpha = {alpha}"
        )));
    }
    Ok(num / den)
}

/// `d_plus_c − ratio(α)` on `grid_n + 1` evenly spaced points of
/// `alpha_range`, endpoints included. Every denominator is checked before
/// anything is reported.
pub fn direct_check_ratio(
    d_plus_c: f64,
    form: RatioForm<'_>,
    alpha_range: (f64, f64),
    grid_n: usize,
) -> Result<DirectReport> {
    let (lo, hi) = alpha_range;
    if !(lo > 0.0 && hi < 1.0 && lo <= hi) {
        return Err(invalid(format!("alpha range [{lo}, {hi}] not inside (0, 1)")));
    }
    if grid_n == 0 && lo != hi {
        return Err(invalid("grid must have at least one step"));
    }
    let steps = grid_n.max(1);
    let mut best = (f64::INFINITY, lo, 0.0);
    for i in 0..=steps {
        let a = if i == steps {
            hi
        } else {
            lo + (hi - lo) * i as f64 / steps as f64
        };
        let r = ratio_at(form, a)?;
        let slack = d_plus_c - r;
        if slack < best.0 {
            best = (slack, a, r);
        }
    }
    let name = match form {
        RatioForm::Expansion(_) => "expansion".to_string(),
        RatioForm::Pair { gamma } => format!("pair(gamma={gamma})"),
    };
    Ok(DirectReport {
        form: name,
        d_plus_c,
        alpha_range,
        points: steps + 1,
        min_slack: best.0,
        argmin_alpha: best.1,
        ratio_at_argmin: best.2,
        pass: best.0 > 0.0,
        certified: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDegreeCheck {
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

/// `d > 1 + γ(1 − ε₁)/(1 − 2γε₁)`; requires `2γε₁ < 1`.
pub fn check_pairexp_degree(d: f64, gamma: f64, eps1: f64) -> Result<PairDegreeCheck> {
    if !(2.0 * gamma * eps1 < 1.0) || gamma <= 0.0 || !(0.0..1.0).contains(&eps1) {
        return Err(invalid(format!(
            "need gamma > 0, 0 <= eps1 < 1 and 2·gamma·eps1 < 1 (gamma={gamma}, eps1={eps1})"
        )));
    }
    let bound = 1.0 + gamma * (1.0 - eps1) / (1.0 - 2.0 * gamma * eps1);
    let slack = d - bound;
    Ok(PairDegreeCheck {
        bound,
        slack,
        pass: slack > 0.0,
    })
}
