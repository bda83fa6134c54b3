//! Exact minimum expansion by subset enumeration, the sampled local-descent
//! heuristic, and profile checks built on both.
//!
//! Both plain and pair expansion count "buckets" met by `Γ(S)`: a bucket is a
//! right vertex for plain expansion and a pair `{r_j, r_{j+n/2}}` for pair
//! expansion.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::BipartiteGraph;
use crate::error::{invalid, Error, Result};
use crate::profiles::PiecewiseLinear;
use crate::rng::substream;

/// A minimum value together with a set attaining it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extremum {
    pub value: usize,
    pub witness: Vec<usize>,
}

struct Buckets {
    /// bucket ids per left vertex, deduplicated
    lists: Vec<Vec<u32>>,
    /// flattened bitsets, `words` u64s per left vertex
    bits: Vec<u64>,
    words: usize,
    count: usize,
}

impl Buckets {
    fn new(g: &BipartiteGraph, pairs: bool) -> Result<Self> {
        let n = g.n();
        let count = if pairs {
            if !n.is_multiple_of(2) {
                return Err(invalid("pair structure needs an even number of vertices"));
            }
            n / 2
        } else {
            n
        };
        let words = count.div_ceil(64).max(1);
        let mut lists = Vec::with_capacity(n);
        let mut bits = vec![0u64; n * words];
        for l in 0..n {
            let mut list: Vec<u32> = g
                .neighbors(l)
                .iter()
                .map(|&r| if pairs { r % count as u32 } else { r })
                .collect();
            list.sort_unstable();
            list.dedup();
            for &b in &list {
                bits[l * words + b as usize / 64] |= 1 << (b % 64);
            }
            lists.push(list);
        }
        Ok(Self {
            lists,
            bits,
            words,
            count,
        })
    }

    fn row(&self, l: usize) -> &[u64] {
        &self.bits[l * self.words..(l + 1) * self.words]
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub(crate) fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c * (n - i) is divisible by (i + 1) after the multiplication
        c = match c.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// Lexicographic DFS over k-subsets whose smallest element is `first`,
/// returning the first subset (in lex order) attaining the range minimum.
fn min_in_range(b: &Buckets, k: usize, first: usize) -> (usize, Vec<usize>) {
    let n = b.lists.len();
    let w = b.words;
    let mut stack = vec![0u64; (k + 1) * w];
    stack[w..2 * w].copy_from_slice(b.row(first));
    let mut chosen = vec![first];
    let mut best = (usize::MAX, Vec::new());

    fn popcount(s: &[u64]) -> usize {
        s.iter().map(|x| x.count_ones() as usize).sum()
    }

    fn rec(
        b: &Buckets,
        n: usize,
        k: usize,
        w: usize,
        stack: &mut [u64],
        chosen: &mut Vec<usize>,
        best: &mut (usize, Vec<usize>),
    ) {
        let depth = chosen.len();
        let current = popcount(&stack[depth * w..(depth + 1) * w]);
        if current >= best.0 {
            return;
        }
        if depth == k {
            *best = (current, chosen.clone());
            return;
        }
        let last = *chosen.last().expect("nonempty");
        for next in last + 1..=n - (k - depth) {
            let (head, tail) = stack.split_at_mut((depth + 1) * w);
            let prev = &head[depth * w..];
            let row = b.row(next);
            for j in 0..w {
                tail[j] = prev[j] | row[j];
            }
            chosen.push(next);
            rec(b, n, k, w, stack, chosen, best);
            chosen.pop();
        }
    }

    rec(b, n, k, w, &mut stack, &mut chosen, &mut best);
    best
}

fn exhaustive_min(b: &Buckets, k: usize, budget: u128) -> Result<Extremum> {
    let n = b.lists.len();
    if k > n {
        return Err(invalid(format!("subset size {k} exceeds n = {n}")));
    }
    if k == 0 {
        return Ok(Extremum {
            value: 0,
            witness: Vec::new(),
        });
    }
    let needed = binomial_u128(n, k);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let best = (0..=n - k)
        .into_par_iter()
        .map(|first| min_in_range(b, k, first))
        .filter(|(v, _)| *v != usize::MAX)
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
        .expect("at least one subset");
    Ok(Extremum {
        value: best.0,
        witness: best.1,
    })
}

/// Exact `min |Γ(S)|` over `|S| = k` with the lexicographically smallest
/// minimizer. Refuses when `C(n, k)` exceeds `budget`.
pub fn min_expansion(g: &BipartiteGraph, k: usize, budget: u128) -> Result<Extremum> {
    exhaustive_min(&Buckets::new(g, false)?, k, budget)
}

/// Exact minimum number of pairs met by a `k`-subset.
pub fn min_pair_expansion(g: &BipartiteGraph, k: usize, budget: u128) -> Result<Extremum> {
    exhaustive_min(&Buckets::new(g, true)?, k, budget)
}

/// Steepest single-swap descent from `start`: drop the member that alone
/// covers the most buckets, add the outsider that adds the fewest, repeat
/// while the count strictly drops.
fn descend(b: &Buckets, start: Vec<usize>) -> Extremum {
    let n = b.lists.len();
    let mut member = vec![false; n];
    let mut cnt = vec![0u32; b.count];
    for &v in &start {
        member[v] = true;
        for &x in &b.lists[v] {
            cnt[x as usize] += 1;
        }
    }
    let mut value = cnt.iter().filter(|&&c| c > 0).count();
    let k = start.len();
    if k > 0 && k < n {
        loop {
            let (out, unique) = (0..n)
                .filter(|&v| member[v])
                .map(|v| (v, b.lists[v].iter().filter(|&&x| cnt[x as usize] == 1).count()))
                .fold((usize::MAX, 0), |acc, (v, u)| if acc.0 == usize::MAX || u > acc.1 { (v, u) } else { acc });
            for &x in &b.lists[out] {
                cnt[x as usize] -= 1;
            }
            let (inn, added) = (0..n)
                .filter(|&u| !member[u] && u != out)
                .map(|u| (u, b.lists[u].iter().filter(|&&x| cnt[x as usize] == 0).count()))
                .fold((usize::MAX, usize::MAX), |acc, (u, a)| if a < acc.1 { (u, a) } else { acc });
            if inn != usize::MAX && value - unique + added < value {
                member[out] = false;
                member[inn] = true;
                for &x in &b.lists[inn] {
                    cnt[x as usize] += 1;
                }
                value = value - unique + added;
            } else {
                for &x in &b.lists[out] {
                    cnt[x as usize] += 1;
                }
                break;
            }
        }
    }
    Extremum {
        value,
        witness: (0..n).filter(|&v| member[v]).collect(),
    }
}

fn sampled_min(b: &Buckets, k: usize, trials: usize, seed: u64) -> Result<Extremum> {
    let n = b.lists.len();
    if k > n {
        return Err(invalid(format!("subset size {k} exceeds n = {n}")));
    }
    let trials = trials.max(1);
    let best = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, t as u64);
            let mut start = sample(&mut rng, n, k).into_vec();
            start.sort_unstable();
            (descend(b, start), t)
        })
        .min_by(|a, b| a.0.value.cmp(&b.0.value).then(a.1.cmp(&b.1)))
        .expect("at least one trial");
    Ok(best.0)
}

/// Heuristic `min |Γ(S)|`: best of `trials` random starts, each followed by
/// local descent. Not exhaustive; the value is attained by the witness, so it
/// is an upper bound on the true minimum.
pub fn sampled_min_expansion(
    g: &BipartiteGraph,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<Extremum> {
    sampled_min(&Buckets::new(g, false)?, k, trials, seed)
}

/// Heuristic counterpart of [`min_pair_expansion`].
pub fn sampled_min_pair_expansion(
    g: &BipartiteGraph,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<Extremum> {
    sampled_min(&Buckets::new(g, true)?, k, trials, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOptions {
    /// Largest number of subsets enumerated for one `k`.
    pub budget: u128,
    /// Random starts per `k` when enumeration is over budget; `0` skips such `k`.
    pub heuristic_trials: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            budget: 200_000,
            heuristic_trials: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMethod {
    Exhaustive,
    Heuristic,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCheck {
    pub k: usize,
    pub required: usize,
    pub found: Option<usize>,
    pub method: CheckMethod,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileCheckReport {
    /// No violation was found among the checked `k`.
    pub pass: bool,
    /// Every `k` was checked by enumeration.
    pub complete: bool,
    pub checks: Vec<LevelCheck>,
    /// First violating `(k, witness)`.
    pub first_failure: Option<(usize, Vec<usize>)>,
}

impl ProfileCheckReport {
    pub fn exhaustive_through(&self) -> usize {
        self.checks
            .iter()
            .take_while(|c| c.method == CheckMethod::Exhaustive)
            .map(|c| c.k)
            .last()
            .unwrap_or(0)
    }
}

fn check_profile(
    b: &Buckets,
    ks: impl Iterator<Item = (usize, usize)>,
    opts: &CheckOptions,
) -> Result<ProfileCheckReport> {
    let mut checks = Vec::new();
    let mut first_failure = None;
    for (k, required) in ks {
        let (found, method) = match exhaustive_min(b, k, opts.budget) {
            Ok(ex) => (Some(ex), CheckMethod::Exhaustive),
            Err(Error::BudgetExceeded { .. }) if opts.heuristic_trials > 0 => (
                Some(sampled_min(
                    b,
                    k,
                    opts.heuristic_trials,
                    crate::rng::derive_seed(opts.seed, &[k as u64]),
                )?),
                CheckMethod::Heuristic,
            ),
            Err(Error::BudgetExceeded { .. }) => (None, CheckMethod::Skipped),
            Err(e) => return Err(e),
        };
        let value = found.as_ref().map(|e| e.value);
        checks.push(LevelCheck {
            k,
            required,
            found: value,
            method,
        });
        if let Some(ex) = found {
            if ex.value < required {
                first_failure = Some((k, ex.witness));
                break;
            }
        }
    }
    let pass = first_failure.is_none();
    let complete = checks.iter().all(|c| c.method == CheckMethod::Exhaustive);
    Ok(ProfileCheckReport {
        pass,
        complete,
        checks,
        first_failure,
    })
}

/// Checks `min |Γ(S)| ≥ ⌈e(k/n)·n⌉` for every `k` in `1..=k_max`.
pub fn check_expander_profile(
    g: &BipartiteGraph,
    e: &PiecewiseLinear,
    k_max: usize,
    opts: &CheckOptions,
) -> Result<ProfileCheckReport> {
    let n = g.n();
    if k_max > n {
        return Err(invalid(format!("k_max {k_max} exceeds n = {n}")));
    }
    let mut ks = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let beta = e.eval(k as f64 / n as f64)?;
        ks.push((k, (beta * n as f64 - 1e-9).ceil().max(0.0) as usize));
    }
    check_profile(&Buckets::new(g, false)?, ks.into_iter(), opts)
}

/// Checks that every `k`-subset with `k = 1..=⌊alpha_max·n⌋` meets at least
/// `⌊γk⌋` pairs.
pub fn check_pair_profile(
    g: &BipartiteGraph,
    gamma: f64,
    alpha_max: f64,
    opts: &CheckOptions,
) -> Result<ProfileCheckReport> {
    let n = g.n();
    if !(0.0..=1.0).contains(&alpha_max) || gamma < 0.0 {
        return Err(invalid("need 0 <= alpha_max <= 1 and gamma >= 0"));
    }
    let k_max = (alpha_max * n as f64 + 1e-9).floor() as usize;
    let ks = (1..=k_max).map(|k| (k, (gamma * k as f64 + 1e-9).floor() as usize));
    check_profile(&Buckets::new(g, true)?, ks, opts)
}
