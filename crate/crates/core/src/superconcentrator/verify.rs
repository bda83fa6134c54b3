use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DisjointPaths, SuperDag};
use crate::error::{Error, Result};
use crate::randgraph::binomial_u128;
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum VerifyMode {
    /// Every `(S, T)` with `|S| = |T| ≥ 1`; refuses when there are more than
    /// `budget` pairs.
    Exhaustive { budget: u128 },
    /// `trials` random pairs: `r` uniform in `1..=N`, then `S` and `T`
    /// uniform among `r`-subsets.
    Sampled { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub paths: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub pairs_checked: u128,
    pub counterexample: Option<Counterexample>,
}

/// Number of `(S, T)` pairs an exhaustive check visits: `C(2N, N) - 1`.
pub fn exhaustive_pair_count(n: usize) -> u128 {
    (1..=n).map(|r| binomial_u128(n, r).saturating_pow(2)).fold(0u128, u128::saturating_add)
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..r).collect();
    loop {
        out.push(c.clone());
        let Some(i) = (0..r).rev().find(|&i| c[i] != i + n - r) else {
            return out;
        };
        c[i] += 1;
        for j in i + 1..r {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// Checks that every `r`-set of inputs reaches every `r`-set of outputs by
/// `r` vertex-disjoint paths. The exhaustive mode reports the first failing
/// pair in (r, S, T) lexicographic order regardless of thread count.
pub fn verify_superconcentrator(g: &SuperDag, mode: VerifyMode) -> Result<VerifyReport> {
    let n = g.n();
    let solver = DisjointPaths::new(g);
    match mode {
        VerifyMode::Exhaustive { budget } => {
            let needed = exhaustive_pair_count(n);
            if needed > budget {
                return Err(Error::BudgetExceeded { needed, budget });
            }
            for r in 1..=n {
                let sets = combinations(n, r);
                let bad = sets.par_iter().map_init(
                    || solver.clone(),
                    |f, s| {
                        sets.iter().find_map(|t| match f.count(s, t) {
                            Ok(p) if p == r => None,
                            Ok(paths) => Some(Ok(Counterexample {
                                s: s.clone(),
                                t: t.clone(),
                                paths,
                            })),
                            Err(e) => Some(Err(e)),
                        })
                    },
                );
                if let Some(found) = bad.find_map_first(|x| x) {
                    let cx = found?;
                    // pairs up to and including the failing one
                    let idx = sets.iter().position(|s| *s == cx.s).unwrap_or(0) as u128;
                    let tdx = sets.iter().position(|t| *t == cx.t).unwrap_or(0) as u128;
                    let before: u128 = (1..r).map(|q| binomial_u128(n, q).pow(2)).sum();
                    return Ok(VerifyReport {
                        pass: false,
                        pairs_checked: before + idx * sets.len() as u128 + tdx + 1,
                        counterexample: Some(cx),
                    });
                }
            }
            Ok(VerifyReport {
                pass: true,
                pairs_checked: needed,
                counterexample: None,
            })
        }
        VerifyMode::Sampled { trials, seed } => {
            let bad = (0..trials)
                .into_par_iter()
                .map_init(
                    || solver.clone(),
                    |f, trial| {
                        let mut rng = substream(seed, trial);
                        let r = rng.gen_range(1..=n);
                        let mut s = sample(&mut rng, n, r).into_vec();
                        let mut t = sample(&mut rng, n, r).into_vec();
                        s.sort_unstable();
                        t.sort_unstable();
                        match f.count(&s, &t) {
                            Ok(p) if p == r => None,
                            Ok(paths) => Some((trial, Ok(Counterexample { s, t, paths }))),
                            Err(e) => Some((trial, Err(e))),
                        }
                    },
                )
                .find_map_first(|x| x);
            match bad {
                None => Ok(VerifyReport {
                    pass: true,
                    pairs_checked: trials as u128,
                    counterexample: None,
                }),
                Some((trial, cx)) => Ok(VerifyReport {
                    pass: false,
                    pairs_checked: trial as u128 + 1,
                    counterexample: Some(cx?),
                }),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superconcentrator::{build_gamma, BuildConfig, ExpanderSource};

    fn complete_gamma(n: usize, base: usize) -> SuperDag {
        build_gamma(n, &BuildConfig {
            base_size: base,
            source: ExpanderSource::CompleteBipartite,
            acceptance: None,
        })
        .unwrap()
    }

    #[test]
    fn pair_counts() {
        assert_eq!(exhaustive_pair_count(6), 923);
        assert_eq!(exhaustive_pair_count(8), 12869);
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn base_graph_is_a_superconcentrator() {
        let g = complete_gamma(6, 6);
        let rep = verify_superconcentrator(&g, VerifyMode::Exhaustive { budget: 1000 }).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.pairs_checked, 923);
    }

    #[test]
    fn gamma8_over_complete_expanders() {
        let g = complete_gamma(8, 2);
        let rep = verify_superconcentrator(&g, VerifyMode::Exhaustive { budget: 20000 }).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.pairs_checked, 12869);
    }

    #[test]
    fn budget_refusal() {
        let g = complete_gamma(8, 2);
        assert!(matches!(
            verify_superconcentrator(&g, VerifyMode::Exhaustive { budget: 100 }),
            Err(Error::BudgetExceeded { needed: 12869, .. })
        ));
    }

    #[test]
    fn cut_input_is_found() {
        let mut g = complete_gamma(8, 2);
        let x0 = g.inputs()[0];
        g.remove_edges(|u, _| u == x0);
        let rep = verify_superconcentrator(&g, VerifyMode::Exhaustive { budget: 20000 }).unwrap();
        assert!(!rep.pass);
        let cx = rep.counterexample.unwrap();
        assert_eq!((cx.s, cx.t, cx.paths), (vec![0], vec![0], 0));
        assert_eq!(rep.pairs_checked, 1);

        let rep = verify_superconcentrator(&g, VerifyMode::Sampled { trials: 500, seed: 3 }).unwrap();
        assert!(!rep.pass);
        assert!(rep.counterexample.unwrap().s.contains(&0));
    }

    #[test]
    fn sampled_is_deterministic() {
        let g = complete_gamma(8, 2);
        let a = verify_superconcentrator(&g, VerifyMode::Sampled { trials: 200, seed: 9 }).unwrap();
        let b = verify_superconcentrator(&g, VerifyMode::Sampled { trials: 200, seed: 9 }).unwrap();
        assert_eq!(a, b);
        assert!(a.pass);
    }
}
