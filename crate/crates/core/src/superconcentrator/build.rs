use serde::{Deserialize, Serialize};

use super::{Layer, Node, NodeRole, SuperDag};
use crate::error::{invalid, Error, Result};
use crate::profiles::{make_e_profile, ProfileConstants};
use crate::randgraph::{
    check_expander_profile, check_pair_profile, extra_edge_count, sample_g_simple, BipartiteGraph,
    CheckOptions, ProfileCheckReport,
};
use crate::rng::derive_seed;

/// Where the expanders `E_N` of each recursion level come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ExpanderSource {
    /// Collision-free samples of `G(N, d, δ)`; each level and copy gets its
    /// own seed derived from `seed`. A sample is redrawn (up to
    /// `retry_limit` times) when it fails the acceptance checks.
    SeededRandom {
        d: u32,
        delta: f64,
        seed: u64,
        retry_limit: u32,
    },
    /// One graph per non-base level, top level first; the same graph is used
    /// for both copies at a level.
    Explicit(Vec<BipartiteGraph>),
    /// The complete bipartite graph at every level.
    CompleteBipartite,
}

/// Expansion checks a sampled expander must pass before it is used.
#[derive(Debug, Clone, PartialEq)]
pub struct Acceptance {
    pub constants: ProfileConstants,
    pub options: CheckOptions,
}

impl Default for Acceptance {
    fn default() -> Self {
        Self {
            constants: ProfileConstants::theorem3(),
            options: CheckOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildConfig {
    /// Levels of size `base_size` are complete bipartite digraphs.
    pub base_size: usize,
    pub source: ExpanderSource,
    pub acceptance: Option<Acceptance>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub pass: bool,
    pub complete: bool,
    pub exhaustive_through: usize,
    pub heuristic_ks: usize,
    pub max_k: usize,
}

impl From<&ProfileCheckReport> for CheckSummary {
    fn from(r: &ProfileCheckReport) -> Self {
        use crate::randgraph::CheckMethod;
        Self {
            pass: r.pass,
            complete: r.complete,
            exhaustive_through: r.exhaustive_through(),
            heuristic_ks: r
                .checks
                .iter()
                .filter(|c| c.method == CheckMethod::Heuristic)
                .count(),
            max_k: r.checks.last().map_or(0, |c| c.k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpanderRecord {
    /// `lambda_x` or `lambda_y`.
    pub copy: String,
    pub seed: Option<u64>,
    pub attempts: u32,
    pub edges: usize,
    pub expansion_check: Option<CheckSummary>,
    pub pair_check: Option<CheckSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub depth: u32,
    pub n: usize,
    pub base: bool,
    pub edges_added: usize,
    pub expanders: Vec<ExpanderRecord>,
}

struct Builder<'a> {
    cfg: &'a BuildConfig,
    nodes: Vec<Node>,
    edges: Vec<(u32, u32)>,
    levels: Vec<LevelRecord>,
}

impl Builder<'_> {
    fn add_layer(&mut self, m: usize, depth: u32, layer: Layer, role: NodeRole) -> Vec<u32> {
        let start = self.nodes.len() as u32;
        self.nodes.extend((0..m as u32).map(|index| Node {
            role,
            level: depth,
            layer,
            index,
        }));
        (start..start + m as u32).collect()
    }

    fn expander(&self, m: usize, depth: u32, copy: u64) -> Result<(BipartiteGraph, ExpanderRecord)> {
        let name = if copy == 0 { "lambda_x" } else { "lambda_y" };
        let plain = |g: BipartiteGraph| {
            let rec = ExpanderRecord {
                copy: name.into(),
                seed: None,
                attempts: 1,
                edges: g.edge_count(),
                expansion_check: None,
                pair_check: None,
            };
            (g, rec)
        };
        match &self.cfg.source {
            ExpanderSource::CompleteBipartite => Ok(plain(BipartiteGraph::complete(m))),
            ExpanderSource::Explicit(list) => {
                let g = list.get(depth as usize).ok_or_else(|| {
                    invalid(format!("no explicit expander for recursion depth {depth}"))
                })?;
                if g.n() != m {
                    return Err(invalid(format!(
                        "explicit expander at depth {depth} has n = {}, expected {m}",
                        g.n()
                    )));
                }
                Ok(plain(g.clone()))
            }
            ExpanderSource::SeededRandom {
                d,
                delta,
                seed,
                retry_limit,
            } => {
                let mut last_failure = String::from("no attempt made");
                for attempt in 0..(*retry_limit).max(1) {
                    let s = derive_seed(*seed, &[depth as u64, copy, attempt as u64]);
                    let g = sample_g_simple(m, *d, *delta, s, 1_000_000)?;
                    let mut rec = ExpanderRecord {
                        copy: name.into(),
                        seed: Some(s),
                        attempts: attempt + 1,
                        edges: g.edge_count(),
                        expansion_check: None,
                        pair_check: None,
                    };
                    let Some(acc) = &self.cfg.acceptance else {
                        return Ok((g, rec));
                    };
                    let e = make_e_profile(&acc.constants)?;
                    let opts = CheckOptions {
                        seed: s,
                        ..acc.options
                    };
                    let exp = check_expander_profile(&g, &e, m, &opts)?;
                    rec.expansion_check = Some((&exp).into());
                    if let Some((k, w)) = &exp.first_failure {
                        last_failure = format!("expansion fails at k = {k}, witness {w:?}");
                        continue;
                    }
                    let c3 = acc.constants.c_f64()[2];
                    let pair = check_pair_profile(&g, 1.0, c3, &opts)?;
                    rec.pair_check = Some((&pair).into());
                    if let Some((k, w)) = &pair.first_failure {
                        last_failure = format!("pair expansion fails at k = {k}, witness {w:?}");
                        continue;
                    }
                    return Ok((g, rec));
                }
                Err(Error::RetryExhausted {
                    n: m,
                    attempts: *retry_limit as usize,
                    reason: last_failure,
                })
            }
        }
    }

    fn level(&mut self, xs: Vec<u32>, ys: Vec<u32>, depth: u32) -> Result<()> {
        let m = xs.len();
        let before = self.edges.len();
        if m <= self.cfg.base_size {
            for &x in &xs {
                for &y in &ys {
                    self.edges.push((x, y));
                }
            }
            self.levels.push(LevelRecord {
                depth,
                n: m,
                base: true,
                edges_added: self.edges.len() - before,
                expanders: Vec::new(),
            });
            return Ok(());
        }
        let xp = self.add_layer(m, depth, Layer::XPrime, NodeRole::Internal);
        let yp = self.add_layer(m, depth, Layer::YPrime, NodeRole::Internal);

        let (ex, rec_x) = self.expander(m, depth, 0)?;
        for (l, list) in ex.adjacency().iter().enumerate() {
            for &r in list {
                self.edges.push((xs[l], xp[r as usize]));
            }
        }
        let (ey, rec_y) = self.expander(m, depth, 1)?;
        for (l, list) in ey.adjacency().iter().enumerate() {
            for &r in list {
                self.edges.push((yp[r as usize], ys[l]));
            }
        }
        let half = m / 2;
        for i in 0..half {
            self.edges.push((xp[i + half], yp[i]));
            self.edges.push((xp[i + half], xp[i]));
            self.edges.push((xp[i], yp[i + half]));
            self.edges.push((yp[i], yp[i + half]));
        }
        let idx = self.levels.len();
        self.levels.push(LevelRecord {
            depth,
            n: m,
            base: false,
            edges_added: self.edges.len() - before,
            expanders: vec![rec_x, rec_y],
        });
        self.level(xp[..half].to_vec(), yp[..half].to_vec(), depth + 1)?;
        debug_assert_eq!(self.levels[idx].n, m);
        Ok(())
    }
}

/// Builds `Γ_N` for `N = base_size · 2^t`.
pub fn build_gamma(n: usize, cfg: &BuildConfig) -> Result<SuperDag> {
    if cfg.base_size == 0 {
        return Err(invalid("base size must be at least 1"));
    }
    let mut m = n;
    while m > cfg.base_size && m.is_multiple_of(2) {
        m /= 2;
    }
    if m != cfg.base_size {
        return Err(invalid(format!(
            "N = {n} is not base size {} times a power of two",
            cfg.base_size
        )));
    }
    if let ExpanderSource::SeededRandom { retry_limit: 0, .. } = cfg.source {
        return Err(invalid("retry limit must be at least 1"));
    }
    let mut b = Builder {
        cfg,
        nodes: Vec::new(),
        edges: Vec::new(),
        levels: Vec::new(),
    };
    let xs = b.add_layer(n, 0, Layer::X, NodeRole::Input);
    let ys = b.add_layer(n, 0, Layer::Y, NodeRole::Output);
    b.level(xs.clone(), ys.clone(), 0)?;
    let dag = SuperDag {
        n,
        nodes: b.nodes,
        edges: b.edges,
        inputs: xs,
        outputs: ys,
        levels: b.levels,
    };
    if !dag.is_acyclic() {
        return Err(invalid("construction produced a cycle"));
    }
    Ok(dag)
}

/// Edges a level of size `n` adds with a collision-free `G(n, d, δ)`:
/// `2(d·n + ⌊δn⌋) + 2n`.
pub fn level_edge_count(n: usize, d: u32, delta: f64) -> usize {
    2 * (d as usize * n + extra_edge_count(n, delta)) + 2 * n
}
