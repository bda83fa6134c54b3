use std::fmt::Write as _;

use super::{BipartiteGraph, Provenance};
use crate::error::{Error, Result};

impl BipartiteGraph {
    /// Header `n d delta seed` (or `n explicit`), then one line per left
    /// vertex with its sorted 1-based neighbours.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.provenance {
            Provenance::Sampled { seed, d, delta } => {
                let _ = writeln!(out, "{} {} {} {}", self.n, d, delta, seed);
            }
            Provenance::Explicit => {
                let _ = writeln!(out, "{} explicit", self.n);
            }
        }
        for list in &self.adj {
            let line: Vec<String> = list.iter().map(|r| (r + 1).to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines();
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| err(1, "empty input"))?
            .split_whitespace()
            .collect();
        let n: usize = header
            .first()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err(1, "bad vertex count"))?;
        let provenance = match header.as_slice() {
            [_, "explicit"] => Provenance::Explicit,
            [_, d, delta, seed] => Provenance::Sampled {
                d: d.parse().map_err(|_| err(1, "bad degree"))?,
                delta: delta.parse().map_err(|_| err(1, "bad delta"))?,
                seed: seed.parse().map_err(|_| err(1, "bad seed"))?,
            },
            _ => return Err(err(1, "expected `n d delta seed` or `n explicit`")),
        };
        let mut adj = Vec::with_capacity(n);
        for (i, line) in lines.enumerate() {
            let mut list = Vec::new();
            for tok in line.split_whitespace() {
                let r: u32 = tok.parse().map_err(|_| err(i + 2, "bad neighbour index"))?;
                if r == 0 || r as usize > n {
                    return Err(err(i + 2, "neighbour index outside 1..=n"));
                }
                list.push(r - 1);
            }
            adj.push(list);
        }
        let mut g = Self::explicit(n, adj)?;
        g.provenance = provenance;
        Ok(g)
    }

    /// Graphviz rendering with left vertices `l1..ln` and right vertices `r1..rn`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph E {\n  rankdir=LR;\n");
        for (side, name) in [("l", "L"), ("r", "R")] {
            let _ = writeln!(out, "  subgraph cluster_{name} {{ label=\"{name}\"; rank=same;");
            for i in 1..=self.n {
                let _ = writeln!(out, "    {side}{i};");
            }
            out.push_str("  }\n");
        }
        for (l, list) in self.adj.iter().enumerate() {
            for r in list {
                let _ = writeln!(out, "  l{} -> r{};", l + 1, r + 1);
            }
        }
        out.push_str("}\n");
        out
    }
}
