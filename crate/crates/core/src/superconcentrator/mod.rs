//! The recursive graph `Γ_N`: inputs `X`, outputs `Y`, an expander from `X`
//! to `X'`, a reversed expander from `Y'` to `Y`, four cross edges per index
//! pair, and `Γ_{N/2}` between the first halves of `X'` and `Y'`.
//!
//! The superconcentrator property is checked directly with node-disjoint
//! path counts (max flow on the node-split graph).

mod build;
mod flow;
mod verify;

pub use build::{
    build_gamma, Acceptance, BuildConfig, CheckSummary, ExpanderRecord, ExpanderSource,
    LevelRecord, level_edge_count,
};
pub use flow::{max_disjoint_paths, DisjointPaths};
pub use verify::{
    exhaustive_pair_count, verify_superconcentrator, Counterexample, VerifyMode, VerifyReport,
};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Input,
    Output,
    Internal,
}

/// Which vertex set of a recursion level a node was created in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    X,
    XPrime,
    YPrime,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub role: NodeRole,
    /// Recursion depth of the level that created the node (0 = top).
    pub level: u32,
    pub layer: Layer,
    /// 0-based position inside its layer.
    pub index: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperDag {
    pub(crate) n: usize,
    pub(crate) nodes: Vec<Node>,
    pub(crate) edges: Vec<(u32, u32)>,
    pub(crate) inputs: Vec<u32>,
    pub(crate) outputs: Vec<u32>,
    pub(crate) levels: Vec<LevelRecord>,
}

impl SuperDag {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn inputs(&self) -> &[u32] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[u32] {
        &self.outputs
    }

    pub fn levels(&self) -> &[LevelRecord] {
        &self.levels
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn density(&self) -> f64 {
        self.edges.len() as f64 / self.n as f64
    }

    /// Removes every edge for which `drop` returns true; level records are
    /// left untouched.
    pub fn remove_edges(&mut self, mut drop: impl FnMut(u32, u32) -> bool) {
        self.edges.retain(|&(u, v)| !drop(u, v));
    }

    pub fn add_edge(&mut self, u: u32, v: u32) -> Result<()> {
        let len = self.nodes.len() as u32;
        if u >= len || v >= len {
            return Err(invalid("edge endpoint out of range"));
        }
        self.edges.push((u, v));
        Ok(())
    }

    /// A topological order, or `None` when the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<u32>> {
        let v = self.nodes.len();
        let mut indeg = vec![0usize; v];
        let mut out: Vec<Vec<u32>> = vec![Vec::new(); v];
        for &(a, b) in &self.edges {
            indeg[b as usize] += 1;
            out[a as usize].push(b);
        }
        let mut queue: Vec<u32> = (0..v as u32).filter(|&i| indeg[i as usize] == 0).collect();
        let mut order = Vec::with_capacity(v);
        while let Some(a) = queue.pop() {
            order.push(a);
            for &b in &out[a as usize] {
                indeg[b as usize] -= 1;
                if indeg[b as usize] == 0 {
                    queue.push(b);
                }
            }
        }
        (order.len() == v).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Graphviz rendering; nodes of one (level, layer) share a rank.
    pub fn to_dot(&self) -> String {
        let mut groups: BTreeMap<(u32, u8), Vec<usize>> = BTreeMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            // X'' and Y'' stay in their parent's rank; order layers left to right
            let key = match node.layer {
                Layer::X => (0, 0),
                Layer::XPrime => (node.level + 1, 0),
                Layer::YPrime => (u32::MAX - node.level - 1, 1),
                Layer::Y => (u32::MAX, 1),
            };
            groups.entry(key).or_default().push(i);
        }
        let mut out = String::from("digraph Gamma {\n  rankdir=LR;\n  node [shape=point];\n");
        for ((rank, _), members) in &groups {
            let _ = write!(out, "  {{ rank=same; // {rank}\n   ");
            for i in members {
                let _ = write!(out, " {};", self.node_name(*i));
            }
            out.push_str("\n  }\n");
        }
        for &(a, b) in &self.edges {
            let _ = writeln!(
                out,
                "  {} -> {};",
                self.node_name(a as usize),
                self.node_name(b as usize)
            );
        }
        out.push_str("}\n");
        out
    }

    fn node_name(&self, i: usize) -> String {
        let node = &self.nodes[i];
        let layer = match node.layer {
            Layer::X => "x",
            Layer::XPrime => "xp",
            Layer::YPrime => "yp",
            Layer::Y => "y",
        };
        format!("{layer}{}_{}", node.level, node.index + 1)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dag: Self = serde_json::from_str(text)?;
        if dag.inputs.len() != dag.n || dag.outputs.len() != dag.n {
            return Err(invalid("input/output count does not match n"));
        }
        let len = dag.nodes.len() as u32;
        if dag.edges.iter().any(|&(a, b)| a >= len || b >= len) {
            return Err(invalid("edge endpoint out of range"));
        }
        Ok(dag)
    }
}
