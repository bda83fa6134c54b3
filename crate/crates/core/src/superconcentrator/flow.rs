use std::collections::VecDeque;

use super::SuperDag;
use crate::error::{invalid, Result};

#[derive(Debug, Clone)]
struct Arc {
    to: u32,
    cap: u8,
}

/// Unit-capacity Dinic on the node-split graph of a [`SuperDag`], built once
/// and reused across `(S, T)` queries.
///
/// Node `v` becomes `2v` (in) and `2v + 1` (out) joined by a unit arc, so
/// flow paths are vertex-disjoint, endpoints included.
#[derive(Debug, Clone)]
pub struct DisjointPaths {
    arcs: Vec<Arc>,
    base_cap: Vec<u8>,
    head: Vec<Vec<u32>>,
    source: u32,
    sink: u32,
    // arc ids source -> input i and output j -> sink
    src_arcs: Vec<u32>,
    sink_arcs: Vec<u32>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl DisjointPaths {
    pub fn new(g: &SuperDag) -> Self {
        let v = g.nodes().len();
        let source = 2 * v as u32;
        let sink = source + 1;
        let mut s = Self {
            arcs: Vec::with_capacity(2 * (v + g.edge_count() + 2 * g.n())),
            base_cap: Vec::new(),
            head: vec![Vec::new(); 2 * v + 2],
            source,
            sink,
            src_arcs: Vec::with_capacity(g.n()),
            sink_arcs: Vec::with_capacity(g.n()),
            level: vec![0; 2 * v + 2],
            iter: vec![0; 2 * v + 2],
        };
        for u in 0..v as u32 {
            s.add_arc(2 * u, 2 * u + 1, 1);
        }
        for &(a, b) in g.edges() {
            s.add_arc(2 * a + 1, 2 * b, 1);
        }
        for &x in g.inputs() {
            let id = s.add_arc(source, 2 * x, 0);
            s.src_arcs.push(id);
        }
        for &y in g.outputs() {
            let id = s.add_arc(2 * y + 1, sink, 0);
            s.sink_arcs.push(id);
        }
        s.base_cap = s.arcs.iter().map(|a| a.cap).collect();
        s
    }

    fn add_arc(&mut self, from: u32, to: u32, cap: u8) -> u32 {
        let id = self.arcs.len() as u32;
        self.arcs.push(Arc { to, cap });
        self.arcs.push(Arc { to: from, cap: 0 });
        self.head[from as usize].push(id);
        self.head[to as usize].push(id + 1);
        id
    }

    /// Maximum number of vertex-disjoint paths from the inputs at positions
    /// `s` to the outputs at positions `t`.
    pub fn count(&mut self, s: &[usize], t: &[usize]) -> Result<usize> {
        if s.len() != t.len() {
            return Err(invalid(format!(
                "source and target sets differ in size ({} vs {})",
                s.len(),
                t.len()
            )));
        }
        for (c, b) in self.arcs.iter_mut().zip(&self.base_cap) {
            c.cap = *b;
        }
        for &i in s {
            let id = *self
                .src_arcs
                .get(i)
                .ok_or_else(|| invalid(format!("input position {i} out of range")))?;
            if self.arcs[id as usize].cap == 1 {
                return Err(invalid(format!("input position {i} repeated")));
            }
            self.arcs[id as usize].cap = 1;
        }
        for &j in t {
            let id = *self
                .sink_arcs
                .get(j)
                .ok_or_else(|| invalid(format!("output position {j} out of range")))?;
            if self.arcs[id as usize].cap == 1 {
                return Err(invalid(format!("output position {j} repeated")));
            }
            self.arcs[id as usize].cap = 1;
        }
        let mut flow = 0;
        while self.bfs() {
            self.iter.iter_mut().for_each(|x| *x = 0);
            while self.dfs(self.source) {
                flow += 1;
            }
        }
        Ok(flow)
    }

    fn bfs(&mut self) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[self.source as usize] = 0;
        let mut q = VecDeque::from([self.source]);
        while let Some(u) = q.pop_front() {
            for &id in &self.head[u as usize] {
                let a = &self.arcs[id as usize];
                if a.cap > 0 && self.level[a.to as usize] < 0 {
                    self.level[a.to as usize] = self.level[u as usize] + 1;
                    q.push_back(a.to);
                }
            }
        }
        self.level[self.sink as usize] >= 0
    }

    // one unit of augmenting flow along the level graph
    fn dfs(&mut self, u: u32) -> bool {
        if u == self.sink {
            return true;
        }
        let ui = u as usize;
        while self.iter[ui] < self.head[ui].len() {
            let id = self.head[ui][self.iter[ui]] as usize;
            let Arc { to, cap } = self.arcs[id];
            if cap > 0 && self.level[to as usize] == self.level[ui] + 1 && self.dfs(to) {
                self.arcs[id].cap -= 1;
                self.arcs[id ^ 1].cap += 1;
                return true;
            }
            self.iter[ui] += 1;
        }
        false
    }
}

/// One-shot form of [`DisjointPaths::count`].
pub fn max_disjoint_paths(g: &SuperDag, s: &[usize], t: &[usize]) -> Result<usize> {
    DisjointPaths::new(g).count(s, t)
}
