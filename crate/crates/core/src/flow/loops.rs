use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::FlowGraph;

pub const DEFAULT_MAX_LEN: usize = 12;
pub const MAX_CYCLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Centralized,
    Decentralized,
}

/// Centralized iff every unordered pair of vertices is joined both ways.
pub fn classify(g: &FlowGraph) -> Classification {
    let n = g.len();
    let complete = (0..n).all(|a| (0..n).all(|b| a == b || g.has_edge(a, b)));
    if complete {
        Classification::Centralized
    } else {
        Classification::Decentralized
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopKind {
    Trivial,
    Nontrivial,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopReport {
    /// Closed path starting and ending at its smallest vertex.
    pub vertices: Vec<usize>,
    pub classification: LoopKind,
    /// Edges of the subgraph generated by the loop's vertices.
    pub generated_subgraph: Vec<(usize, usize)>,
}

impl LoopReport {
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn names(&self, g: &FlowGraph) -> Vec<String> {
        self.vertices.iter().map(|&v| g.vertices[v].clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopSearch {
    pub loops: Vec<LoopReport>,
    pub max_len: usize,
    /// Set when enumeration stopped at [`MAX_CYCLES`].
    pub truncated: bool,
}

impl LoopSearch {
    pub fn nontrivial(&self) -> impl Iterator<Item = &LoopReport> {
        self.loops.iter().filter(|l| l.classification == LoopKind::Nontrivial)
    }
}

fn report(g: &FlowGraph, cycle: Vec<usize>) -> LoopReport {
    let set: BTreeSet<usize> = cycle.iter().copied().collect();
    let generated: Vec<(usize, usize)> = g
        .edge_pairs()
        .into_iter()
        .filter(|(a, b)| set.contains(a) && set.contains(b))
        .collect();
    let clique = set.iter().all(|&a| set.iter().all(|&b| a == b || g.has_edge(a, b)));
    let mut vertices = cycle;
    vertices.push(vertices[0]);
    LoopReport {
        vertices,
        classification: if clique {
            LoopKind::Trivial
        } else {
            LoopKind::Nontrivial
        },
        generated_subgraph: generated,
    }
}

/// All simple directed cycles with at most `max_len` vertices (two-vertex
/// cycles included), each classified by whether its vertices span an
/// undirected clique. Sorted by length, then vertex sequence.
pub fn find_information_loops(g: &FlowGraph, max_len: usize) -> LoopSearch {
    let mut cycles = Vec::new();
    let truncated = Johnson::run(g, max_len.max(2), &mut cycles);
    let mut loops: Vec<LoopReport> = cycles.into_iter().map(|c| report(g, c)).collect();
    loops.sort_by(|a, b| {
        a.vertices
            .len()
            .cmp(&b.vertices.len())
            .then_with(|| a.vertices.cmp(&b.vertices))
    });
    LoopSearch {
        loops,
        max_len,
        truncated,
    }
}

/// Johnson's circuit enumeration restricted to paths of bounded length. A
/// branch cut off by the length bound counts as productive so that its
/// vertices are unblocked again.
struct Johnson<'a> {
    adj: Vec<Vec<usize>>,
    blocked: Vec<bool>,
    b_sets: Vec<BTreeSet<usize>>,
    stack: Vec<usize>,
    max_len: usize,
    out: &'a mut Vec<Vec<usize>>,
}

impl Johnson<'_> {
    fn run(g: &FlowGraph, max_len: usize, out: &mut Vec<Vec<usize>>) -> bool {
        let n = g.len();
        for s in 0..n {
            let component = scc_containing(g, s);
            let adj = (0..n)
                .map(|v| {
                    if component.contains(&v) {
                        g.successors(v).filter(|w| component.contains(w)).collect()
                    } else {
                        Vec::new()
                    }
                })
                .collect();
            let mut j = Johnson {
                adj,
                blocked: vec![false; n],
                b_sets: vec![BTreeSet::new(); n],
                stack: Vec::new(),
                max_len,
                out,
            };
            j.circuit(s, s);
            if j.out.len() >= MAX_CYCLES {
                j.out.truncate(MAX_CYCLES);
                return true;
            }
        }
        false
    }

    fn unblock(&mut self, u: usize) {
        self.blocked[u] = false;
        let pending = std::mem::take(&mut self.b_sets[u]);
        for w in pending {
            if self.blocked[w] {
                self.unblock(w);
            }
        }
    }

    fn circuit(&mut self, v: usize, s: usize) -> bool {
        if self.out.len() >= MAX_CYCLES {
            return true;
        }
        let mut found = false;
        self.stack.push(v);
        self.blocked[v] = true;
        let succ = self.adj[v].clone();
        for &w in &succ {
            if w == s {
                self.out.push(self.stack.clone());
                found = true;
            } else if self.stack.len() >= self.max_len || (!self.blocked[w] && self.circuit(w, s)) {
                found = true;
            }
        }
        if found {
            self.unblock(v);
        } else {
            for &w in &succ {
                self.b_sets[w].insert(v);
            }
        }
        self.stack.pop();
        found
    }
}

/// Vertices `>= s` in the strongly connected component of `s` within the
/// subgraph induced on `{s, s+1, ...}`.
fn scc_containing(g: &FlowGraph, s: usize) -> BTreeSet<usize> {
    let reach = |forward: bool| {
        let mut seen = BTreeSet::from([s]);
        let mut todo = vec![s];
        while let Some(v) = todo.pop() {
            for w in s..g.len() {
                let edge = if forward { g.has_edge(v, w) } else { g.has_edge(w, v) };
                if edge && seen.insert(w) {
                    todo.push(w);
                }
            }
        }
        seen
    };
    reach(true).intersection(&reach(false)).copied().collect()
}
