use std::collections::BTreeSet;
use std::fmt::Write;

use serde::Serialize;

use super::{classify, Classification, ComplexSerial, Evidence, FlowComplex, FlowGraph, LoopKind, LoopSearch};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering. Mutual pairs are drawn once with `dir=both`,
/// undecided edges dashed, and edges on nontrivial loops red.
pub fn graph_to_dot(g: &FlowGraph, name: &str, loops: Option<&LoopSearch>) -> String {
    let mut red: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut out = format!("digraph {} {{\n", quote(name));
    if let Some(search) = loops {
        for l in search.nontrivial() {
            let path: Vec<&str> = l.vertices.iter().map(|&v| g.vertices[v].as_str()).collect();
            let _ = writeln!(out, "  // nontrivial loop: {}", path.join(" -> "));
            for w in l.vertices.windows(2) {
                red.insert((w[0], w[1]));
            }
        }
    }
    for v in &g.vertices {
        let _ = writeln!(out, "  {};", quote(v));
    }
    for (a, b, _) in g.edges() {
        let mutual = g.has_edge(b, a);
        if mutual && b < a {
            continue;
        }
        let mut attrs = Vec::new();
        if mutual {
            attrs.push("dir=both");
        }
        if red.contains(&(a, b)) || (mutual && red.contains(&(b, a))) {
            attrs.push("color=red");
        }
        let attrs = if attrs.is_empty() {
            String::new()
        } else {
            format!(" [{}]", attrs.join(", "))
        };
        let _ = writeln!(out, "  {} -> {}{attrs};", quote(&g.vertices[a]), quote(&g.vertices[b]));
    }
    for &(a, b) in g.unknown_edges() {
        let _ = writeln!(
            out,
            "  {} -> {} [style=dashed, label=\"?\"];",
            quote(&g.vertices[a]),
            quote(&g.vertices[b])
        );
    }
    out.push_str("}\n");
    out
}

/// The 1-skeleton of a complex as an undirected graph.
pub fn complex_to_dot(c: &FlowComplex, name: &str) -> String {
    let mut out = format!("graph {} {{\n", quote(name));
    for s in c.simplices() {
        let names: Vec<String> = s.iter().map(|&v| quote(&c.vertices[v])).collect();
        match names.len() {
            1 => {
                let _ = writeln!(out, "  {};", names[0]);
            }
            2 => {
                let _ = writeln!(out, "  {} -- {};", names[0], names[1]);
            }
            _ => {
                let _ = writeln!(out, "  // {}-simplex {}", s.len() - 1, c.label(s));
            }
        }
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeRecord {
    pub from: String,
    pub to: String,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopRecord {
    pub vertices: Vec<String>,
    pub classification: LoopKind,
}

/// Serializable summary of a flow analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowReport {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeRecord>,
    pub unknown_edges: Vec<[String; 2]>,
    pub complex: Option<ComplexSerial>,
    pub loops: Vec<LoopRecord>,
    pub loops_truncated: bool,
    pub max_len: usize,
    pub classification: Classification,
    pub depth: usize,
    /// Seed of the zero tester that decided the edges.
    pub seed: u64,
}

impl FlowReport {
    pub fn new(
        g: &FlowGraph,
        complex: Option<&FlowComplex>,
        loops: &LoopSearch,
        depth: usize,
        seed: u64,
    ) -> FlowReport {
        let name = |v: usize| g.vertices[v].clone();
        FlowReport {
            vertices: g.vertices.clone(),
            edges: g
                .edges()
                .map(|(a, b, e)| EdgeRecord {
                    from: name(a),
                    to: name(b),
                    evidence: e.clone(),
                })
                .collect(),
            unknown_edges: g.unknown_edges().iter().map(|&(a, b)| [name(a), name(b)]).collect(),
            complex: complex.map(FlowComplex::to_serial),
            loops: loops
                .loops
                .iter()
                .map(|l| LoopRecord {
                    vertices: l.names(g),
                    classification: l.classification,
                })
                .collect(),
            loops_truncated: loops.truncated,
            max_len: loops.max_len,
            classification: classify(g),
            depth,
            seed,
        }
    }
}
