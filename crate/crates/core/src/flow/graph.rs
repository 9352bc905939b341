use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// Why an edge is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// A bracket-closure field of the target agent moves a component of the
    /// source observation: `derivative` is nonzero at `witness`.
    Lie {
        field: String,
        component: usize,
        derivative: String,
        witness: BTreeMap<String, f64>,
        value: f64,
    },
    /// The dynamics of `variable` depend on `depends_on`.
    Dependency { variable: String, depends_on: String },
    /// Edge supplied directly by the caller.
    Declared,
}

/// A directed graph on named vertices; a pair of opposite edges is an
/// undirected (mutual) edge.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlowGraph {
    pub vertices: Vec<String>,
    edges: BTreeMap<(usize, usize), Evidence>,
    unknown: BTreeSet<(usize, usize)>,
}

impl FlowGraph {
    pub fn new(vertices: Vec<String>) -> FlowGraph {
        FlowGraph {
            vertices,
            ..FlowGraph::default()
        }
    }

    /// A graph from index pairs, each with [`Evidence::Declared`].
    pub fn from_edges(vertices: Vec<String>, edges: &[(usize, usize)]) -> FlowGraph {
        let mut g = FlowGraph::new(vertices);
        for &(a, b) in edges {
            g.add_edge(a, b, Evidence::Declared);
        }
        g
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    /// Adds `from -> to`, keeping the first evidence recorded. Self-loops are
    /// ignored.
    pub fn add_edge(&mut self, from: usize, to: usize, evidence: Evidence) {
        assert!(from < self.len() && to < self.len(), "edge endpoint out of range");
        if from != to {
            self.unknown.remove(&(from, to));
            self.edges.entry((from, to)).or_insert(evidence);
        }
    }

    /// Records a pair whose edge could be neither confirmed nor refuted.
    pub fn add_unknown(&mut self, from: usize, to: usize) {
        if from != to && !self.edges.contains_key(&(from, to)) {
            self.unknown.insert((from, to));
        }
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains_key(&(from, to))
    }

    pub fn is_mutual(&self, a: usize, b: usize) -> bool {
        self.has_edge(a, b) && self.has_edge(b, a)
    }

    pub fn evidence(&self, from: usize, to: usize) -> Option<&Evidence> {
        self.edges.get(&(from, to))
    }

    /// Directed edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &Evidence)> {
        self.edges.iter().map(|(&(a, b), e)| (a, b, e))
    }

    pub fn edge_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.edges.keys().copied().collect()
    }

    /// Edges as vertex-name pairs, for comparisons across graphs.
    pub fn named_edges(&self) -> BTreeSet<(String, String)> {
        self.edges
            .keys()
            .map(|&(a, b)| (self.vertices[a].clone(), self.vertices[b].clone()))
            .collect()
    }

    pub fn unknown_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.unknown
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.range((v, 0)..(v + 1, 0)).map(|(&(_, b), _)| b)
    }

    /// Unordered pairs joined in both directions.
    pub fn mutual_pairs(&self) -> Vec<(usize, usize)> {
        self.edges
            .keys()
            .filter(|&&(a, b)| a < b && self.has_edge(b, a))
            .copied()
            .collect()
    }
}
