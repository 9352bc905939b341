use std::collections::BTreeSet;

use serde::Serialize;

use super::FlowGraph;

/// Simplices over observation indices. Vertices and one-directional edges
/// give the 0- and 1-simplices; every larger simplex is a mutual clique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowComplex {
    pub vertices: Vec<String>,
    simplices: BTreeSet<Vec<usize>>,
}

impl FlowComplex {
    pub fn from_graph(graph: &FlowGraph) -> FlowComplex {
        let n = graph.len();
        let mut simplices: BTreeSet<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
        for (a, b, _) in graph.edges() {
            simplices.insert(vec![a.min(b), a.max(b)]);
        }
        let mut adjacency = vec![BTreeSet::new(); n];
        for (a, b) in graph.mutual_pairs() {
            adjacency[a].insert(b);
            adjacency[b].insert(a);
        }
        for clique in maximal_cliques(&adjacency) {
            if clique.len() >= 3 {
                add_faces(&clique, &mut simplices);
            }
        }
        FlowComplex {
            vertices: graph.vertices.clone(),
            simplices,
        }
    }

    /// All simplices, sorted by dimension and then lexicographically.
    pub fn simplices(&self) -> Vec<&[usize]> {
        let mut out: Vec<&[usize]> = self.simplices.iter().map(Vec::as_slice).collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    pub fn contains(&self, simplex: &[usize]) -> bool {
        let mut s = simplex.to_vec();
        s.sort_unstable();
        self.simplices.contains(&s)
    }

    pub fn of_dim(&self, k: usize) -> Vec<&[usize]> {
        self.simplices().into_iter().filter(|s| s.len() == k + 1).collect()
    }

    pub fn dimension(&self) -> usize {
        self.simplices
            .iter()
            .map(|s| s.len())
            .max()
            .unwrap_or(1)
            .saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Whether every facet of every simplex is present.
    pub fn is_closed(&self) -> bool {
        self.simplices.iter().filter(|s| s.len() > 1).all(|s| {
            (0..s.len()).all(|drop| {
                let facet: Vec<usize> = s
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != drop)
                    .map(|(_, v)| *v)
                    .collect();
                self.simplices.contains(&facet)
            })
        })
    }

    /// `[h1,h2,h3]` style label.
    pub fn label(&self, simplex: &[usize]) -> String {
        let names: Vec<&str> = simplex.iter().map(|&v| self.vertices[v].as_str()).collect();
        if names.len() == 1 {
            names[0].to_string()
        } else {
            format!("[{}]", names.join(","))
        }
    }

    pub fn to_serial(&self) -> ComplexSerial {
        ComplexSerial {
            vertices: self.vertices.clone(),
            simplices: self
                .simplices()
                .into_iter()
                .map(|s| s.iter().map(|&v| self.vertices[v].clone()).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexSerial {
    pub vertices: Vec<String>,
    pub simplices: Vec<Vec<String>>,
}

fn add_faces(clique: &[usize], out: &mut BTreeSet<Vec<usize>>) {
    let m = clique.len();
    for mask in 1u64..(1u64 << m) {
        let face: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| clique[i]).collect();
        out.insert(face);
    }
}

/// Bron-Kerbosch with pivoting; cliques come out sorted.
fn maximal_cliques(adj: &[BTreeSet<usize>]) -> Vec<Vec<usize>> {
    fn expand(
        adj: &[BTreeSet<usize>],
        r: &mut Vec<usize>,
        mut p: BTreeSet<usize>,
        mut x: BTreeSet<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if p.is_empty() && x.is_empty() {
            let mut c = r.clone();
            c.sort_unstable();
            out.push(c);
            return;
        }
        let pivot = *p
            .union(&x)
            .max_by_key(|&&u| adj[u].intersection(&p).count())
            .expect("p or x is nonempty");
        let candidates: Vec<usize> = p.difference(&adj[pivot]).copied().collect();
        for v in candidates {
            r.push(v);
            expand(
                adj,
                r,
                p.intersection(&adj[v]).copied().collect(),
                x.intersection(&adj[v]).copied().collect(),
                out,
            );
            r.pop();
            p.remove(&v);
            x.insert(v);
        }
    }
    let mut out = Vec::new();
    expand(
        adj,
        &mut Vec::new(),
        (0..adj.len()).collect(),
        BTreeSet::new(),
        &mut out,
    );
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("h{i}")).collect()
    }

    #[test]
    fn directed_triangle_has_no_two_simplex() {
        let g = FlowGraph::from_edges(names(3), &[(0, 1), (1, 2), (2, 0)]);
        let c = FlowComplex::from_graph(&g);
        assert_eq!(c.len(), 6);
        assert_eq!(c.dimension(), 1);
        assert!(c.contains(&[2, 0]));
        assert!(c.is_closed());
    }

    #[test]
    fn mutual_clique_fills_in() {
        let mut edges = Vec::new();
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    edges.push((a, b));
                }
            }
        }
        let c = FlowComplex::from_graph(&FlowGraph::from_edges(names(4), &edges));
        assert_eq!(c.len(), 15);
        assert_eq!(c.dimension(), 3);
        assert_eq!(c.label(&[0, 1, 2]), "[h1,h2,h3]");
        assert!(c.is_closed());
    }

    #[test]
    fn cliques_of_two_triangles() {
        let mut adj = vec![BTreeSet::new(); 5];
        for (a, b) in [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)] {
            adj[a].insert(b);
            adj[b].insert(a);
        }
        assert_eq!(maximal_cliques(&adj), vec![vec![0, 1, 2], vec![2, 3, 4]]);
    }

    #[test]
    fn isolated_vertices_only() {
        let c = FlowComplex::from_graph(&FlowGraph::new(names(3)));
        assert_eq!(c.len(), 3);
        assert_eq!(c.dimension(), 0);
    }
}
