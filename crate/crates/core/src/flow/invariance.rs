use serde::Serialize;

use super::{info_flow_graph, FlowGraph};
use crate::model::{naive_flow_graph, transform_system, CoordinateChange, ModelError, SystemDef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InvarianceStatus {
    Equal,
    Differ,
    /// No confirmed difference, but some edges could not be decided.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub status: InvarianceStatus,
    pub naive: bool,
    pub left: GraphSummary,
    pub right: GraphSummary,
    /// Edges confirmed on the left and absent (not even undecided) on the right.
    pub only_left: Vec<[String; 2]>,
    pub only_right: Vec<[String; 2]>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub system: String,
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
    pub unknown_edges: Vec<[String; 2]>,
}

impl GraphSummary {
    fn of(system: &str, g: &FlowGraph) -> GraphSummary {
        let name = |&(a, b): &(usize, usize)| [g.vertices[a].clone(), g.vertices[b].clone()];
        GraphSummary {
            system: system.to_string(),
            vertices: g.vertices.clone(),
            edges: g.edge_pairs().iter().map(name).collect(),
            unknown_edges: g.unknown_edges().iter().map(name).collect(),
        }
    }
}

/// Compares two graphs whose vertices correspond by position.
pub fn compare_graphs(
    left_name: &str,
    left: &FlowGraph,
    right_name: &str,
    right: &FlowGraph,
    naive: bool,
) -> InvarianceReport {
    let mut report = InvarianceReport {
        status: InvarianceStatus::Equal,
        naive,
        left: GraphSummary::of(left_name, left),
        right: GraphSummary::of(right_name, right),
        only_left: Vec::new(),
        only_right: Vec::new(),
        note: None,
    };
    if left.len() != right.len() {
        report.status = InvarianceStatus::Differ;
        report.note = Some(format!("vertex counts differ: {} vs {}", left.len(), right.len()));
        return report;
    }
    let missing = |a: &FlowGraph, b: &FlowGraph| -> Vec<[String; 2]> {
        a.edge_pairs()
            .into_iter()
            .filter(|&(x, y)| !b.has_edge(x, y) && !b.unknown_edges().contains(&(x, y)))
            .map(|(x, y)| [a.vertices[x].clone(), a.vertices[y].clone()])
            .collect()
    };
    report.only_left = missing(left, right);
    report.only_right = missing(right, left);
    report.status = if !report.only_left.is_empty() || !report.only_right.is_empty() {
        InvarianceStatus::Differ
    } else if !left.unknown_edges().is_empty() || !right.unknown_edges().is_empty() {
        InvarianceStatus::Inconclusive
    } else {
        InvarianceStatus::Equal
    };
    report
}

/// Information flow graph of `sys` against that of its transform.
pub fn check_invariance(
    sys: &SystemDef,
    change: &CoordinateChange,
    depth: usize,
) -> Result<InvarianceReport, ModelError> {
    let other = transform_system(sys, change)?;
    Ok(check_invariance_between(sys, &other, depth))
}

/// Information flow graphs of two descriptions of the same system.
pub fn check_invariance_between(a: &SystemDef, b: &SystemDef, depth: usize) -> InvarianceReport {
    compare_graphs(
        &a.name,
        &info_flow_graph(a, depth),
        &b.name,
        &info_flow_graph(b, depth),
        false,
    )
}

/// Naive flow graph of `sys` against that of its transform.
pub fn check_naive_invariance(sys: &SystemDef, change: &CoordinateChange) -> Result<InvarianceReport, ModelError> {
    let other = transform_system(sys, change)?;
    check_naive_invariance_between(sys, &other)
}

pub fn check_naive_invariance_between(a: &SystemDef, b: &SystemDef) -> Result<InvarianceReport, ModelError> {
    Ok(compare_graphs(
        &a.name,
        &naive_flow_graph(a)?,
        &b.name,
        &naive_flow_graph(b)?,
        true,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::Evidence;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("h{i}")).collect()
    }

    #[test]
    fn statuses() {
        let a = FlowGraph::from_edges(names(3), &[(0, 1), (1, 2)]);
        let b = FlowGraph::from_edges(names(3), &[(0, 1), (1, 2)]);
        assert_eq!(compare_graphs("a", &a, "b", &b, false).status, InvarianceStatus::Equal);

        let c = FlowGraph::from_edges(names(3), &[(0, 1)]);
        let r = compare_graphs("a", &a, "c", &c, false);
        assert_eq!(r.status, InvarianceStatus::Differ);
        assert_eq!(r.only_left, [["h2".to_string(), "h3".to_string()]]);

        let mut d = FlowGraph::from_edges(names(3), &[(0, 1)]);
        d.add_unknown(1, 2);
        assert_eq!(
            compare_graphs("a", &a, "d", &d, false).status,
            InvarianceStatus::Inconclusive
        );

        let mut e = FlowGraph::new(names(2));
        e.add_edge(0, 1, Evidence::Declared);
        assert_eq!(compare_graphs("a", &a, "e", &e, false).status, InvarianceStatus::Differ);
    }
}
