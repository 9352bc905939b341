//! Information flow graphs, flow complexes and information loops.

mod build;
mod complex;
mod graph;
mod invariance;
mod loops;
mod output;

pub use build::info_flow_graph;
pub use complex::{ComplexSerial, FlowComplex};
pub use graph::{Evidence, FlowGraph};
pub use invariance::{
    check_invariance, check_invariance_between, check_naive_invariance, check_naive_invariance_between, compare_graphs,
    GraphSummary, InvarianceReport, InvarianceStatus,
};
pub use loops::{
    classify, find_information_loops, Classification, LoopKind, LoopReport, LoopSearch, DEFAULT_MAX_LEN, MAX_CYCLES,
};
pub use output::{complex_to_dot, graph_to_dot, EdgeRecord, FlowReport, LoopRecord};

use crate::model::SystemDef;

/// The flow complex of [`info_flow_graph`].
pub fn info_flow_complex(sys: &SystemDef, depth: usize) -> FlowComplex {
    FlowComplex::from_graph(&info_flow_graph(sys, depth))
}
