use crate::expr::{is_zero, ZeroVerdict};
use crate::lie::{bracket_closure, lie_derivative};
use crate::model::SystemDef;

use super::{Evidence, FlowGraph};

/// The coordinate-free information flow graph: an edge `h_j -> h_i` when
/// some field in the depth-bounded bracket closure of agent `i`'s fields
/// moves a component of `h_j`. Pairs whose derivatives are all inconclusive
/// land in the graph's unknown edges.
///
/// # Panics
///
/// If `sys` has not been validated (field lengths disagree with the state
/// dimension).
pub fn info_flow_graph(sys: &SystemDef, depth: usize) -> FlowGraph {
    let mut graph = FlowGraph::new(sys.observation_names());
    for (i, agent) in sys.agents.iter().enumerate() {
        let closure = bracket_closure(&agent.fields, depth, &sys.state_vars, &sys.domain)
            .expect("validated system has consistent field dimensions");
        for (j, other) in sys.agents.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut inconclusive = false;
            'search: for g in closure.fields() {
                let derivative = lie_derivative(g, &other.observation.components, &sys.state_vars)
                    .expect("validated system has consistent field dimensions");
                for (c, d) in derivative.iter().enumerate() {
                    match is_zero(d, &sys.domain) {
                        ZeroVerdict::IdenticallyZero => {}
                        ZeroVerdict::NotIdenticallyZero { witness, value } => {
                            graph.add_edge(
                                j,
                                i,
                                Evidence::Lie {
                                    field: g.name.clone(),
                                    component: c + 1,
                                    derivative: d.to_string(),
                                    witness,
                                    value,
                                },
                            );
                            break 'search;
                        }
                        ZeroVerdict::Unknown => inconclusive = true,
                    }
                }
            }
            if inconclusive {
                graph.add_unknown(j, i);
            }
        }
    }
    graph
}
