//! The coordinate-dependent naive flow: vertices are groups of state
//! variables, with an edge `a -> b` when the dynamics of a variable in `a`
//! depend on a variable in `b`. Control laws are opaque, so `u_ij`
//! contributes the variables of `h_i` and `delta_i`.

use std::collections::BTreeSet;

use super::{Agent, ModelError, SystemDef, VarGroup};
use crate::expr::Expr;
use crate::flow::{Evidence, FlowGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NaiveMode {
    /// One group per agent (its owned variables). The group's dynamics are
    /// the agent's own input: they depend on what the agent observes and on
    /// the owned components of its fields.
    OwnedInputs,
    /// Explicit `group` declarations; each variable's dynamics are read off
    /// the full right-hand side `sum u_ij(h_i) g_ij`.
    Dynamics,
}

impl NaiveMode {
    pub fn of(sys: &SystemDef) -> NaiveMode {
        if sys.groups.is_empty() {
            NaiveMode::OwnedInputs
        } else {
            NaiveMode::Dynamics
        }
    }
}

fn input_vars(sys: &SystemDef, a: &Agent) -> BTreeSet<String> {
    let mut vars: BTreeSet<String> = a.observation.components.iter().flat_map(Expr::free_vars).collect();
    vars.extend(a.delta.iter().flatten().flat_map(Expr::free_vars));
    vars.retain(|v| sys.state_vars.contains(v));
    vars
}

/// Builds the naive flow graph; see [`NaiveMode`] for the two readings.
pub fn naive_flow_graph(sys: &SystemDef) -> Result<FlowGraph, ModelError> {
    let mode = NaiveMode::of(sys);
    let groups: Vec<VarGroup> = match mode {
        NaiveMode::Dynamics => sys.groups.clone(),
        NaiveMode::OwnedInputs => sys
            .agents
            .iter()
            .map(|a| {
                if a.owned_vars.is_empty() {
                    return Err(ModelError::MissingOwnedVars(a.index));
                }
                Ok(VarGroup {
                    name: a.owned_vars.join(","),
                    vars: a.owned_vars.clone(),
                })
            })
            .collect::<Result<_, _>>()?,
    };
    let group_of = |v: &str| groups.iter().position(|g| g.vars.iter().any(|x| x == v));
    let mut graph = FlowGraph::new(groups.iter().map(|g| g.name.clone()).collect());
    let state_index = |v: &str| {
        sys.state_vars
            .iter()
            .position(|x| x == v)
            .expect("validated state variable")
    };

    for (gi, group) in groups.iter().enumerate() {
        for v in &group.vars {
            let k = state_index(v);
            let mut deps = BTreeSet::new();
            for a in &sys.agents {
                let drives = match mode {
                    NaiveMode::OwnedInputs => a.owned_vars.contains(v),
                    NaiveMode::Dynamics => a.fields.iter().any(|g| !g.components[k].is_literal_zero()),
                };
                if !drives {
                    continue;
                }
                deps.extend(input_vars(sys, a));
                for g in &a.fields {
                    deps.extend(g.components[k].free_vars());
                }
            }
            for w in deps {
                if let Some(gj) = group_of(&w) {
                    graph.add_edge(
                        gi,
                        gj,
                        Evidence::Dependency {
                            variable: v.clone(),
                            depends_on: w.clone(),
                        },
                    );
                }
            }
        }
    }
    Ok(graph)
}
