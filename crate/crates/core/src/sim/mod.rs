//! Closed-loop simulation, edge errors, Jacobians and stabilization
//! objectives.

mod closed_loop;
mod edges;
mod linalg;
mod objective;
mod trajectory;

use thiserror::Error;

pub use closed_loop::{integrate, ClosedLoop};
pub use edges::{edge_errors, formation_edges, EdgeErrorSeries, EdgeSpec};
pub use linalg::{numeric_jacobian, stability_margins};
pub use objective::{evaluate_objective, ObjectiveStatus, OBJECTIVE_TOLERANCE};
pub use trajectory::Trajectory;

pub use nalgebra::DMatrix;

pub const DEFAULT_DT: f64 = 1e-3;
/// States beyond this magnitude end a run as divergent.
pub const DIVERGENCE_BOUND: f64 = 1e9;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("decentralization violation: control {control} of agent {agent} reads `{variable}`, which is not among its own observation or objective components")]
    DecentralizationViolation {
        agent: usize,
        control: usize,
        variable: String,
    },
    #[error("agent {agent} has {controls} control laws for {fields} fields")]
    ControlCountMismatch {
        agent: usize,
        controls: usize,
        fields: usize,
    },
    #[error("no value for parameter `{0}`")]
    MissingParameter(String),
    #[error("no initial value for state variable `{0}`")]
    MissingInitialState(String),
    #[error("objective restriction of agent {0} depends on the state")]
    StateDependentDelta(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid step: {0}")]
    InvalidStep(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("eigenvalue iteration did not converge")]
    EigenNonConvergence,
    #[error("objective `{0}` has eigenvalue components but no Jacobian was supplied")]
    MissingJacobian(String),
    #[error("evaluation failed: {0}")]
    Eval(#[from] crate::expr::EvalError),
}

/// The `x0` declared in the system, in state-variable order.
pub fn initial_state(sys: &crate::model::SystemDef) -> Result<Vec<f64>, SimError> {
    sys.state_vars
        .iter()
        .map(|v| {
            sys.x0
                .get(v)
                .copied()
                .ok_or_else(|| SimError::MissingInitialState(v.clone()))
        })
        .collect()
}
