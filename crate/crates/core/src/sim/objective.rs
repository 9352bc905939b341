use std::collections::BTreeMap;

use serde::Serialize;

use super::{stability_margins, DMatrix, SimError};
use crate::expr::Compiled;
use crate::model::{ObjectiveKind, ObjectiveSpec};

pub const OBJECTIVE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ObjectiveStatus {
    Satisfied {
        values: Vec<f64>,
    },
    /// Failing component indices (0-based) and all component values.
    Violated {
        components: Vec<usize>,
        values: Vec<f64>,
    },
}

impl ObjectiveStatus {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, ObjectiveStatus::Satisfied { .. })
    }
}

/// Checks `F(mu; x) = 0` or `>= 0` entrywise within [`OBJECTIVE_TOLERANCE`].
/// Eigenvalue components are the stability margins of `jacobian`, appended
/// after the expression components.
pub fn evaluate_objective(
    objective: &ObjectiveSpec,
    state_vars: &[String],
    mu: &BTreeMap<String, f64>,
    x: &[f64],
    jacobian: Option<&DMatrix<f64>>,
) -> Result<ObjectiveStatus, SimError> {
    if x.len() != state_vars.len() {
        return Err(SimError::DimensionMismatch(format!(
            "{} values for {} state variables",
            x.len(),
            state_vars.len()
        )));
    }
    let mut vars = state_vars.to_vec();
    let mut point = x.to_vec();
    for (k, v) in mu {
        vars.push(k.clone());
        point.push(*v);
    }
    let mut values = Vec::with_capacity(objective.components.len());
    for c in &objective.components {
        let v = Compiled::new(c, &vars)?.eval(&point);
        if !v.is_finite() {
            return Err(SimError::NonFinite(format!("component `{c}` of `{}`", objective.name)));
        }
        values.push(v);
    }
    if objective.uses_jacobian_eigenvalues {
        let j = jacobian.ok_or_else(|| SimError::MissingJacobian(objective.name.clone()))?;
        values.extend(stability_margins(j)?);
    }
    let failing: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| match objective.kind {
            ObjectiveKind::Equality => v.abs() > OBJECTIVE_TOLERANCE,
            ObjectiveKind::Inequality => **v < -OBJECTIVE_TOLERANCE,
        })
        .map(|(k, _)| k)
        .collect();
    Ok(if failing.is_empty() {
        ObjectiveStatus::Satisfied { values }
    } else {
        ObjectiveStatus::Violated {
            components: failing,
            values,
        }
    })
}
