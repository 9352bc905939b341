use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use super::{SimError, Trajectory};
use crate::model::SystemDef;

/// Distance constraint between two agents' position coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeSpec {
    pub label: String,
    /// State indices of the first agent's position.
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub target: f64,
}

/// `||x_b - x_a||^2 - d` per edge, or `||x_b - x_a|| - d` when `squared` is off.
pub fn edge_errors(state: &[f64], edges: &[EdgeSpec], squared: bool) -> Vec<f64> {
    edges
        .iter()
        .map(|e| {
            let d2: f64 = e.a.iter().zip(&e.b).map(|(&i, &j)| (state[j] - state[i]).powi(2)).sum();
            if squared {
                d2 - e.target
            } else {
                d2.sqrt() - e.target
            }
        })
        .collect()
}

/// Edges declared in `sys`, positioned by the agents' owned variables.
pub fn formation_edges(sys: &SystemDef, mu: &BTreeMap<String, f64>) -> Result<Vec<EdgeSpec>, SimError> {
    let position = |agent: usize| -> Result<Vec<usize>, SimError> {
        let a = sys
            .agent(agent)
            .ok_or_else(|| SimError::DimensionMismatch(format!("no agent {agent}")))?;
        Ok(a.owned_vars
            .iter()
            .map(|v| {
                sys.state_vars
                    .iter()
                    .position(|x| x == v)
                    .expect("validated owned variable")
            })
            .collect())
    };
    sys.formation_edges
        .iter()
        .map(|e| {
            let (a, b) = (position(e.from)?, position(e.to)?);
            if a.len() != b.len() {
                return Err(SimError::DimensionMismatch(format!(
                    "agents {} and {} have positions of different dimension",
                    e.from, e.to
                )));
            }
            let target = *mu
                .get(&e.target)
                .ok_or_else(|| SimError::MissingParameter(e.target.clone()))?;
            Ok(EdgeSpec {
                label: format!("e{}_{}", e.from, e.to),
                a,
                b,
                target,
            })
        })
        .collect()
}

/// Edge errors along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeErrorSeries {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl EdgeErrorSeries {
    pub fn new(traj: &Trajectory, edges: &[EdgeSpec], squared: bool) -> EdgeErrorSeries {
        EdgeErrorSeries {
            labels: edges.iter().map(|e| e.label.clone()).collect(),
            times: traj.times.clone(),
            values: traj.states.iter().map(|x| edge_errors(x, edges, squared)).collect(),
        }
    }

    /// `max_k |e_k|` at each sample.
    pub fn max_abs(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|row| row.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect()
    }

    pub fn final_max_abs(&self) -> f64 {
        self.max_abs().last().copied().unwrap_or(0.0)
    }

    pub fn to_csv(&self, stride: usize) -> String {
        let stride = stride.max(1);
        let mut out = String::from("t");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        let last = self.times.len().saturating_sub(1);
        for (k, (t, row)) in self.times.iter().zip(&self.values).enumerate() {
            if k % stride != 0 && k != last {
                continue;
            }
            let _ = write!(out, "{t}");
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}
