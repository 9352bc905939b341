use std::collections::BTreeMap;

use serde::Serialize;

use super::compare::{sample_values, satisfied};
use super::{OrderError, SampleSet};
use crate::model::{ObjectiveSpec, SystemDef};
use crate::sim::{numeric_jacobian, stability_margins, ClosedLoop, DMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum WellPosedVerdict {
    WellPosedOnSamples,
    /// All local objectives hold at `point` but the global one does not.
    CounterexampleFound {
        index: usize,
        point: BTreeMap<String, f64>,
        global_values: Vec<f64>,
        failing_components: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WellPosedReport {
    pub verdict: WellPosedVerdict,
    pub samples: usize,
    /// Samples at which every local objective held; zero makes the verdict
    /// vacuous.
    pub locals_satisfied: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl WellPosedReport {
    pub fn is_well_posed(&self) -> bool {
        matches!(self.verdict, WellPosedVerdict::WellPosedOnSamples)
    }
}

/// Values of `o` at every sample, eigenvalue components included.
fn objective_values(
    o: &ObjectiveSpec,
    samples: &SampleSet,
    mu: &BTreeMap<String, f64>,
    closed_loop: &Option<ClosedLoop>,
    state_index: &[usize],
) -> Result<Vec<Vec<f64>>, OrderError> {
    let mut values = sample_values(&o.components, &o.name, samples, mu)?;
    if o.uses_jacobian_eigenvalues {
        let cl = closed_loop
            .as_ref()
            .expect("built when eigenvalue components are present");
        for (row, p) in values.iter_mut().zip(&samples.points) {
            let x: Vec<f64> = state_index.iter().map(|&k| p[k]).collect();
            let j: DMatrix<f64> = numeric_jacobian(|y| cl.rhs_vec(y), &x)?;
            row.extend(stability_margins(&j)?);
        }
    }
    Ok(values)
}

/// Tests `f_i >= 0 (or = 0) for all i  =>  F >= 0 (or = 0)` at every
/// sample. Samples must cover the state variables; parameters come from
/// `mu`. Tolerance is the sample set's, used as an absolute bound.
pub fn check_well_posed(
    sys: &SystemDef,
    mu: &BTreeMap<String, f64>,
    samples: &SampleSet,
) -> Result<WellPosedReport, OrderError> {
    let global = sys
        .global_objective
        .as_ref()
        .ok_or_else(|| OrderError::MissingObjective("global objective".into()))?;
    let mut locals = Vec::new();
    for a in &sys.agents {
        let f = a
            .local_objective
            .as_ref()
            .ok_or_else(|| OrderError::MissingObjective(format!("local objective of agent {}", a.index)))?;
        if f.kind != global.kind {
            return Err(OrderError::KindMismatch(format!(
                "agent {} has a {:?} local objective, the global one is {:?}",
                a.index, f.kind, global.kind
            )));
        }
        locals.push(f);
    }
    for p in &sys.param_vars {
        if !mu.contains_key(p) && !samples.vars.contains(p) {
            return Err(OrderError::MissingParameter(p.clone()));
        }
    }
    let state_index = sys
        .state_vars
        .iter()
        .map(|v| {
            samples
                .vars
                .iter()
                .position(|s| s == v)
                .ok_or_else(|| OrderError::UncoveredVariable {
                    function: "state".into(),
                    variable: v.clone(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let needs_jacobian = global.uses_jacobian_eigenvalues || locals.iter().any(|f| f.uses_jacobian_eigenvalues);
    let closed_loop = if needs_jacobian {
        Some(ClosedLoop::new(sys, mu)?)
    } else {
        None
    };

    let tol = samples.tolerance;
    let mut all_locals = vec![true; samples.len()];
    for f in &locals {
        for (ok, v) in all_locals
            .iter_mut()
            .zip(objective_values(f, samples, mu, &closed_loop, &state_index)?)
        {
            *ok &= satisfied(f.kind, &v, tol);
        }
    }
    let global_values = objective_values(global, samples, mu, &closed_loop, &state_index)?;
    let mut verdict = WellPosedVerdict::WellPosedOnSamples;
    for (index, v) in global_values.iter().enumerate() {
        if all_locals[index] && !satisfied(global.kind, v, tol) {
            let failing_components = v
                .iter()
                .enumerate()
                .filter(|(_, c)| !satisfied(global.kind, std::slice::from_ref(c), tol))
                .map(|(k, _)| k)
                .collect();
            verdict = WellPosedVerdict::CounterexampleFound {
                index,
                point: samples.point(index),
                global_values: v.clone(),
                failing_components,
            };
            break;
        }
    }
    Ok(WellPosedReport {
        verdict,
        samples: samples.len(),
        locals_satisfied: all_locals.iter().filter(|&&b| b).count(),
        tolerance: tol,
        seed: samples.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_system;

    const RENDEZVOUS: &str = "
statevars x1 x2
agent 1
  owns x1
  obs = (x2 - x1)
  field = (1, 0)
  local = (-(x1 - x2)^2)
agent 2
  owns x2
  obs = (x1 - x2)
  field = (0, 1)
  local = (-(x1 - x2)^2)
objective = (-(x1 - x2)^2)
";

    #[test]
    fn rendezvous_is_well_posed() {
        let sys = parse_system(RENDEZVOUS, "rendezvous").unwrap();
        let s = SampleSet::random(&sys.state_vars, &sys.domain, &[], 256, 1).unwrap();
        let r = check_well_posed(&sys, &BTreeMap::new(), &s).unwrap();
        assert!(r.is_well_posed());
        assert_eq!(r.locals_satisfied, 0);
        // grid points on the diagonal make the check non-vacuous
        let g = SampleSet::grid(&sys.state_vars, &sys.domain, 5).unwrap();
        let r = check_well_posed(&sys, &BTreeMap::new(), &g).unwrap();
        assert!(r.is_well_posed());
        assert_eq!(r.locals_satisfied, 5);
    }

    #[test]
    fn unconstrained_global_component_fails() {
        let text = RENDEZVOUS.replace("objective = (-(x1 - x2)^2)", "objective = (-(x1 - x2)^2, x1)");
        let text = text.replace("local = (", "local kind=inequality = (");
        let text = text.replace("objective = (", "objective kind=inequality = (");
        let sys = parse_system(&text, "rendezvous").unwrap();
        let g = SampleSet::grid(&sys.state_vars, &sys.domain, 5).unwrap();
        match check_well_posed(&sys, &BTreeMap::new(), &g).unwrap().verdict {
            WellPosedVerdict::CounterexampleFound {
                point,
                failing_components,
                ..
            } => {
                assert!(point["x1"] < 0.0);
                assert_eq!(point["x1"], point["x2"]);
                assert_eq!(failing_components, [1]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_local_objective() {
        let text = RENDEZVOUS.replacen("  local = (-(x1 - x2)^2)\n", "", 1);
        let sys = parse_system(&text, "r").unwrap();
        let g = SampleSet::grid(&sys.state_vars, &sys.domain, 3).unwrap();
        assert!(matches!(
            check_well_posed(&sys, &BTreeMap::new(), &g),
            Err(OrderError::MissingObjective(_))
        ));
    }
}
