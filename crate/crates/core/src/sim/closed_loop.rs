use std::collections::{BTreeMap, BTreeSet};

use super::{SimError, Trajectory, DIVERGENCE_BOUND};
use crate::expr::{evaluate, Compiled, Expr, Number};
use crate::model::SystemDef;

struct AgentLoop {
    observation: Vec<Compiled>,
    controls: Vec<Compiled>,
    /// Nonzero components `(state index, g_ij[k])` per field.
    fields: Vec<Vec<(usize, Compiled)>>,
    /// `h_i` then `delta_i` values, the control inputs.
    inputs: Vec<f64>,
}

/// The assembled right-hand side `x' = sum_ij u_ij(delta_i; h_i(x)) g_ij(x)`
/// at fixed parameter values.
pub struct ClosedLoop {
    pub system: String,
    pub state_vars: Vec<String>,
    agents: Vec<std::cell::RefCell<AgentLoop>>,
    params: Vec<f64>,
    control_law: String,
}

impl ClosedLoop {
    /// Uses the control laws declared in the system.
    pub fn new(sys: &SystemDef, mu: &BTreeMap<String, f64>) -> Result<ClosedLoop, SimError> {
        let controls: Vec<Vec<Expr>> = sys.agents.iter().map(|a| a.controls.clone()).collect();
        ClosedLoop::with_controls(sys, &controls, mu)
    }

    /// `controls[i][j]` is the law for field `j` of agent `i`, written over
    /// the agent's observation component names (`h1_1`, ...) and
    /// `delta_1`, ... Any other variable is rejected.
    pub fn with_controls(
        sys: &SystemDef,
        controls: &[Vec<Expr>],
        mu: &BTreeMap<String, f64>,
    ) -> Result<ClosedLoop, SimError> {
        if controls.len() != sys.agents.len() {
            return Err(SimError::DimensionMismatch(format!(
                "{} control lists for {} agents",
                controls.len(),
                sys.agents.len()
            )));
        }
        let mut params = Vec::with_capacity(sys.param_vars.len());
        for p in &sys.param_vars {
            params.push(*mu.get(p).ok_or_else(|| SimError::MissingParameter(p.clone()))?);
        }
        let mut vars = sys.state_vars.clone();
        vars.extend(sys.param_vars.iter().cloned());
        let mu_exact: BTreeMap<String, Number> = sys
            .param_vars
            .iter()
            .zip(&params)
            .map(|(k, v)| (k.clone(), Number::from_f64(*v)))
            .collect();

        let mut agents = Vec::new();
        for (a, laws) in sys.agents.iter().zip(controls) {
            if laws.len() != a.fields.len() {
                return Err(SimError::ControlCountMismatch {
                    agent: a.index,
                    controls: laws.len(),
                    fields: a.fields.len(),
                });
            }
            let mut inputs_names = a.observation.component_names();
            inputs_names.extend(a.delta_names());
            let allowed: BTreeSet<&String> = inputs_names.iter().collect();
            for (j, law) in laws.iter().enumerate() {
                if let Some(v) = law.syntactic_vars().into_iter().find(|v| !allowed.contains(v)) {
                    return Err(SimError::DecentralizationViolation {
                        agent: a.index,
                        control: j + 1,
                        variable: v,
                    });
                }
            }
            let mut deltas = Vec::new();
            for d in a.delta.iter().flatten() {
                if d.syntactic_vars().iter().any(|v| sys.state_vars.contains(v)) {
                    return Err(SimError::StateDependentDelta(a.index));
                }
                deltas.push(evaluate(d, &mu_exact)?.to_f64());
            }
            let observation = a
                .observation
                .components
                .iter()
                .map(|h| Compiled::new(h, &vars))
                .collect::<Result<Vec<_>, _>>()?;
            let fields = a
                .fields
                .iter()
                .map(|g| {
                    g.components
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_literal_zero())
                        .map(|(k, c)| Ok((k, Compiled::new(c, &vars)?)))
                        .collect::<Result<Vec<_>, SimError>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            let compiled_laws = laws
                .iter()
                .map(|u| Compiled::new(u, &inputs_names))
                .collect::<Result<Vec<_>, _>>()?;
            let mut inputs = vec![0.0; observation.len()];
            inputs.extend(deltas);
            agents.push(std::cell::RefCell::new(AgentLoop {
                observation,
                controls: compiled_laws,
                fields,
                inputs,
            }));
        }
        let control_law = controls
            .iter()
            .flatten()
            .map(|u| u.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        Ok(ClosedLoop {
            system: sys.name.clone(),
            state_vars: sys.state_vars.clone(),
            agents,
            params,
            control_law,
        })
    }

    pub fn dim(&self) -> usize {
        self.state_vars.len()
    }

    /// Evaluates the right-hand side at `x` into `out`.
    pub fn rhs(&self, x: &[f64], out: &mut [f64]) {
        let mut point = Vec::with_capacity(x.len() + self.params.len());
        point.extend_from_slice(x);
        point.extend_from_slice(&self.params);
        out.iter_mut().for_each(|v| *v = 0.0);
        for cell in &self.agents {
            let mut a = cell.borrow_mut();
            let a = &mut *a;
            for (slot, h) in a.inputs.iter_mut().zip(&a.observation) {
                *slot = h.eval(&point);
            }
            for (u, field) in a.controls.iter().zip(&a.fields) {
                let u = u.eval(&a.inputs);
                if u == 0.0 {
                    continue;
                }
                for (k, g) in field {
                    out[*k] += u * g.eval(&point);
                }
            }
        }
    }

    pub fn rhs_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.rhs(x, &mut out);
        out
    }

    /// Classical fixed-step RK4 from `x0` over `round(t_end / dt)` steps.
    /// The state update uses compensated summation so that roundoff stays
    /// well below the truncation error at small steps.
    pub fn integrate(&self, x0: &[f64], dt: f64, t_end: f64) -> Result<Trajectory, SimError> {
        let n = self.dim();
        if x0.len() != n {
            return Err(SimError::DimensionMismatch(format!(
                "initial state has {} entries for {n} variables",
                x0.len()
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::InvalidStep(format!("dt must be positive, got {dt}")));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(SimError::InvalidStep(format!("t_end must be positive, got {t_end}")));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite("initial state".into()));
        }
        let steps = (t_end / dt).round().max(1.0) as usize;
        let mut traj = Trajectory::new(&self.system, &self.state_vars, dt, &self.control_law);
        traj.push(0.0, x0.to_vec());

        let mut x = x0.to_vec();
        let mut carry = vec![0.0; n];
        let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut tmp = vec![0.0; n];
        for step in 1..=steps {
            self.rhs(&x, &mut k1);
            for i in 0..n {
                tmp[i] = x[i] + 0.5 * dt * k1[i];
            }
            self.rhs(&tmp, &mut k2);
            for i in 0..n {
                tmp[i] = x[i] + 0.5 * dt * k2[i];
            }
            self.rhs(&tmp, &mut k3);
            for i in 0..n {
                tmp[i] = x[i] + dt * k3[i];
            }
            self.rhs(&tmp, &mut k4);
            for i in 0..n {
                let increment = dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) - carry[i];
                let next = x[i] + increment;
                carry[i] = (next - x[i]) - increment;
                x[i] = next;
            }
            if x.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_BOUND) {
                traj.diverged = true;
                break;
            }
            traj.push(step as f64 * dt, x.clone());
        }
        Ok(traj)
    }
}

/// Integrates `sys` under explicit control laws; see
/// [`ClosedLoop::with_controls`] for how controls are written.
pub fn integrate(
    sys: &SystemDef,
    controls: &[Vec<Expr>],
    x0: &[f64],
    mu: &BTreeMap<String, f64>,
    dt: f64,
    t_end: f64,
) -> Result<Trajectory, SimError> {
    ClosedLoop::with_controls(sys, controls, mu)?.integrate(x0, dt, t_end)
}
