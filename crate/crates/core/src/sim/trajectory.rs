use std::fmt::Write;

use serde::Serialize;

/// States sampled at `times[k] = k * dt`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub system: String,
    pub state_vars: Vec<String>,
    pub control_law: String,
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Set when the run stopped early on a non-finite or huge state.
    pub diverged: bool,
}

impl Trajectory {
    pub(crate) fn new(system: &str, state_vars: &[String], dt: f64, control_law: &str) -> Trajectory {
        Trajectory {
            system: system.to_string(),
            state_vars: state_vars.to_vec(),
            control_law: control_law.to_string(),
            dt,
            times: Vec::new(),
            states: Vec::new(),
            diverged: false,
        }
    }

    pub(crate) fn push(&mut self, t: f64, x: Vec<f64>) {
        self.times.push(t);
        self.states.push(x);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().map_or(&[], Vec::as_slice)
    }

    /// Header `t,<vars>` then one row per sample, every `stride`-th row
    /// (the final row is always kept).
    pub fn to_csv(&self, stride: usize) -> String {
        let stride = stride.max(1);
        let mut out = String::from("t");
        for v in &self.state_vars {
            out.push(',');
            out.push_str(v);
        }
        out.push('\n');
        let last = self.len().saturating_sub(1);
        for (k, (t, x)) in self.times.iter().zip(&self.states).enumerate() {
            if k % stride != 0 && k != last {
                continue;
            }
            let _ = write!(out, "{t}");
            for v in x {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}
