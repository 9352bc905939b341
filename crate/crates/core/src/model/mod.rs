//! Decentralized control systems of the form
//! `x' = sum_i sum_j u_ij(delta_i(mu); h_i(x)) g_ij(x)`.
//!
//! A [`SystemDef`] is loaded from a line-oriented `.sys` file (see
//! [`parse_system`]) or from its canonical JSON form, and is immutable once
//! validated.

mod file;
mod json;
mod naive;
mod transform;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{DomainBox, Expr};

pub use file::parse_system;
pub use json::{system_from_json, system_to_json};
pub use naive::{naive_flow_graph, NaiveMode};
pub use transform::transform_system;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("undeclared variable `{name}` in {context}")]
    UndeclaredVariable { name: String, context: String },
    #[error("vector field length mismatch: `{field}` of agent {agent} has {found} components, expected {expected}")]
    FieldLengthMismatch {
        agent: usize,
        field: String,
        found: usize,
        expected: usize,
    },
    #[error("coordinate change `{change}` fails the round-trip check: {detail}")]
    RoundTrip { change: String, detail: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("agent {0} declares no owned variables")]
    MissingOwnedVars(usize),
    #[error("invalid system: {0}")]
    Invalid(String),
    #[error("unknown coordinate change `{0}`")]
    UnknownChange(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl ModelError {
    /// Attaches a line number to errors raised while validating a file.
    pub(crate) fn at_line(self, line: usize) -> ModelError {
        match self {
            ModelError::Syntax { .. } | ModelError::Io { .. } => self,
            other => ModelError::Syntax {
                line,
                column: 1,
                message: other.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Equality,
    Inequality,
}

/// A global objective `F` or local objective `f_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub name: String,
    pub kind: ObjectiveKind,
    /// Components over parameters and state variables.
    pub components: Vec<Expr>,
    /// When set, the objective has one extra component per state variable:
    /// `-Re(lambda_i)` of the closed-loop Jacobian, eigenvalues sorted by
    /// real part, largest first.
    #[serde(default)]
    pub uses_jacobian_eigenvalues: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationFn {
    pub name: String,
    pub components: Vec<Expr>,
}

impl ObservationFn {
    /// Names under which control laws refer to the components: `h1_1`, `h1_2`, ...
    pub fn component_names(&self) -> Vec<String> {
        (1..=self.components.len())
            .map(|k| format!("{}_{k}", self.name))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    pub name: String,
    /// One component per state variable, in declaration order.
    pub components: Vec<Expr>,
}

impl VectorField {
    pub fn new(name: impl Into<String>, components: Vec<Expr>) -> VectorField {
        VectorField {
            name: name.into(),
            components,
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub index: usize,
    pub observation: ObservationFn,
    pub fields: Vec<VectorField>,
    #[serde(default)]
    pub delta: Option<Vec<Expr>>,
    #[serde(default)]
    pub local_objective: Option<ObjectiveSpec>,
    #[serde(default)]
    pub owned_vars: Vec<String>,
    /// Closed-loop control laws, one per field, written over the agent's
    /// observation component names and `delta_k` for its objective
    /// restriction. Only used for simulation.
    #[serde(default)]
    pub controls: Vec<Expr>,
}

impl Agent {
    /// Names of the objective-restriction components visible to controls.
    pub fn delta_names(&self) -> Vec<String> {
        let n = self.delta.as_ref().map_or(0, Vec::len);
        (1..=n).map(|k| format!("delta_{k}")).collect()
    }
}

/// `z = forward(x)` with explicit inverse `x = inverse(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateChange {
    pub name: String,
    pub new_vars: Vec<String>,
    /// `forward[k]` defines `new_vars[k]` over the old state variables.
    pub forward: Vec<Expr>,
    /// `inverse[k]` defines old state variable `k` over `new_vars`.
    pub inverse: Vec<Expr>,
}

impl CoordinateChange {
    /// The change whose forward map is this change's inverse.
    pub fn reversed(&self, old_vars: &[String]) -> CoordinateChange {
        CoordinateChange {
            name: format!("{}^-1", self.name),
            new_vars: old_vars.to_vec(),
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    pub fn identity(vars: &[String]) -> CoordinateChange {
        let same: Vec<Expr> = vars.iter().map(|v| Expr::var(v.clone())).collect();
        CoordinateChange {
            name: "identity".into(),
            new_vars: vars.to_vec(),
            forward: same.clone(),
            inverse: same,
        }
    }
}

/// A named group of state variables: one vertex of the naive flow graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarGroup {
    pub name: String,
    pub vars: Vec<String>,
}

/// An inter-agent distance constraint `||x_to - x_from||^2 = target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormationEdge {
    pub from: usize,
    pub to: usize,
    /// Parameter holding the target squared length.
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDef {
    pub name: String,
    pub state_vars: Vec<String>,
    #[serde(default)]
    pub param_vars: Vec<String>,
    pub agents: Vec<Agent>,
    #[serde(default)]
    pub global_objective: Option<ObjectiveSpec>,
    #[serde(default)]
    pub domain: DomainBox,
    /// Variables whose sampling domain is the unit sphere rather than a box.
    #[serde(default)]
    pub sphere: Vec<String>,
    #[serde(default)]
    pub groups: Vec<VarGroup>,
    #[serde(default)]
    pub changes: Vec<CoordinateChange>,
    /// Extra named function lists, e.g. candidates for order comparisons.
    #[serde(default)]
    pub functions: BTreeMap<String, Vec<Expr>>,
    #[serde(default)]
    pub formation_edges: Vec<FormationEdge>,
    /// Default parameter values.
    #[serde(default)]
    pub mu: BTreeMap<String, f64>,
    /// Default initial state.
    #[serde(default)]
    pub x0: BTreeMap<String, f64>,
}

impl SystemDef {
    pub fn dim(&self) -> usize {
        self.state_vars.len()
    }

    pub fn agent(&self, index: usize) -> Option<&Agent> {
        self.agents.iter().find(|a| a.index == index)
    }

    pub fn change(&self, name: &str) -> Result<&CoordinateChange, ModelError> {
        self.changes
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| ModelError::UnknownChange(name.to_string()))
    }

    pub fn observation_names(&self) -> Vec<String> {
        self.agents.iter().map(|a| a.observation.name.clone()).collect()
    }

    /// Looks up a function list by id: an observation name, `delta<i>`,
    /// a local objective name, the global objective name, or a `function`.
    pub fn function_by_id(&self, id: &str) -> Option<Vec<Expr>> {
        if let Some(f) = self.functions.get(id) {
            return Some(f.clone());
        }
        for a in &self.agents {
            if a.observation.name == id {
                return Some(a.observation.components.clone());
            }
            if id == format!("delta{}", a.index) {
                return a.delta.clone();
            }
            if let Some(obj) = &a.local_objective {
                if obj.name == id {
                    return Some(obj.components.clone());
                }
            }
        }
        match &self.global_objective {
            Some(obj) if obj.name == id => Some(obj.components.clone()),
            _ => None,
        }
    }

    pub fn objective_by_id(&self, id: &str) -> Option<&ObjectiveSpec> {
        self.agents
            .iter()
            .filter_map(|a| a.local_objective.as_ref())
            .chain(self.global_objective.as_ref())
            .find(|o| o.name == id)
    }

    /// Agents whose fields have components outside their owned variables,
    /// i.e. where the product structure `pi_j g_i = 0` fails.
    pub fn product_structure_violations(&self) -> Vec<usize> {
        self.agents
            .iter()
            .filter(|a| !a.owned_vars.is_empty())
            .filter(|a| {
                a.fields.iter().any(|g| {
                    g.components
                        .iter()
                        .zip(&self.state_vars)
                        .any(|(c, v)| !c.is_literal_zero() && !a.owned_vars.contains(v))
                })
            })
            .map(|a| a.index)
            .collect()
    }

    /// Simplifies every expression in place.
    pub(crate) fn normalize(&mut self) {
        let simp = |xs: &mut Vec<Expr>| xs.iter_mut().for_each(|e| *e = e.simplify());
        for a in &mut self.agents {
            simp(&mut a.observation.components);
            a.fields.iter_mut().for_each(|g| simp(&mut g.components));
            if let Some(d) = &mut a.delta {
                simp(d);
            }
            if let Some(o) = &mut a.local_objective {
                simp(&mut o.components);
            }
            simp(&mut a.controls);
        }
        if let Some(o) = &mut self.global_objective {
            simp(&mut o.components);
        }
        for c in &mut self.changes {
            simp(&mut c.forward);
            simp(&mut c.inverse);
        }
        self.functions.values_mut().for_each(simp);
    }

    /// Checks every structural invariant; coordinate changes are verified
    /// with the zero tester.
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut seen = BTreeSet::new();
        for v in self.state_vars.iter().chain(&self.param_vars) {
            if !is_identifier(v) {
                return Err(ModelError::Invalid(format!("`{v}` is not a valid identifier")));
            }
            if !seen.insert(v.as_str()) {
                return Err(ModelError::Invalid(format!("variable `{v}` declared twice")));
            }
        }
        if self.state_vars.is_empty() {
            return Err(ModelError::Invalid("no state variables declared".into()));
        }
        let declared: BTreeSet<&str> = seen;
        let check_vars = |e: &Expr, context: &str| -> Result<(), ModelError> {
            for v in e.syntactic_vars() {
                if !declared.contains(v.as_str()) {
                    return Err(ModelError::UndeclaredVariable {
                        name: v,
                        context: context.to_string(),
                    });
                }
            }
            Ok(())
        };

        let mut owned_by: BTreeMap<&str, usize> = BTreeMap::new();
        for (pos, a) in self.agents.iter().enumerate() {
            if a.index != pos + 1 {
                return Err(ModelError::Invalid(format!(
                    "agent indices must be 1..n in order; found {} at position {}",
                    a.index,
                    pos + 1
                )));
            }
            if a.observation.components.is_empty() {
                return Err(ModelError::Invalid(format!(
                    "agent {} has an empty observation",
                    a.index
                )));
            }
            if a.fields.is_empty() {
                return Err(ModelError::Invalid(format!(
                    "agent {} has no control vector field",
                    a.index
                )));
            }
            for c in &a.observation.components {
                check_vars(c, &format!("observation `{}`", a.observation.name))?;
            }
            for g in &a.fields {
                if g.components.len() != self.dim() {
                    return Err(ModelError::FieldLengthMismatch {
                        agent: a.index,
                        field: g.name.clone(),
                        found: g.components.len(),
                        expected: self.dim(),
                    });
                }
                for c in &g.components {
                    check_vars(c, &format!("field `{}`", g.name))?;
                }
            }
            for c in a.delta.iter().flatten() {
                check_vars(c, &format!("delta of agent {}", a.index))?;
                if let Some(v) = c.syntactic_vars().into_iter().find(|v| self.state_vars.contains(v)) {
                    return Err(ModelError::Invalid(format!(
                        "delta of agent {} depends on state variable `{v}`; it may only use parameters",
                        a.index
                    )));
                }
            }
            if let Some(o) = &a.local_objective {
                validate_objective(o, &check_vars)?;
            }
            if !a.controls.is_empty() && a.controls.len() != a.fields.len() {
                return Err(ModelError::Invalid(format!(
                    "agent {} has {} controls for {} fields",
                    a.index,
                    a.controls.len(),
                    a.fields.len()
                )));
            }
            for v in &a.owned_vars {
                if !self.state_vars.contains(v) {
                    return Err(ModelError::UndeclaredVariable {
                        name: v.clone(),
                        context: format!("owned variables of agent {}", a.index),
                    });
                }
                if let Some(other) = owned_by.insert(v, a.index) {
                    return Err(ModelError::Invalid(format!(
                        "variable `{v}` owned by both agent {other} and agent {}",
                        a.index
                    )));
                }
            }
        }
        if let Some(o) = &self.global_objective {
            validate_objective(o, &check_vars)?;
        }
        let mut grouped = BTreeSet::new();
        for g in &self.groups {
            for v in &g.vars {
                if !self.state_vars.contains(v) {
                    return Err(ModelError::UndeclaredVariable {
                        name: v.clone(),
                        context: format!("group `{}`", g.name),
                    });
                }
                if !grouped.insert(v) {
                    return Err(ModelError::Invalid(format!("variable `{v}` appears in two groups")));
                }
            }
        }
        for (name, f) in &self.functions {
            for c in f {
                check_vars(c, &format!("function `{name}`"))?;
            }
        }
        for v in &self.sphere {
            if !declared.contains(v.as_str()) {
                return Err(ModelError::UndeclaredVariable {
                    name: v.clone(),
                    context: "sphere declaration".into(),
                });
            }
        }
        for e in &self.formation_edges {
            for idx in [e.from, e.to] {
                match self.agent(idx) {
                    Some(a) if !a.owned_vars.is_empty() => {}
                    Some(_) => return Err(ModelError::MissingOwnedVars(idx)),
                    None => return Err(ModelError::Invalid(format!("formation edge names unknown agent {idx}"))),
                }
            }
            if !self.param_vars.contains(&e.target) {
                return Err(ModelError::UndeclaredVariable {
                    name: e.target.clone(),
                    context: "formation edge target".into(),
                });
            }
        }
        for k in self.mu.keys() {
            if !self.param_vars.contains(k) {
                return Err(ModelError::UndeclaredVariable {
                    name: k.clone(),
                    context: "mu".into(),
                });
            }
        }
        for k in self.x0.keys() {
            if !self.state_vars.contains(k) {
                return Err(ModelError::UndeclaredVariable {
                    name: k.clone(),
                    context: "x0".into(),
                });
            }
        }
        for c in &self.changes {
            transform::verify_change(self, c)?;
        }
        Ok(())
    }
}

fn validate_objective(
    o: &ObjectiveSpec,
    check_vars: &dyn Fn(&Expr, &str) -> Result<(), ModelError>,
) -> Result<(), ModelError> {
    if o.components.is_empty() && !o.uses_jacobian_eigenvalues {
        return Err(ModelError::Invalid(format!("objective `{}` has no components", o.name)));
    }
    for c in &o.components {
        check_vars(c, &format!("objective `{}`", o.name))?;
    }
    Ok(())
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && s != "sqrt"
}

/// Reads a system from a `.sys` file, or from canonical JSON when the path
/// ends in `.json`.
pub fn load_system(path: impl AsRef<Path>) -> Result<SystemDef, ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    if path.extension().is_some_and(|e| e == "json") {
        system_from_json(&text)
    } else {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("system");
        parse_system(&text, stem)
    }
}
