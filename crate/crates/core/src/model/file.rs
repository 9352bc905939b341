//! The line-oriented `.sys` format.
//!
//! ```text
//! # comment; a trailing backslash continues a line
//! name four_agents
//! statevars x1 x2 x3 x4
//! params d1 d2
//! box x1 -2 2
//! agent 1
//!   owns x1
//!   obs h1 = (x1, x2)
//!   field g1_1 = (1, 0, 0, 0)
//!   delta = (d1)
//!   local kind=equality f1 = (x2 - x1 - d1)
//!   control u1_1 = h1_2 - h1_1 - delta_1
//! objective kind=inequality F = (x1 - x4)
//! change phi: z1 = x1 + x2 ; z2 = x2 ... inverse x1 = z1 - z2 ; x2 = z2 ...
//! ```
//!
//! Top-level directives: `name`, `statevars`, `params`, `box`, `sphere`,
//! `group`, `agent`, `objective`, `change`, `function`, `edge`, `mu`, `x0`.
//! Agent directives: `owns`, `obs`, `field`, `delta`, `local`, `control`.

use std::collections::BTreeSet;

use super::{
    is_identifier, Agent, CoordinateChange, FormationEdge, ModelError, ObjectiveKind, ObjectiveSpec, ObservationFn,
    SystemDef, VarGroup, VectorField,
};
use crate::expr::{parse_expr, parse_tuple, DomainBox, Expr, Interval, ParseError};

struct Line<'a> {
    number: usize,
    text: &'a str,
}

impl Line<'_> {
    fn err(&self, at: &str, message: impl Into<String>) -> ModelError {
        ModelError::Syntax {
            line: self.number,
            column: self.column_of(at),
            message: message.into(),
        }
    }

    /// 1-based column of a subslice of this line's text.
    fn column_of(&self, sub: &str) -> usize {
        let base = self.text.as_ptr() as usize;
        let p = sub.as_ptr() as usize;
        if p >= base && p <= base + self.text.len() {
            p - base + 1
        } else {
            1
        }
    }

    fn parse_error(&self, at: &str, e: ParseError) -> ModelError {
        let column = if e.line == 1 {
            self.column_of(at) + e.column - 1
        } else {
            e.column
        };
        ModelError::Syntax {
            line: self.number + e.line - 1,
            column,
            message: e.message,
        }
    }
}

/// Joins continuation lines and strips comments.
fn logical_lines(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut pending: Option<(usize, String)> = None;
    for (i, raw) in text.lines().enumerate() {
        let code = raw.split('#').next().unwrap_or("");
        let (body, continues) = match code.trim_end().strip_suffix('\\') {
            Some(b) => (b, true),
            None => (code, false),
        };
        let entry = pending.get_or_insert_with(|| (i + 1, String::new()));
        if !entry.1.is_empty() {
            entry.1.push(' ');
        }
        entry.1.push_str(body);
        if !continues {
            let done = pending.take().expect("pending line");
            if !done.1.trim().is_empty() {
                out.push(done);
            }
        }
    }
    if let Some(done) = pending {
        if !done.1.trim().is_empty() {
            out.push(done);
        }
    }
    out
}

struct Builder {
    sys: SystemDef,
}

impl Builder {
    fn declared(&self) -> BTreeSet<&str> {
        self.sys
            .state_vars
            .iter()
            .chain(&self.sys.param_vars)
            .map(String::as_str)
            .collect()
    }

    fn check_vars(&self, line: &Line, at: &str, exprs: &[Expr], allowed: &BTreeSet<&str>) -> Result<(), ModelError> {
        for e in exprs {
            for v in e.syntactic_vars() {
                if !allowed.contains(v.as_str()) {
                    return Err(line.err(at, format!("undeclared variable `{v}`")));
                }
            }
        }
        Ok(())
    }

    fn tuple(&self, line: &Line, text: &str) -> Result<Vec<Expr>, ModelError> {
        let exprs = parse_tuple(text).map_err(|e| line.parse_error(text, e))?;
        self.check_vars(line, text, &exprs, &self.declared())?;
        Ok(exprs)
    }

    fn current_agent(&mut self, line: &Line, keyword: &str) -> Result<&mut Agent, ModelError> {
        self.sys
            .agents
            .last_mut()
            .ok_or_else(|| line.err(line.text.trim_start(), format!("`{keyword}` outside an agent block")))
    }

    fn directive(&mut self, line: &Line) -> Result<(), ModelError> {
        let trimmed = line.text.trim();
        let (keyword, rest) = match trimmed.find(char::is_whitespace) {
            Some(i) => (&trimmed[..i], trimmed[i..].trim_start()),
            None => (trimmed, ""),
        };
        match keyword {
            "name" => self.sys.name = rest.to_string(),
            "statevars" | "params" => {
                for v in rest.split_whitespace() {
                    if !is_identifier(v) {
                        return Err(line.err(v, format!("`{v}` is not a valid variable name")));
                    }
                    if self.declared().contains(v) {
                        return Err(line.err(v, format!("variable `{v}` declared twice")));
                    }
                    if keyword == "statevars" {
                        self.sys.state_vars.push(v.to_string());
                    } else {
                        self.sys.param_vars.push(v.to_string());
                    }
                }
            }
            "box" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [var, lo, hi] = parts[..] else {
                    return Err(line.err(rest, "expected `box VAR LO HI`"));
                };
                let lo: f64 = lo.parse().map_err(|_| line.err(lo, "invalid lower bound"))?;
                let hi: f64 = hi.parse().map_err(|_| line.err(hi, "invalid upper bound"))?;
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(line.err(rest, "box bounds must be finite with LO <= HI"));
                }
                if !self.declared().contains(var) {
                    return Err(line.err(var, format!("undeclared variable `{var}`")));
                }
                self.sys.domain.set(var, Interval::new(lo, hi));
            }
            "sphere" => {
                for v in rest.split_whitespace() {
                    if !self.declared().contains(v) {
                        return Err(line.err(v, format!("undeclared variable `{v}`")));
                    }
                    self.sys.sphere.push(v.to_string());
                }
            }
            "group" => {
                let (name, vars) = split_assignment(line, rest)?;
                let vars: Vec<String> = vars.split_whitespace().map(str::to_string).collect();
                for v in &vars {
                    if !self.sys.state_vars.contains(v) {
                        return Err(line.err(rest, format!("undeclared state variable `{v}`")));
                    }
                }
                self.sys.groups.push(VarGroup {
                    name: name.to_string(),
                    vars,
                });
            }
            "agent" => {
                let index: usize = rest.parse().map_err(|_| line.err(rest, "expected an agent index"))?;
                let expected = self.sys.agents.len() + 1;
                if index != expected {
                    return Err(line.err(rest, format!("expected agent {expected}, found {index}")));
                }
                self.sys.agents.push(Agent {
                    index,
                    observation: ObservationFn {
                        name: format!("h{index}"),
                        components: Vec::new(),
                    },
                    fields: Vec::new(),
                    delta: None,
                    local_objective: None,
                    owned_vars: Vec::new(),
                    controls: Vec::new(),
                });
            }
            "owns" => {
                let vars: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                for v in &vars {
                    if !self.sys.state_vars.contains(v) {
                        return Err(line.err(rest, format!("undeclared state variable `{v}`")));
                    }
                }
                self.current_agent(line, keyword)?.owned_vars.extend(vars);
            }
            "obs" => {
                let (name, body) = split_optional_name(line, rest)?;
                let components = self.tuple(line, body)?;
                let agent = self.current_agent(line, keyword)?;
                if !agent.observation.components.is_empty() {
                    return Err(line.err(rest, format!("agent {} already has an observation", agent.index)));
                }
                if let Some(name) = name {
                    agent.observation.name = name.to_string();
                }
                agent.observation.components = components;
            }
            "field" => {
                let (name, body) = split_optional_name(line, rest)?;
                let components = self.tuple(line, body)?;
                let dim = self.sys.state_vars.len();
                let agent = self.current_agent(line, keyword)?;
                let name = name.map_or_else(
                    || format!("g{}_{}", agent.index, agent.fields.len() + 1),
                    str::to_string,
                );
                if components.len() != dim {
                    let e = ModelError::FieldLengthMismatch {
                        agent: agent.index,
                        field: name,
                        found: components.len(),
                        expected: dim,
                    };
                    return Err(line.err(body, e.to_string()));
                }
                agent.fields.push(VectorField::new(name, components));
            }
            "delta" => {
                let (_, body) = split_optional_name(line, rest)?;
                let components = self.tuple(line, body)?;
                self.current_agent(line, keyword)?.delta = Some(components);
            }
            "local" => {
                let (kind, jac, name, body) = objective_header(line, rest)?;
                let components = self.tuple(line, body)?;
                let agent = self.current_agent(line, keyword)?;
                let name = name.map_or_else(|| format!("f{}", agent.index), str::to_string);
                agent.local_objective = Some(ObjectiveSpec {
                    name,
                    kind,
                    components,
                    uses_jacobian_eigenvalues: jac,
                });
            }
            "control" => {
                let (_, body) = split_optional_name(line, rest)?;
                let e = parse_expr(body).map_err(|e| line.parse_error(body, e))?;
                self.current_agent(line, keyword)?.controls.push(e);
            }
            "objective" => {
                let (kind, jac, name, body) = objective_header(line, rest)?;
                let components = if body.trim().is_empty() && jac {
                    Vec::new()
                } else {
                    self.tuple(line, body)?
                };
                self.sys.global_objective = Some(ObjectiveSpec {
                    name: name.unwrap_or("F").to_string(),
                    kind,
                    components,
                    uses_jacobian_eigenvalues: jac,
                });
            }
            "function" => {
                let (name, body) = split_assignment(line, rest)?;
                let f = self.tuple(line, body)?;
                self.sys.functions.insert(name.to_string(), f);
            }
            "change" => {
                let change = self.change(line, rest)?;
                self.sys.changes.push(change);
            }
            "edge" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [a, b, target] = parts[..] else {
                    return Err(line.err(rest, "expected `edge AGENT AGENT PARAM`"));
                };
                let from = a.parse().map_err(|_| line.err(a, "expected an agent index"))?;
                let to = b.parse().map_err(|_| line.err(b, "expected an agent index"))?;
                if !self.sys.param_vars.iter().any(|p| p == target) {
                    return Err(line.err(target, format!("undeclared parameter `{target}`")));
                }
                self.sys.formation_edges.push(FormationEdge {
                    from,
                    to,
                    target: target.to_string(),
                });
            }
            "mu" | "x0" => {
                for pair in rest.split_whitespace() {
                    let Some((k, v)) = pair.split_once('=') else {
                        return Err(line.err(pair, "expected NAME=VALUE"));
                    };
                    let v: f64 = v.parse().map_err(|_| line.err(v, "invalid number"))?;
                    let known = if keyword == "mu" {
                        &self.sys.param_vars
                    } else {
                        &self.sys.state_vars
                    };
                    if !known.iter().any(|p| p == k) {
                        return Err(line.err(k, format!("undeclared variable `{k}`")));
                    }
                    let target = if keyword == "mu" {
                        &mut self.sys.mu
                    } else {
                        &mut self.sys.x0
                    };
                    target.insert(k.to_string(), v);
                }
            }
            other => return Err(line.err(keyword, format!("unknown directive `{other}`"))),
        }
        Ok(())
    }

    fn change(&self, line: &Line, rest: &str) -> Result<CoordinateChange, ModelError> {
        let (name, body) = match rest.split_whitespace().next() {
            Some(first) if first.ends_with(':') => {
                let name = &first[..first.len() - 1];
                (name.to_string(), rest[first.len()..].trim_start())
            }
            _ => (format!("change{}", self.sys.changes.len() + 1), rest),
        };
        let split = find_word(body, "inverse").ok_or_else(|| line.err(body, "missing `inverse` section"))?;
        let (fwd_text, inv_text) = (&body[..split], &body[split + "inverse".len()..]);

        let mut new_vars = Vec::new();
        let mut forward = Vec::new();
        let old: BTreeSet<&str> = self.declared();
        for (lhs, rhs) in assignments(line, fwd_text)? {
            if !is_identifier(lhs) || self.sys.param_vars.iter().any(|p| p == lhs) || new_vars.iter().any(|v| v == lhs)
            {
                return Err(line.err(lhs, format!("invalid new variable `{lhs}`")));
            }
            let e = parse_expr(rhs).map_err(|e| line.parse_error(rhs, e))?;
            self.check_vars(line, rhs, std::slice::from_ref(&e), &old)?;
            new_vars.push(lhs.to_string());
            forward.push(e);
        }
        let mut allowed: BTreeSet<&str> = new_vars.iter().map(String::as_str).collect();
        allowed.extend(self.sys.param_vars.iter().map(String::as_str));
        let mut inverse: Vec<Option<Expr>> = vec![None; self.sys.state_vars.len()];
        for (lhs, rhs) in assignments(line, inv_text)? {
            let Some(k) = self.sys.state_vars.iter().position(|v| v == lhs) else {
                return Err(line.err(lhs, format!("`{lhs}` is not a state variable")));
            };
            let e = parse_expr(rhs).map_err(|e| line.parse_error(rhs, e))?;
            self.check_vars(line, rhs, std::slice::from_ref(&e), &allowed)?;
            if inverse[k].replace(e).is_some() {
                return Err(line.err(lhs, format!("`{lhs}` defined twice")));
            }
        }
        let inverse = inverse
            .into_iter()
            .zip(&self.sys.state_vars)
            .map(|(e, v)| e.ok_or_else(|| line.err(inv_text, format!("inverse does not define `{v}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        if new_vars.len() != self.sys.state_vars.len() {
            return Err(line.err(
                fwd_text,
                format!(
                    "change defines {} new variables for {} state variables",
                    new_vars.len(),
                    self.sys.state_vars.len()
                ),
            ));
        }
        Ok(CoordinateChange {
            name,
            new_vars,
            forward,
            inverse,
        })
    }
}

fn find_word(text: &str, word: &str) -> Option<usize> {
    let mut from = 0;
    while let Some(i) = text[from..].find(word) {
        let start = from + i;
        let end = start + word.len();
        let before = text[..start].chars().next_back().is_none_or(char::is_whitespace);
        let after = text[end..].chars().next().is_none_or(char::is_whitespace);
        if before && after {
            return Some(start);
        }
        from = end;
    }
    None
}

/// `a = e1 ; b = e2` pairs.
fn assignments<'a>(line: &Line, text: &'a str) -> Result<Vec<(&'a str, &'a str)>, ModelError> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let (lhs, rhs) = s.split_once('=').ok_or_else(|| line.err(s, "expected `NAME = EXPR`"))?;
            Ok((lhs.trim(), rhs.trim()))
        })
        .collect()
}

fn split_assignment<'a>(line: &Line, text: &'a str) -> Result<(&'a str, &'a str), ModelError> {
    match split_optional_name(line, text)? {
        (Some(name), body) => Ok((name, body)),
        (None, _) => Err(line.err(text, "expected `NAME = ...`")),
    }
}

/// `NAME = body` or `= body` or a bare body.
fn split_optional_name<'a>(line: &Line, text: &'a str) -> Result<(Option<&'a str>, &'a str), ModelError> {
    match text.split_once('=') {
        Some((lhs, rhs)) => {
            let lhs = lhs.trim();
            if lhs.is_empty() {
                Ok((None, rhs.trim()))
            } else if is_identifier(lhs) {
                Ok((Some(lhs), rhs.trim()))
            } else {
                Err(line.err(lhs, format!("`{lhs}` is not a valid name")))
            }
        }
        None => Ok((None, text.trim())),
    }
}

/// `[kind=equality|inequality] [jacobian_eigenvalues] [NAME] = (...)`.
fn objective_header<'a>(
    line: &Line,
    mut text: &'a str,
) -> Result<(ObjectiveKind, bool, Option<&'a str>, &'a str), ModelError> {
    let mut kind = ObjectiveKind::Equality;
    let mut jac = false;
    loop {
        text = text.trim_start();
        if let Some(after) = text.strip_prefix("kind=") {
            let word = after.split_whitespace().next().unwrap_or("");
            kind = match word {
                "equality" => ObjectiveKind::Equality,
                "inequality" => ObjectiveKind::Inequality,
                other => return Err(line.err(after, format!("unknown objective kind `{other}`"))),
            };
            text = &after[word.len()..];
        } else if let Some(after) = text.strip_prefix("jacobian_eigenvalues") {
            jac = true;
            text = after;
        } else {
            break;
        }
    }
    let (name, body) = split_optional_name(line, text)?;
    Ok((kind, jac, name, body))
}

/// Parses a `.sys` document. `default_name` is used unless a `name`
/// directive is present.
pub fn parse_system(text: &str, default_name: &str) -> Result<SystemDef, ModelError> {
    let mut b = Builder {
        sys: SystemDef {
            name: default_name.to_string(),
            state_vars: Vec::new(),
            param_vars: Vec::new(),
            agents: Vec::new(),
            global_objective: None,
            domain: DomainBox::new(),
            sphere: Vec::new(),
            groups: Vec::new(),
            changes: Vec::new(),
            functions: Default::default(),
            formation_edges: Vec::new(),
            mu: Default::default(),
            x0: Default::default(),
        },
    };
    let lines = logical_lines(text);
    for (number, text) in &lines {
        let line = Line { number: *number, text };
        b.directive(&line)?;
    }
    let last_line = lines.last().map_or(1, |(n, _)| *n);
    let mut sys = b.sys;
    sys.normalize();
    sys.validate().map_err(|e| e.at_line(last_line))?;
    Ok(sys)
}
