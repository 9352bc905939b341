use std::collections::{BTreeMap, HashMap};

use super::{CoordinateChange, ModelError, SystemDef, VectorField};
use crate::expr::{evaluate, is_zero, DomainBox, Expr, Number, ZeroVerdict};

fn substitution(from: &[String], to: &[Expr]) -> HashMap<String, Expr> {
    from.iter().cloned().zip(to.iter().cloned()).collect()
}

fn dims(sys: &SystemDef, c: &CoordinateChange) -> Result<(), ModelError> {
    let n = sys.state_vars.len();
    if c.new_vars.len() != n || c.forward.len() != n || c.inverse.len() != n {
        return Err(ModelError::DimensionMismatch(format!(
            "change `{}` has {} new variables, {} forward and {} inverse components for {n} state variables",
            c.name,
            c.new_vars.len(),
            c.forward.len(),
            c.inverse.len()
        )));
    }
    Ok(())
}

/// Checks `forward(inverse(z)) = z` and `inverse(forward(x)) = x`
/// identically.
pub(crate) fn verify_change(sys: &SystemDef, c: &CoordinateChange) -> Result<(), ModelError> {
    dims(sys, c)?;
    let mut z_domain = DomainBox::new();
    for p in &sys.param_vars {
        z_domain.set(p, sys.domain.get(p));
    }
    let to_x = substitution(&sys.state_vars, &c.inverse);
    let to_z = substitution(&c.new_vars, &c.forward);
    let checks = c
        .forward
        .iter()
        .zip(&c.new_vars)
        .map(|(f, z)| (f.substitute(&to_x).minus(Expr::var(z.clone())), z, &z_domain))
        .chain(
            c.inverse
                .iter()
                .zip(&sys.state_vars)
                .map(|(g, x)| (g.substitute(&to_z).minus(Expr::var(x.clone())), x, &sys.domain)),
        );
    for (residual, var, domain) in checks {
        match is_zero(&residual, domain) {
            ZeroVerdict::IdenticallyZero => {}
            ZeroVerdict::NotIdenticallyZero { witness, value } => {
                return Err(ModelError::RoundTrip {
                    change: c.name.clone(),
                    detail: format!("component `{var}` is off by {value} at {witness:?}"),
                })
            }
            ZeroVerdict::Unknown => {
                return Err(ModelError::RoundTrip {
                    change: c.name.clone(),
                    detail: format!("component `{var}` could not be certified"),
                })
            }
        }
    }
    Ok(())
}

/// Rewrites `sys` in the coordinates `z = forward(x)`:
/// observations and objectives become `h o inverse`, fields become
/// `(D forward . g) o inverse`. Objective restrictions, controls and
/// parameters are unchanged; owned variables and groups follow their
/// position in the state vector.
pub fn transform_system(sys: &SystemDef, change: &CoordinateChange) -> Result<SystemDef, ModelError> {
    verify_change(sys, change)?;
    let to_x = substitution(&sys.state_vars, &change.inverse);
    let pull = |e: &Expr| e.substitute(&to_x).simplify();
    let jacobian: Vec<Vec<Expr>> = change
        .forward
        .iter()
        .map(|f| sys.state_vars.iter().map(|x| f.differentiate(x)).collect())
        .collect();
    let rename = |v: &String| -> String {
        sys.state_vars
            .iter()
            .position(|x| x == v)
            .map_or_else(|| v.clone(), |k| change.new_vars[k].clone())
    };

    let mut out = sys.clone();
    out.name = format!("{} [{}]", sys.name, change.name);
    out.state_vars = change.new_vars.clone();
    for a in &mut out.agents {
        a.observation.components = a.observation.components.iter().map(pull).collect();
        a.fields = a
            .fields
            .iter()
            .map(|g| {
                let pushed = jacobian
                    .iter()
                    .map(|row| {
                        let terms = row
                            .iter()
                            .zip(&g.components)
                            .filter(|(d, c)| !d.is_literal_zero() && !c.is_literal_zero())
                            .map(|(d, c)| Expr::product(vec![d.clone(), c.clone()]))
                            .collect();
                        pull(&Expr::sum(terms))
                    })
                    .collect();
                VectorField::new(g.name.clone(), pushed)
            })
            .collect();
        if let Some(o) = &mut a.local_objective {
            o.components = o.components.iter().map(pull).collect();
        }
        a.owned_vars = a.owned_vars.iter().map(rename).collect();
    }
    if let Some(o) = &mut out.global_objective {
        o.components = o.components.iter().map(pull).collect();
    }
    for f in out.functions.values_mut() {
        *f = f.iter().map(pull).collect();
    }
    for g in &mut out.groups {
        g.vars = g.vars.iter().map(rename).collect();
    }
    out.domain = DomainBox::new();
    for p in &sys.param_vars {
        if let Some(iv) = sys.domain.intervals.get(p) {
            out.domain.set(p, *iv);
        }
    }
    out.sphere.retain(|v| sys.param_vars.contains(v));
    out.changes.clear();
    out.x0 = map_point(sys, change).unwrap_or_default();
    Ok(out)
}

/// The default initial state in new coordinates, when it is complete.
fn map_point(sys: &SystemDef, change: &CoordinateChange) -> Option<BTreeMap<String, f64>> {
    if sys.x0.len() != sys.state_vars.len() {
        return None;
    }
    let at: BTreeMap<String, Number> = sys
        .x0
        .iter()
        .chain(&sys.mu)
        .map(|(k, v)| (k.clone(), Number::from_f64(*v)))
        .collect();
    change
        .new_vars
        .iter()
        .zip(&change.forward)
        .map(|(z, f)| evaluate(f, &at).ok().map(|v| (z.clone(), v.to_f64())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::model::parse_system;

    const SHEAR: &str = "\
statevars x1 x2
agent 1
  owns x1
  obs h1 = (x1)
  field = (1, 0)
agent 2
  owns x2
  obs h2 = (x2^2)
  field = (x1, 1)
change s: z1 = x1 + x2 ; z2 = x2 inverse x1 = z1 - z2 ; x2 = z2
x0 x1=1 x2=2
";

    #[test]
    fn pushforward_and_pullback() {
        let sys = parse_system(SHEAR, "shear").unwrap();
        let t = transform_system(&sys, sys.change("s").unwrap()).unwrap();
        assert_eq!(t.state_vars, ["z1", "z2"]);
        let p = |s: &str| parse_expr(s).unwrap().simplify();
        assert_eq!(t.agents[0].observation.components, vec![p("z1 - z2")]);
        assert_eq!(t.agents[0].fields[0].components, vec![p("1"), p("0")]);
        // D phi . (x1, 1) = (x1 + 1, 1) with x1 = z1 - z2.
        assert_eq!(t.agents[1].fields[0].components, vec![p("z1 - z2 + 1"), p("1")]);
        assert_eq!(t.agents[1].owned_vars, ["z2"]);
        assert_eq!(t.x0["z1"], 3.0);
    }

    #[test]
    fn reversed_change_restores_system() {
        let sys = parse_system(SHEAR, "shear").unwrap();
        let c = sys.change("s").unwrap();
        let t = transform_system(&sys, c).unwrap();
        let back = transform_system(&t, &c.reversed(&sys.state_vars)).unwrap();
        for (a, b) in sys.agents.iter().zip(&back.agents) {
            assert_eq!(a.observation, b.observation);
            assert_eq!(a.fields, b.fields);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let sys = parse_system(SHEAR, "shear").unwrap();
        let mut c = sys.change("s").unwrap().clone();
        c.forward.pop();
        assert!(matches!(
            transform_system(&sys, &c),
            Err(ModelError::DimensionMismatch(_))
        ));
    }
}
