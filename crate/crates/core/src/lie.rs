//! Lie derivatives, Jacobians, Lie brackets and bracket closures.
//!
//! Vector fields are component lists over an ordered list of state
//! variables, which every operation takes explicitly.

use thiserror::Error;

use crate::expr::{is_zero, DomainBox, Expr};
use crate::model::VectorField;

pub const DEFAULT_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("dimension mismatch: {0}")]
pub struct DimensionMismatch(pub String);

fn check_dim(g: &VectorField, vars: &[String]) -> Result<(), DimensionMismatch> {
    if g.dim() == vars.len() {
        Ok(())
    } else {
        Err(DimensionMismatch(format!(
            "field `{}` has {} components for {} state variables",
            g.name,
            g.dim(),
            vars.len()
        )))
    }
}

/// `g . h`: component `c` is `sum_j g_j dh_c/dx_j`.
pub fn lie_derivative(g: &VectorField, h: &[Expr], vars: &[String]) -> Result<Vec<Expr>, DimensionMismatch> {
    check_dim(g, vars)?;
    Ok(h.iter()
        .map(|hc| {
            let terms = g
                .components
                .iter()
                .zip(vars)
                .filter(|(gj, _)| !gj.is_literal_zero())
                .map(|(gj, x)| (gj, hc.differentiate(x)))
                .filter(|(_, d)| !d.is_literal_zero())
                .map(|(gj, d)| Expr::product(vec![gj.clone(), d]))
                .collect();
            Expr::sum(terms).simplify()
        })
        .collect())
}

/// Entry `(r, c)` is `dg_r/dx_c`.
pub fn jacobian(g: &VectorField, vars: &[String]) -> Vec<Vec<Expr>> {
    g.components
        .iter()
        .map(|gr| vars.iter().map(|x| gr.differentiate(x)).collect())
        .collect()
}

/// `[g1, g2] = (dg2/dx) g1 - (dg1/dx) g2`.
pub fn lie_bracket(g1: &VectorField, g2: &VectorField, vars: &[String]) -> Result<VectorField, DimensionMismatch> {
    check_dim(g1, vars)?;
    check_dim(g2, vars)?;
    let j1 = jacobian(g1, vars);
    let j2 = jacobian(g2, vars);
    let apply = |j: &[Vec<Expr>], v: &VectorField, r: usize| -> Vec<Expr> {
        j[r].iter()
            .zip(&v.components)
            .filter(|(d, c)| !d.is_literal_zero() && !c.is_literal_zero())
            .map(|(d, c)| Expr::product(vec![d.clone(), c.clone()]))
            .collect()
    };
    let components = (0..vars.len())
        .map(|r| {
            let mut terms = apply(&j2, g1, r);
            terms.extend(apply(&j1, g2, r).into_iter().map(|t| -t));
            Expr::sum(terms).simplify()
        })
        .collect();
    Ok(VectorField::new(format!("[{},{}]", g1.name, g2.name), components))
}

/// A closure member together with its bracket word length.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureMember {
    pub field: VectorField,
    pub word_len: usize,
}

impl ClosureMember {
    /// The bracket word, e.g. `[g1,[g1,g2]]`.
    pub fn word(&self) -> &str {
        &self.field.name
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BracketClosure {
    pub generators: Vec<VectorField>,
    pub members: Vec<ClosureMember>,
    pub depth: usize,
}

impl BracketClosure {
    pub fn fields(&self) -> impl Iterator<Item = &VectorField> {
        self.members.iter().map(|m| &m.field)
    }
}

fn certified_zero(components: &[Expr], domain: &DomainBox) -> bool {
    components.iter().all(|c| is_zero(c, domain).is_identically_zero())
}

fn certified_equal(a: &VectorField, b: &VectorField, domain: &DomainBox) -> bool {
    a.components
        .iter()
        .zip(&b.components)
        .all(|(x, y)| is_zero(&x.clone().minus(y.clone()), domain).is_identically_zero())
}

/// All bracket words of length at most `depth`, built level by level from
/// pairs of shorter members. Fields certified zero are dropped, and a field
/// certified equal to an earlier member is skipped.
pub fn bracket_closure(
    fields: &[VectorField],
    depth: usize,
    vars: &[String],
    domain: &DomainBox,
) -> Result<BracketClosure, DimensionMismatch> {
    let depth = depth.max(1);
    let mut members: Vec<ClosureMember> = Vec::new();
    let admit = |members: &mut Vec<ClosureMember>, field: VectorField, word_len: usize| {
        if certified_zero(&field.components, domain) {
            return;
        }
        if members.iter().any(|m| certified_equal(&m.field, &field, domain)) {
            return;
        }
        members.push(ClosureMember { field, word_len });
    };
    for g in fields {
        check_dim(g, vars)?;
        admit(&mut members, g.clone(), 1);
    }
    for w in 2..=depth {
        let snapshot = members.clone();
        for (ia, a) in snapshot.iter().enumerate() {
            for (ib, b) in snapshot.iter().enumerate() {
                let ordered = a.word_len < b.word_len || (a.word_len == b.word_len && ia < ib);
                if ordered && a.word_len + b.word_len == w {
                    admit(&mut members, lie_bracket(&a.field, &b.field, vars)?, w);
                }
            }
        }
    }
    Ok(BracketClosure {
        generators: fields.to_vec(),
        members,
        depth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{evaluate, parse_expr, Number};
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn vars(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).collect()
    }

    fn field(name: &str, comps: &[&str]) -> VectorField {
        VectorField::new(name, comps.iter().map(|c| parse_expr(c).unwrap().simplify()).collect())
    }

    fn p(s: &str) -> Expr {
        parse_expr(s).unwrap().simplify()
    }

    #[test]
    fn derivative_examples() {
        let z: Vec<String> = ["z1", "z2", "z3", "z4"].iter().map(|s| s.to_string()).collect();
        let g1 = field("g1", &["1", "0", "0", "0"]);
        assert_eq!(
            lie_derivative(&g1, &[p("z2-z3"), p("z3-z4")], &z).unwrap(),
            [p("0"), p("0")]
        );
        assert_eq!(
            lie_derivative(&g1, &[p("z4"), p("z1-z2")], &z).unwrap(),
            [p("0"), p("1")]
        );
        let g = field("g", &["x1*x2", "x2^2", "3", "x4"]);
        assert_eq!(lie_derivative(&g, &[p("7")], &z).unwrap(), [p("0")]);
        assert!(lie_derivative(&g1, &[p("z1")], &vars(3)).is_err());
    }

    #[test]
    fn jacobian_of_rotation_matches_finite_differences() {
        let g = field("g", &["x2", "-x1"]);
        let j = jacobian(&g, &vars(2));
        // Central differences of (x2, -x1) at (0.3, -0.7).
        let f = |x: [f64; 2]| [x[1], -x[0]];
        let h = 1e-6;
        let x = [0.3, -0.7];
        for (r, row) in j.iter().enumerate() {
            for (c, entry) in row.iter().enumerate() {
                let (mut xp, mut xm) = (x, x);
                xp[c] += h;
                xm[c] -= h;
                let fd = (f(xp)[r] - f(xm)[r]) / (2.0 * h);
                let exact = entry.as_const().map(|q| q.to_string()).unwrap();
                assert!((exact.parse::<f64>().unwrap() - fd).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn linear_field_jacobian_is_matrix() {
        let g = field("g", &["2*x1 - x2", "5*x2"]);
        assert_eq!(
            jacobian(&g, &vars(2)),
            vec![vec![p("2"), p("-1")], vec![p("0"), p("5")]]
        );
    }

    #[test]
    fn bracket_examples() {
        let v = vars(2);
        let e1 = field("e1", &["1", "0"]);
        let e2 = field("e2", &["0", "1"]);
        assert_eq!(lie_bracket(&e1, &e2, &v).unwrap().components, [p("0"), p("0")]);
        let g2 = field("g2", &["x1", "0"]);
        let b = lie_bracket(&e1, &g2, &v).unwrap();
        assert_eq!(b.components, [p("1"), p("0")]);
        assert_eq!(b.name, "[e1,g2]");
        // Numeric cross-check of the formula at 8 points.
        for k in 0..8 {
            let x1 = -1.0 + 0.25 * k as f64;
            let at: BTreeMap<String, Number> = [
                ("x1".to_string(), Number::from_f64(x1)),
                ("x2".into(), Number::from_f64(0.5)),
            ]
            .into();
            let val = evaluate(&b.components[0], &at).unwrap().to_f64();
            // d(x1)/dx1 * 1 - d(1)/dx1 * x1 = 1
            assert_eq!(val, 1.0);
        }
    }

    #[test]
    fn closure_examples() {
        let v = vars(2);
        let d = DomainBox::new();
        let g = field("g", &["x2", "x1^2"]);
        let c = bracket_closure(std::slice::from_ref(&g), 3, &v, &d).unwrap();
        assert_eq!(c.members.len(), 1);

        let e1 = field("e1", &["1", "0"]);
        let e2 = field("e2", &["0", "1"]);
        let c = bracket_closure(&[e1.clone(), e2], 3, &v, &d).unwrap();
        assert_eq!(c.members.len(), 2);

        let g2 = field("g2", &["0", "x1"]);
        let c = bracket_closure(&[e1, g2], 2, &v, &d).unwrap();
        let comps: Vec<_> = c.fields().map(|f| f.components.clone()).collect();
        assert_eq!(
            comps,
            vec![vec![p("1"), p("0")], vec![p("0"), p("x1")], vec![p("0"), p("1")]]
        );
        assert_eq!(c.members[2].word(), "[e1,g2]");
        assert_eq!(c.members[2].word_len, 2);
    }

    #[test]
    fn closure_drops_zero_and_duplicate_generators() {
        let v = vars(2);
        let d = DomainBox::new();
        let a = field("a", &["x1", "1"]);
        let dup = field("b", &["x1 + 0", "2 - 1"]);
        let zero = field("z", &["0", "x1 - x1"]);
        let c = bracket_closure(&[a, dup, zero], 2, &v, &d).unwrap();
        assert_eq!(c.members.len(), 1);
    }

    fn poly_component(n: usize) -> impl Strategy<Value = Expr> {
        // Degree <= 2: c0 + sum c_i x_i + c_ij x_i x_j with small integers.
        let lin = proptest::collection::vec(-2i64..=2, n);
        let quad = proptest::collection::vec((0..n, 0..n, -2i64..=2), 0..3);
        (-2i64..=2, lin, quad).prop_map(move |(c0, lin, quad)| {
            let mut terms = vec![Expr::int(c0)];
            for (i, c) in lin.into_iter().enumerate() {
                terms.push(Expr::product(vec![Expr::int(c), Expr::var(format!("x{}", i + 1))]));
            }
            for (i, j, c) in quad {
                terms.push(Expr::product(vec![
                    Expr::int(c),
                    Expr::var(format!("x{}", i + 1)),
                    Expr::var(format!("x{}", j + 1)),
                ]));
            }
            Expr::sum(terms).simplify()
        })
    }

    fn poly_field(n: usize, name: &'static str) -> impl Strategy<Value = VectorField> {
        proptest::collection::vec(poly_component(n), n).prop_map(move |c| VectorField::new(name, c))
    }

    fn fields3() -> impl Strategy<Value = (usize, VectorField, VectorField, VectorField)> {
        (1usize..=4).prop_flat_map(|n| (Just(n), poly_field(n, "a"), poly_field(n, "b"), poly_field(n, "c")))
    }

    fn all_zero(xs: &[Expr]) -> bool {
        xs.iter().all(|e| is_zero(e, &DomainBox::new()).is_identically_zero())
    }

    fn add(xs: &[Expr], ys: &[Expr]) -> Vec<Expr> {
        xs.iter()
            .zip(ys)
            .map(|(x, y)| Expr::sum(vec![x.clone(), y.clone()]))
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn antisymmetry((n, a, b, _c) in fields3()) {
            let v = vars(n);
            let ab = lie_bracket(&a, &b, &v).unwrap();
            let ba = lie_bracket(&b, &a, &v).unwrap();
            prop_assert!(all_zero(&add(&ab.components, &ba.components)));
        }

        #[test]
        fn jacobi((n, a, b, c) in fields3()) {
            let v = vars(n);
            let t1 = lie_bracket(&a, &lie_bracket(&b, &c, &v).unwrap(), &v).unwrap();
            let t2 = lie_bracket(&b, &lie_bracket(&c, &a, &v).unwrap(), &v).unwrap();
            let t3 = lie_bracket(&c, &lie_bracket(&a, &b, &v).unwrap(), &v).unwrap();
            prop_assert!(all_zero(&add(&add(&t1.components, &t2.components), &t3.components)));
        }

        #[test]
        fn leibniz((n, a, b, c) in fields3()) {
            // Use the third field's components as a vector observation.
            let v = vars(n);
            let h = &c.components;
            let lhs = lie_derivative(&lie_bracket(&a, &b, &v).unwrap(), h, &v).unwrap();
            let ab = lie_derivative(&a, &lie_derivative(&b, h, &v).unwrap(), &v).unwrap();
            let ba = lie_derivative(&b, &lie_derivative(&a, h, &v).unwrap(), &v).unwrap();
            let diff: Vec<Expr> = lhs
                .iter()
                .zip(ab.iter().zip(&ba))
                .map(|(l, (x, y))| Expr::sum(vec![l.clone(), -x.clone(), y.clone()]))
                .collect();
            prop_assert!(all_zero(&diff));
        }

        #[test]
        fn closure_is_monotone_in_depth((n, a, b, _c) in fields3()) {
            let v = vars(n);
            let d = DomainBox::new();
            let small = bracket_closure(&[a.clone(), b.clone()], 1, &v, &d).unwrap();
            let large = bracket_closure(&[a, b], 2, &v, &d).unwrap();
            for m in small.fields() {
                prop_assert!(large.fields().any(|f| certified_equal(f, m, &d)));
            }
        }
    }
}
