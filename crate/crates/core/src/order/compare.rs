use std::collections::BTreeMap;

use serde::Serialize;

use super::{OrderError, SampleSet, SampleSource};
use crate::expr::{Compiled, Expr};
use crate::model::{ObjectiveKind, ObjectiveSpec};
use crate::sim::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs ⪰ rhs` holds and the reverse is refuted.
    FinerOrEqual,
    /// `rhs ⪰ lhs` holds and the reverse is refuted.
    CoarserOrEqual,
    Equivalent,
    Incomparable,
}

/// One direction of the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `lhs ⪰ rhs`
    FinerOrEqual,
    /// `rhs ⪰ lhs`
    CoarserOrEqual,
}

/// Sample points refuting one direction: a pair for level sets, a single
/// point for superlevel sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub rejected: Direction,
    pub indices: Vec<usize>,
    pub points: Vec<BTreeMap<String, f64>>,
    pub lhs: Vec<Vec<f64>>,
    pub rhs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolution {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub source: SampleSource,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderVerdict {
    pub relation: Relation,
    pub counterexamples: Vec<Counterexample>,
    pub resolution: Resolution,
}

impl OrderVerdict {
    /// `lhs ⪰ rhs` on the samples.
    pub fn finer_or_equal(&self) -> bool {
        matches!(self.relation, Relation::FinerOrEqual | Relation::Equivalent)
    }

    pub fn coarser_or_equal(&self) -> bool {
        matches!(self.relation, Relation::CoarserOrEqual | Relation::Equivalent)
    }

    pub fn counterexample(&self, rejected: Direction) -> Option<&Counterexample> {
        self.counterexamples.iter().find(|c| c.rejected == rejected)
    }
}

/// Max-norm equality with relative tolerance.
pub fn level_sets_equal(a: &[f64], b: &[f64], tol: f64) -> bool {
    let mut diff = 0.0f64;
    let mut scale = 1.0f64;
    for (x, y) in a.iter().zip(b) {
        diff = diff.max((x - y).abs());
        scale = scale.max(x.abs()).max(y.abs());
    }
    diff <= tol * scale
}

/// Values of `f` at every sample, with `fixed` supplying extra variables.
pub(crate) fn sample_values(
    f: &[Expr],
    label: &str,
    samples: &SampleSet,
    fixed: &BTreeMap<String, f64>,
) -> Result<Vec<Vec<f64>>, OrderError> {
    let mut vars = samples.vars.clone();
    let mut extra = Vec::new();
    for (k, v) in fixed {
        if !vars.contains(k) {
            vars.push(k.clone());
            extra.push(*v);
        }
    }
    let compiled = f
        .iter()
        .map(|c| {
            if let Some(v) = c.free_vars().into_iter().find(|v| !vars.contains(v)) {
                return Err(OrderError::UncoveredVariable {
                    function: label.to_string(),
                    variable: v,
                });
            }
            Ok(Compiled::new(c, &vars)?)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut x = Vec::with_capacity(vars.len());
    samples
        .points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            x.clear();
            x.extend_from_slice(p);
            x.extend_from_slice(&extra);
            let row: Vec<f64> = compiled.iter().map(|c| c.eval(&x)).collect();
            if row.iter().all(|v| v.is_finite()) {
                Ok(row)
            } else {
                Err(OrderError::NonFinite {
                    function: label.to_string(),
                    index,
                })
            }
        })
        .collect()
}

fn resolution(samples: &SampleSet) -> Resolution {
    Resolution {
        samples: samples.len(),
        seed: samples.seed,
        tolerance: samples.tolerance,
        source: samples.source,
    }
}

fn relation(finer: bool, coarser: bool) -> Relation {
    match (finer, coarser) {
        (true, true) => Relation::Equivalent,
        (true, false) => Relation::FinerOrEqual,
        (false, true) => Relation::CoarserOrEqual,
        (false, false) => Relation::Incomparable,
    }
}

fn counterexample(
    rejected: Direction,
    indices: Vec<usize>,
    samples: &SampleSet,
    lhs: &[Vec<f64>],
    rhs: &[Vec<f64>],
) -> Counterexample {
    Counterexample {
        points: indices.iter().map(|&i| samples.point(i)).collect(),
        lhs: indices.iter().map(|&i| lhs[i].clone()).collect(),
        rhs: indices.iter().map(|&i| rhs[i].clone()).collect(),
        rejected,
        indices,
    }
}

/// Compares the partitions of the samples into isolevel sets of `lhs` and
/// `rhs`. Counterexamples are the lexicographically smallest violating
/// pairs.
pub fn compare_level_sets(lhs: &[Expr], rhs: &[Expr], samples: &SampleSet) -> Result<OrderVerdict, OrderError> {
    if samples.is_empty() {
        return Err(OrderError::EmptySamples);
    }
    let none = BTreeMap::new();
    let a = sample_values(lhs, "lhs", samples, &none)?;
    let b = sample_values(rhs, "rhs", samples, &none)?;
    let tol = samples.tolerance;
    let mut finer_cx = None;
    let mut coarser_cx = None;
    'outer: for p in 0..a.len() {
        for q in p + 1..a.len() {
            let ea = level_sets_equal(&a[p], &a[q], tol);
            let eb = level_sets_equal(&b[p], &b[q], tol);
            if ea && !eb && finer_cx.is_none() {
                finer_cx = Some((p, q));
            }
            if eb && !ea && coarser_cx.is_none() {
                coarser_cx = Some((p, q));
            }
            if finer_cx.is_some() && coarser_cx.is_some() {
                break 'outer;
            }
        }
    }
    let mut counterexamples = Vec::new();
    if let Some((p, q)) = finer_cx {
        counterexamples.push(counterexample(Direction::FinerOrEqual, vec![p, q], samples, &a, &b));
    }
    if let Some((p, q)) = coarser_cx {
        counterexamples.push(counterexample(Direction::CoarserOrEqual, vec![p, q], samples, &a, &b));
    }
    Ok(OrderVerdict {
        relation: relation(finer_cx.is_none(), coarser_cx.is_none()),
        counterexamples,
        resolution: resolution(samples),
    })
}

pub(crate) fn satisfied(kind: ObjectiveKind, values: &[f64], tol: f64) -> bool {
    match kind {
        ObjectiveKind::Equality => values.iter().all(|v| v.abs() <= tol),
        ObjectiveKind::Inequality => values.iter().all(|v| *v >= -tol),
    }
}

/// Compares the sets where each objective holds: `lhs ⪰ rhs` when every
/// sample satisfying `lhs` also satisfies `rhs`. Tolerance is absolute.
pub fn compare_superlevel_sets(
    lhs: &ObjectiveSpec,
    rhs: &ObjectiveSpec,
    mu: &BTreeMap<String, f64>,
    samples: &SampleSet,
) -> Result<OrderVerdict, OrderError> {
    if samples.is_empty() {
        return Err(OrderError::EmptySamples);
    }
    for o in [lhs, rhs] {
        if o.uses_jacobian_eigenvalues {
            return Err(SimError::MissingJacobian(o.name.clone()).into());
        }
    }
    let a = sample_values(&lhs.components, &lhs.name, samples, mu)?;
    let b = sample_values(&rhs.components, &rhs.name, samples, mu)?;
    let tol = samples.tolerance;
    let mut finer_cx = None;
    let mut coarser_cx = None;
    for (i, (va, vb)) in a.iter().zip(&b).enumerate() {
        let (sa, sb) = (satisfied(lhs.kind, va, tol), satisfied(rhs.kind, vb, tol));
        if sa && !sb && finer_cx.is_none() {
            finer_cx = Some(i);
        }
        if sb && !sa && coarser_cx.is_none() {
            coarser_cx = Some(i);
        }
    }
    let mut counterexamples = Vec::new();
    if let Some(i) = finer_cx {
        counterexamples.push(counterexample(Direction::FinerOrEqual, vec![i], samples, &a, &b));
    }
    if let Some(i) = coarser_cx {
        counterexamples.push(counterexample(Direction::CoarserOrEqual, vec![i], samples, &a, &b));
    }
    Ok(OrderVerdict {
        relation: relation(finer_cx.is_none(), coarser_cx.is_none()),
        counterexamples,
        resolution: resolution(samples),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_tuple, DomainBox};
    use proptest::prelude::*;

    fn names(vs: &[&str]) -> Vec<String> {
        vs.iter().map(|s| s.to_string()).collect()
    }

    fn s3() -> SampleSet {
        let v = names(&["x1", "x2", "x3", "x4"]);
        SampleSet::random(&v, &DomainBox::new(), &v, 512, 42).unwrap()
    }

    fn cmp(a: &str, b: &str, s: &SampleSet) -> OrderVerdict {
        compare_level_sets(&parse_tuple(a).unwrap(), &parse_tuple(b).unwrap(), s).unwrap()
    }

    #[test]
    fn pair_is_strictly_finer_than_first_coordinate() {
        let s = s3();
        let v = cmp("(x1, x2)", "(x1)", &s);
        assert_eq!(v.relation, Relation::FinerOrEqual);
        let cx = v.counterexample(Direction::CoarserOrEqual).unwrap();
        let (p, q) = (&cx.points[0], &cx.points[1]);
        assert_eq!(p["x1"], q["x1"]);
        assert!((p["x2"] - q["x2"]).abs() > 1e-6);
    }

    #[test]
    fn reorderings_and_shifts_are_equivalent() {
        let s = s3();
        assert_eq!(cmp("(x1, x2)", "(x2, x1)", &s).relation, Relation::Equivalent);
        assert_eq!(cmp("(x1, x2)", "(x1 + 1, x2 + 2)", &s).relation, Relation::Equivalent);
    }

    #[test]
    fn square_depends_on_the_box() {
        let v = names(&["m1", "m2"]);
        let pos = DomainBox::new().with("m1", 0.0, 1.0).with("m2", 0.0, 1.0);
        let s = SampleSet::random(&v, &pos, &[], 512, 42).unwrap();
        assert_eq!(cmp("(m1)", "(m1^2)", &s).relation, Relation::Equivalent);
        let sym = DomainBox::new().with("m1", -1.0, 1.0).with("m2", -1.0, 1.0);
        let s = SampleSet::random(&v, &sym, &[], 512, 42).unwrap();
        let verdict = cmp("(m1)", "(m1^2)", &s);
        assert_eq!(verdict.relation, Relation::FinerOrEqual);
        let cx = verdict.counterexample(Direction::CoarserOrEqual).unwrap();
        assert_eq!(cx.points[0]["m1"], -cx.points[1]["m1"]);
    }

    #[test]
    fn uncovered_variable_is_an_error() {
        let s = s3();
        let r = compare_level_sets(&parse_tuple("(y)").unwrap(), &parse_tuple("(x1)").unwrap(), &s);
        assert!(matches!(r, Err(OrderError::UncoveredVariable { .. })));
    }

    fn objective(kind: ObjectiveKind, text: &str) -> ObjectiveSpec {
        ObjectiveSpec {
            name: text.into(),
            kind,
            components: parse_tuple(text).unwrap(),
            uses_jacobian_eigenvalues: false,
        }
    }

    #[test]
    fn superlevel_inclusion_matches_brute_force() {
        let v = names(&["x", "y"]);
        let g = SampleSet::grid(&v, &DomainBox::new(), 21).unwrap();
        let f1 = objective(ObjectiveKind::Inequality, "(-(x^2 + y^2))");
        let f2 = objective(ObjectiveKind::Inequality, "(1 - x^2 - y^2)");
        let verdict = compare_superlevel_sets(&f1, &f2, &BTreeMap::new(), &g).unwrap();
        // brute force: the zero set of f1 on the grid is {origin}, inside the disc
        let in1: Vec<bool> = g.points.iter().map(|p| p[0] * p[0] + p[1] * p[1] <= 0.0).collect();
        let in2: Vec<bool> = g
            .points
            .iter()
            .map(|p| 1.0 - p[0] * p[0] - p[1] * p[1] >= 0.0)
            .collect();
        assert!(in1.iter().zip(&in2).all(|(a, b)| !a || *b));
        assert!(in2.iter().zip(&in1).any(|(a, b)| *a && !b));
        assert_eq!(verdict.relation, Relation::FinerOrEqual);
        assert_eq!(
            compare_superlevel_sets(&f1, &f1, &BTreeMap::new(), &g)
                .unwrap()
                .relation,
            Relation::Equivalent
        );
    }

    #[test]
    fn opposite_half_lines_are_incomparable() {
        let v = names(&["x1"]);
        let g = SampleSet::grid(&v, &DomainBox::new(), 11).unwrap();
        let f1 = objective(ObjectiveKind::Inequality, "(x1)");
        let f2 = objective(ObjectiveKind::Inequality, "(-x1)");
        let verdict = compare_superlevel_sets(&f1, &f2, &BTreeMap::new(), &g).unwrap();
        assert_eq!(verdict.relation, Relation::Incomparable);
        let fwd = verdict.counterexample(Direction::FinerOrEqual).unwrap();
        let back = verdict.counterexample(Direction::CoarserOrEqual).unwrap();
        assert!(fwd.points[0]["x1"] > 0.0);
        assert_eq!(back.points[0]["x1"], -1.0);
    }

    fn arb_linear() -> impl Strategy<Value = Vec<Expr>> {
        prop::collection::vec(prop::collection::vec(-2i64..=2, 3), 1..=3).prop_map(|rows| {
            rows.into_iter()
                .map(|c| {
                    Expr::sum(
                        ["a", "b", "c"]
                            .iter()
                            .zip(c)
                            .map(|(v, k)| Expr::product(vec![Expr::int(k), Expr::var(*v)]))
                            .collect(),
                    )
                    .simplify()
                })
                .collect()
        })
    }

    /// Projections onto subsets of the coordinates.
    fn arb_projection() -> impl Strategy<Value = Vec<Expr>> {
        prop::sample::subsequence(vec!["a", "b", "c"], 0..=3).prop_map(|vs| vs.into_iter().map(Expr::var).collect())
    }

    fn small() -> SampleSet {
        SampleSet::random(&names(&["a", "b", "c"]), &DomainBox::new(), &[], 64, 5).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn reflexive(f in arb_linear()) {
            prop_assert_eq!(compare_level_sets(&f, &f, &small()).unwrap().relation, Relation::Equivalent);
        }

        #[test]
        fn transitive(f1 in arb_projection(), f2 in arb_projection(), f3 in arb_projection()) {
            let s = small();
            let a = compare_level_sets(&f1, &f2, &s).unwrap();
            let b = compare_level_sets(&f2, &f3, &s).unwrap();
            if a.finer_or_equal() && b.finer_or_equal() {
                prop_assert!(compare_level_sets(&f1, &f3, &s).unwrap().finer_or_equal());
            }
        }

        #[test]
        fn affine_postcomposition_is_equivalent(f in arb_linear(), slope in prop::sample::select(vec![-3i64, -1, 2, 5]), shift in -4i64..4) {
            let g = f[0].clone();
            let phi = Expr::sum(vec![Expr::product(vec![Expr::int(slope), g.clone()]), Expr::int(shift)]).simplify();
            prop_assert_eq!(compare_level_sets(&[phi], &[g], &small()).unwrap().relation, Relation::Equivalent);
        }

        #[test]
        fn constant_is_the_minimum(f in arb_linear(), k in -3i64..3) {
            prop_assert!(compare_level_sets(&f, &[Expr::int(k)], &small()).unwrap().finer_or_equal());
        }

        #[test]
        fn counterexamples_are_genuine(f1 in arb_linear(), f2 in arb_linear()) {
            let s = small();
            let v = compare_level_sets(&f1, &f2, &s).unwrap();
            for cx in &v.counterexamples {
                let (same_l, same_r) = (
                    level_sets_equal(&cx.lhs[0], &cx.lhs[1], s.tolerance),
                    level_sets_equal(&cx.rhs[0], &cx.rhs[1], s.tolerance),
                );
                match cx.rejected {
                    Direction::FinerOrEqual => prop_assert!(same_l && !same_r),
                    Direction::CoarserOrEqual => prop_assert!(same_r && !same_l),
                }
                let recomputed = sample_values(&f1, "lhs", &s, &BTreeMap::new()).unwrap();
                prop_assert_eq!(&recomputed[cx.indices[0]], &cx.lhs[0]);
            }
        }
    }
}
