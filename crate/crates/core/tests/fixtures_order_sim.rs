use std::collections::BTreeMap;
use std::fs::File;
use std::path::PathBuf;

use infoflow::expr::DomainBox;
use infoflow::model::{load_system, ModelError, SystemDef};
use infoflow::order::{
    check_well_posed, compare_level_sets, Direction, Relation, SampleSet, WellPosedVerdict, DEFAULT_SAMPLES,
    DEFAULT_SEED,
};
use infoflow::sim::{
    edge_errors, evaluate_objective, formation_edges, initial_state, numeric_jacobian, ClosedLoop, ObjectiveStatus,
    SimError,
};

fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn fixture(name: &str) -> SystemDef {
    load_system(path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn two_cycles_declares_five_targets() {
    let sys = fixture("two_cycles.sys");
    assert_eq!(sys.agents.len(), 4);
    assert_eq!(sys.param_vars, ["d1", "d2", "d3", "d4", "d5"]);
    assert_eq!(sys.formation_edges.len(), 5);
    let x0 = initial_state(&sys).unwrap();
    let edges = formation_edges(&sys, &sys.mu).unwrap();
    assert!(edge_errors(&x0, &edges, true).iter().all(|e| e.abs() < 1e-12));
}

#[test]
fn wrong_field_length_is_reported_with_its_line() {
    let err = load_system(path("bad_field.sys")).unwrap_err();
    assert!(matches!(err, ModelError::Syntax { line: 4, .. }));
    let msg = err.to_string();
    assert!(msg.contains("vector field length mismatch"), "{msg}");
    assert!(msg.contains("line 4"), "{msg}");
}

#[test]
fn control_reading_another_agent_is_rejected() {
    let sys = fixture("bad_control.sys");
    match ClosedLoop::new(&sys, &sys.mu) {
        Err(SimError::DecentralizationViolation { agent, variable, .. }) => {
            assert_eq!(agent, 1);
            assert_eq!(variable, "h2_1");
        }
        Err(e) => panic!("unexpected error {e}"),
        Ok(_) => panic!("violation accepted"),
    }
}

fn sampled(sys: &SystemDef, vars: &[String], domain: &DomainBox) -> SampleSet {
    SampleSet::random(vars, domain, &sys.sphere, DEFAULT_SAMPLES, DEFAULT_SEED).unwrap()
}

#[test]
fn sphere_deltas_follow_the_definition() {
    let sys = fixture("s3_deltas.sys");
    let s = sampled(&sys, &sys.param_vars, &sys.domain);
    let d1 = sys.function_by_id("delta1").unwrap();
    let d2 = sys.function_by_id("delta2").unwrap();
    let v = compare_level_sets(&d2, &d1, &s).unwrap();
    assert_eq!(v.relation, Relation::FinerOrEqual);
    assert!(v.counterexample(Direction::CoarserOrEqual).is_some());
    for other in ["swapped", "shifted"] {
        let f = sys.function_by_id(other).unwrap();
        assert_eq!(
            compare_level_sets(&d2, &f, &s).unwrap().relation,
            Relation::Equivalent,
            "{other}"
        );
    }
}

#[test]
fn parameter_square_depends_on_box() {
    let sys = fixture("mu_box.sys");
    let f = sys.function_by_id("first").unwrap();
    let g = sys.function_by_id("square").unwrap();
    let s = sampled(&sys, &sys.param_vars, &sys.domain);
    assert_eq!(compare_level_sets(&f, &g, &s).unwrap().relation, Relation::Equivalent);
    let wide = DomainBox::new().with("m1", -1.0, 1.0).with("m2", -1.0, 1.0);
    let s = sampled(&sys, &sys.param_vars, &wide);
    assert_eq!(compare_level_sets(&f, &g, &s).unwrap().relation, Relation::FinerOrEqual);
}

fn csv_samples() -> SampleSet {
    SampleSet::from_csv(File::open(path("two_cycles_samples.csv")).unwrap()).unwrap()
}

#[test]
fn two_cycles_is_well_posed_on_target_shapes() {
    let sys = fixture("two_cycles.sys");
    let r = check_well_posed(&sys, &sys.mu, &csv_samples()).unwrap();
    assert!(r.is_well_posed());
    assert_eq!(r.locals_satisfied, 32);
}

#[test]
fn extra_half_plane_requirement_breaks_well_posedness() {
    let sys = fixture("two_cycles_halfplane.sys");
    let r = check_well_posed(&sys, &sys.mu, &csv_samples()).unwrap();
    match r.verdict {
        WellPosedVerdict::CounterexampleFound {
            index,
            point,
            failing_components,
            ..
        } => {
            assert!(index < 32);
            assert!(point["x1"] < 0.0);
            assert_eq!(failing_components, [5]);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn rendezvous_well_posed_on_grid() {
    let sys = fixture("rendezvous.sys");
    let g = SampleSet::grid(&sys.state_vars, &sys.domain, 9).unwrap();
    let r = check_well_posed(&sys, &BTreeMap::new(), &g).unwrap();
    assert!(r.is_well_posed());
    assert_eq!(r.locals_satisfied, 9);
}

#[test]
fn stabilization_needs_stable_controls() {
    let grid = |sys: &SystemDef| SampleSet::grid(&sys.state_vars, &sys.domain, 5).unwrap();
    let good = fixture("stabilization.sys");
    assert!(check_well_posed(&good, &BTreeMap::new(), &grid(&good))
        .unwrap()
        .is_well_posed());
    let bad = fixture("destabilization.sys");
    match check_well_posed(&bad, &BTreeMap::new(), &grid(&bad)).unwrap().verdict {
        WellPosedVerdict::CounterexampleFound {
            failing_components,
            global_values,
            ..
        } => {
            assert_eq!(failing_components, [1]);
            assert!((global_values[1] + 2.0).abs() < 1e-6);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn stabilization_objective_at_the_meeting_point() {
    let sys = fixture("stabilization.sys");
    let cl = ClosedLoop::new(&sys, &BTreeMap::new()).unwrap();
    let x = initial_state(&sys).unwrap();
    let j = numeric_jacobian(|y| cl.rhs_vec(y), &x).unwrap();
    let f = sys.global_objective.as_ref().unwrap();
    let status = evaluate_objective(f, &sys.state_vars, &BTreeMap::new(), &x, Some(&j)).unwrap();
    assert!(status.is_satisfied(), "{status:?}");
    let ObjectiveStatus::Satisfied { values } = status else {
        unreachable!()
    };
    assert_eq!(values.len(), 3);
    assert!((values[2] - 2.0).abs() < 1e-6);
}
