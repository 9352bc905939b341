//! Compare level-set partitions of functions on sampled domains.

use infoflow::expr::DomainBox;
use infoflow::model::load_system;
use infoflow::order::{compare_level_sets, Direction, SampleSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = load_system(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/s3_deltas.sys"))?;
    let samples = SampleSet::random(&sys.param_vars, &sys.domain, &sys.sphere, 512, 42)?;
    let f = |id: &str| sys.function_by_id(id).ok_or(format!("no function {id}"));

    let v = compare_level_sets(&f("delta2")?, &f("delta1")?, &samples)?;
    println!("(x1, x2) vs x1 on the sphere: {:?}", v.relation);
    if let Some(cx) = v.counterexample(Direction::CoarserOrEqual) {
        println!(
            "  samples {:?}: x1 = {:?}, (x1, x2) = {:?} vs {:?}",
            cx.indices, cx.rhs[0], cx.lhs[0], cx.lhs[1]
        );
    }
    let v = compare_level_sets(&f("delta2")?, &f("swapped")?, &samples)?;
    println!("(x1, x2) vs (x2, x1): {:?}", v.relation);

    // The same pair of functions is equivalent on one box and not on another.
    let mb = load_system(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/mu_box.sys"))?;
    let vars = vec!["m1".to_string(), "m2".to_string()];
    let (m1, sq) = (
        mb.function_by_id("first").unwrap(),
        mb.function_by_id("square").unwrap(),
    );
    for domain in [
        mb.domain.clone(),
        DomainBox::new().with("m1", -1.0, 1.0).with("m2", -1.0, 1.0),
    ] {
        let s = SampleSet::random(&vars, &domain, &[], 512, 42)?;
        let r = compare_level_sets(&m1, &sq, &s)?.relation;
        println!(
            "m1 vs m1^2 with m1 in [{}, {}]: {r:?}",
            domain.get("m1").lo,
            domain.get("m1").hi
        );
    }
    Ok(())
}
