//! Check that the local objectives jointly imply the global one on a
//! sample set, and find where a stricter global objective fails.

use std::fs::File;

use infoflow::model::load_system;
use infoflow::order::{check_well_posed, SampleSet, WellPosedVerdict};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let samples = SampleSet::from_csv(File::open(format!("{dir}/two_cycles_samples.csv"))?)?;

    for name in ["two_cycles.sys", "two_cycles_halfplane.sys"] {
        let sys = load_system(format!("{dir}/{name}"))?;
        let report = check_well_posed(&sys, &sys.mu, &samples)?;
        print!(
            "{name}: locals hold on {} of {} samples; ",
            report.locals_satisfied, report.samples
        );
        match report.verdict {
            WellPosedVerdict::WellPosedOnSamples => println!("well-posed"),
            WellPosedVerdict::CounterexampleFound {
                index,
                failing_components,
                ..
            } => {
                println!("sample {index} violates global components {failing_components:?}")
            }
        }
    }
    Ok(())
}
