//! Simulate a four-agent distance formation from a perturbed start and
//! watch the squared-distance errors decay.

use infoflow::model::load_system;
use infoflow::sim::{formation_edges, initial_state, ClosedLoop, EdgeErrorSeries};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = load_system(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/two_cycles.sys"))?;
    let cl = ClosedLoop::new(&sys, &sys.mu)?;
    let edges = formation_edges(&sys, &sys.mu)?;

    let mut x0 = initial_state(&sys)?;
    for (k, x) in x0.iter_mut().enumerate() {
        *x += if k % 3 == 0 { 0.02 } else { -0.01 };
    }
    let traj = cl.integrate(&x0, 1e-3, 20.0)?;
    let errors = EdgeErrorSeries::new(&traj, &edges, true);

    let header: Vec<String> = errors.labels.iter().map(|l| format!("{l:>9}")).collect();
    println!("{:<6} {}", "t", header.join(" "));
    for i in (0..errors.times.len()).step_by(2000) {
        let row: Vec<String> = errors.values[i].iter().map(|e| format!("{e:>+9.1e}")).collect();
        println!("{:<6} {}", errors.times[i], row.join(" "));
    }
    println!("final max |e| = {:.2e}", errors.final_max_abs());
    Ok(())
}
