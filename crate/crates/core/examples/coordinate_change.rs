//! Rewrite a system in new coordinates and compare the naive graphs.
//!
//! The naive graph reads dependencies straight off the vector fields, so it
//! changes with the coordinates. The information flow graph does not.

use infoflow::flow::{check_invariance, check_naive_invariance};
use infoflow::model::{load_system, naive_flow_graph, transform_system};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/four_agents_x.sys").to_string());
    let sys = load_system(&path)?;
    let change = sys.changes.first().ok_or("the system declares no coordinate change")?;
    let z = transform_system(&sys, change)?;

    println!("change {}: {:?} -> {:?}", change.name, sys.state_vars, change.new_vars);
    for (k, agent) in z.agents.iter().enumerate() {
        let obs: Vec<String> = agent.observation.components.iter().map(ToString::to_string).collect();
        println!("  h{} = ({})", k + 1, obs.join(", "));
    }

    let (nx, nz) = (naive_flow_graph(&sys)?, naive_flow_graph(&z)?);
    println!("naive edges before: {:?}", nx.named_edges());
    println!("naive edges after:  {:?}", nz.named_edges());
    println!("naive graphs:       {:?}", check_naive_invariance(&sys, change)?.status);
    println!("information graphs: {:?}", check_invariance(&sys, change, 3)?.status);
    Ok(())
}
