//! Flow complexes of two systems. In the first the three-agent loop is
//! nontrivial; in the second the same loop bounds a 2-simplex.

use infoflow::flow::{find_information_loops, info_flow_complex, info_flow_graph};
use infoflow::model::load_system;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["sysloop.sys", "sysnoloop.sys"] {
        let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
        let sys = load_system(&path)?;
        let complex = info_flow_complex(&sys, 3);
        println!("{name}: dimension {}, {} simplices", complex.dimension(), complex.len());
        for k in 0..=complex.dimension() {
            let labels: Vec<String> = complex.of_dim(k).into_iter().map(|s| complex.label(s)).collect();
            println!("  {k}-simplices: {}", labels.join(" "));
        }
        let g = info_flow_graph(&sys, 3);
        let loops = find_information_loops(&g, 12);
        println!("  nontrivial loops: {}", loops.nontrivial().count());
    }
    Ok(())
}
