//! Build the information flow graph of a system and list its loops.
//!
//! `cargo run --example information_flow_graph -- path/to/system.sys`

use infoflow::flow::{classify, find_information_loops, graph_to_dot, info_flow_graph, DEFAULT_MAX_LEN};
use infoflow::model::load_system;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/formation5.sys").to_string());
    let sys = load_system(&path)?;
    let g = info_flow_graph(&sys, 3);

    for (from, to, evidence) in g.edges() {
        println!("{} -> {}  via {:?}", g.vertices[from], g.vertices[to], evidence);
    }
    if !g.unknown_edges().is_empty() {
        println!("undecided: {:?}", g.unknown_edges());
    }
    let loops = find_information_loops(&g, DEFAULT_MAX_LEN);
    for l in &loops.loops {
        println!("loop {} is {:?}", l.names(&g).join(" -> "), l.classification);
    }
    println!("structure: {:?}\n", classify(&g));
    print!("{}", graph_to_dot(&g, &sys.name, Some(&loops)));
    Ok(())
}
