//! Stability margins of a closed loop from its numeric Jacobian.

use infoflow::model::load_system;
use infoflow::sim::{evaluate_objective, initial_state, numeric_jacobian, stability_margins, ClosedLoop};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["stabilization.sys", "destabilization.sys"] {
        let sys = load_system(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR")))?;
        let cl = ClosedLoop::new(&sys, &sys.mu)?;
        let x = initial_state(&sys).unwrap_or_else(|_| vec![0.0; sys.dim()]);
        let j = numeric_jacobian(|y| cl.rhs_vec(y), &x)?;
        println!("{name}: margins {:?}", stability_margins(&j)?);
        if let Some(objective) = &sys.global_objective {
            let status = evaluate_objective(objective, &sys.state_vars, &sys.mu, &x, Some(&j))?;
            println!("  objective: {status:?}");
        }
    }
    Ok(())
}
