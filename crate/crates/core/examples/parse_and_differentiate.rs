//! Parse an expression, differentiate it and test the result for zero.
//!
//! Run with `cargo run --example parse_and_differentiate -- "x^2*y + sqrt(y)"`.

use infoflow::expr::{is_zero, parse_expr, DomainBox};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let src = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "x^2*y + 3*x - y/2".to_string());
    let e = parse_expr(&src)?;
    println!("f        = {}", e.simplify());
    for v in e.free_vars() {
        let d = e.differentiate(&v);
        println!("df/d{v:<5}= {d}");
    }

    // Polynomial identities are decided from the normal form, rational ones
    // by exact sampling, and anything with a surviving root only refuted.
    for probe in [
        "(x+1)^2 - (x^2 + 2*x + 1)",
        "x/(x+3) + 3/(x+3) - 1",
        "sqrt(x^2 + 1) - 1",
    ] {
        println!("{probe:<28} {:?}", is_zero(&parse_expr(probe)?, &DomainBox::new()));
    }
    Ok(())
}
