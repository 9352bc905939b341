//! Lie derivatives, brackets and the bracket closure of a pair of fields.

use infoflow::expr::{parse_tuple, DomainBox};
use infoflow::lie::{bracket_closure, lie_bracket, lie_derivative};
use infoflow::model::VectorField;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let vars: Vec<String> = ["x", "y", "theta"].map(String::from).to_vec();
    // Unicycle: drive forward, or turn in place.
    let drive = VectorField::new("drive", parse_tuple("(1 - theta^2/2, theta, 0)")?);
    let turn = VectorField::new("turn", parse_tuple("(0, 0, 1)")?);

    let b = lie_bracket(&drive, &turn, &vars)?;
    let shown: Vec<String> = b.components.iter().map(ToString::to_string).collect();
    println!("{} = ({})", b.name, shown.join(", "));

    let h = parse_tuple("(x^2 + y^2)")?;
    println!("L_drive h = {}", lie_derivative(&drive, &h, &vars)?[0]);

    let closure = bracket_closure(&[drive, turn], 3, &vars, &DomainBox::new())?;
    for m in &closure.members {
        println!("length {}: {}", m.word_len, m.word());
    }
    Ok(())
}
