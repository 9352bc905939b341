use super::{ModelError, SystemDef};

/// Canonical JSON: expressions are written in their simplified printed
/// form and maps are key-ordered, so equal systems serialize identically.
pub fn system_to_json(sys: &SystemDef) -> Result<String, ModelError> {
    Ok(serde_json::to_string_pretty(sys)?)
}

/// Reads canonical JSON, simplifying and validating like the `.sys` loader.
pub fn system_from_json(text: &str) -> Result<SystemDef, ModelError> {
    let mut sys: SystemDef = serde_json::from_str(text)?;
    sys.normalize();
    sys.validate()?;
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_system;

    #[test]
    fn round_trip_is_structural_identity() {
        let text = "\
statevars x y
params d
box x -2 3
agent 1
  owns x
  obs h1 = (x^2 - y, sqrt(y^2 + 1))
  field = (1/(x+2), 0)
  delta = (d)
  local kind=inequality f1 = (x - d)
  control u = h1_1 - delta_1
agent 2
  owns y
  obs h2 = (y)
  field = (0, -y^2)
objective F = (x - y)
change s: u = x + y ; v = y inverse x = u - v ; y = v
mu d=0.5
x0 x=0.1 y=-0.2
";
        let a = parse_system(text, "j").unwrap();
        let json = system_to_json(&a).unwrap();
        let b = system_from_json(&json).unwrap();
        assert_eq!(a, b);
        assert_eq!(json, system_to_json(&b).unwrap());
    }
}
