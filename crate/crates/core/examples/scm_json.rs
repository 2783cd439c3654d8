//! Models as JSON: write, read back and validate.

use mediation::prelude::*;

fn main() -> Result<()> {
    let scm = pe_counterexample(0.5)?;
    let json = scm.to_json();
    println!("{json}");
    let back = Scm::from_json(&json)?;
    assert_eq!(back, scm);
    println!("valid: {}", validate(&back).is_valid());
    Ok(())
}
