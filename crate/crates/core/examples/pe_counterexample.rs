//! The portion eliminated is nonzero under a sharp mediational null.

use mediation::prelude::*;

fn main() -> Result<()> {
    let t = pe_counterexample(0.3)?.counterfactuals()?;
    println!("{}", effect_report(&t)?.to_report().render(Default::default()));
    let status = null_status(&t);
    println!("sharp null holds: {}", status.sharp_null);
    println!("M always affects Y: {}", m_always_affects_y_check(&t));
    Ok(())
}
