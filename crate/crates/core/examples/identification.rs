//! Identification functionals on the observed law against enumeration.

use mediation::prelude::*;

fn main() -> Result<()> {
    let t = random_fig1_scm(42)?.counterfactuals()?;
    let law = t.observational_law();
    println!("TE  {:.6} psi_te  {:.6}", total_effect(&t), psi_te(&law)?);
    println!("NIE {:.6} psi_nie {:.6}", natural_effects(&t).nie, psi_nie(&law)?);

    let t = thm1_counterexample(0.5, 0.9)?.counterfactuals()?;
    println!();
    println!("{}", identification_report(&t).render(Default::default()));
    Ok(())
}
