//! Without an exposure-mediator interaction every indirect measure agrees.

use mediation::prelude::*;

fn main() -> Result<()> {
    for seed in 0..5 {
        for with_l in [false, true] {
            let t = additive_outcome_scm(&random_additive_params(seed, with_l))?.counterfactuals()?;
            let r = effect_report(&t)?;
            let pe: Vec<String> = r.pe.values().map(|v| format!("{v:.4}")).collect();
            println!(
                "seed {seed} L {with_l:<5} no interaction {} NIE {:.4} NIE^R {:.4} PE(m) [{}]",
                no_interaction_check(&t),
                r.nie,
                r.nie_r,
                pe.join(", ")
            );
        }
    }
    Ok(())
}
