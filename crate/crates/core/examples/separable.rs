//! Separable exposure components and mediators that always move the outcome.

use mediation::prelude::*;

fn main() -> Result<()> {
    for seed in 0..5 {
        let t = separable_scm(&random_separable_params(seed))?.counterfactuals()?;
        let r = effect_report(&t)?;
        println!("separable {seed}: NIE {:.6} NIE^R {:.6}", r.nie, r.nie_r);
    }
    for seed in 0..5 {
        let t = random_always_affects_scm(seed)?.counterfactuals()?;
        let r = effect_report(&t)?;
        println!(
            "always-affects {seed}: check {} sharp null {} NIE^R {:.6}",
            m_always_affects_y_check(&t),
            null_status(&t).sharp_null,
            r.nie_r
        );
    }
    Ok(())
}
