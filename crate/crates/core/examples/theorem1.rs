//! A sharper mediational null alongside a nonzero randomized interventional
//! indirect effect, swept over the recanting probability.

use mediation::prelude::*;

fn main() -> Result<()> {
    println!("{:>5} {:>5} {:>10} {:>10} {:>6}", "pi", "beta", "NIE", "NIE^R", "sharp");
    for (pi, beta) in [(0.5, 0.9), (0.5, 0.1), (0.2, 0.7), (0.5, 1e-6)] {
        let t = thm1_counterexample(pi, beta)?.counterfactuals()?;
        let r = effect_report(&t)?;
        let s = null_status(&t);
        println!("{pi:>5} {beta:>5} {:>10.6} {:>10.6} {:>6}", r.nie, r.nie_r, s.sharper_null);
    }
    Ok(())
}
