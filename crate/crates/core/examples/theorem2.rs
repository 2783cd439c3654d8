//! Mediational monotonicity with a negative randomized interventional
//! indirect effect near the boundary of the parameter space.

use mediation::criteria::verdicts_for;
use mediation::prelude::*;

fn main() -> Result<()> {
    let (pi1, pi2, beta) = (0.5 - 1e-6, 0.1, 1e-6);
    let t = thm2_counterexample(1.0 - pi1 - pi2, pi1, pi2, beta)?.counterfactuals()?;
    let nie_r = randomized_effects(&t)?.nie_r;
    let status = null_status(&t);
    println!("monotonicity: {}", status.monotonicity);
    println!("NIE^R = {nie_r:.6}, closed form {:.6}", (1.0 - pi1) * (pi1 * (2.0 * beta - 1.0) + pi2));
    for v in verdicts_for(&status, "NIE^R", nie_r) {
        println!("{:<14} premise {:<5} refuted {}", v.criterion.to_string(), v.premise_holds, v.refutes_criterion);
    }
    Ok(())
}
