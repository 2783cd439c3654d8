//! Plug-in estimation with a bootstrap interval on sampled data.

use mediation::prelude::*;

fn main() -> Result<()> {
    let scm = thm1_counterexample(0.5, 0.9)?;
    for n in [1_000, 10_000, 100_000] {
        let ds = draw_samples(&scm, n, 1)?;
        let est = estimate(&ds, Estimand::NieRL, 500, 2)?;
        println!(
            "n {n:>6}: psi_nie_r_L {:.4} [{:.4}, {:.4}]",
            est.value,
            est.ci_low.unwrap_or(f64::NAN),
            est.ci_high.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
