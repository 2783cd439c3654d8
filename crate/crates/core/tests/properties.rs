use mediation::prelude::*;
use proptest::prelude::*;

fn random_model(kind: u8, seed: u64) -> CounterfactualTable {
    let scm = match kind % 6 {
        0 => random_fig1_scm(seed),
        1 => random_fig2_scm(seed),
        2 => additive_outcome_scm(&random_additive_params(seed, seed % 2 == 0)),
        3 => separable_scm(&random_separable_params(seed)),
        4 => random_always_affects_scm(seed),
        _ => random_instrument_like_scm(seed),
    };
    scm.unwrap().counterfactuals().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decompositions_add_up(kind in 0u8..6, seed in any::<u64>()) {
        let t = random_model(kind, seed);
        let r = effect_report(&t).unwrap();
        prop_assert!((r.te - r.nie - r.nde).abs() < 1e-12);
        prop_assert!((r.te_r - r.nie_r - r.nde_r).abs() < 1e-12);
        for (m, cde) in &r.cde {
            let int: f64 = r.int_ref.iter().filter(|((j, _), _)| j == m).map(|(_, v)| v).sum();
            prop_assert!((r.te - cde - int - r.nie).abs() < 1e-12);
        }
    }

    #[test]
    fn null_status_implications(kind in 0u8..6, seed in any::<u64>()) {
        let s = null_status(&random_model(kind, seed));
        prop_assert!(!s.sharper_null || s.sharp_null);
        prop_assert!(!s.sharp_null || s.monotonicity == Monotonicity::Both);
        prop_assert_eq!(s.sharp_null, s.witnesses.iter().all(|w| w.property != "sharp_null"));
    }

    #[test]
    fn nie_never_refutes_a_criterion(kind in 0u8..6, seed in any::<u64>()) {
        let t = random_model(kind, seed);
        let nie = natural_effects(&t).nie;
        let verdicts = mediation::criteria::verdicts_for(&null_status(&t), "NIE", nie);
        prop_assert!(verdicts.iter().all(|v| !v.refutes_criterion));
    }

    #[test]
    fn swapping_exposure_levels(kind in 0u8..6, seed in any::<u64>()) {
        let scm = match kind % 2 {
            0 => random_fig1_scm(seed),
            _ => random_fig2_scm(seed),
        }.unwrap();
        let t = scm.counterfactuals().unwrap();
        let s = scm.swapped_exposure().counterfactuals().unwrap();
        prop_assert!((total_effect(&t) + total_effect(&s)).abs() < 1e-12);
        for &m in &t.m_support {
            let (c, cs) = (controlled_direct_effect(&t, m).unwrap(), controlled_direct_effect(&s, m).unwrap());
            prop_assert!((c + cs).abs() < 1e-12);
        }
        prop_assert_eq!(null_status(&t).sharp_null, null_status(&s).sharp_null);
    }

    #[test]
    fn portion_eliminated_functional(seed in any::<u64>()) {
        let law = random_fig1_scm(seed).unwrap().counterfactuals().unwrap().observational_law();
        let te = psi_te(&law).unwrap();
        for m in law.cells.keys().map(|c| c.m).collect::<std::collections::BTreeSet<_>>() {
            prop_assert!((psi_pe(&law, m).unwrap() - (te - psi_cde(&law, m).unwrap())).abs() < 1e-12);
        }
    }

    #[test]
    fn identification_matches_enumeration(seed in any::<u64>()) {
        let t = random_fig1_scm(seed).unwrap().counterfactuals().unwrap();
        let law = t.observational_law();
        prop_assert!((psi_nie(&law).unwrap() - natural_effects(&t).nie).abs() < 1e-10);
        let t = random_fig2_scm(seed).unwrap().counterfactuals().unwrap();
        let nie_r = randomized_effects(&t).unwrap().nie_r;
        prop_assert!((psi_nie_r_l(&t.observational_law()).unwrap() - nie_r).abs() < 1e-10);
    }

    #[test]
    fn first_counterexample_closed_form(pi in 0.001f64..0.999, beta in 0.001f64..0.999) {
        let t = thm1_counterexample(pi, beta).unwrap().counterfactuals().unwrap();
        let nie_r = randomized_effects(&t).unwrap().nie_r;
        prop_assert!((nie_r - pi * (1.0 - pi) * (2.0 * beta - 1.0)).abs() < 1e-12);
        prop_assert!(natural_effects(&t).nie.abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic_and_prefix_stable(seed in any::<u64>(), n in 1usize..300) {
        let scm = random_fig2_scm(seed).unwrap();
        let a = draw_samples(&scm, n, seed).unwrap();
        let b = draw_samples(&scm, n, seed).unwrap();
        prop_assert_eq!(&a.rows, &b.rows);
        let longer = draw_samples(&scm, n + 50, seed).unwrap();
        prop_assert_eq!(&a.rows[..], &longer.rows[..n]);
    }
}
