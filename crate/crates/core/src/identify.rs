//! Identification functionals of the observed law, and exact checks of the
//! exchangeability and positivity assumptions on the counterfactual joint.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::engine::{Arm, Cell, CounterfactualTable, ObservedLaw};
use crate::model::Level;
use crate::report::Report;
use crate::{Error, Result, NULL_TOL};

type Strata = BTreeMap<Vec<Level>, f64>;

fn degenerate(what: String) -> Error {
    Error::DegenerateStratum(what)
}

/// `E(Y | pred)`, or a degenerate-stratum error naming `what`.
fn mean_y(law: &ObservedLaw, pred: impl Fn(&Cell) -> bool, what: impl FnOnce() -> String) -> Result<f64> {
    let (w, s) = law.mass_and_y(pred);
    if w > 0.0 {
        Ok(s / w)
    } else {
        Err(degenerate(what()))
    }
}

fn exposure_positive(law: &ObservedLaw, strata: &Strata) -> Result<()> {
    for c in strata.keys() {
        for a in [law.exposure.a_star, law.exposure.a] {
            if law.mass(|x| &x.c == c && x.a == a) <= 0.0 {
                return Err(degenerate(format!("P(A = {a} | C = {c:?}) = 0")));
            }
        }
    }
    Ok(())
}

/// Strong positivity: both exposure levels in every stratum, and every
/// mediator level under both exposure levels in every stratum.
fn mediator_positive(law: &ObservedLaw, strata: &Strata) -> Result<()> {
    exposure_positive(law, strata)?;
    for c in strata.keys() {
        for a in [law.exposure.a_star, law.exposure.a] {
            for &m in &law.m_support {
                if law.mass(|x| &x.c == c && x.a == a && x.m == m) <= 0.0 {
                    return Err(degenerate(format!("f(M = {m} | A = {a}, C = {c:?}) = 0")));
                }
            }
        }
    }
    Ok(())
}

fn in_support(law: &ObservedLaw, m: Level) -> Result<()> {
    if law.m_support.contains(&m) {
        Ok(())
    } else {
        Err(Error::Domain(format!("mediator level {m} is outside the support {:?}", law.m_support)))
    }
}

/// `P(M = m | A = a, C = c)` for every mediator level.
fn mediator_pmf(law: &ObservedLaw, c: &[Level], a: Level, l: Option<Option<Level>>) -> Vec<f64> {
    let keep = |x: &Cell| x.c == c && x.a == a && l.is_none_or(|l| x.l == l);
    let total = law.mass(keep);
    law.m_support
        .iter()
        .map(|&m| if total > 0.0 { law.mass(|x| keep(x) && x.m == m) / total } else { 0.0 })
        .collect()
}

/// `E{E(Y | a, C)} - E{E(Y | a*, C)}`.
pub fn psi_te(law: &ObservedLaw) -> Result<f64> {
    let strata = law.c_strata();
    exposure_positive(law, &strata)?;
    let mut total = 0.0;
    for (c, pc) in &strata {
        let ey = |a: Level| mean_y(law, |x| &x.c == c && x.a == a, || format!("A = {a}, C = {c:?}"));
        total += pc * (ey(law.exposure.a)? - ey(law.exposure.a_star)?);
    }
    Ok(total)
}

/// Controlled direct effect functional; with a confounder `L` the outcome
/// regression is averaged over `L | A = a', C`.
pub fn psi_cde(law: &ObservedLaw, m: Level) -> Result<f64> {
    in_support(law, m)?;
    let strata = law.c_strata();
    exposure_positive(law, &strata)?;
    let mut total = 0.0;
    for (c, pc) in &strata {
        let arm = |a: Level| -> Result<f64> {
            let pa = law.mass(|x| &x.c == c && x.a == a);
            let mut acc = 0.0;
            for l in law.l_levels() {
                let pl = law.mass(|x| &x.c == c && x.a == a && x.l == l) / pa;
                if pl > 0.0 {
                    let ey = mean_y(law, |x| &x.c == c && x.a == a && x.l == l && x.m == m, || {
                        format!("M = {m}, L = {l:?}, A = {a}, C = {c:?}")
                    })?;
                    acc += pl * ey;
                }
            }
            Ok(acc)
        };
        total += pc * (arm(law.exposure.a)? - arm(law.exposure.a_star)?);
    }
    Ok(total)
}

pub fn psi_pe(law: &ObservedLaw, m: Level) -> Result<f64> {
    Ok(psi_te(law)? - psi_cde(law, m)?)
}

/// The mediation formula `E{E(Y | a, C)} - E[E{E(Y | M, a, C) | a*, C}]`.
pub fn psi_nie(law: &ObservedLaw) -> Result<f64> {
    let strata = law.c_strata();
    mediator_positive(law, &strata)?;
    let (a_star, a) = (law.exposure.a_star, law.exposure.a);
    let mut total = 0.0;
    for (c, pc) in &strata {
        let ey_a = mean_y(law, |x| &x.c == c && x.a == a, || format!("A = {a}, C = {c:?}"))?;
        let f_star = mediator_pmf(law, c, a_star, None);
        let mut cross = 0.0;
        for (&m, fm) in law.m_support.iter().zip(&f_star) {
            cross += fm * mean_y(law, |x| &x.c == c && x.a == a && x.m == m, || format!("M = {m}, A = {a}, C = {c:?}"))?;
        }
        total += pc * (ey_a - cross);
    }
    Ok(total)
}

/// Randomized interventional indirect effect functional with an
/// exposure-induced confounder:
/// `E[Σ_m Σ_l E(Y | m, l, a, C) P(l | a, C) {P(m | a, C) - P(m | a*, C)}]`.
pub fn psi_nie_r_l(law: &ObservedLaw) -> Result<f64> {
    let strata = law.c_strata();
    mediator_positive(law, &strata)?;
    let (a_star, a) = (law.exposure.a_star, law.exposure.a);
    let mut total = 0.0;
    for (c, pc) in &strata {
        let pa = law.mass(|x| &x.c == c && x.a == a);
        let diff: Vec<f64> = mediator_pmf(law, c, a, None)
            .iter()
            .zip(mediator_pmf(law, c, a_star, None))
            .map(|(p, q)| p - q)
            .collect();
        let mut inner = 0.0;
        for l in law.l_levels() {
            let pl = law.mass(|x| &x.c == c && x.a == a && x.l == l) / pa;
            if pl == 0.0 {
                continue;
            }
            for (&m, d) in law.m_support.iter().zip(&diff) {
                if *d == 0.0 {
                    continue;
                }
                let ey = mean_y(law, |x| &x.c == c && x.a == a && x.l == l && x.m == m, || {
                    format!("M = {m}, L = {l:?}, A = {a}, C = {c:?}")
                })?;
                inner += ey * pl * d;
            }
        }
        total += pc * inner;
    }
    Ok(total)
}

/// Identifying functional of the contrast of draws from `M(a') | C, L`:
/// `E{Σ_l P(l | C) Σ_m E(Y | m, l, a, C) [P(m | l, a, C) - P(m | l, a*, C)]}`.
pub fn psi_nie_rl(law: &ObservedLaw) -> Result<f64> {
    let strata = law.c_strata();
    mediator_positive(law, &strata)?;
    let (a_star, a) = (law.exposure.a_star, law.exposure.a);
    let mut total = 0.0;
    for (c, pc) in &strata {
        let mut inner = 0.0;
        for l in law.l_levels() {
            let pl = law.mass(|x| &x.c == c && x.l == l) / pc;
            if pl == 0.0 {
                continue;
            }
            for arm_level in [a, a_star] {
                if law.mass(|x| &x.c == c && x.l == l && x.a == arm_level) <= 0.0 {
                    return Err(degenerate(format!("P(A = {arm_level} | L = {l:?}, C = {c:?}) = 0")));
                }
            }
            let fa = mediator_pmf(law, c, a, Some(l));
            let fs = mediator_pmf(law, c, a_star, Some(l));
            for (j, &m) in law.m_support.iter().enumerate() {
                let d = fa[j] - fs[j];
                if d == 0.0 {
                    continue;
                }
                let ey = mean_y(law, |x| &x.c == c && x.a == a && x.l == l && x.m == m, || {
                    format!("M = {m}, L = {l:?}, A = {a}, C = {c:?}")
                })?;
                inner += pl * ey * d;
            }
        }
        total += pc * inner;
    }
    Ok(total)
}

/// `E[Σ_m E(Y | m, l', a, C) {P(m | a, C) - P(m | a*, C)}]` at a fixed confounder level.
pub fn psi_nie_fixed_l(law: &ObservedLaw, l_prime: Level) -> Result<f64> {
    let Some(l_support) = &law.l_support else {
        return Err(Error::Domain("fixed-L functional requires an exposure-induced confounder".into()));
    };
    if !l_support.contains(&l_prime) {
        return Err(Error::Domain(format!("confounder level {l_prime} is outside the support {l_support:?}")));
    }
    let strata = law.c_strata();
    mediator_positive(law, &strata)?;
    let (a_star, a) = (law.exposure.a_star, law.exposure.a);
    let mut total = 0.0;
    for (c, pc) in &strata {
        let fa = mediator_pmf(law, c, a, None);
        let fs = mediator_pmf(law, c, a_star, None);
        for (j, &m) in law.m_support.iter().enumerate() {
            let d = fa[j] - fs[j];
            if d == 0.0 {
                continue;
            }
            let ey = mean_y(law, |x| &x.c == c && x.a == a && x.l == Some(l_prime) && x.m == m, || {
                format!("M = {m}, L = {l_prime}, A = {a}, C = {c:?}")
            })?;
            total += pc * ey * d;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Assumption {
    /// `Y(a', m) ⫫ A | C`.
    A1,
    /// `Y(a', m) ⫫ M | C, A = a'`.
    A2,
    /// `M(a') ⫫ A | C`.
    A3,
    /// `Y(a, m) ⫫ M(a*) | C`, a cross-world independence.
    A4,
    /// Positivity of the exposure and mediator given covariates.
    A6,
    /// `Y(a', m) ⫫ M | L, C, A = a'`.
    A7,
}

impl Assumption {
    pub const ALL: [Assumption; 6] =
        [Assumption::A1, Assumption::A2, Assumption::A3, Assumption::A4, Assumption::A6, Assumption::A7];
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionVerdict {
    pub assumption: Assumption,
    pub holds: bool,
    /// Largest `|P(x, z, s) - P(x, s) P(z, s) / P(s)|`; for positivity, 1 when a
    /// required cell is empty and 0 otherwise.
    pub worst_violation: f64,
    pub witness: String,
}

type Key = Vec<Level>;

#[derive(Default)]
struct Independence {
    joint: BTreeMap<(Key, Key, Key), f64>,
    xs: BTreeMap<(Key, Key), f64>,
    zs: BTreeMap<(Key, Key), f64>,
    s: BTreeMap<Key, f64>,
}

impl Independence {
    fn add(&mut self, w: f64, x: Key, z: Key, s: Key) {
        *self.joint.entry((x.clone(), z.clone(), s.clone())).or_default() += w;
        *self.xs.entry((s.clone(), x)).or_default() += w;
        *self.zs.entry((s.clone(), z)).or_default() += w;
        *self.s.entry(s).or_default() += w;
    }

    /// Worst cell deviation with a description of the offending cell.
    fn worst(&self) -> (f64, String) {
        let mut worst = (0.0, String::new());
        for (s, ps) in &self.s {
            let xs = self.xs.iter().filter(|((ss, _), _)| ss == s);
            for ((_, x), pxs) in xs {
                for ((_, z), pzs) in self.zs.iter().filter(|((ss, _), _)| ss == s) {
                    let joint = self.joint.get(&(x.clone(), z.clone(), s.clone())).copied().unwrap_or(0.0);
                    let dev = (joint - pxs * pzs / ps).abs();
                    if dev > worst.0 {
                        worst = (dev, format!("x = {x:?}, z = {z:?}, s = {s:?}"));
                    }
                }
            }
        }
        worst
    }
}

/// Checks one assumption exactly on the counterfactual joint of a model.
pub fn check_assumption(t: &CounterfactualTable, which: Assumption) -> AssumptionVerdict {
    if which == Assumption::A6 {
        return positivity_verdict(t);
    }
    let mut worst = (0.0f64, String::new());
    let mut consider = |label: String, ind: Independence| {
        let (dev, cell) = ind.worst();
        if dev > worst.0 {
            worst = (dev, format!("{label}: {cell}"));
        }
    };
    let n_m = t.m_support.len();
    for arm in Arm::BOTH {
        let a_level = arm.level(t.exposure);
        for j in 0..n_m {
            let m = t.m_support[j];
            let mut ind = Independence::default();
            let label = match which {
                Assumption::A1 => {
                    for u in &t.units {
                        ind.add(u.weight, vec![u.arm(arm).y_m[j]], vec![u.a], u.c.clone());
                    }
                    format!("Y({a_level},{m}) vs A")
                }
                Assumption::A2 | Assumption::A7 => {
                    for u in t.units.iter().filter(|u| u.a == a_level) {
                        let mut s = u.c.clone();
                        if which == Assumption::A7 {
                            s.extend(u.l);
                        }
                        ind.add(u.weight, vec![u.arm(arm).y_m[j]], vec![u.m], s);
                    }
                    format!("Y({a_level},{m}) vs M given A = {a_level}")
                }
                Assumption::A3 => {
                    if j > 0 {
                        continue;
                    }
                    for u in &t.units {
                        ind.add(u.weight, vec![u.arm(arm).m], vec![u.a], u.c.clone());
                    }
                    format!("M({a_level}) vs A")
                }
                Assumption::A4 => {
                    if arm == Arm::Star {
                        continue;
                    }
                    for u in &t.units {
                        ind.add(u.weight, vec![u.arm(Arm::Active).y_m[j]], vec![u.arm(Arm::Star).m], u.c.clone());
                    }
                    format!("Y({a_level},{m}) vs M({})", t.exposure.a_star)
                }
                Assumption::A6 => unreachable!(),
            };
            consider(label, ind);
        }
    }
    AssumptionVerdict { assumption: which, holds: worst.0 <= NULL_TOL, worst_violation: worst.0, witness: worst.1 }
}

fn positivity_verdict(t: &CounterfactualTable) -> AssumptionVerdict {
    let law = t.observational_law();
    let strata = law.c_strata();
    match mediator_positive(&law, &strata) {
        Ok(()) => AssumptionVerdict { assumption: Assumption::A6, holds: true, worst_violation: 0.0, witness: String::new() },
        Err(e) => AssumptionVerdict {
            assumption: Assumption::A6,
            holds: false,
            worst_violation: 1.0,
            witness: match e {
                Error::DegenerateStratum(s) => s,
                other => other.to_string(),
            },
        },
    }
}

/// All identification functionals that are defined for the law, plus every assumption verdict.
pub fn identification_report(t: &CounterfactualTable) -> Report {
    let law = t.observational_law();
    let mut r = Report::new();
    let mut put = |key: String, v: Result<f64>| match v {
        Ok(x) => {
            r.num(key, x);
        }
        Err(e) => {
            r.text(key, format!("undefined ({e})"));
        }
    };
    put("psi_te".into(), psi_te(&law));
    for &m in &law.m_support {
        put(format!("psi_cde({m})"), psi_cde(&law, m));
        put(format!("psi_pe({m})"), psi_pe(&law, m));
    }
    put("psi_nie".into(), psi_nie(&law));
    put("psi_nie_r_L".into(), psi_nie_r_l(&law));
    if law.has_l() {
        put("psi_nie_rl".into(), psi_nie_rl(&law));
    }
    for a in Assumption::ALL {
        if a == Assumption::A7 && !t.has_l() {
            continue;
        }
        let v = check_assumption(t, a);
        r.flag(format!("{a}"), v.holds);
        r.num(format!("{a}.worst_violation"), v.worst_violation);
        if !v.holds {
            r.text(format!("{a}.witness"), v.witness);
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::{effect_report, natural_effects, randomized_effects};
    use crate::engine::CounterfactualModel;
    use crate::model::{pe_counterexample, thm1_counterexample, thm2_counterexample, thm3_counterexample};

    #[test]
    fn pe_law_functionals() {
        let law = pe_counterexample(0.5).unwrap().counterfactuals().unwrap().observational_law();
        assert!((psi_te(&law).unwrap() - 0.5).abs() < 1e-12);
        assert!((psi_cde(&law, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((psi_pe(&law, 1).unwrap() + 0.5).abs() < 1e-12);
        assert!(psi_nie(&law).unwrap().abs() < 1e-12);
        assert!(matches!(psi_cde(&law, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn thm1_law_functionals() {
        for (pi, beta) in [(0.3, 0.8), (0.5, 0.9), (0.6, 0.25)] {
            let t = thm1_counterexample(pi, beta).unwrap().counterfactuals().unwrap();
            let law = t.observational_law();
            let r = effect_report(&t).unwrap();
            assert!((psi_nie_r_l(&law).unwrap() - pi * (1.0 - pi) * (2.0 * beta - 1.0)).abs() < 1e-12);
            assert!((psi_nie_rl(&law).unwrap() - (beta - 0.5)).abs() < 1e-12);
            assert!((psi_cde(&law, 0).unwrap() - r.cde[&0]).abs() < 1e-12);
            assert!((psi_te(&law).unwrap() - r.te).abs() < 1e-12);
        }
    }

    #[test]
    fn thm3_law_identifies_randomized_not_natural_effect() {
        let t = thm3_counterexample(0.1, [0.1, 0.2, 0.4, 0.3], 0.5).unwrap().counterfactuals().unwrap();
        let psi = psi_nie(&t.observational_law()).unwrap();
        assert!((psi - 0.052).abs() < 1e-12);
        assert!((psi - randomized_effects(&t).unwrap().nie_r).abs() < 1e-12);
        assert!(natural_effects(&t).nie.abs() < 1e-12);
    }

    #[test]
    fn missing_mediator_cell_is_degenerate() {
        let mut law = pe_counterexample(0.5).unwrap().counterfactuals().unwrap().observational_law();
        law.cells.retain(|c, _| !(c.a == 0 && c.m == 1));
        let total = law.total();
        law.cells.values_mut().for_each(|p| *p /= total);
        assert!(matches!(psi_nie(&law), Err(Error::DegenerateStratum(_))));
    }

    #[test]
    fn thm2_law_lacks_support_for_the_confounder_functional() {
        let law = thm2_counterexample(0.2, 0.3, 0.5, 0.9).unwrap().counterfactuals().unwrap().observational_law();
        assert!(matches!(psi_nie_r_l(&law), Err(Error::DegenerateStratum(_))));
    }

    #[test]
    fn assumption_verdicts() {
        let t1 = thm1_counterexample(0.3, 0.8).unwrap().counterfactuals().unwrap();
        let v = |t: &CounterfactualTable, a| check_assumption(t, a).holds;
        assert!(v(&t1, Assumption::A1) && v(&t1, Assumption::A3) && v(&t1, Assumption::A6));
        assert!(!v(&t1, Assumption::A2));
        assert!(v(&t1, Assumption::A7));
        let pe = pe_counterexample(0.3).unwrap().counterfactuals().unwrap();
        for a in Assumption::ALL {
            assert!(v(&pe, a), "{a}");
        }
        let t3 = thm3_counterexample(0.1, [0.1, 0.2, 0.4, 0.3], 0.5).unwrap().counterfactuals().unwrap();
        let a4 = check_assumption(&t3, Assumption::A4);
        assert!(!a4.holds && a4.worst_violation > 1e-9 && !a4.witness.is_empty());
        assert!(v(&t3, Assumption::A1) && v(&t3, Assumption::A2) && v(&t3, Assumption::A3));
    }

    #[test]
    fn identification_report_lists_functionals_and_assumptions() {
        let t = thm1_counterexample(0.5, 0.9).unwrap().counterfactuals().unwrap();
        let r = identification_report(&t);
        assert_eq!(r.get("psi_nie_r_L"), Some("0.2"));
        assert_eq!(r.get("psi_nie_rl"), Some("0.4"));
        assert_eq!(r.get("A2"), Some("FALSE"));
        assert_eq!(r.get("A7"), Some("TRUE"));
    }
}
