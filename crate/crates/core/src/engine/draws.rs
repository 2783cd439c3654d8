//! Expectations under randomized interventions that set `M` to a draw from a
//! conditional mediator distribution, computed in closed form.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{Arm, CounterfactualTable};
use crate::model::Level;
use crate::{Error, Result};

/// Covariates on which the mediator draw is conditioned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DrawConditioning {
    /// `G(a')`: a draw from `M(a') | C`.
    Covariates,
    /// `G(a' | C, L)`: a draw from `M(a') | C, L` with the confounder set to
    /// each level of its factual distribution given `C`.
    CovariatesAndObservedL,
    /// `G{a' | C, L(a')}`: a draw from `M(a') | C, L(a')`.
    CovariatesAndCounterfactualL,
}

#[derive(Default)]
struct Stratum {
    weight: f64,
    draw: BTreeMap<usize, f64>,
    outcome: BTreeMap<usize, f64>,
}

impl Stratum {
    /// `weight * Σ_m P(draw = m | s) E[Y(m) | s]`.
    fn contribution(&self) -> f64 {
        self.draw
            .iter()
            .map(|(j, d)| d * self.outcome.get(j).copied().unwrap_or(0.0))
            .sum::<f64>()
            / self.weight
    }
}

/// `E[Y{a_set, G}]` for a mediator draw `G` of the given kind from the `a_draw` arm.
pub fn g_draw_mean(
    table: &CounterfactualTable,
    a_set: Level,
    a_draw: Level,
    conditioning: DrawConditioning,
) -> Result<f64> {
    let set = Arm::of_level(a_set, table.exposure)?;
    let draw = Arm::of_level(a_draw, table.exposure)?;
    let n_m = table.m_support.len();
    match conditioning {
        DrawConditioning::Covariates | DrawConditioning::CovariatesAndCounterfactualL => {
            if conditioning == DrawConditioning::CovariatesAndCounterfactualL && !table.has_l() {
                return Err(Error::Domain("conditioning on L(a') requires an exposure-induced confounder".into()));
            }
            let mut strata: BTreeMap<(&[Level], Option<Level>), Stratum> = BTreeMap::new();
            for u in &table.units {
                let l = match conditioning {
                    DrawConditioning::Covariates => None,
                    _ => u.arm(draw).l,
                };
                let s = strata.entry((u.c.as_slice(), l)).or_default();
                s.weight += u.weight;
                *s.draw.entry(table.m_index(u.arm(draw).m)).or_default() += u.weight;
                for j in 0..n_m {
                    *s.outcome.entry(j).or_default() += u.weight * u.arm(set).y_m[j] as f64;
                }
            }
            Ok(strata.values().map(Stratum::contribution).sum())
        }
        DrawConditioning::CovariatesAndObservedL => {
            let Some(l_support) = &table.l_support else {
                return Err(Error::Domain("conditioning on L requires an exposure-induced confounder".into()));
            };
            let n_l = l_support.len();
            let mut by_c: BTreeMap<&[Level], (f64, Vec<f64>, Vec<Stratum>)> = BTreeMap::new();
            for u in &table.units {
                let (w, pl, strata) = by_c
                    .entry(u.c.as_slice())
                    .or_insert_with(|| (0.0, vec![0.0; n_l], (0..n_l).map(|_| Stratum::default()).collect()));
                *w += u.weight;
                pl[table.l_index(u.l.expect("model has L"))] += u.weight;
                for (k, s) in strata.iter_mut().enumerate() {
                    s.weight += u.weight;
                    *s.draw.entry(table.m_index(u.arm(draw).m_given_l[k])).or_default() += u.weight;
                    for j in 0..n_m {
                        *s.outcome.entry(j).or_default() += u.weight * u.arm(set).y_lm[k][j] as f64;
                    }
                }
            }
            Ok(by_c
                .values()
                .map(|(w, pl, strata)| strata.iter().zip(pl).map(|(s, p)| p / w * s.contribution()).sum::<f64>())
                .sum())
        }
    }
}

/// `Σ_c P(c) Σ_m P(M = m | A = a_draw, c) E[Y(a_stratum, m) | A = a_stratum, c]`.
pub fn h_draw_mean(table: &CounterfactualTable, a_stratum: Level, a_draw: Level) -> Result<f64> {
    let stratum_arm = Arm::of_level(a_stratum, table.exposure)?;
    let n_m = table.m_support.len();
    #[derive(Default)]
    struct Acc {
        weight: f64,
        draw_weight: f64,
        draw: Vec<f64>,
        stratum_weight: f64,
        outcome: Vec<f64>,
    }
    let mut by_c: BTreeMap<&[Level], Acc> = BTreeMap::new();
    for u in &table.units {
        let acc = by_c.entry(u.c.as_slice()).or_insert_with(|| Acc {
            draw: vec![0.0; n_m],
            outcome: vec![0.0; n_m],
            ..Acc::default()
        });
        acc.weight += u.weight;
        if u.a == a_draw {
            acc.draw_weight += u.weight;
            acc.draw[table.m_index(u.m)] += u.weight;
        }
        if u.a == a_stratum {
            acc.stratum_weight += u.weight;
            for j in 0..n_m {
                acc.outcome[j] += u.weight * u.arm(stratum_arm).y_m[j] as f64;
            }
        }
    }
    let mut total = 0.0;
    for (c, acc) in &by_c {
        if acc.draw_weight <= 0.0 || acc.stratum_weight <= 0.0 {
            return Err(Error::DegenerateStratum(format!(
                "C = {c:?} has no mass at A = {} or A = {}",
                a_draw, a_stratum
            )));
        }
        let inner: f64 = (0..n_m)
            .map(|j| acc.draw[j] / acc.draw_weight * acc.outcome[j] / acc.stratum_weight)
            .sum();
        total += acc.weight * inner;
    }
    Ok(total)
}
