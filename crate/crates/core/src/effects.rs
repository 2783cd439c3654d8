//! Effect measures on the difference scale, computed from the counterfactual joint.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::engine::{g_draw_mean, h_draw_mean, Arm, CounterfactualTable, DrawConditioning};
use crate::model::Level;
use crate::report::Report;
use crate::{Error, Result, EXACT_TOL};

/// `E[Y(a)] - E[Y(a*)]`.
pub fn total_effect(t: &CounterfactualTable) -> f64 {
    t.expect(|u| (u.arm(Arm::Active).y - u.arm(Arm::Star).y) as f64)
}

/// `E[Y(a, m)] - E[Y(a*, m)]`.
pub fn controlled_direct_effect(t: &CounterfactualTable, m: Level) -> Result<f64> {
    let j = mediator_index(t, m)?;
    Ok(t.expect(|u| (u.arm(Arm::Active).y_m[j] - u.arm(Arm::Star).y_m[j]) as f64))
}

fn mediator_index(t: &CounterfactualTable, m: Level) -> Result<usize> {
    t.m_support
        .iter()
        .position(|&x| x == m)
        .ok_or_else(|| Error::Domain(format!("mediator level {m} is outside the support {:?}", t.m_support)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NaturalEffects {
    pub nie: f64,
    pub nde: f64,
}

pub fn natural_effects(t: &CounterfactualTable) -> NaturalEffects {
    let aa = t.expect(|u| t.nested(u, Arm::Active, Arm::Active) as f64);
    let a_star = t.expect(|u| t.nested(u, Arm::Active, Arm::Star) as f64);
    let star_star = t.expect(|u| t.nested(u, Arm::Star, Arm::Star) as f64);
    NaturalEffects { nie: aa - a_star, nde: a_star - star_star }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomizedEffects {
    pub nie_r: f64,
    pub nde_r: f64,
    pub te_r: f64,
}

pub fn randomized_effects(t: &CounterfactualTable) -> Result<RandomizedEffects> {
    let (a_star, a) = (t.exposure.a_star, t.exposure.a);
    let cond = DrawConditioning::Covariates;
    let g_aa = g_draw_mean(t, a, a, cond)?;
    let g_a_star = g_draw_mean(t, a, a_star, cond)?;
    let g_star_star = g_draw_mean(t, a_star, a_star, cond)?;
    Ok(RandomizedEffects { nie_r: g_aa - g_a_star, nde_r: g_a_star - g_star_star, te_r: g_aa - g_star_star })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LConditionedEffects {
    /// Contrast of draws from `M(a') | C, L`.
    pub nie_r_l: f64,
    /// Contrast of draws from `M(a') | C, L(a')`.
    pub nie_r_la: f64,
}

pub fn l_conditioned_randomized_effects(t: &CounterfactualTable) -> Result<LConditionedEffects> {
    if !t.has_l() {
        return Err(Error::Domain("L-conditioned draws require an exposure-induced confounder".into()));
    }
    let (a_star, a) = (t.exposure.a_star, t.exposure.a);
    let contrast = |cond| -> Result<f64> { Ok(g_draw_mean(t, a, a, cond)? - g_draw_mean(t, a, a_star, cond)?) };
    Ok(LConditionedEffects {
        nie_r_l: contrast(DrawConditioning::CovariatesAndObservedL)?,
        nie_r_la: contrast(DrawConditioning::CovariatesAndCounterfactualL)?,
    })
}

/// Reference interaction component of the four-way decomposition:
/// `E[{Y(a,m') - Y(a,m) - Y(a*,m') + Y(a*,m)} 1{M(a*) = m'}]`, so that
/// `TE = CDE(m) + sum over m' of INT_ref(m, m') + NIE`. The `m' = m` term is zero.
pub fn reference_interaction(t: &CounterfactualTable, m: Level, m_prime: Level) -> Result<f64> {
    let (j, k) = (mediator_index(t, m)?, mediator_index(t, m_prime)?);
    Ok(t.expect(|u| {
        if u.arm(Arm::Star).m != m_prime {
            return 0.0;
        }
        let (ya, ys) = (&u.arm(Arm::Active).y_m, &u.arm(Arm::Star).y_m);
        (ya[k] - ya[j] - ys[k] + ys[j]) as f64
    }))
}

/// Marginal disparity contrast `E_C[E{Y(H(a)) | A=a, C} - E{Y(H(a*)) | A=a, C}]`.
pub fn h_contrast(t: &CounterfactualTable) -> Result<f64> {
    let (a_star, a) = (t.exposure.a_star, t.exposure.a);
    Ok(h_draw_mean(t, a, a)? - h_draw_mean(t, a, a_star)?)
}

/// Every effect measure of one model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectReport {
    pub te: f64,
    pub nde: f64,
    pub nie: f64,
    pub te_r: f64,
    pub nde_r: f64,
    pub nie_r: f64,
    pub cde: BTreeMap<Level, f64>,
    pub pe: BTreeMap<Level, f64>,
    /// Keyed by `(m, m')`; empty unless the mediator is binary.
    pub int_ref: BTreeMap<(Level, Level), f64>,
    pub nie_r_l: Option<f64>,
    pub nie_r_la: Option<f64>,
    /// `None` when some covariate stratum lacks one of the exposure levels.
    pub h_contrast: Option<f64>,
}

pub fn effect_report(t: &CounterfactualTable) -> Result<EffectReport> {
    let te = total_effect(t);
    let NaturalEffects { nie, nde } = natural_effects(t);
    let RandomizedEffects { nie_r, nde_r, te_r } = randomized_effects(t)?;
    let mut cde = BTreeMap::new();
    let mut pe = BTreeMap::new();
    for &m in &t.m_support {
        let c = controlled_direct_effect(t, m)?;
        cde.insert(m, c);
        pe.insert(m, te - c);
    }
    let mut int_ref = BTreeMap::new();
    for &m in &t.m_support {
        for &mp in t.m_support.iter().filter(|&&mp| mp != m) {
            int_ref.insert((m, mp), reference_interaction(t, m, mp)?);
        }
    }
    let (nie_r_l, nie_r_la) = match t.has_l() {
        true => {
            let l = l_conditioned_randomized_effects(t)?;
            (Some(l.nie_r_l), Some(l.nie_r_la))
        }
        false => (None, None),
    };
    let h = match h_contrast(t) {
        Ok(v) => Some(v),
        Err(Error::DegenerateStratum(_)) => None,
        Err(e) => return Err(e),
    };
    let report = EffectReport { te, nde, nie, te_r, nde_r, nie_r, cde, pe, int_ref, nie_r_l, nie_r_la, h_contrast: h };
    report.check()?;
    Ok(report)
}

impl EffectReport {
    fn check(&self) -> Result<()> {
        let fail = |what: &str, lhs: f64, rhs: f64| {
            Err(Error::Internal(format!("{what}: {lhs} != {rhs}")))
        };
        if (self.te - self.nie - self.nde).abs() > EXACT_TOL {
            return fail("TE = NIE + NDE", self.te, self.nie + self.nde);
        }
        if (self.te_r - self.nie_r - self.nde_r).abs() > EXACT_TOL {
            return fail("TE^R = NIE^R + NDE^R", self.te_r, self.nie_r + self.nde_r);
        }
        for (m, c) in &self.cde {
            if (self.pe[m] - (self.te - c)).abs() > EXACT_TOL {
                return fail("PE(m) = TE - CDE(m)", self.pe[m], self.te - c);
            }
        }
        for (m, c) in &self.cde {
            let int: f64 = self.int_ref.range((*m, Level::MIN)..=(*m, Level::MAX)).map(|(_, v)| v).sum();
            if (self.te - c - int - self.nie).abs() > EXACT_TOL {
                return fail("TE = CDE(m) + INT_ref(m) + NIE", self.te, c + int + self.nie);
            }
        }
        Ok(())
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new();
        r.num("TE", self.te).num("NDE", self.nde).num("NIE", self.nie);
        r.num("TE^R", self.te_r).num("NDE^R", self.nde_r).num("NIE^R", self.nie_r);
        for (m, v) in &self.cde {
            r.num(format!("CDE({m})"), *v);
        }
        for (m, v) in &self.pe {
            r.num(format!("PE({m})"), *v);
        }
        for ((m, mp), v) in &self.int_ref {
            r.num(format!("INT_ref({m},{mp})"), *v);
        }
        if let Some(v) = self.nie_r_l {
            r.num("NIE^R_L", v);
        }
        if let Some(v) = self.nie_r_la {
            r.num("NIE^R_La", v);
        }
        match self.h_contrast {
            Some(v) => r.num("H", v),
            None => r.text("H", "undefined"),
        };
        r
    }
}
