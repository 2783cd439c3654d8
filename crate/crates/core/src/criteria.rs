//! The indirect-effect measure criteria: per-unit checks of the sharp null,
//! the sharper null and mediational monotonicity, verdicts for effect values,
//! closed-form theorem reproductions and parameter searches for refutations.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::effects::{effect_report, l_conditioned_randomized_effects, randomized_effects, EffectReport};
use crate::engine::{Arm, CounterfactualModel, CounterfactualTable, UnitRecord};
use crate::identify::{psi_nie, psi_nie_r_l, psi_nie_rl, psi_pe};
use crate::model::{
    additive_outcome_scm, pe_counterexample, separable_scm, thm1_counterexample, thm2_counterexample,
    thm3_counterexample, ExposureLevels, Level,
};
use crate::random::{
    random_additive_params, random_always_affects_scm, random_fig1_scm, random_fig2_scm,
    random_instrument_like_scm, random_separable_params,
};
use crate::report::Report;
use crate::{Error, Result, EXACT_TOL, NULL_TOL};

/// Direction shared by every unit's contrast `Y{a', M(a)} - Y{a', M(a*)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Monotonicity {
    /// Version (a): every contrast is at most zero.
    Nonincreasing,
    /// Version (b): every contrast is at least zero.
    Nondecreasing,
    /// Every contrast is zero.
    Both,
    /// Contrasts of both signs occur for some arm.
    Neither,
    /// Each arm is monotone, but in opposite directions.
    Mixed,
}

impl Monotonicity {
    fn of_signs(has_pos: bool, has_neg: bool) -> Self {
        match (has_pos, has_neg) {
            (false, false) => Monotonicity::Both,
            (true, false) => Monotonicity::Nondecreasing,
            (false, true) => Monotonicity::Nonincreasing,
            (true, true) => Monotonicity::Neither,
        }
    }

    fn combine(self, other: Self) -> Self {
        use Monotonicity::*;
        match (self, other) {
            (Neither, _) | (_, Neither) => Neither,
            (Both, x) | (x, Both) => x,
            (x, y) if x == y => x,
            _ => Mixed,
        }
    }

    /// True when one of the two versions of mediational monotonicity holds.
    pub fn holds(self) -> bool {
        matches!(self, Monotonicity::Nonincreasing | Monotonicity::Nondecreasing | Monotonicity::Both)
    }
}

impl fmt::Display for Monotonicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Monotonicity::Nonincreasing => "nonincreasing",
            Monotonicity::Nondecreasing => "nondecreasing",
            Monotonicity::Both => "both",
            Monotonicity::Neither => "neither",
            Monotonicity::Mixed => "mixed",
        })
    }
}

/// A unit violating one of the null or monotonicity properties.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub property: String,
    pub record: UnitRecord,
}

impl Witness {
    pub fn describe(&self, t_m_support: &[Level], exposure: ExposureLevels) -> String {
        let u = &self.record;
        let mut s = format!("weight={:.6}", u.weight);
        if !u.c.is_empty() {
            s.push_str(&format!(" C={:?}", u.c));
        }
        for arm in Arm::BOTH {
            let v = u.arm(arm);
            let a = arm.level(exposure);
            s.push_str(&format!(" M({a})={}", v.m));
            for (m, y) in t_m_support.iter().zip(&v.y_m) {
                s.push_str(&format!(" Y({a},{m})={y}"));
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullStatus {
    pub sharp_null: bool,
    pub sharper_null: bool,
    pub monotonicity: Monotonicity,
    /// Direction for `a' = a*` and `a' = a`.
    pub per_arm: [Monotonicity; 2],
    pub witnesses: Vec<Witness>,
    /// Whenever some unit's mediator responds to exposure and some unit's
    /// outcome responds to the mediator, some unit has a nonzero indirect contrast.
    pub overlap_condition: bool,
}

fn contrast(t: &CounterfactualTable, u: &UnitRecord, outer: Arm) -> Level {
    t.nested(u, outer, Arm::Active) - t.nested(u, outer, Arm::Star)
}

fn outcome_responds_to_mediator(u: &UnitRecord, arm: Arm) -> bool {
    let y = &u.arm(arm).y_m;
    y.iter().any(|v| *v != y[0])
}

pub fn null_status(t: &CounterfactualTable) -> NullStatus {
    let units: Vec<&UnitRecord> = t.units.iter().filter(|u| u.weight > 0.0).collect();
    let mut witnesses = Vec::new();
    let mut witness = |property: &str, u: &UnitRecord| {
        witnesses.push(Witness { property: property.into(), record: u.clone() });
    };

    let not_sharp = units.iter().find(|u| Arm::BOTH.iter().any(|&arm| contrast(t, u, arm) != 0));
    if let Some(u) = not_sharp {
        witness("sharp_null", u);
    }
    let mediator_moves = |u: &UnitRecord| u.arm(Arm::Active).m != u.arm(Arm::Star).m;
    let not_sharper = units
        .iter()
        .find(|u| mediator_moves(u) && Arm::BOTH.iter().any(|&arm| outcome_responds_to_mediator(u, arm)));
    if let Some(u) = not_sharper {
        witness("sharper_null", u);
    }

    let mut per_arm = [Monotonicity::Both; 2];
    for arm in Arm::BOTH {
        let up = units.iter().find(|u| contrast(t, u, arm) > 0);
        let down = units.iter().find(|u| contrast(t, u, arm) < 0);
        per_arm[arm.idx()] = Monotonicity::of_signs(up.is_some(), down.is_some());
        if let (Some(up), Some(down)) = (up, down) {
            witness(&format!("monotonicity({}) increasing", arm.level(t.exposure)), up);
            witness(&format!("monotonicity({}) decreasing", arm.level(t.exposure)), down);
        }
    }

    let some_mediator_moves = units.iter().any(|u| mediator_moves(u));
    let some_outcome_responds = units.iter().any(|u| outcome_responds_to_mediator(u, Arm::Active));
    let some_indirect = units.iter().any(|u| contrast(t, u, Arm::Active) != 0);

    NullStatus {
        sharp_null: not_sharp.is_none(),
        sharper_null: not_sharper.is_none(),
        monotonicity: per_arm[0].combine(per_arm[1]),
        per_arm,
        witnesses,
        overlap_condition: !(some_mediator_moves && some_outcome_responds) || some_indirect,
    }
}

impl NullStatus {
    pub fn to_report(&self, t: &CounterfactualTable) -> Report {
        let mut r = Report::new();
        r.flag("sharp_null", self.sharp_null).flag("sharper_null", self.sharper_null);
        r.text("monotonicity", self.monotonicity.to_string());
        for arm in Arm::BOTH {
            r.text(format!("monotonicity({})", arm.level(t.exposure)), self.per_arm[arm.idx()].to_string());
        }
        r.flag("overlap_condition", self.overlap_condition);
        for w in &self.witnesses {
            r.text(format!("witness.{}", w.property), w.describe(&t.m_support, t.exposure));
        }
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Criterion {
    SharpNull,
    SharperNull,
    Monotonicity,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [Criterion::SharpNull, Criterion::SharperNull, Criterion::Monotonicity];
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::SharpNull => "sharp-null",
            Criterion::SharperNull => "sharper-null",
            Criterion::Monotonicity => "monotonicity",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionVerdict {
    pub effect_name: String,
    pub effect_value: f64,
    pub criterion: Criterion,
    /// Whether the criterion's premise holds for the model.
    pub premise_holds: bool,
    /// The value is consistent with the criterion (vacuously so if the premise fails).
    pub satisfied_here: bool,
    /// The premise holds and the value violates the criterion.
    pub refutes_criterion: bool,
}

/// Verdicts for one effect value under each criterion.
pub fn verdicts_for(status: &NullStatus, name: &str, value: f64) -> Vec<CriterionVerdict> {
    Criterion::ALL
        .into_iter()
        .map(|criterion| {
            let (premise_holds, satisfied) = match criterion {
                Criterion::SharpNull => (status.sharp_null, value.abs() <= NULL_TOL),
                Criterion::SharperNull => (status.sharper_null, value.abs() <= NULL_TOL),
                Criterion::Monotonicity => {
                    let ok = match status.monotonicity {
                        Monotonicity::Nonincreasing => value <= NULL_TOL,
                        Monotonicity::Nondecreasing => value >= -NULL_TOL,
                        Monotonicity::Both => value.abs() <= NULL_TOL,
                        Monotonicity::Neither | Monotonicity::Mixed => true,
                    };
                    (status.monotonicity.holds(), ok)
                }
            };
            let satisfied_here = !premise_holds || satisfied;
            CriterionVerdict {
                effect_name: name.into(),
                effect_value: value,
                criterion,
                premise_holds,
                satisfied_here,
                refutes_criterion: !satisfied_here,
            }
        })
        .collect()
}

/// Verdicts for every indirect effect measure of a report.
pub fn criterion_verdicts(status: &NullStatus, report: &EffectReport) -> Vec<CriterionVerdict> {
    let mut out = verdicts_for(status, "NIE", report.nie);
    out.extend(verdicts_for(status, "NIE^R", report.nie_r));
    for (m, v) in &report.pe {
        out.extend(verdicts_for(status, &format!("PE({m})"), *v));
    }
    for (name, v) in [("NIE^R_L", report.nie_r_l), ("NIE^R_La", report.nie_r_la), ("H", report.h_contrast)] {
        if let Some(v) = v {
            out.extend(verdicts_for(status, name, v));
        }
    }
    out
}

pub fn verdicts_report(verdicts: &[CriterionVerdict]) -> Report {
    let mut r = Report::new();
    for v in verdicts {
        let state = if v.refutes_criterion {
            "refutes"
        } else if v.premise_holds {
            "satisfied"
        } else {
            "premise fails"
        };
        r.text(format!("{} [{}]", v.effect_name, v.criterion), state);
    }
    r
}

/// `E{Y(a,m') - Y(a,m'') - Y(a*,m') + Y(a*,m'') | M(a*), C} = 0` on every
/// positive-mass stratum and for every pair of mediator levels.
pub fn no_interaction_check(t: &CounterfactualTable) -> bool {
    use std::collections::BTreeMap;
    let n = t.m_support.len();
    let mut strata: BTreeMap<(Level, &[Level]), (f64, Vec<f64>)> = BTreeMap::new();
    for u in t.units.iter().filter(|u| u.weight > 0.0) {
        let entry = strata.entry((u.arm(Arm::Star).m, &u.c)).or_insert_with(|| (0.0, vec![0.0; n * n]));
        entry.0 += u.weight;
        let (ya, ys) = (&u.arm(Arm::Active).y_m, &u.arm(Arm::Star).y_m);
        for j in 0..n {
            for k in 0..n {
                entry.1[j * n + k] += u.weight * (ya[j] - ya[k] - ys[j] + ys[k]) as f64;
            }
        }
    }
    strata.values().all(|(w, sums)| sums.iter().all(|s| (s / w).abs() <= NULL_TOL))
}

/// Every unit's outcome changes with the mediator under at least one exposure level.
pub fn m_always_affects_y_check(t: &CounterfactualTable) -> bool {
    let n = t.m_support.len();
    t.units.iter().filter(|u| u.weight > 0.0).all(|u| {
        let (ya, ys) = (&u.arm(Arm::Active).y_m, &u.arm(Arm::Star).y_m);
        (0..n).all(|j| (0..n).all(|k| j == k || ya[j] != ya[k] || ys[j] != ys[k]))
    })
}

/// A counterexample from the proofs, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TheoremCase {
    /// Sharper null with a nonzero randomized interventional indirect effect.
    T1 { pi: f64, beta: f64 },
    /// Overlap and monotonicity with a possibly negative randomized effect.
    T2 { pi0: f64, pi1: f64, pi2: f64, beta: f64 },
    /// Explicit joint without cross-world independence.
    T3 { pi: f64, betas: [f64; 4], gamma: f64 },
    /// The effect of draws from `M(a') | C, L` on the first model.
    S1 { pi: f64, beta: f64 },
    /// Portion eliminated under a sharp null.
    Pe { p: f64, m: Level },
}

impl TheoremCase {
    pub fn id(&self) -> &'static str {
        match self {
            TheoremCase::T1 { .. } => "T1",
            TheoremCase::T2 { .. } => "T2",
            TheoremCase::T3 { .. } => "T3",
            TheoremCase::S1 { .. } => "S1",
            TheoremCase::Pe { .. } => "PE",
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            TheoremCase::T1 { pi, beta } | TheoremCase::S1 { pi, beta } => vec![("pi", pi), ("beta", beta)],
            TheoremCase::T2 { pi0, pi1, pi2, beta } => vec![("pi0", pi0), ("pi1", pi1), ("pi2", pi2), ("beta", beta)],
            TheoremCase::T3 { pi, betas, gamma } => vec![
                ("pi", pi),
                ("beta1", betas[0]),
                ("beta2", betas[1]),
                ("beta3", betas[2]),
                ("beta4", betas[3]),
                ("gamma", gamma),
            ],
            TheoremCase::Pe { p, m } => vec![("p", p), ("m", m as f64)],
        }
    }

    pub fn estimand(&self) -> String {
        match self {
            TheoremCase::S1 { .. } => "NIE^R_L".into(),
            TheoremCase::Pe { m, .. } => format!("PE({m})"),
            _ => "NIE^R".into(),
        }
    }

    pub fn closed_form(&self) -> f64 {
        match *self {
            TheoremCase::T1 { pi, beta } => pi * (1.0 - pi) * (2.0 * beta - 1.0),
            TheoremCase::T2 { pi1, pi2, beta, .. } => (1.0 - pi1) * (pi1 * (2.0 * beta - 1.0) + pi2),
            TheoremCase::T3 { pi, betas: [b1, b2, b3, b4], .. } => ((1.0 - pi) * b4 - pi * b1) * (b3 - b2),
            TheoremCase::S1 { beta, .. } => beta - 0.5,
            TheoremCase::Pe { p, m } => p - m as f64,
        }
    }

    /// Some probability parameter lies within `1e-6` of 0 or 1.
    pub fn near_boundary(&self) -> bool {
        let probs = self.params().into_iter().filter(|(n, _)| *n != "m");
        probs.map(|(_, x)| x).any(|x| x < 1e-6 || x > 1.0 - 1e-6)
    }

    pub fn tolerance(&self) -> f64 {
        if self.near_boundary() {
            NULL_TOL
        } else {
            EXACT_TOL
        }
    }

    pub fn model(&self) -> Result<CounterfactualTable> {
        match *self {
            TheoremCase::T1 { pi, beta } | TheoremCase::S1 { pi, beta } => thm1_counterexample(pi, beta)?.counterfactuals(),
            TheoremCase::T2 { pi0, pi1, pi2, beta } => thm2_counterexample(pi0, pi1, pi2, beta)?.counterfactuals(),
            TheoremCase::T3 { pi, betas, gamma } => thm3_counterexample(pi, betas, gamma)?.counterfactuals(),
            TheoremCase::Pe { p, m } => {
                if m != 0 && m != 1 {
                    return Err(Error::Domain(format!("mediator level {m} is outside the support [0, 1]")));
                }
                pe_counterexample(p)?.counterfactuals()
            }
        }
    }

    /// The status claims made by the proof, as (description, holds).
    fn claims(&self, s: &NullStatus) -> Vec<(&'static str, bool)> {
        match self {
            TheoremCase::T1 { .. } | TheoremCase::S1 { .. } | TheoremCase::T3 { .. } => {
                vec![("sharper null holds", s.sharper_null), ("sharp null holds", s.sharp_null)]
            }
            TheoremCase::T2 { .. } => vec![(
                "mediational monotonicity (b) holds",
                matches!(s.monotonicity, Monotonicity::Nondecreasing | Monotonicity::Both),
            )],
            TheoremCase::Pe { .. } => vec![("sharp null holds", s.sharp_null)],
        }
    }

    /// Cases across a grid of `steps` points per parameter in `[0.05, 0.95]`.
    pub fn grid(id: &str, steps: usize) -> Result<Vec<TheoremCase>> {
        let axis = linspace(0.05, 0.95, steps);
        let mut out = Vec::new();
        match id.to_ascii_uppercase().as_str() {
            "T1" | "S1" => {
                for &pi in &axis {
                    for &beta in &axis {
                        out.push(if id.eq_ignore_ascii_case("T1") {
                            TheoremCase::T1 { pi, beta }
                        } else {
                            TheoremCase::S1 { pi, beta }
                        });
                    }
                }
            }
            "T2" => {
                for &pi1 in &axis {
                    for &pi2 in &axis {
                        if pi1 + pi2 <= 1.0 + EXACT_TOL {
                            for &beta in &axis {
                                out.push(TheoremCase::T2 { pi0: simplex_rest(&[pi1, pi2]), pi1, pi2, beta });
                            }
                        }
                    }
                }
            }
            "T3" => {
                let coarse = linspace(0.05, 0.95, steps.min(6));
                for &pi in &axis {
                    for &b1 in &coarse {
                        for &b2 in &coarse {
                            for &b3 in &coarse {
                                if b1 + b2 + b3 <= 1.0 + EXACT_TOL {
                                    out.push(TheoremCase::T3 { pi, betas: [b1, b2, b3, simplex_rest(&[b1, b2, b3])], gamma: 0.5 });
                                }
                            }
                        }
                    }
                }
            }
            "PE" => {
                for &p in &axis {
                    for m in [0, 1] {
                        out.push(TheoremCase::Pe { p, m });
                    }
                }
            }
            other => return Err(Error::Domain(format!("unknown theorem id {other}"))),
        }
        Ok(out)
    }
}

/// `1 - sum(xs)`, with rounding below zero clamped.
fn simplex_rest(xs: &[f64]) -> f64 {
    (1.0 - xs.iter().sum::<f64>()).max(0.0)
}

pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![(lo + hi) / 2.0],
        n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Closed form, enumeration and identification of one theorem's effect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reproduction {
    pub case: TheoremCase,
    pub estimand: String,
    pub closed_form: f64,
    pub enumerated: f64,
    /// The identification functional on the observational law, if its cells are positive.
    pub identified: Option<f64>,
    pub identified_note: Option<String>,
    pub difference: f64,
    pub tolerance: f64,
    pub status: NullStatus,
    pub verdicts: Vec<CriterionVerdict>,
}

/// Reproduces a case at its default tolerance.
pub fn reproduce(case: &TheoremCase) -> Result<Reproduction> {
    reproduce_with_tolerance(case, case.tolerance())
}

pub fn reproduce_with_tolerance(case: &TheoremCase, tolerance: f64) -> Result<Reproduction> {
    let t = case.model()?;
    let law = t.observational_law();
    let (enumerated, identified) = match case {
        TheoremCase::T1 { .. } | TheoremCase::T2 { .. } => (randomized_effects(&t)?.nie_r, psi_nie_r_l(&law)),
        TheoremCase::T3 { .. } => (randomized_effects(&t)?.nie_r, psi_nie(&law)),
        TheoremCase::S1 { .. } => (l_conditioned_randomized_effects(&t)?.nie_r_l, psi_nie_rl(&law)),
        TheoremCase::Pe { m, .. } => (effect_report(&t)?.pe[m], psi_pe(&law, *m)),
    };
    let (identified, identified_note) = match identified {
        Ok(v) => (Some(v), None),
        Err(Error::DegenerateStratum(s)) => (None, Some(format!("positivity fails: {s}"))),
        Err(e) => return Err(e),
    };
    let closed_form = case.closed_form();
    let difference = (closed_form - enumerated).abs();
    if difference > tolerance {
        return Err(Error::Reproduction(format!(
            "{}: closed form {closed_form} and enumeration {enumerated} differ by {difference}",
            case.id()
        )));
    }
    if let Some(v) = identified {
        if (v - enumerated).abs() > tolerance {
            return Err(Error::Reproduction(format!(
                "{}: identification {v} and enumeration {enumerated} differ",
                case.id()
            )));
        }
    }
    let status = null_status(&t);
    if let Some((claim, _)) = case.claims(&status).into_iter().find(|(_, ok)| !ok) {
        return Err(Error::Reproduction(format!("{}: expected {claim}", case.id())));
    }
    let estimand = case.estimand();
    let verdicts = verdicts_for(&status, &estimand, enumerated);
    Ok(Reproduction { case: case.clone(), estimand, closed_form, enumerated, identified, identified_note, difference, tolerance, status, verdicts })
}

impl Reproduction {
    pub fn to_report(&self) -> Report {
        let mut r = Report::new();
        r.text("theorem", self.case.id()).text("estimand", self.estimand.clone());
        for (name, v) in self.case.params() {
            r.num(name, v);
        }
        r.num("closed_form", self.closed_form).num("enumerated", self.enumerated);
        match (self.identified, &self.identified_note) {
            (Some(v), _) => r.num("identified", v),
            (None, note) => r.text("identified", note.clone().unwrap_or_else(|| "undefined".into())),
        };
        r.num("difference", self.difference).num("tolerance", self.tolerance);
        r.flag("sharp_null", self.status.sharp_null).flag("sharper_null", self.status.sharper_null);
        r.text("monotonicity", self.status.monotonicity.to_string());
        r.flag("overlap_condition", self.status.overlap_condition);
        for v in &self.verdicts {
            r.flag(format!("refutes {}", v.criterion), v.refutes_criterion);
        }
        r
    }
}

/// Which indirect effect measure to judge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EffectSelector {
    Nie,
    NieR,
    Pe(Level),
    NieRL,
    NieRLa,
    H,
}

impl EffectSelector {
    pub fn name(&self) -> String {
        match self {
            EffectSelector::Nie => "NIE".into(),
            EffectSelector::NieR => "NIE^R".into(),
            EffectSelector::Pe(m) => format!("PE({m})"),
            EffectSelector::NieRL => "NIE^R_L".into(),
            EffectSelector::NieRLa => "NIE^R_La".into(),
            EffectSelector::H => "H".into(),
        }
    }

    pub fn value(&self, r: &EffectReport) -> Option<f64> {
        match self {
            EffectSelector::Nie => Some(r.nie),
            EffectSelector::NieR => Some(r.nie_r),
            EffectSelector::Pe(m) => r.pe.get(m).copied(),
            EffectSelector::NieRL => r.nie_r_l,
            EffectSelector::NieRLa => r.nie_r_la,
            EffectSelector::H => r.h_contrast,
        }
    }
}

impl FromStr for EffectSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('^', "_");
        if let Some(m) = norm.strip_prefix("pe(").and_then(|r| r.strip_suffix(')')) {
            let m = m.trim().parse().map_err(|_| Error::Parse(format!("bad mediator level in {s}")))?;
            return Ok(EffectSelector::Pe(m));
        }
        match norm.as_str() {
            "nie" => Ok(EffectSelector::Nie),
            "nie_r" => Ok(EffectSelector::NieR),
            "nie_r_l" => Ok(EffectSelector::NieRL),
            "nie_r_la" => Ok(EffectSelector::NieRLa),
            "h" => Ok(EffectSelector::H),
            _ => Err(Error::Parse(format!("unknown effect {s}"))),
        }
    }
}

/// Parameterized model families for searches and sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    /// Parameters `[pi, beta]`.
    Theorem1,
    /// Parameters `[pi1, pi2, beta]`, with `pi0 = 1 - pi1 - pi2`.
    Theorem2,
    /// Parameters `[pi, beta1, beta2, beta3, gamma]`, with `beta4` completing the simplex.
    Theorem3,
    /// Parameter `[p]`.
    PortionEliminated,
    /// Seeded random families; the single parameter is the seed.
    RandomFig1,
    RandomFig2,
    Additive,
    AdditiveConfounded,
    Separable,
    AlwaysAffects,
    InstrumentLike,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Family::Theorem1,
        Family::Theorem2,
        Family::Theorem3,
        Family::PortionEliminated,
        Family::RandomFig1,
        Family::RandomFig2,
        Family::Additive,
        Family::AdditiveConfounded,
        Family::Separable,
        Family::AlwaysAffects,
        Family::InstrumentLike,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Theorem1 => "t1",
            Family::Theorem2 => "t2",
            Family::Theorem3 => "t3",
            Family::PortionEliminated => "pe",
            Family::RandomFig1 => "random-fig1",
            Family::RandomFig2 => "random-fig2",
            Family::Additive => "additive",
            Family::AdditiveConfounded => "additive-l",
            Family::Separable => "separable",
            Family::AlwaysAffects => "always-affects",
            Family::InstrumentLike => "instrument-like",
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            Family::Theorem1 => &["pi", "beta"],
            Family::Theorem2 => &["pi1", "pi2", "beta"],
            Family::Theorem3 => &["pi", "beta1", "beta2", "beta3", "gamma"],
            Family::PortionEliminated => &["p"],
            _ => &["seed"],
        }
    }

    pub fn is_seeded(&self) -> bool {
        self.param_names() == ["seed"]
    }

    pub fn instance(&self, p: &[f64]) -> Result<CounterfactualTable> {
        let want = self.param_names().len();
        if p.len() != want {
            return Err(Error::Domain(format!("family {} takes {want} parameters, got {}", self.name(), p.len())));
        }
        let seed = p[0] as u64;
        match self {
            Family::Theorem1 => thm1_counterexample(p[0], p[1])?.counterfactuals(),
            Family::Theorem2 => thm2_counterexample(simplex_rest(&p[..2]), p[0], p[1], p[2])?.counterfactuals(),
            Family::Theorem3 => {
                thm3_counterexample(p[0], [p[1], p[2], p[3], simplex_rest(&p[1..4])], p[4])?.counterfactuals()
            }
            Family::PortionEliminated => pe_counterexample(p[0])?.counterfactuals(),
            Family::RandomFig1 => random_fig1_scm(seed)?.counterfactuals(),
            Family::RandomFig2 => random_fig2_scm(seed)?.counterfactuals(),
            Family::Additive => additive_outcome_scm(&random_additive_params(seed, false))?.counterfactuals(),
            Family::AdditiveConfounded => additive_outcome_scm(&random_additive_params(seed, true))?.counterfactuals(),
            Family::Separable => separable_scm(&random_separable_params(seed))?.counterfactuals(),
            Family::AlwaysAffects => random_always_affects_scm(seed)?.counterfactuals(),
            Family::InstrumentLike => random_instrument_like_scm(seed)?.counterfactuals(),
        }
    }

    /// Grid points with `steps` values per parameter in `[0.05, 0.95]`
    /// (inside the simplex where required), or seeds `0..steps`.
    pub fn grid(&self, steps: usize) -> Vec<Vec<f64>> {
        if self.is_seeded() {
            return (0..steps).map(|s| vec![s as f64]).collect();
        }
        let axis = linspace(0.05, 0.95, steps);
        let mut points: Vec<Vec<f64>> = vec![vec![]];
        for _ in self.param_names() {
            points = points
                .into_iter()
                .flat_map(|p| axis.iter().map(move |&x| [p.as_slice(), &[x]].concat()))
                .collect();
        }
        points.retain(|p| match self {
            Family::Theorem2 => p[0] + p[1] <= 1.0 + EXACT_TOL,
            Family::Theorem3 => p[1] + p[2] + p[3] <= 1.0 + EXACT_TOL,
            _ => true,
        });
        points
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown family {s}")))
    }
}

/// One parameter point at which the selected effect refutes some criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refutation {
    pub family: Family,
    pub point: Vec<f64>,
    pub effect_name: String,
    pub effect_value: f64,
    pub refuted: Vec<Criterion>,
}

/// Evaluates a family at every point; points outside the family's domain
/// or where the effect is undefined are skipped.
pub fn search_violations(family: Family, points: &[Vec<f64>], selector: EffectSelector) -> Vec<Refutation> {
    let mut found: Vec<Refutation> = points
        .par_iter()
        .filter_map(|point| {
            let t = family.instance(point).ok()?;
            let report = effect_report(&t).ok()?;
            let value = selector.value(&report)?;
            let status = null_status(&t);
            let refuted: Vec<Criterion> = verdicts_for(&status, &selector.name(), value)
                .into_iter()
                .filter(|v| v.refutes_criterion)
                .map(|v| v.criterion)
                .collect();
            (!refuted.is_empty()).then(|| Refutation {
                family,
                point: point.clone(),
                effect_name: selector.name(),
                effect_value: value,
                refuted,
            })
        })
        .collect();
    found.sort_by(|a, b| b.effect_value.abs().total_cmp(&a.effect_value.abs()));
    found
}

/// Effect values and statuses at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub point: Vec<f64>,
    pub report: EffectReport,
    pub status: NullStatus,
}

pub fn sweep(family: Family, points: &[Vec<f64>]) -> Vec<Result<SweepRow>> {
    points
        .par_iter()
        .map(|point| {
            let t = family.instance(point)?;
            Ok(SweepRow { point: point.clone(), report: effect_report(&t)?, status: null_status(&t) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(case: TheoremCase) -> CounterfactualTable {
        case.model().unwrap()
    }

    #[test]
    fn thm1_statuses_and_refutation() {
        let t = table(TheoremCase::T1 { pi: 0.5, beta: 0.9 });
        let s = null_status(&t);
        assert!(s.sharp_null && s.sharper_null);
        assert_eq!(s.monotonicity, Monotonicity::Both);
        assert!(s.witnesses.is_empty());
        let r = effect_report(&t).unwrap();
        let v = criterion_verdicts(&s, &r);
        let nie_r_sharper = v.iter().find(|v| v.effect_name == "NIE^R" && v.criterion == Criterion::SharperNull).unwrap();
        assert!(nie_r_sharper.refutes_criterion);
        assert!(v.iter().filter(|v| v.effect_name == "NIE").all(|v| !v.refutes_criterion));
    }

    #[test]
    fn thm2_monotonicity_refutation() {
        let t = table(TheoremCase::T2 { pi0: 0.4 + 1e-6 - 1e-6, pi1: 0.5 - 1e-6, pi2: 0.1 + 1e-6, beta: 1e-6 });
        let s = null_status(&t);
        assert!(!s.sharp_null);
        assert_eq!(s.monotonicity, Monotonicity::Nondecreasing);
        assert_eq!(s.per_arm, [Monotonicity::Nondecreasing; 2]);
        let r = effect_report(&t).unwrap();
        assert!(r.nie_r < 0.0);
        let v = verdicts_for(&s, "NIE^R", r.nie_r);
        assert!(v.iter().any(|v| v.criterion == Criterion::Monotonicity && v.refutes_criterion));
        assert!(s.overlap_condition);
    }

    #[test]
    fn pe_statuses() {
        let t = table(TheoremCase::Pe { p: 0.4, m: 0 });
        let s = null_status(&t);
        assert!(s.sharp_null && s.sharper_null);
        assert!(!no_interaction_check(&t));
        // Y(a, m) = m varies with m for every unit, so the disjunction holds
        assert!(m_always_affects_y_check(&t));
        let r = effect_report(&t).unwrap();
        let v = verdicts_for(&s, "PE(0)", r.pe[&0]);
        assert!(v.iter().all(|v| v.refutes_criterion));
    }

    #[test]
    fn reproductions_agree() {
        let cases = [
            TheoremCase::T1 { pi: 0.5, beta: 0.9 },
            TheoremCase::T1 { pi: 0.5, beta: 1.0 - 1e-9 },
            TheoremCase::T2 { pi0: 0.2, pi1: 0.3, pi2: 0.5, beta: 0.9 },
            TheoremCase::T3 { pi: 1e-9, betas: [0.0, 1e-9, 0.5, 0.5 - 1e-9], gamma: 0.5 },
            TheoremCase::S1 { pi: 0.5, beta: 0.9 },
            TheoremCase::Pe { p: 0.5, m: 1 },
        ];
        for case in cases {
            let rep = reproduce(&case).unwrap();
            assert!(rep.difference <= rep.tolerance, "{case:?}");
        }
        let t1 = reproduce(&TheoremCase::T1 { pi: 0.5, beta: 0.9 }).unwrap();
        assert!((t1.closed_form - 0.2).abs() < 1e-12 && t1.status.sharp_null);
        assert_eq!(t1.to_report().get("sharp_null"), Some("TRUE"));
        let s1 = reproduce(&TheoremCase::S1 { pi: 0.5, beta: 0.9 }).unwrap();
        assert!((s1.enumerated - 0.4).abs() < 1e-12);
        let t3 = reproduce(&TheoremCase::T3 { pi: 1e-9, betas: [0.0, 1e-9, 0.5, 0.5 - 1e-9], gamma: 0.5 }).unwrap();
        assert!((t3.enumerated - 0.25).abs() < 1e-6);
        let t2 = reproduce(&TheoremCase::T2 { pi0: 0.2, pi1: 0.3, pi2: 0.5, beta: 0.9 }).unwrap();
        assert!(t2.identified.is_none() && t2.identified_note.is_some());
    }

    #[test]
    fn reproduction_grids_never_fail() {
        for id in ["T1", "T2", "T3", "S1", "PE"] {
            for case in TheoremCase::grid(id, 7).unwrap() {
                reproduce(&case).unwrap();
            }
        }
    }

    #[test]
    fn thm1_search_finds_refutations_and_nie_none() {
        let points = Family::Theorem1.grid(9);
        let found = search_violations(Family::Theorem1, &points, EffectSelector::NieR);
        assert!(!found.is_empty());
        assert!(found.windows(2).all(|w| w[0].effect_value.abs() >= w[1].effect_value.abs()));
        let half: Vec<Vec<f64>> = points.iter().filter(|p| p[1] == 0.5).cloned().collect();
        assert!(search_violations(Family::Theorem1, &half, EffectSelector::NieR).is_empty());
        for family in Family::ALL {
            assert!(search_violations(family, &family.grid(4), EffectSelector::Nie).is_empty(), "{family}");
        }
    }

    #[test]
    fn selectors_parse() {
        assert_eq!("NIE^R".parse::<EffectSelector>().unwrap(), EffectSelector::NieR);
        assert_eq!("pe(1)".parse::<EffectSelector>().unwrap(), EffectSelector::Pe(1));
        assert_eq!("nie_r_La".parse::<EffectSelector>().unwrap(), EffectSelector::NieRLa);
        assert!("bogus".parse::<EffectSelector>().is_err());
        assert_eq!("t2".parse::<Family>().unwrap(), Family::Theorem2);
    }

    #[test]
    fn always_affects_and_no_interaction_families() {
        for seed in 0..20 {
            let t = Family::AlwaysAffects.instance(&[seed as f64]).unwrap();
            assert!(m_always_affects_y_check(&t));
            let t = Family::Additive.instance(&[seed as f64]).unwrap();
            assert!(no_interaction_check(&t));
        }
    }
}
