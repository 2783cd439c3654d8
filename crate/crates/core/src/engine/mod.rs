//! Exhaustive enumeration of the exogenous noise space.
//!
//! A [`CompiledScm`] evaluates structural tables in topological order. The
//! [`CounterfactualTable`] stores, for every positive-mass unit, the factual
//! values and every counterfactual needed downstream: `L(a')`, `M(a')`,
//! `Y(a')`, `Y(a', m)`, `M(a', l)` and `Y(a', l, m)` for both exposure arms.

mod draws;
mod law;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

pub use draws::{g_draw_mean, h_draw_mean, DrawConditioning};
pub use law::{Cell, ObservedLaw};

use crate::model::{
    validate, ExposureLevels, FfrcistgSpec, Level, Role, Scm, Shape,
};
use crate::{Error, Result};

/// Default cap on the number of noise configurations.
pub const DEFAULT_UNIT_CAP: u128 = 100_000_000;

/// One joint noise configuration; `noise[k]` is the level of `scm.noise[k]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Unit {
    pub noise: Vec<Level>,
    pub weight: f64,
}

/// Variables held fixed by an intervention.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Intervention {
    pub fixed: BTreeMap<String, Level>,
}

impl Intervention {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn set(mut self, var: impl Into<String>, level: Level) -> Self {
        self.fixed.insert(var.into(), level);
        self
    }
}

/// Values of every variable under an intervention.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct World {
    pub assignment: BTreeMap<String, Level>,
    pub regime: Intervention,
}

impl World {
    pub fn get(&self, var: &str) -> Option<Level> {
        self.assignment.get(var).copied()
    }
}

/// The two exposure arms: `Star` is `a_star`, `Active` is `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Arm {
    Star = 0,
    Active = 1,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::Star, Arm::Active];

    pub fn idx(self) -> usize {
        self as usize
    }

    pub fn level(self, el: ExposureLevels) -> Level {
        match self {
            Arm::Star => el.a_star,
            Arm::Active => el.a,
        }
    }

    pub fn of_level(level: Level, el: ExposureLevels) -> Result<Arm> {
        if level == el.a {
            Ok(Arm::Active)
        } else if level == el.a_star {
            Ok(Arm::Star)
        } else {
            Err(Error::Domain(format!("exposure level {level} is neither a_star nor a")))
        }
    }
}

/// A validated model with dense tables, ready for evaluation.
#[derive(Debug, Clone)]
pub struct CompiledScm {
    scm: Scm,
    shape: Shape,
    order: Vec<usize>,
    supports: Vec<Vec<Level>>,
    parents: Vec<Vec<usize>>,
    noise_of: Vec<usize>,
    noise_levels: Vec<Vec<(Level, f64)>>,
    /// `tables[v][(parent index mixed radix) * |noise| + noise index]` = value index.
    tables: Vec<Vec<usize>>,
    a: usize,
    l: Option<usize>,
    m: usize,
    y: usize,
    covariates: Vec<usize>,
}

fn position(support: &[Level], level: Level) -> Option<usize> {
    support.iter().position(|&v| v == level)
}

impl Scm {
    /// Validates and compiles the model.
    pub fn compile(&self) -> Result<CompiledScm> {
        CompiledScm::new(self.clone())
    }
}

impl CompiledScm {
    pub fn new(scm: Scm) -> Result<Self> {
        let report = validate(&scm);
        if !report.is_valid() {
            return Err(Error::InvalidModel(report));
        }
        let shape = scm.shape().expect("valid model has a shape");
        let order = crate::model::topological_order(&scm).expect("valid model is acyclic");
        let index: BTreeMap<&str, usize> =
            scm.variables.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
        let noise_index: BTreeMap<&str, usize> =
            scm.noise.iter().enumerate().map(|(i, n)| (n.name.as_str(), i)).collect();
        let supports: Vec<Vec<Level>> = scm.variables.iter().map(|v| v.support.clone()).collect();
        let noise_levels: Vec<Vec<(Level, f64)>> =
            scm.noise.iter().map(|n| n.pmf.iter().map(|(&l, &p)| (l, p)).collect()).collect();

        let n = scm.variables.len();
        let mut parents = vec![Vec::new(); n];
        let mut noise_of = vec![0; n];
        let mut tables = vec![Vec::new(); n];
        for t in &scm.tables {
            let v = index[t.variable.as_str()];
            let ps: Vec<usize> = t.parents.iter().map(|p| index[p.as_str()]).collect();
            let k = noise_index[t.noise.as_str()];
            let n_noise = noise_levels[k].len();
            let size: usize = ps.iter().map(|&p| supports[p].len()).product::<usize>() * n_noise;
            let mut dense = vec![usize::MAX; size];
            for row in &t.rows {
                let mut slot = 0;
                for (&p, &val) in ps.iter().zip(&row.parents) {
                    slot = slot * supports[p].len() + position(&supports[p], val).expect("validated");
                }
                let e = noise_levels[k].iter().position(|&(l, _)| l == row.noise).expect("validated");
                dense[slot * n_noise + e] = position(&supports[v], row.value).expect("validated");
            }
            parents[v] = ps;
            noise_of[v] = k;
            tables[v] = dense;
        }
        let role = |r: Role| scm.variables.iter().position(|v| v.role == r);
        let covariates = (0..n).filter(|&i| scm.variables[i].role == Role::Covariate).collect();
        Ok(Self {
            a: role(Role::Exposure).expect("validated"),
            l: role(Role::InducedConfounder),
            m: role(Role::Mediator).expect("validated"),
            y: role(Role::Outcome).expect("validated"),
            covariates,
            shape,
            order,
            supports,
            parents,
            noise_of,
            noise_levels,
            tables,
            scm,
        })
    }

    pub fn scm(&self) -> &Scm {
        &self.scm
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    fn var_index(&self, name: &str) -> Result<usize> {
        self.scm
            .variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::Domain(format!("unknown variable {name}")))
    }

    /// Number of noise configurations before zero-mass atoms are dropped.
    pub fn unit_space_size(&self) -> u128 {
        self.noise_levels.iter().map(|l| l.len() as u128).product()
    }

    /// All positive-mass units in lexicographic noise order.
    pub fn units(&self, cap: u128) -> Result<Vec<Unit>> {
        let size = self.unit_space_size();
        if size > cap {
            return Err(Error::SizeLimit { units: size, cap });
        }
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.noise_levels.len()];
        loop {
            let weight: f64 = idx.iter().zip(&self.noise_levels).map(|(&i, l)| l[i].1).product();
            if weight > 0.0 {
                let noise = idx.iter().zip(&self.noise_levels).map(|(&i, l)| l[i].0).collect();
                out.push(Unit { noise, weight });
            }
            let mut k = idx.len();
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < self.noise_levels[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    fn noise_indices(&self, unit: &Unit) -> Vec<usize> {
        unit.noise
            .iter()
            .zip(&self.noise_levels)
            .map(|(&lv, levels)| levels.iter().position(|&(l, _)| l == lv).expect("unit from this model"))
            .collect()
    }

    /// Evaluates all variables; `fixed[v]` overrides variable `v` with a value index.
    fn eval_idx(&self, noise: &[usize], fixed: &[Option<usize>]) -> Vec<usize> {
        let mut vals = vec![0usize; self.supports.len()];
        for &v in &self.order {
            vals[v] = match fixed[v] {
                Some(x) => x,
                None => {
                    let mut slot = 0;
                    for &p in &self.parents[v] {
                        slot = slot * self.supports[p].len() + vals[p];
                    }
                    let k = self.noise_of[v];
                    self.tables[v][slot * self.noise_levels[k].len() + noise[k]]
                }
            };
        }
        vals
    }

    pub fn evaluate(&self, unit: &Unit, iv: &Intervention) -> Result<World> {
        let mut fixed = vec![None; self.supports.len()];
        for (name, &level) in &iv.fixed {
            let v = self.var_index(name)?;
            let x = position(&self.supports[v], level)
                .ok_or_else(|| Error::Domain(format!("{name} = {level} is outside its support")))?;
            fixed[v] = Some(x);
        }
        let vals = self.eval_idx(&self.noise_indices(unit), &fixed);
        let assignment = self
            .scm
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), self.supports[i][vals[i]]))
            .collect();
        Ok(World { assignment, regime: iv.clone() })
    }

    /// `Y(a_outer, M(a_inner))` for one unit.
    pub fn nested_outcome(&self, unit: &Unit, a_outer: Level, a_inner: Level) -> Result<Level> {
        let a_name = &self.scm.variables[self.a].name;
        let m_name = &self.scm.variables[self.m].name;
        let y_name = &self.scm.variables[self.y].name;
        let inner = self.evaluate(unit, &Intervention::none().set(a_name, a_inner))?;
        let m = inner.get(m_name).expect("mediator present");
        let outer = self.evaluate(unit, &Intervention::none().set(a_name, a_outer).set(m_name, m))?;
        Ok(outer.get(y_name).expect("outcome present"))
    }

    /// An observed law over this model's variables with no mass.
    pub(crate) fn empty_law(&self) -> ObservedLaw {
        ObservedLaw {
            cells: BTreeMap::new(),
            covariate_names: self.covariates.iter().map(|&i| self.scm.variables[i].name.clone()).collect(),
            c_supports: self.covariates.iter().map(|&c| self.supports[c].clone()).collect(),
            a_support: self.supports[self.a].clone(),
            l_support: self.l.map(|l| self.supports[l].clone()),
            m_support: self.supports[self.m].clone(),
            y_support: self.supports[self.y].clone(),
            exposure: self.scm.exposure_levels,
        }
    }

    /// Noise probabilities in level order.
    pub(crate) fn noise_pmfs(&self) -> Vec<Vec<f64>> {
        self.noise_levels.iter().map(|l| l.iter().map(|&(_, p)| p).collect()).collect()
    }

    /// Factual variables for noise given by level indices.
    pub(crate) fn factual_cell(&self, noise: &[usize]) -> Cell {
        let vals = self.eval_idx(noise, &vec![None; self.supports.len()]);
        let lv = |v: usize| self.supports[v][vals[v]];
        Cell {
            c: self.covariates.iter().map(|&v| lv(v)).collect(),
            a: lv(self.a),
            l: self.l.map(lv),
            m: lv(self.m),
            y: lv(self.y),
        }
    }

    fn record(&self, unit: &Unit) -> UnitRecord {
        let noise = self.noise_indices(unit);
        let n = self.supports.len();
        let free = vec![None; n];
        let lv = |v: usize, vals: &[usize]| self.supports[v][vals[v]];
        let factual = self.eval_idx(&noise, &free);
        let el = self.scm.exposure_levels;
        let n_m = self.supports[self.m].len();
        let arm = |arm: Arm| -> ArmValues {
            let mut fixed = free.clone();
            fixed[self.a] = Some(position(&self.supports[self.a], arm.level(el)).expect("validated"));
            let world = self.eval_idx(&noise, &fixed);
            let y_m = (0..n_m)
                .map(|j| {
                    let mut f = fixed.clone();
                    f[self.m] = Some(j);
                    lv(self.y, &self.eval_idx(&noise, &f))
                })
                .collect();
            let (mut m_given_l, mut y_lm) = (Vec::new(), Vec::new());
            if let Some(l) = self.l {
                for li in 0..self.supports[l].len() {
                    let mut f = fixed.clone();
                    f[l] = Some(li);
                    m_given_l.push(lv(self.m, &self.eval_idx(&noise, &f)));
                    y_lm.push(
                        (0..n_m)
                            .map(|j| {
                                let mut g = f.clone();
                                g[self.m] = Some(j);
                                lv(self.y, &self.eval_idx(&noise, &g))
                            })
                            .collect(),
                    );
                }
            }
            ArmValues {
                l: self.l.map(|l| lv(l, &world)),
                m: lv(self.m, &world),
                y: lv(self.y, &world),
                y_m,
                m_given_l,
                y_lm,
            }
        };
        UnitRecord {
            weight: unit.weight,
            c: self.covariates.iter().map(|&c| lv(c, &factual)).collect(),
            a: lv(self.a, &factual),
            l: self.l.map(|l| lv(l, &factual)),
            m: lv(self.m, &factual),
            y: lv(self.y, &factual),
            arms: [arm(Arm::Star), arm(Arm::Active)],
            unit: Some(unit.clone()),
        }
    }
}

/// Counterfactual values under one exposure arm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmValues {
    pub l: Option<Level>,
    pub m: Level,
    /// `Y(a')`.
    pub y: Level,
    /// `Y(a', m_j)` for the `j`-th mediator level.
    pub y_m: Vec<Level>,
    /// `M(a', l_k)` for the `k`-th confounder level; empty without `L`.
    pub m_given_l: Vec<Level>,
    /// `Y(a', l_k, m_j)`; empty without `L`.
    pub y_lm: Vec<Vec<Level>>,
}

/// Factual and counterfactual values of one positive-mass unit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitRecord {
    pub weight: f64,
    pub c: Vec<Level>,
    pub a: Level,
    pub l: Option<Level>,
    pub m: Level,
    pub y: Level,
    pub arms: [ArmValues; 2],
    /// The noise configuration; absent for atoms of an explicit joint.
    pub unit: Option<Unit>,
}

impl UnitRecord {
    pub fn arm(&self, arm: Arm) -> &ArmValues {
        &self.arms[arm.idx()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    /// Structural equations with independent errors.
    Npsem,
    /// An explicit counterfactual joint.
    Ffrcistg,
}

/// The full counterfactual joint of a model, one record per unit.
#[derive(Debug, Clone, Serialize)]
pub struct CounterfactualTable {
    pub kind: ModelKind,
    pub shape: Shape,
    pub exposure: ExposureLevels,
    pub covariate_names: Vec<String>,
    pub c_supports: Vec<Vec<Level>>,
    pub a_support: Vec<Level>,
    pub l_support: Option<Vec<Level>>,
    pub m_support: Vec<Level>,
    pub y_support: Vec<Level>,
    pub units: Vec<UnitRecord>,
}

impl CounterfactualTable {
    pub fn m_index(&self, m: Level) -> usize {
        position(&self.m_support, m).expect("mediator level in support")
    }

    pub fn l_index(&self, l: Level) -> usize {
        position(self.l_support.as_deref().expect("model has L"), l).expect("confounder level in support")
    }

    pub fn has_l(&self) -> bool {
        self.l_support.is_some()
    }

    /// Weighted sum of `f` over units, in canonical unit order.
    pub fn expect<F: Fn(&UnitRecord) -> f64>(&self, f: F) -> f64 {
        self.units.iter().map(|u| u.weight * f(u)).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.units.iter().map(|u| u.weight).sum()
    }

    /// `Y(outer, M(inner))` for a unit.
    pub fn nested(&self, u: &UnitRecord, outer: Arm, inner: Arm) -> Level {
        u.arm(outer).y_m[self.m_index(u.arm(inner).m)]
    }

    /// Pushforward of unit weights onto the factual variables.
    pub fn observational_law(&self) -> ObservedLaw {
        let mut cells: BTreeMap<Cell, f64> = BTreeMap::new();
        for u in &self.units {
            let cell = Cell { c: u.c.clone(), a: u.a, l: u.l, m: u.m, y: u.y };
            *cells.entry(cell).or_default() += u.weight;
        }
        ObservedLaw {
            cells,
            covariate_names: self.covariate_names.clone(),
            c_supports: self.c_supports.clone(),
            a_support: self.a_support.clone(),
            l_support: self.l_support.clone(),
            m_support: self.m_support.clone(),
            y_support: self.y_support.clone(),
            exposure: self.exposure,
        }
    }
}

/// Anything whose full counterfactual joint can be enumerated.
pub trait CounterfactualModel {
    fn counterfactuals(&self) -> Result<CounterfactualTable>;
}

impl CounterfactualModel for CompiledScm {
    fn counterfactuals(&self) -> Result<CounterfactualTable> {
        let units = self.units(DEFAULT_UNIT_CAP)?;
        let records: Vec<UnitRecord> = units.par_iter().map(|u| self.record(u)).collect();
        let names = |idx: &[usize]| idx.iter().map(|&i| self.scm.variables[i].name.clone()).collect();
        Ok(CounterfactualTable {
            kind: ModelKind::Npsem,
            shape: self.shape,
            exposure: self.scm.exposure_levels,
            covariate_names: names(&self.covariates),
            c_supports: self.covariates.iter().map(|&c| self.supports[c].clone()).collect(),
            a_support: self.supports[self.a].clone(),
            l_support: self.l.map(|l| self.supports[l].clone()),
            m_support: self.supports[self.m].clone(),
            y_support: self.supports[self.y].clone(),
            units: records,
        })
    }
}

impl CounterfactualModel for Scm {
    fn counterfactuals(&self) -> Result<CounterfactualTable> {
        self.compile()?.counterfactuals()
    }
}

impl CounterfactualModel for FfrcistgSpec {
    fn counterfactuals(&self) -> Result<CounterfactualTable> {
        self.validate()?;
        let el = self.exposure_levels;
        let m_pos = |m: Level| position(&self.m_support, m).expect("validated");
        let units = self
            .atoms
            .iter()
            .filter(|atom| atom.mass > 0.0)
            .map(|atom| {
                let arm = |k: usize| ArmValues {
                    l: None,
                    m: atom.m[k],
                    y: atom.y[k][m_pos(atom.m[k])],
                    y_m: atom.y[k].clone(),
                    m_given_l: vec![],
                    y_lm: vec![],
                };
                let factual = Arm::of_level(atom.a, el).expect("validated").idx();
                UnitRecord {
                    weight: atom.mass,
                    c: atom.c.clone(),
                    a: atom.a,
                    l: None,
                    m: atom.m[factual],
                    y: atom.y[factual][m_pos(atom.m[factual])],
                    arms: [arm(0), arm(1)],
                    unit: None,
                }
            })
            .collect();
        let mut a_support = vec![el.a_star, el.a];
        a_support.sort_unstable();
        Ok(CounterfactualTable {
            kind: ModelKind::Ffrcistg,
            shape: Shape::Standard,
            exposure: el,
            covariate_names: self.covariate_names.clone(),
            c_supports: self.c_supports.clone(),
            a_support,
            l_support: None,
            m_support: self.m_support.clone(),
            y_support: self.y_support.clone(),
            units,
        })
    }
}

impl CounterfactualModel for CounterfactualTable {
    fn counterfactuals(&self) -> Result<CounterfactualTable> {
        Ok(self.clone())
    }
}

/// All positive-mass units of a model, with the default size cap.
pub fn enumerate_units(scm: &Scm) -> Result<Vec<Unit>> {
    scm.compile()?.units(DEFAULT_UNIT_CAP)
}

pub fn evaluate(scm: &CompiledScm, unit: &Unit, iv: &Intervention) -> Result<World> {
    scm.evaluate(unit, iv)
}

pub fn nested_outcome(scm: &CompiledScm, unit: &Unit, a_outer: Level, a_inner: Level) -> Result<Level> {
    scm.nested_outcome(unit, a_outer, a_inner)
}

pub fn observational_law(model: &impl CounterfactualModel) -> Result<ObservedLaw> {
    Ok(model.counterfactuals()?.observational_law())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pe_counterexample, thm1_counterexample, thm2_counterexample, thm3_counterexample};

    #[test]
    fn unit_counts_and_weights() {
        let t1 = thm1_counterexample(0.3, 0.8).unwrap();
        assert_eq!(enumerate_units(&t1).unwrap().len(), 8);
        let t2 = thm2_counterexample(0.2, 0.3, 0.5, 0.9).unwrap();
        let units = enumerate_units(&t2).unwrap();
        assert_eq!(units.len(), 12);
        let total: f64 = units.iter().map(|u| u.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let pe = pe_counterexample(0.37).unwrap();
        let total: f64 = enumerate_units(&pe).unwrap().iter().map(|u| u.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_mass_units_are_dropped() {
        let t2 = thm2_counterexample(1.0, 0.0, 0.0, 0.4).unwrap();
        assert_eq!(enumerate_units(&t2).unwrap().len(), 4);
    }

    #[test]
    fn size_cap_is_enforced() {
        let scm = thm1_counterexample(0.3, 0.8).unwrap().compile().unwrap();
        assert_eq!(scm.units(7), Err(Error::SizeLimit { units: 8, cap: 7 }));
    }

    #[test]
    fn hand_evaluated_thm1_unit() {
        let scm = thm1_counterexample(0.3, 0.8).unwrap().compile().unwrap();
        let unit = Unit { noise: vec![0, 1, 1, 0], weight: 0.5 * 0.3 * 0.8 };
        let w = scm.evaluate(&unit, &Intervention::none().set("A", 1)).unwrap();
        assert_eq!((w.get("L"), w.get("M"), w.get("Y")), (Some(1), Some(1), Some(1)));
        let factual = scm.evaluate(&unit, &Intervention::none()).unwrap();
        assert_eq!(factual.get("A"), Some(0));
        assert!(scm.evaluate(&unit, &Intervention::none().set("A", 5)).is_err());
    }

    #[test]
    fn nested_outcome_ignores_exposure_when_confounder_noise_is_zero() {
        let scm = thm1_counterexample(0.4, 0.7).unwrap().compile().unwrap();
        for unit in scm.units(DEFAULT_UNIT_CAP).unwrap().iter().filter(|u| u.noise[1] == 0) {
            assert_eq!(scm.nested_outcome(unit, 1, 1).unwrap(), scm.nested_outcome(unit, 1, 0).unwrap());
        }
    }

    #[test]
    fn ffrcistg_atoms_with_m_a_zero_have_equal_nested_outcomes() {
        let table = thm3_counterexample(0.3, [0.1, 0.2, 0.4, 0.3], 0.6).unwrap().counterfactuals().unwrap();
        for u in table.units.iter().filter(|u| u.arm(Arm::Active).m == 0) {
            assert_eq!(table.nested(u, Arm::Active, Arm::Star), table.nested(u, Arm::Active, Arm::Active));
        }
    }

    #[test]
    fn observational_law_of_pe_model() {
        let law = observational_law(&pe_counterexample(0.5).unwrap()).unwrap();
        assert!((law.total() - 1.0).abs() < 1e-12);
        for a in [0, 1] {
            let pa = law.mass(|c| c.a == a);
            let pm = law.mass(|c| c.a == a && c.m == 1);
            assert!((pm / pa - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn thm1_law_is_positive_on_every_exposure_confounder_mediator_cell() {
        let law = observational_law(&thm1_counterexample(0.3, 0.8).unwrap()).unwrap();
        assert!((law.mass(|c| c.a == 1) - 0.5).abs() < 1e-12);
        for a in [0, 1] {
            for l in [0, 1] {
                for m in [0, 1] {
                    assert!(law.mass(|c| c.a == a && c.l == Some(l) && c.m == m) > 0.0);
                }
            }
        }
    }
}
