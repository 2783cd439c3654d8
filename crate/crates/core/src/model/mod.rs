//! Discrete structural causal models for the mediation setting.
//!
//! An [`Scm`] is plain data: variables with finite integer-coded supports,
//! one exogenous noise term per variable, and a total structural table per
//! variable mapping (parent values, noise level) to a level. Nothing is
//! checked at construction; [`validate`] reports every violated invariant and
//! [`Scm::compile`](crate::engine::CompiledScm) refuses invalid models.
//!
//! Four graph shapes are supported:
//!
//! * `C → A → M → Y` with `C` and `A` pointing into everything downstream;
//! * the same with an exposure-induced confounder `L` between `A` and `M`;
//! * the separable shape where `A` acts on `M` only through `N` and on `Y`
//!   only through `O`;
//! * any sub-shape obtained by deleting edges.

mod factories;
mod ffrcistg;
mod json;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use petgraph::algo::toposort;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

pub use factories::{
    additive_outcome_scm, pe_counterexample, separable_scm, tabulated_scm, thm1_counterexample,
    thm2_counterexample, AdditiveOutcomeParams, SeparableParams, TableSpec,
};
pub use ffrcistg::{thm3_counterexample, FfrcistgAtom, FfrcistgSpec};

/// Integer-coded level of a discrete variable.
pub type Level = i64;

/// Tolerance on probability normalization.
pub const PMF_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "C")]
    Covariate,
    #[serde(rename = "A")]
    Exposure,
    #[serde(rename = "L")]
    InducedConfounder,
    #[serde(rename = "M")]
    Mediator,
    #[serde(rename = "Y")]
    Outcome,
    #[serde(rename = "N")]
    SeparableN,
    #[serde(rename = "O")]
    SeparableO,
}

impl Role {
    pub fn symbol(self) -> &'static str {
        match self {
            Role::Covariate => "C",
            Role::Exposure => "A",
            Role::InducedConfounder => "L",
            Role::Mediator => "M",
            Role::Outcome => "Y",
            Role::SeparableN => "N",
            Role::SeparableO => "O",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub support: Vec<Level>,
    pub role: Role,
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, role: Role, support: impl Into<Vec<Level>>) -> Self {
        Self { name: name.into(), support: support.into(), role }
    }
}

/// An exogenous noise term with a finite probability mass function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub name: String,
    #[serde(deserialize_with = "json::deserialize_pmf")]
    pub pmf: BTreeMap<Level, f64>,
}

impl NoiseSpec {
    pub fn new(name: impl Into<String>, pmf: impl IntoIterator<Item = (Level, f64)>) -> Self {
        Self { name: name.into(), pmf: pmf.into_iter().collect() }
    }

    /// Bernoulli noise on {0, 1} with `Pr(1) = p`.
    pub fn bernoulli(name: impl Into<String>, p: f64) -> Self {
        Self::new(name, [(0, 1.0 - p), (1, p)])
    }

    /// Categorical noise on {0, .., k-1}.
    pub fn categorical(name: impl Into<String>, probs: &[f64]) -> Self {
        Self::new(name, probs.iter().enumerate().map(|(i, &p)| (i as Level, p)))
    }

    /// Single-level noise, used for deterministic variables.
    pub fn point_mass(name: impl Into<String>) -> Self {
        Self::new(name, [(0, 1.0)])
    }

    pub fn support(&self) -> Vec<Level> {
        self.pmf.keys().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub parents: Vec<Level>,
    pub noise: Level,
    pub value: Level,
}

/// Structural function of one variable, stored as an explicit table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralTable {
    pub variable: String,
    pub parents: Vec<String>,
    pub noise: String,
    pub rows: Vec<TableRow>,
}

impl StructuralTable {
    /// Tabulates `f(parent values, noise level)` over the full cross product
    /// of parent supports and the noise support, in lexicographic order.
    pub fn from_fn(
        variable: impl Into<String>,
        parents: &[(&str, &[Level])],
        noise: (&str, &[Level]),
        f: impl Fn(&[Level], Level) -> Level,
    ) -> Self {
        let supports: Vec<&[Level]> = parents.iter().map(|(_, s)| *s).collect();
        let mut rows = Vec::new();
        for combo in cartesian(&supports) {
            for &e in noise.1 {
                rows.push(TableRow { parents: combo.clone(), noise: e, value: f(&combo, e) });
            }
        }
        Self {
            variable: variable.into(),
            parents: parents.iter().map(|(n, _)| n.to_string()).collect(),
            noise: noise.0.to_string(),
            rows,
        }
    }
}

/// Cross product of the given level lists, lexicographic with the last list varying fastest.
pub fn cartesian(lists: &[&[Level]]) -> Vec<Vec<Level>> {
    let mut out = vec![Vec::with_capacity(lists.len())];
    for list in lists {
        let mut next = Vec::with_capacity(out.len() * list.len());
        for prefix in &out {
            for &v in *list {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// The designated reference (`a_star`) and comparison (`a`) exposure levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExposureLevels {
    pub a_star: Level,
    pub a: Level,
}

impl Default for ExposureLevels {
    fn default() -> Self {
        Self { a_star: 0, a: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scm {
    pub variables: Vec<VariableSpec>,
    /// Parent list per variable; variables without an entry have no parents.
    pub edges: BTreeMap<String, Vec<String>>,
    pub noise: Vec<NoiseSpec>,
    pub tables: Vec<StructuralTable>,
    pub exposure_levels: ExposureLevels,
}

impl Scm {
    /// Assembles a model from variables, noises and tables, deriving `edges`
    /// from the tables' parent lists.
    pub fn from_parts(
        variables: Vec<VariableSpec>,
        noise: Vec<NoiseSpec>,
        tables: Vec<StructuralTable>,
        exposure_levels: ExposureLevels,
    ) -> Self {
        let edges = tables
            .iter()
            .filter(|t| !t.parents.is_empty())
            .map(|t| (t.variable.clone(), t.parents.clone()))
            .collect();
        Self { variables, edges, noise, tables, exposure_levels }
    }

    pub fn variable(&self, name: &str) -> Option<&VariableSpec> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn by_role(&self, role: Role) -> impl Iterator<Item = &VariableSpec> {
        self.variables.iter().filter(move |v| v.role == role)
    }

    pub fn parents_of(&self, name: &str) -> &[String] {
        self.edges.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The exposure levels with `a` and `a_star` exchanged.
    pub fn swapped_exposure(&self) -> Scm {
        let mut out = self.clone();
        out.exposure_levels =
            ExposureLevels { a_star: self.exposure_levels.a, a: self.exposure_levels.a_star };
        out
    }

    pub fn shape(&self) -> Option<Shape> {
        classify_shape(self).ok()
    }
}

/// Graph shape of a valid model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    /// No exposure-induced confounder.
    Standard,
    /// An exposure-induced confounder `L` of the mediator–outcome relation.
    InducedConfounder,
    /// `A` split into deterministic components `N` (to `M`) and `O` (to `Y`).
    Separable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub element: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.message)
    }
}

/// Every violated invariant of a model; empty iff the model is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(needle) || v.element.contains(needle))
    }

    fn push(&mut self, element: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { element: element.into(), message: message.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every model invariant and returns the full list of violations.
pub fn validate(scm: &Scm) -> ValidationReport {
    let mut report = ValidationReport::default();
    let vars: BTreeMap<&str, &VariableSpec> =
        scm.variables.iter().map(|v| (v.name.as_str(), v)).collect();

    if vars.len() != scm.variables.len() {
        report.push("variables", "duplicate variable names");
    }
    for v in &scm.variables {
        if v.support.is_empty() {
            report.push(&v.name, "support is empty");
        }
        let distinct: BTreeSet<_> = v.support.iter().collect();
        if distinct.len() != v.support.len() {
            report.push(&v.name, "support has duplicate levels");
        }
    }

    for role in [Role::Exposure, Role::Mediator, Role::Outcome] {
        let n = scm.by_role(role).count();
        if n != 1 {
            report.push("variables", format!("expected exactly one {} variable, found {n}", role.symbol()));
        }
    }
    for role in [Role::InducedConfounder, Role::SeparableN, Role::SeparableO] {
        let n = scm.by_role(role).count();
        if n > 1 {
            report.push("variables", format!("at most one {} variable allowed, found {n}", role.symbol()));
        }
    }

    let noises: BTreeMap<&str, &NoiseSpec> = scm.noise.iter().map(|n| (n.name.as_str(), n)).collect();
    if noises.len() != scm.noise.len() {
        report.push("noise", "duplicate noise names");
    }
    for n in &scm.noise {
        if n.pmf.is_empty() {
            report.push(&n.name, "pmf is empty");
            continue;
        }
        for (&level, &p) in &n.pmf {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                report.push(&n.name, format!("probability {p} of level {level} outside [0, 1]"));
            }
        }
        let sum: f64 = n.pmf.values().sum();
        if (sum - 1.0).abs() > PMF_TOLERANCE {
            report.push(&n.name, format!("pmf sums to {sum}"));
        }
    }

    // one table and one noise per variable
    let mut tables: BTreeMap<&str, &StructuralTable> = BTreeMap::new();
    let mut noise_users: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for t in &scm.tables {
        if !vars.contains_key(t.variable.as_str()) {
            report.push(&t.variable, "table for an undeclared variable");
        }
        if tables.insert(t.variable.as_str(), t).is_some() {
            report.push(&t.variable, "more than one structural table");
        }
        if !noises.contains_key(t.noise.as_str()) {
            report.push(&t.variable, format!("table references unknown noise {}", t.noise));
        }
        noise_users.entry(t.noise.as_str()).or_default().push(t.variable.as_str());
    }
    for v in &scm.variables {
        if !tables.contains_key(v.name.as_str()) {
            report.push(&v.name, "no structural table");
        }
    }
    for n in &scm.noise {
        match noise_users.get(n.name.as_str()).map(Vec::len).unwrap_or(0) {
            1 => {}
            0 => report.push(&n.name, "noise term not attached to any variable"),
            k => report.push(&n.name, format!("noise term shared by {k} variables")),
        }
    }

    // edges agree with table parent lists and reference declared variables
    for (child, parents) in &scm.edges {
        if !vars.contains_key(child.as_str()) {
            report.push(child, "edge list for an undeclared variable");
        }
        for p in parents {
            if !vars.contains_key(p.as_str()) {
                report.push(child, format!("parent {p} is not a declared variable"));
            }
        }
    }
    for t in &scm.tables {
        if scm.parents_of(&t.variable) != t.parents.as_slice() {
            report.push(&t.variable, "table parents disagree with edges");
        }
    }

    if let Err(msg) = classify_shape(scm) {
        report.push("graph", msg);
    }

    // table totality and ranges
    for t in &scm.tables {
        let (Some(var), Some(noise)) = (vars.get(t.variable.as_str()), noises.get(t.noise.as_str())) else {
            continue;
        };
        let parent_supports: Option<Vec<&[Level]>> = t
            .parents
            .iter()
            .map(|p| vars.get(p.as_str()).map(|v| v.support.as_slice()))
            .collect();
        let Some(parent_supports) = parent_supports else { continue };
        let mut seen: BTreeMap<(Vec<Level>, Level), Level> = BTreeMap::new();
        for row in &t.rows {
            if row.parents.len() != t.parents.len() {
                report.push(&t.variable, format!("row {:?} has the wrong number of parent values", row.parents));
                continue;
            }
            if seen.insert((row.parents.clone(), row.noise), row.value).is_some() {
                report.push(&t.variable, format!("duplicate row for parents {:?}, noise {}", row.parents, row.noise));
            }
            if !var.support.contains(&row.value) {
                report.push(&t.variable, format!("value {} outside the declared support", row.value));
            }
        }
        for combo in cartesian(&parent_supports) {
            for e in noise.pmf.keys() {
                if !seen.contains_key(&(combo.clone(), *e)) {
                    report.push(&t.variable, format!("table is not total: missing parents {combo:?}, noise {e}"));
                }
            }
        }
    }

    let el = scm.exposure_levels;
    if el.a == el.a_star {
        report.push("exposure_levels", "a_star must differ from a");
    }
    if let Some(a) = scm.by_role(Role::Exposure).next() {
        for (label, level) in [("a_star", el.a_star), ("a", el.a)] {
            if !a.support.contains(&level) {
                report.push("exposure_levels", format!("{label} = {level} is not in the support of {}", a.name));
            }
        }
    }

    report
}

/// Determines which supported shape the graph belongs to, or explains why it
/// belongs to none.
fn classify_shape(scm: &Scm) -> std::result::Result<Shape, String> {
    let role_of: BTreeMap<&str, Role> = scm.variables.iter().map(|v| (v.name.as_str(), v.role)).collect();
    let has = |r: Role| scm.variables.iter().any(|v| v.role == r);
    let separable = has(Role::SeparableN) || has(Role::SeparableO);
    if separable && !(has(Role::SeparableN) && has(Role::SeparableO)) {
        return Err("graph not a supported mediation shape: N and O must appear together".into());
    }
    if separable && has(Role::InducedConfounder) {
        return Err("graph not a supported mediation shape: separable components cannot coexist with L".into());
    }

    for v in &scm.variables {
        let allowed: &[Role] = match (v.role, separable) {
            (Role::Covariate, _) => &[Role::Covariate],
            (Role::Exposure, _) => &[Role::Covariate],
            (Role::InducedConfounder, _) => &[Role::Covariate, Role::Exposure],
            (Role::SeparableN | Role::SeparableO, _) => &[Role::Exposure],
            (Role::Mediator, false) => &[Role::Covariate, Role::Exposure, Role::InducedConfounder],
            (Role::Mediator, true) => &[Role::Covariate, Role::SeparableN],
            (Role::Outcome, false) => {
                &[Role::Covariate, Role::Exposure, Role::InducedConfounder, Role::Mediator]
            }
            (Role::Outcome, true) => &[Role::Covariate, Role::SeparableO, Role::Mediator],
        };
        for p in scm.parents_of(&v.name) {
            match role_of.get(p.as_str()) {
                Some(r) if allowed.contains(r) => {}
                Some(_) => {
                    return Err(format!("graph not a supported mediation shape: edge {p} -> {}", v.name));
                }
                None => {}
            }
        }
    }

    let mut graph = DiGraph::<&str, ()>::new();
    let idx: BTreeMap<&str, _> = scm.variables.iter().map(|v| (v.name.as_str(), graph.add_node(&v.name))).collect();
    for (child, parents) in &scm.edges {
        for p in parents {
            if let (Some(&a), Some(&b)) = (idx.get(p.as_str()), idx.get(child.as_str())) {
                graph.add_edge(a, b, ());
            }
        }
    }
    if toposort(&graph, None).is_err() {
        return Err("graph not a supported mediation shape: edges contain a cycle".into());
    }

    Ok(if separable {
        Shape::Separable
    } else if has(Role::InducedConfounder) {
        Shape::InducedConfounder
    } else {
        Shape::Standard
    })
}

/// Topological order of variable indices; `None` when the graph is cyclic.
pub(crate) fn topological_order(scm: &Scm) -> Option<Vec<usize>> {
    let mut graph = DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = (0..scm.variables.len()).map(|i| graph.add_node(i)).collect();
    let index: BTreeMap<&str, usize> =
        scm.variables.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
    for (i, v) in scm.variables.iter().enumerate() {
        for p in scm.parents_of(&v.name) {
            graph.add_edge(nodes[*index.get(p.as_str())?], nodes[i], ());
        }
    }
    let order = toposort(&graph, None).ok()?;
    Some(order.into_iter().map(|n| graph[n]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thm1_factory_is_valid() {
        let scm = thm1_counterexample(0.3, 0.8).unwrap();
        let report = validate(&scm);
        assert!(report.is_valid(), "{report}");
        assert_eq!(scm.shape(), Some(Shape::InducedConfounder));
    }

    #[test]
    fn unnormalized_noise_is_reported() {
        let mut scm = thm1_counterexample(0.3, 0.8).unwrap();
        scm.noise[1] = NoiseSpec::new(scm.noise[1].name.clone(), [(0, 0.6), (1, 0.6)]);
        let report = validate(&scm);
        assert!(report.contains("pmf sums to 1.2"), "{report}");
    }

    #[test]
    fn outcome_to_exposure_edge_is_not_a_mediation_shape() {
        let mut scm = pe_counterexample(0.5).unwrap();
        scm.edges.insert("A".into(), vec!["Y".into()]);
        let report = validate(&scm);
        assert!(report.contains("graph not a supported mediation shape"), "{report}");
    }

    #[test]
    fn negative_probability_and_missing_rows() {
        let mut scm = pe_counterexample(0.5).unwrap();
        scm.noise[0] = NoiseSpec::new(scm.noise[0].name.clone(), [(0, 1.5), (1, -0.5)]);
        let y = scm.tables.iter_mut().find(|t| t.variable == "Y").unwrap();
        y.rows.pop();
        let report = validate(&scm);
        assert!(report.contains("outside [0, 1]"));
        assert!(report.contains("not total"));
    }

    #[test]
    fn exposure_levels_must_differ_and_be_in_support() {
        let mut scm = pe_counterexample(0.5).unwrap();
        scm.exposure_levels = ExposureLevels { a_star: 1, a: 1 };
        assert!(validate(&scm).contains("a_star must differ"));
        scm.exposure_levels = ExposureLevels { a_star: 0, a: 7 };
        assert!(validate(&scm).contains("not in the support"));
    }

    #[test]
    fn shared_noise_is_rejected() {
        let mut scm = pe_counterexample(0.5).unwrap();
        let m_noise = scm.tables.iter().find(|t| t.variable == "M").unwrap().noise.clone();
        scm.tables.iter_mut().find(|t| t.variable == "Y").unwrap().noise = m_noise;
        let report = validate(&scm);
        assert!(report.contains("shared by 2 variables"), "{report}");
    }

    #[test]
    fn cycle_among_covariates_is_rejected() {
        let mut scm = pe_counterexample(0.5).unwrap();
        scm.variables.push(VariableSpec::new("C1", Role::Covariate, [0, 1]));
        scm.variables.push(VariableSpec::new("C2", Role::Covariate, [0, 1]));
        scm.edges.insert("C1".into(), vec!["C2".into()]);
        scm.edges.insert("C2".into(), vec!["C1".into()]);
        assert!(validate(&scm).contains("cycle"));
    }

    #[test]
    fn cartesian_is_lexicographic() {
        let out = cartesian(&[&[0, 1], &[5, 6, 7]]);
        assert_eq!(out.len(), 6);
        assert_eq!(out[0], vec![0, 5]);
        assert_eq!(out[1], vec![0, 6]);
        assert_eq!(out[5], vec![1, 7]);
        assert_eq!(cartesian(&[]), vec![Vec::<Level>::new()]);
    }
}
