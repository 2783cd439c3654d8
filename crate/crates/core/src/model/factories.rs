//! Constructors for the counterexample models and the structured families.

use serde::{Deserialize, Serialize};

use super::{
    cartesian, ExposureLevels, Level, NoiseSpec, Role, Scm, StructuralTable, TableRow,
    VariableSpec, PMF_TOLERANCE,
};
use crate::{Error, Result};

const BINARY: &[Level] = &[0, 1];

fn open_unit(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {x} must lie in the open interval (0, 1)")))
    }
}

fn simplex(name: &str, probs: &[f64]) -> Result<()> {
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Domain(format!("{name} has entry {p} outside [0, 1]")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PMF_TOLERANCE {
        return Err(Error::Domain(format!("{name} sums to {sum}, not 1")));
    }
    Ok(())
}

/// Structural equations shared by the recanting-witness counterexamples,
/// for `l` in {0, 1}.
fn recanting_m(a: Level, l: Level, e: Level) -> Level {
    (a + l - a * l) * e + (1 - a) * (1 - l) * (1 - e)
}

fn recanting_y(a: Level, l: Level, m: Level) -> Level {
    (1 - a) * l * m + a * (l + m - l * m)
}

fn binary_var(name: &str, role: Role) -> VariableSpec {
    VariableSpec::new(name, role, BINARY)
}

/// Exposure randomized by a fair coin, exposure-induced confounder `L`
/// recanting with probability `pi`, and `M`, `Y` as in the construction
/// showing that a sharper mediational null can coexist with a nonzero
/// randomized interventional indirect effect.
pub fn thm1_counterexample(pi: f64, beta: f64) -> Result<Scm> {
    open_unit("pi", pi)?;
    open_unit("beta", beta)?;
    let variables = vec![
        binary_var("A", Role::Exposure),
        binary_var("L", Role::InducedConfounder),
        binary_var("M", Role::Mediator),
        binary_var("Y", Role::Outcome),
    ];
    let noise = vec![
        NoiseSpec::bernoulli("eA", 0.5),
        NoiseSpec::bernoulli("eL", pi),
        NoiseSpec::bernoulli("eM", beta),
        NoiseSpec::point_mass("eY"),
    ];
    let tables = vec![
        StructuralTable::from_fn("A", &[], ("eA", BINARY), |_, e| e),
        StructuralTable::from_fn("L", &[("A", BINARY)], ("eL", BINARY), |p, e| p[0] * e + (1 - p[0]) * (1 - e)),
        StructuralTable::from_fn("M", &[("A", BINARY), ("L", BINARY)], ("eM", BINARY), |p, e| {
            recanting_m(p[0], p[1], e)
        }),
        StructuralTable::from_fn("Y", &[("A", BINARY), ("L", BINARY), ("M", BINARY)], ("eY", &[0]), |p, _| {
            recanting_y(p[0], p[1], p[2])
        }),
    ];
    Ok(Scm::from_parts(variables, noise, tables, ExposureLevels::default()))
}

/// The three-level confounder variant: level 2 of `L` switches on a unit
/// type where `M` copies `A` and `Y` copies `M`, which makes mediational
/// monotonicity hold in the nondecreasing direction.
pub fn thm2_counterexample(pi0: f64, pi1: f64, pi2: f64, beta: f64) -> Result<Scm> {
    simplex("(pi0, pi1, pi2)", &[pi0, pi1, pi2])?;
    open_unit("beta", beta)?;
    let ternary: &[Level] = &[0, 1, 2];
    let variables = vec![
        binary_var("A", Role::Exposure),
        VariableSpec::new("L", Role::InducedConfounder, ternary),
        binary_var("M", Role::Mediator),
        binary_var("Y", Role::Outcome),
    ];
    let noise = vec![
        NoiseSpec::bernoulli("eA", 0.5),
        NoiseSpec::categorical("eL", &[pi0, pi1, pi2]),
        NoiseSpec::bernoulli("eM", beta),
        NoiseSpec::point_mass("eY"),
    ];
    let indicator = |b: bool| Level::from(b);
    let tables = vec![
        StructuralTable::from_fn("A", &[], ("eA", BINARY), |_, e| e),
        StructuralTable::from_fn("L", &[("A", BINARY)], ("eL", ternary), |p, e| {
            (1 - p[0]) * indicator(e == 0) + p[0] * indicator(e == 1) + 2 * indicator(e == 2)
        }),
        StructuralTable::from_fn("M", &[("A", BINARY), ("L", ternary)], ("eM", BINARY), |p, e| {
            let (a, l) = (p[0], p[1]);
            if l == 2 { a } else { recanting_m(a, l, e) }
        }),
        StructuralTable::from_fn("Y", &[("A", BINARY), ("L", ternary), ("M", BINARY)], ("eY", &[0]), |p, _| {
            let (a, l, m) = (p[0], p[1], p[2]);
            if l == 2 { m } else { recanting_y(a, l, m) }
        }),
    ];
    Ok(Scm::from_parts(variables, noise, tables, ExposureLevels::default()))
}

/// `M(a') = eM ~ Bernoulli(p)` for both exposure levels and `Y = A * M`.
pub fn pe_counterexample(p: f64) -> Result<Scm> {
    open_unit("p", p)?;
    let variables = vec![
        binary_var("A", Role::Exposure),
        binary_var("M", Role::Mediator),
        binary_var("Y", Role::Outcome),
    ];
    let noise = vec![
        NoiseSpec::bernoulli("eA", 0.5),
        NoiseSpec::bernoulli("eM", p),
        NoiseSpec::point_mass("eY"),
    ];
    let tables = vec![
        StructuralTable::from_fn("A", &[], ("eA", BINARY), |_, e| e),
        StructuralTable::from_fn("M", &[("A", BINARY)], ("eM", BINARY), |_, e| e),
        StructuralTable::from_fn("Y", &[("A", BINARY), ("M", BINARY)], ("eY", &[0]), |p, _| p[0] * p[1]),
    ];
    Ok(Scm::from_parts(variables, noise, tables, ExposureLevels::default()))
}

/// Data for one structural table: parent names, the variable's support, its
/// noise pmf over levels `0..noise.len()`, and the output for every
/// (parent values, noise level) in lexicographic order, noise varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub parents: Vec<String>,
    pub support: Vec<Level>,
    pub noise: Vec<f64>,
    pub values: Vec<Level>,
}

impl TableSpec {
    /// A root variable with the given pmf over its support.
    pub fn root(support: &[Level], pmf: &[f64]) -> Self {
        Self { parents: vec![], support: support.to_vec(), noise: pmf.to_vec(), values: support.to_vec() }
    }
}

#[derive(Default)]
struct Builder {
    variables: Vec<VariableSpec>,
    noise: Vec<NoiseSpec>,
    tables: Vec<StructuralTable>,
}

impl Builder {
    fn support(&self, name: &str) -> Result<&[Level]> {
        self.variables
            .iter()
            .find(|v| v.name == name)
            .map(|v| v.support.as_slice())
            .ok_or_else(|| Error::Domain(format!("parent {name} is not defined before its child")))
    }

    fn add_tabulated(&mut self, name: &str, role: Role, spec: &TableSpec) -> Result<()> {
        let supports: Vec<&[Level]> = spec.parents.iter().map(|p| self.support(p)).collect::<Result<_>>()?;
        let combos = cartesian(&supports);
        let expected = combos.len() * spec.noise.len();
        if spec.values.len() != expected {
            return Err(Error::Domain(format!(
                "table for {name} has {} values, expected {expected}",
                spec.values.len()
            )));
        }
        let mut rows = Vec::with_capacity(expected);
        let mut values = spec.values.iter();
        for combo in combos {
            for e in 0..spec.noise.len() {
                let value = *values.next().expect("length checked");
                rows.push(TableRow { parents: combo.clone(), noise: e as Level, value });
            }
        }
        self.push(name, role, spec.support.clone(), NoiseSpec::categorical(format!("e{name}"), &spec.noise), spec.parents.clone(), rows);
        Ok(())
    }

    fn push(&mut self, name: &str, role: Role, support: Vec<Level>, noise: NoiseSpec, parents: Vec<String>, rows: Vec<TableRow>) {
        self.tables.push(StructuralTable { variable: name.into(), parents, noise: noise.name.clone(), rows });
        self.noise.push(noise);
        self.variables.push(VariableSpec { name: name.into(), support, role });
    }

    fn add_copy_of(&mut self, name: &str, role: Role, source: &str) -> Result<()> {
        let support = self.support(source)?.to_vec();
        let rows = support.iter().map(|&v| TableRow { parents: vec![v], noise: 0, value: v }).collect();
        self.push(name, role, support, NoiseSpec::point_mass(format!("e{name}")), vec![source.into()], rows);
        Ok(())
    }

    fn finish(self, exposure: ExposureLevels) -> Scm {
        Scm::from_parts(self.variables, self.noise, self.tables, exposure)
    }
}

fn check_parents(var: &str, spec: &TableSpec, allowed: &[&str], message: &str) -> Result<()> {
    match spec.parents.iter().find(|p| !allowed.contains(&p.as_str())) {
        Some(p) => Err(Error::Domain(format!("{message} (parent {p} of {var})"))),
        None => Ok(()),
    }
}

fn exposure_levels_of(spec: &TableSpec) -> Result<ExposureLevels> {
    match spec.support.as_slice() {
        [a_star, a, ..] => Ok(ExposureLevels { a_star: *a_star, a: *a }),
        _ => Err(Error::Domain("exposure support needs at least two levels".into())),
    }
}

/// Builds a model from tabulated variables listed parents-first. The exposure
/// levels are the first two levels of the exposure's support.
pub fn tabulated_scm(tables: &[(String, Role, TableSpec)]) -> Result<Scm> {
    let mut b = Builder::default();
    let mut exposure = None;
    for (name, role, spec) in tables {
        b.add_tabulated(name, *role, spec)?;
        if *role == Role::Exposure {
            exposure = Some(exposure_levels_of(spec)?);
        }
    }
    let exposure = exposure.ok_or_else(|| Error::Domain("no exposure variable".into()))?;
    Ok(b.finish(exposure))
}

/// Parameters of a separable model `C → A → {N, O}`, `(C, N) → M`, `(C, O, M) → Y`.
/// Table parents use the names `C`, `A`, `N`, `O` and `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableParams {
    pub covariate: Option<TableSpec>,
    pub exposure: TableSpec,
    pub mediator: TableSpec,
    pub outcome: TableSpec,
}

/// Builds the separable model; `N` and `O` are deterministic copies of `A`.
pub fn separable_scm(params: &SeparableParams) -> Result<Scm> {
    check_parents("A", &params.exposure, &["C"], "exposure may depend only on C")?;
    check_parents("M", &params.mediator, &["C", "N"], "mediator table routes A into M other than via N")?;
    check_parents("Y", &params.outcome, &["C", "O", "M"], "outcome table routes A into Y other than via O and M")?;
    let mut b = Builder::default();
    if let Some(c) = &params.covariate {
        check_parents("C", c, &[], "covariate must be a root")?;
        b.add_tabulated("C", Role::Covariate, c)?;
    }
    b.add_tabulated("A", Role::Exposure, &params.exposure)?;
    b.add_copy_of("N", Role::SeparableN, "A")?;
    b.add_copy_of("O", Role::SeparableO, "A")?;
    b.add_tabulated("M", Role::Mediator, &params.mediator)?;
    b.add_tabulated("Y", Role::Outcome, &params.outcome)?;
    Ok(b.finish(exposure_levels_of(&params.exposure)?))
}

/// Parameters of a model whose outcome is `Y = f(C, M, eY) + g(C, A, L, eY)`.
///
/// `mediator_term` is indexed lexicographically over (C, M, eY) and
/// `exposure_term` over (C, A, L, eY), omitting C or L when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveOutcomeParams {
    pub covariate: Option<TableSpec>,
    pub exposure: TableSpec,
    pub confounder: Option<TableSpec>,
    pub mediator: TableSpec,
    pub y_noise: Vec<f64>,
    pub mediator_term: Vec<Level>,
    pub exposure_term: Vec<Level>,
}

/// Builds a model with no A–M interaction on Y for any unit.
pub fn additive_outcome_scm(params: &AdditiveOutcomeParams) -> Result<Scm> {
    check_parents("A", &params.exposure, &["C"], "exposure may depend only on C")?;
    let mut b = Builder::default();
    if let Some(c) = &params.covariate {
        check_parents("C", c, &[], "covariate must be a root")?;
        b.add_tabulated("C", Role::Covariate, c)?;
    }
    b.add_tabulated("A", Role::Exposure, &params.exposure)?;
    if let Some(l) = &params.confounder {
        check_parents("L", l, &["C", "A"], "confounder may depend only on C and A")?;
        b.add_tabulated("L", Role::InducedConfounder, l)?;
    }
    check_parents("M", &params.mediator, &["C", "A", "L"], "mediator may depend only on C, A and L")?;
    b.add_tabulated("M", Role::Mediator, &params.mediator)?;

    let c_sup = params.covariate.as_ref().map(|c| c.support.clone());
    let l_sup = params.confounder.as_ref().map(|l| l.support.clone());
    let a_sup = params.exposure.support.clone();
    let m_sup = params.mediator.support.clone();
    let n_e = params.y_noise.len();
    let e_sup: Vec<Level> = (0..n_e as Level).collect();

    let mut parents: Vec<(&str, &[Level])> = Vec::new();
    if let Some(c) = &c_sup {
        parents.push(("C", c));
    }
    parents.push(("A", &a_sup));
    if let Some(l) = &l_sup {
        parents.push(("L", l));
    }
    parents.push(("M", &m_sup));

    let size = |s: &Option<Vec<Level>>| s.as_ref().map_or(1, Vec::len);
    let f_len = size(&c_sup) * m_sup.len() * n_e;
    let g_len = size(&c_sup) * a_sup.len() * size(&l_sup) * n_e;
    if params.mediator_term.len() != f_len || params.exposure_term.len() != g_len {
        return Err(Error::Domain(format!(
            "additive outcome terms have lengths ({}, {}), expected ({f_len}, {g_len})",
            params.mediator_term.len(),
            params.exposure_term.len()
        )));
    }
    let pos = |s: &[Level], v: Level| s.iter().position(|&x| x == v).expect("level from support");
    let outcome = |p: &[Level], e: Level| -> Level {
        let mut it = p.iter();
        let ci = c_sup.as_ref().map_or(0, |s| pos(s, *it.next().unwrap()));
        let ai = pos(&a_sup, *it.next().unwrap());
        let li = l_sup.as_ref().map_or(0, |s| pos(s, *it.next().unwrap()));
        let mi = pos(&m_sup, *it.next().unwrap());
        let e = e as usize;
        let f = params.mediator_term[(ci * m_sup.len() + mi) * n_e + e];
        let g = params.exposure_term[((ci * a_sup.len() + ai) * size(&l_sup) + li) * n_e + e];
        f + g
    };
    let table = StructuralTable::from_fn("Y", &parents, ("eY", &e_sup), outcome);
    let mut y_support: Vec<Level> = table.rows.iter().map(|r| r.value).collect();
    y_support.sort_unstable();
    y_support.dedup();
    b.noise.push(NoiseSpec::categorical("eY", &params.y_noise));
    b.variables.push(VariableSpec::new("Y", Role::Outcome, y_support));
    b.tables.push(table);
    Ok(b.finish(exposure_levels_of(&params.exposure)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;

    #[test]
    fn factories_reject_out_of_domain_parameters() {
        assert!(thm1_counterexample(0.0, 0.5).is_err());
        assert!(thm1_counterexample(0.5, 1.0).is_err());
        assert!(thm2_counterexample(0.5, 0.5, 0.5, 0.5).is_err());
        assert!(thm2_counterexample(1.2, -0.2, 0.0, 0.5).is_err());
        assert!(pe_counterexample(1.0).is_err());
        assert!(thm2_counterexample(1.0, 0.0, 0.0, 0.3).is_ok());
    }

    #[test]
    fn thm2_is_valid_with_three_level_confounder() {
        let scm = thm2_counterexample(0.2, 0.3, 0.5, 0.9).unwrap();
        assert!(validate(&scm).is_valid());
        assert_eq!(scm.variable("L").unwrap().support, vec![0, 1, 2]);
    }

    fn separable_params() -> SeparableParams {
        SeparableParams {
            covariate: None,
            exposure: TableSpec::root(&[0, 1], &[0.5, 0.5]),
            mediator: TableSpec { parents: vec!["N".into()], support: vec![0, 1], noise: vec![0.3, 0.7], values: vec![0, 1, 1, 0] },
            outcome: TableSpec {
                parents: vec!["O".into(), "M".into()],
                support: vec![0, 1],
                noise: vec![1.0],
                values: vec![0, 1, 1, 1],
            },
        }
    }

    #[test]
    fn separable_model_has_copies_of_exposure() {
        let scm = separable_scm(&separable_params()).unwrap();
        assert!(validate(&scm).is_valid(), "{}", validate(&scm));
        assert_eq!(scm.shape(), Some(crate::model::Shape::Separable));
    }

    #[test]
    fn separable_rejects_direct_exposure_parent_of_outcome() {
        let mut params = separable_params();
        params.outcome.parents[0] = "A".into();
        let err = separable_scm(&params).unwrap_err();
        assert!(err.to_string().contains("other than via O and M"));
        let mut params = separable_params();
        params.mediator.parents[0] = "O".into();
        assert!(separable_scm(&params).is_err());
    }

    #[test]
    fn additive_outcome_support_is_the_set_of_sums() {
        let params = AdditiveOutcomeParams {
            covariate: None,
            exposure: TableSpec::root(&[0, 1], &[0.4, 0.6]),
            confounder: None,
            mediator: TableSpec { parents: vec!["A".into()], support: vec![0, 1], noise: vec![0.5, 0.5], values: vec![0, 1, 1, 0] },
            y_noise: vec![1.0],
            mediator_term: vec![0, 2],
            exposure_term: vec![0, 1],
        };
        let scm = additive_outcome_scm(&params).unwrap();
        assert!(validate(&scm).is_valid(), "{}", validate(&scm));
        assert_eq!(scm.variable("Y").unwrap().support, vec![0, 1, 2, 3]);
        let mut bad = params;
        bad.exposure_term.push(3);
        assert!(additive_outcome_scm(&bad).is_err());
    }
}
