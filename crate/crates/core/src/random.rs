//! Seeded generators of random discrete models.
//!
//! Every structural table is surjective onto its variable's support for each
//! parent configuration and every noise level has probability at least
//! `0.2 / k` for a `k`-level noise, so all observational cells carry mass.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    cartesian, tabulated_scm, AdditiveOutcomeParams, Level, Role, Scm, SeparableParams, TableSpec,
};
use crate::Result;

const BINARY: [Level; 2] = [0, 1];

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn support(&mut self) -> Vec<Level> {
        (0..self.rng.random_range(2..=3)).collect()
    }

    fn pmf(&mut self, k: usize) -> Vec<f64> {
        let w: Vec<f64> = (0..k).map(|_| self.rng.random_range(0.2..1.0)).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    }

    fn covariate(&mut self) -> Option<TableSpec> {
        self.rng.random_bool(0.5).then(|| {
            let support = self.support();
            let pmf = self.pmf(support.len());
            TableSpec::root(&support, &pmf)
        })
    }

    /// A table whose noise-to-value map is onto `support` for every parent configuration.
    fn table(&mut self, parents: &[(&str, &[Level])], support: &[Level]) -> TableSpec {
        let k = support.len() + self.rng.random_range(0..=1);
        let configs = cartesian(&parents.iter().map(|(_, s)| *s).collect::<Vec<_>>()).len();
        let mut values = Vec::with_capacity(configs * k);
        for _ in 0..configs {
            let mut column = support.to_vec();
            while column.len() < k {
                column.push(support[self.rng.random_range(0..support.len())]);
            }
            column.shuffle(&mut self.rng);
            values.extend(column);
        }
        TableSpec {
            parents: parents.iter().map(|(n, _)| n.to_string()).collect(),
            support: support.to_vec(),
            noise: self.pmf(k),
            values,
        }
    }

    fn small_ints(&mut self, n: usize) -> Vec<Level> {
        (0..n).map(|_| self.rng.random_range(0..=2)).collect()
    }
}

fn with_c<'a>(c: &'a Option<TableSpec>, rest: &[(&'a str, &'a [Level])]) -> Vec<(&'a str, &'a [Level])> {
    let mut v: Vec<(&str, &[Level])> = c.iter().map(|c| ("C", c.support.as_slice())).collect();
    v.extend_from_slice(rest);
    v
}

fn named(c: Option<TableSpec>, rest: Vec<(&str, Role, TableSpec)>) -> Vec<(String, Role, TableSpec)> {
    c.map(|c| ("C".to_string(), Role::Covariate, c))
        .into_iter()
        .chain(rest.into_iter().map(|(n, r, t)| (n.to_string(), r, t)))
        .collect()
}

/// A random model without an exposure-induced confounder.
pub fn random_fig1_scm(seed: u64) -> Result<Scm> {
    let mut g = Gen::new(seed);
    let c = g.covariate();
    let (m_sup, y_sup) = (g.support(), g.support());
    let a = g.table(&with_c(&c, &[]), &BINARY);
    let m = g.table(&with_c(&c, &[("A", &BINARY)]), &m_sup);
    let y = g.table(&with_c(&c, &[("A", &BINARY), ("M", &m_sup)]), &y_sup);
    tabulated_scm(&named(c, vec![("A", Role::Exposure, a), ("M", Role::Mediator, m), ("Y", Role::Outcome, y)]))
}

/// A random model with an exposure-induced confounder `L`.
pub fn random_fig2_scm(seed: u64) -> Result<Scm> {
    let mut g = Gen::new(seed);
    let c = g.covariate();
    let (l_sup, m_sup, y_sup) = (g.support(), g.support(), g.support());
    let a = g.table(&with_c(&c, &[]), &BINARY);
    let l = g.table(&with_c(&c, &[("A", &BINARY)]), &l_sup);
    let m = g.table(&with_c(&c, &[("A", &BINARY), ("L", &l_sup)]), &m_sup);
    let y = g.table(&with_c(&c, &[("A", &BINARY), ("L", &l_sup), ("M", &m_sup)]), &y_sup);
    tabulated_scm(&named(
        c,
        vec![
            ("A", Role::Exposure, a),
            ("L", Role::InducedConfounder, l),
            ("M", Role::Mediator, m),
            ("Y", Role::Outcome, y),
        ],
    ))
}

/// A random confounder model in which `A` affects `M` only through `L`.
pub fn random_instrument_like_scm(seed: u64) -> Result<Scm> {
    let mut g = Gen::new(seed);
    let c = g.covariate();
    let (l_sup, m_sup, y_sup) = (g.support(), g.support(), g.support());
    let a = g.table(&with_c(&c, &[]), &BINARY);
    let l = g.table(&with_c(&c, &[("A", &BINARY)]), &l_sup);
    let m = g.table(&with_c(&c, &[("L", &l_sup)]), &m_sup);
    let y = g.table(&with_c(&c, &[("A", &BINARY), ("L", &l_sup), ("M", &m_sup)]), &y_sup);
    tabulated_scm(&named(
        c,
        vec![
            ("A", Role::Exposure, a),
            ("L", Role::InducedConfounder, l),
            ("M", Role::Mediator, m),
            ("Y", Role::Outcome, y),
        ],
    ))
}

/// A model with `M` unaffected by `A` and `Y(a', m)` injective in `m` for every unit.
pub fn random_always_affects_scm(seed: u64) -> Result<Scm> {
    let mut g = Gen::new(seed);
    let c = g.covariate();
    let m_sup = g.support();
    let a = g.table(&with_c(&c, &[]), &BINARY);
    let m = g.table(&with_c(&c, &[]), &m_sup);
    let n_e = g.rng.random_range(1..=2);
    let parents = with_c(&c, &[("A", &BINARY), ("M", &m_sup)]);
    let mut values = Vec::new();
    let n_m = m_sup.len() as Level;
    let configs = cartesian(&parents.iter().map(|(_, s)| *s).collect::<Vec<_>>());
    let shifts: Vec<Level> = (0..configs.len() / m_sup.len() * n_e).map(|_| g.rng.random_range(0..n_m)).collect();
    for (i, config) in configs.iter().enumerate() {
        let m_level = *config.last().expect("M is a parent");
        let outer = i / m_sup.len();
        for e in 0..n_e {
            values.push((m_level + shifts[outer * n_e + e]) % n_m);
        }
    }
    let y = TableSpec {
        parents: parents.iter().map(|(n, _)| n.to_string()).collect(),
        support: m_sup.clone(),
        noise: g.pmf(n_e),
        values,
    };
    tabulated_scm(&named(c, vec![("A", Role::Exposure, a), ("M", Role::Mediator, m), ("Y", Role::Outcome, y)]))
}

/// Parameters for an outcome additive in a mediator term and an exposure term.
pub fn random_additive_params(seed: u64, with_confounder: bool) -> AdditiveOutcomeParams {
    let mut g = Gen::new(seed);
    let c = g.covariate();
    let m_sup = g.support();
    let exposure = g.table(&with_c(&c, &[]), &BINARY);
    let confounder = with_confounder.then(|| {
        let l_sup = g.support();
        g.table(&with_c(&c, &[("A", &BINARY)]), &l_sup)
    });
    let mut m_parents = with_c(&c, &[("A", &BINARY)]);
    if let Some(l) = &confounder {
        m_parents.push(("L", &l.support));
    }
    let mediator = g.table(&m_parents, &m_sup);
    let n_e = g.rng.random_range(1..=2);
    let y_noise = g.pmf(n_e);
    let n_c = c.as_ref().map_or(1, |c| c.support.len());
    let n_l = confounder.as_ref().map_or(1, |l| l.support.len());
    let mediator_term = g.small_ints(n_c * m_sup.len() * n_e);
    let exposure_term = g.small_ints(n_c * 2 * n_l * n_e);
    AdditiveOutcomeParams { covariate: c, exposure, confounder, mediator, y_noise, mediator_term, exposure_term }
}

/// Parameters for a separable model `A → {N, O}`, `N → M`, `(O, M) → Y`.
pub fn random_separable_params(seed: u64) -> SeparableParams {
    let mut g = Gen::new(seed);
    let c = g.covariate();
    let (m_sup, y_sup) = (g.support(), g.support());
    let exposure = g.table(&with_c(&c, &[]), &BINARY);
    let mediator = g.table(&with_c(&c, &[("N", &BINARY)]), &m_sup);
    let outcome = g.table(&with_c(&c, &[("O", &BINARY), ("M", &m_sup)]), &y_sup);
    SeparableParams { covariate: c, exposure, mediator, outcome }
}
