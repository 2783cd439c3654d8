use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::{ExposureLevels, Level};

/// One cell `(c, a, l, m, y)` of the factual joint; `l` is `None` without a confounder.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Cell {
    pub c: Vec<Level>,
    pub a: Level,
    pub l: Option<Level>,
    pub m: Level,
    pub y: Level,
}

/// A probability mass function over the factual variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservedLaw {
    pub cells: BTreeMap<Cell, f64>,
    pub covariate_names: Vec<String>,
    pub c_supports: Vec<Vec<Level>>,
    pub a_support: Vec<Level>,
    pub l_support: Option<Vec<Level>>,
    pub m_support: Vec<Level>,
    pub y_support: Vec<Level>,
    pub exposure: ExposureLevels,
}

impl ObservedLaw {
    pub fn total(&self) -> f64 {
        self.cells.values().sum()
    }

    pub fn has_l(&self) -> bool {
        self.l_support.is_some()
    }

    /// Total mass of cells satisfying `pred`.
    pub fn mass(&self, pred: impl Fn(&Cell) -> bool) -> f64 {
        self.cells.iter().filter(|(c, _)| pred(c)).map(|(_, p)| p).sum()
    }

    /// `(mass, E[Y · 1{pred}])` over cells satisfying `pred`.
    pub fn mass_and_y(&self, pred: impl Fn(&Cell) -> bool) -> (f64, f64) {
        self.cells
            .iter()
            .filter(|(c, _)| pred(c))
            .fold((0.0, 0.0), |(w, s), (c, p)| (w + p, s + p * c.y as f64))
    }

    /// Covariate strata with positive mass, with their probabilities.
    pub fn c_strata(&self) -> BTreeMap<Vec<Level>, f64> {
        let mut out: BTreeMap<Vec<Level>, f64> = BTreeMap::new();
        for (cell, &p) in &self.cells {
            if p > 0.0 {
                *out.entry(cell.c.clone()).or_default() += p;
            }
        }
        out
    }

    /// Confounder levels, or a single placeholder stratum when `L` is absent.
    pub fn l_levels(&self) -> Vec<Option<Level>> {
        match &self.l_support {
            Some(s) => s.iter().map(|&l| Some(l)).collect(),
            None => vec![None],
        }
    }

    /// Total-variation distance to another law on the same cells.
    pub fn total_variation(&self, other: &ObservedLaw) -> f64 {
        let mut keys: Vec<&Cell> = self.cells.keys().chain(other.cells.keys()).collect();
        keys.sort();
        keys.dedup();
        0.5 * keys
            .into_iter()
            .map(|k| (self.cells.get(k).unwrap_or(&0.0) - other.cells.get(k).unwrap_or(&0.0)).abs())
            .sum::<f64>()
    }
}
