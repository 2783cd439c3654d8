//! Counterfactual models given directly as a joint law over
//! `(C, A, M(a*), M(a), Y(a*, m), Y(a, m))`, without structural equations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ExposureLevels, Level, PMF_TOLERANCE};
use crate::{Error, Result};

/// One atom of the counterfactual joint. Index 0 of `m` and `y` refers to
/// `a_star`, index 1 to `a`; `y[k][j]` is `Y(a_k, m_j)` for the `j`-th
/// mediator level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FfrcistgAtom {
    pub c: Vec<Level>,
    pub a: Level,
    pub m: [Level; 2],
    pub y: [Vec<Level>; 2],
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FfrcistgSpec {
    pub covariate_names: Vec<String>,
    pub c_supports: Vec<Vec<Level>>,
    pub m_support: Vec<Level>,
    pub y_support: Vec<Level>,
    pub exposure_levels: ExposureLevels,
    pub atoms: Vec<FfrcistgAtom>,
}

impl FfrcistgSpec {
    /// Checks normalization, supports and the one-world factorization.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let total: f64 = self.atoms.iter().map(|a| a.mass).sum();
        if (total - 1.0).abs() > PMF_TOLERANCE {
            problems.push(format!("joint pmf sums to {total}"));
        }
        let el = self.exposure_levels;
        if el.a == el.a_star {
            problems.push("a_star must differ from a".to_string());
        }
        for (i, atom) in self.atoms.iter().enumerate() {
            if !(0.0..=1.0).contains(&atom.mass) {
                problems.push(format!("atom {i} has mass {} outside [0, 1]", atom.mass));
            }
            if atom.a != el.a && atom.a != el.a_star {
                problems.push(format!("atom {i} has exposure {} outside {{a_star, a}}", atom.a));
            }
            if atom.c.len() != self.c_supports.len()
                || atom.c.iter().zip(&self.c_supports).any(|(v, s)| !s.contains(v))
            {
                problems.push(format!("atom {i} has covariates outside their supports"));
            }
            if atom.m.iter().any(|m| !self.m_support.contains(m)) {
                problems.push(format!("atom {i} has a mediator value outside the support"));
            }
            for arm in &atom.y {
                if arm.len() != self.m_support.len() || arm.iter().any(|y| !self.y_support.contains(y)) {
                    problems.push(format!("atom {i} has malformed outcome counterfactuals"));
                }
            }
        }
        if problems.is_empty() {
            let dev = self.one_world_deviation();
            if dev > PMF_TOLERANCE {
                problems.push(format!("one-world factorization fails by {dev:e}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(problems.join("; ")))
        }
    }

    /// Largest deviation, over every `(c, a', m)`, between the joint of
    /// `(A, M(a'), Y(a', m))` given `C = c` and the product of its marginals.
    pub fn one_world_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for arm in 0..2 {
            for j in 0..self.m_support.len() {
                let mut joint: BTreeMap<(&[Level], Level, Level, Level), f64> = BTreeMap::new();
                let mut pc: BTreeMap<&[Level], f64> = BTreeMap::new();
                let mut pa: BTreeMap<(&[Level], Level), f64> = BTreeMap::new();
                let mut pm: BTreeMap<(&[Level], Level), f64> = BTreeMap::new();
                let mut py: BTreeMap<(&[Level], Level), f64> = BTreeMap::new();
                for atom in &self.atoms {
                    let c = atom.c.as_slice();
                    let (m, y) = (atom.m[arm], atom.y[arm][j]);
                    *joint.entry((c, atom.a, m, y)).or_default() += atom.mass;
                    *pc.entry(c).or_default() += atom.mass;
                    *pa.entry((c, atom.a)).or_default() += atom.mass;
                    *pm.entry((c, m)).or_default() += atom.mass;
                    *py.entry((c, y)).or_default() += atom.mass;
                }
                for (&c, &p_c) in &pc {
                    if p_c <= 0.0 {
                        continue;
                    }
                    for (&(_, a), &p_a) in pa.range((c, Level::MIN)..=(c, Level::MAX)) {
                        for (&(_, m), &p_m) in pm.range((c, Level::MIN)..=(c, Level::MAX)) {
                            for (&(_, y), &p_y) in py.range((c, Level::MIN)..=(c, Level::MAX)) {
                                let observed = joint.get(&(c, a, m, y)).copied().unwrap_or(0.0);
                                let product = p_a * p_m * p_y / (p_c * p_c);
                                worst = worst.max((observed - product).abs());
                            }
                        }
                    }
                }
            }
        }
        worst
    }
}

/// Randomized binary `A`, `M(a) ~ Bernoulli(pi)` independent of the pair
/// `(Y(a,0), Y(a,1))` with law `betas`, `M(a*) = Y(a,0)Y(a,1) + M(a)|Y(a,1) - Y(a,0)|`,
/// and `Y(a*, 0) = Y(a*, 1)` equal to 1 with probability `gamma`.
pub fn thm3_counterexample(pi: f64, betas: [f64; 4], gamma: f64) -> Result<FfrcistgSpec> {
    for (name, x) in [("pi", pi), ("gamma", gamma)] {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Domain(format!("{name} = {x} must lie in the open interval (0, 1)")));
        }
    }
    if let Some(b) = betas.iter().find(|b| !(0.0..=1.0).contains(*b)) {
        return Err(Error::Domain(format!("beta entry {b} outside [0, 1]")));
    }
    let sum: f64 = betas.iter().sum();
    if (sum - 1.0).abs() > PMF_TOLERANCE {
        return Err(Error::Domain(format!("betas sum to {sum}, not 1")));
    }
    let pairs: [(Level, Level); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];
    let mut atoms = Vec::with_capacity(32);
    for a in [0, 1] {
        for m_a in [0 as Level, 1] {
            for (k, &(y0, y1)) in pairs.iter().enumerate() {
                for y_star in [0 as Level, 1] {
                    let m_star = y0 * y1 + m_a * (y1 - y0).abs();
                    let mass = 0.5
                        * if m_a == 1 { pi } else { 1.0 - pi }
                        * betas[k]
                        * if y_star == 1 { gamma } else { 1.0 - gamma };
                    atoms.push(FfrcistgAtom {
                        c: vec![],
                        a,
                        m: [m_star, m_a],
                        y: [vec![y_star, y_star], vec![y0, y1]],
                        mass,
                    });
                }
            }
        }
    }
    let spec = FfrcistgSpec {
        covariate_names: vec![],
        c_supports: vec![],
        m_support: vec![0, 1],
        y_support: vec![0, 1],
        exposure_levels: ExposureLevels::default(),
        atoms,
    };
    spec.validate()?;
    Ok(spec)
}
