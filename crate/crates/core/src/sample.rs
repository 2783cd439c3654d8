//! Finite samples from a model's observational law, empirical laws and
//! plug-in estimates with percentile bootstrap intervals.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use rayon::prelude::*;
use serde::Serialize;
use statrs::statistics::{Data, OrderStatistics};

use crate::engine::{Cell, ObservedLaw};
use crate::identify::{psi_cde, psi_nie, psi_nie_r_l, psi_nie_rl, psi_pe, psi_te};
use crate::model::{ExposureLevels, Level, Scm};
use crate::{Error, Result};

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub source: String,
    pub n: usize,
    pub seed: u64,
}

/// Rows `(c, a, l, m, y)` with the supports of the generating law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    /// The law's variable frame; its cells are empty.
    frame: ObservedLaw,
    pub rows: Vec<Cell>,
    pub provenance: Option<Provenance>,
}

/// A generator keyed by `(seed, index)`, independent of evaluation order.
fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn weighted(pmf: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(pmf).map_err(|e| Error::Domain(format!("invalid sampling weights: {e}")))
}

/// Draws `n` i.i.d. rows from the model's observational law by sampling its noise.
pub fn draw_samples(scm: &Scm, n: usize, seed: u64) -> Result<Dataset> {
    let compiled = scm.compile()?;
    let samplers: Vec<WeightedIndex<f64>> = compiled.noise_pmfs().iter().map(|p| weighted(p)).collect::<Result<_>>()?;
    let rows = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k as u64);
            let noise: Vec<usize> = samplers.iter().map(|s| s.sample(&mut rng)).collect();
            compiled.factual_cell(&noise)
        })
        .collect();
    Ok(Dataset {
        frame: compiled.empty_law(),
        rows,
        provenance: Some(Provenance { source: model_label(scm), n, seed }),
    })
}

fn model_label(scm: &Scm) -> String {
    let names: Vec<&str> = scm.variables.iter().map(|v| v.name.as_str()).collect();
    format!("scm({})", names.join(","))
}

/// Draws `n` i.i.d. rows from an arbitrary observed law.
pub fn draw_from_law(law: &ObservedLaw, n: usize, seed: u64) -> Result<Dataset> {
    let cells: Vec<&Cell> = law.cells.keys().collect();
    let sampler = weighted(&law.cells.values().copied().collect::<Vec<_>>())?;
    let rows = (0..n)
        .into_par_iter()
        .map(|k| cells[sampler.sample(&mut stream(seed, k as u64))].clone())
        .collect();
    let mut frame = law.clone();
    frame.cells.clear();
    Ok(Dataset { frame, rows, provenance: Some(Provenance { source: "law".into(), n, seed }) })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.frame.covariate_names
    }

    pub fn has_l(&self) -> bool {
        self.frame.has_l()
    }

    pub fn exposure(&self) -> ExposureLevels {
        self.frame.exposure
    }

    /// Row counts per distinct cell.
    pub fn counts(&self) -> BTreeMap<Cell, u64> {
        let mut out = BTreeMap::new();
        for r in &self.rows {
            *out.entry(r.clone()).or_default() += 1;
        }
        out
    }

    fn header(&self) -> Vec<String> {
        let mut h = self.frame.covariate_names.clone();
        h.push("A".into());
        if self.has_l() {
            h.push("L".into());
        }
        h.push("M".into());
        h.push("Y".into());
        h
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.c.iter().map(Level::to_string).collect();
            rec.push(r.a.to_string());
            rec.extend(r.l.map(|l| l.to_string()));
            rec.push(r.m.to_string());
            rec.push(r.y.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Reads `C...,A[,L],M,Y` rows; supports are the observed levels. Without
    /// explicit exposure levels, `(0, 1)` is used when both occur, else the
    /// two smallest observed levels of `A`.
    pub fn read_csv<R: Read>(input: R, exposure: Option<ExposureLevels>) -> Result<Dataset> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
        let col = |name: &str| header.iter().position(|h| h == name);
        let (a, m, y) = match (col("A"), col("M"), col("Y")) {
            (Some(a), Some(m), Some(y)) => (a, m, y),
            _ => return Err(Error::Parse(format!("header {header:?} lacks one of A, M, Y"))),
        };
        let l = col("L");
        let covariates: Vec<usize> = (0..a).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let get = |j: usize| -> Result<Level> {
                let field = rec.get(j).ok_or_else(|| Error::Parse(format!("row {}: missing column {j}", i + 2)))?;
                field.trim().parse().map_err(|_| Error::Parse(format!("row {}: {field:?} is not an integer", i + 2)))
            };
            rows.push(Cell {
                c: covariates.iter().map(|&j| get(j)).collect::<Result<_>>()?,
                a: get(a)?,
                l: l.map(get).transpose()?,
                m: get(m)?,
                y: get(y)?,
            });
        }
        let support = |f: &dyn Fn(&Cell) -> Level| {
            let mut s: Vec<Level> = rows.iter().map(f).collect();
            s.sort_unstable();
            s.dedup();
            s
        };
        let a_support = support(&|c| c.a);
        let exposure = match exposure {
            Some(e) => e,
            None if a_support.contains(&0) && a_support.contains(&1) => ExposureLevels::default(),
            None => match a_support.as_slice() {
                [x, y, ..] => ExposureLevels { a_star: *x, a: *y },
                _ => return Err(Error::Parse("exposure column needs at least two levels".into())),
            },
        };
        let frame = ObservedLaw {
            cells: BTreeMap::new(),
            covariate_names: covariates.iter().map(|&j| header[j].clone()).collect(),
            c_supports: (0..covariates.len()).map(|k| support(&|c| c.c[k])).collect(),
            a_support,
            l_support: l.map(|_| support(&|c| c.l.expect("L column present"))),
            m_support: support(&|c| c.m),
            y_support: support(&|c| c.y),
            exposure,
        };
        let n = rows.len();
        Ok(Dataset { frame, rows, provenance: Some(Provenance { source: "csv".into(), n, seed: 0 }) })
    }

    pub fn load_csv(path: impl AsRef<Path>, exposure: Option<ExposureLevels>) -> Result<Dataset> {
        Dataset::read_csv(std::fs::File::open(path)?, exposure)
    }

    fn law_from_counts(&self, counts: impl IntoIterator<Item = (Cell, u64)>) -> ObservedLaw {
        let n = self.rows.len() as f64;
        let mut law = self.frame.clone();
        law.cells = counts.into_iter().filter(|(_, k)| *k > 0).map(|(c, k)| (c, k as f64 / n)).collect();
        law
    }
}

/// Relative frequencies of the dataset's rows.
pub fn empirical_law(ds: &Dataset) -> Result<ObservedLaw> {
    if ds.is_empty() {
        return Err(Error::Domain("empirical law of an empty dataset".into()));
    }
    Ok(ds.law_from_counts(ds.counts()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Estimand {
    Te,
    Cde(Level),
    Pe(Level),
    Nie,
    NieRL,
    NieRl,
}

impl Estimand {
    pub fn evaluate(&self, law: &ObservedLaw) -> Result<f64> {
        match *self {
            Estimand::Te => psi_te(law),
            Estimand::Cde(m) => psi_cde(law, m),
            Estimand::Pe(m) => psi_pe(law, m),
            Estimand::Nie => psi_nie(law),
            Estimand::NieRL => psi_nie_r_l(law),
            Estimand::NieRl => psi_nie_rl(law),
        }
    }
}

impl fmt::Display for Estimand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimand::Te => write!(f, "psi_te"),
            Estimand::Cde(m) => write!(f, "psi_cde({m})"),
            Estimand::Pe(m) => write!(f, "psi_pe({m})"),
            Estimand::Nie => write!(f, "psi_nie"),
            Estimand::NieRL => write!(f, "psi_nie_r_L"),
            Estimand::NieRl => write!(f, "psi_nie_rl"),
        }
    }
}

impl FromStr for Estimand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let level = |inner: &str| -> Result<Level> {
            inner.trim().parse().map_err(|_| Error::Parse(format!("bad mediator level in {s}")))
        };
        let arg = |prefix: &str| s.strip_prefix(prefix).and_then(|r| r.strip_suffix(')'));
        if let Some(m) = arg("psi_cde(") {
            return Ok(Estimand::Cde(level(m)?));
        }
        if let Some(m) = arg("psi_pe(") {
            return Ok(Estimand::Pe(level(m)?));
        }
        match s {
            "psi_te" => Ok(Estimand::Te),
            "psi_nie" => Ok(Estimand::Nie),
            "psi_nie_r_L" => Ok(Estimand::NieRL),
            "psi_nie_rl" => Ok(Estimand::NieRl),
            _ => Err(Error::Parse(format!(
                "unknown estimand {s} (expected psi_te, psi_cde(m), psi_pe(m), psi_nie, psi_nie_r_L or psi_nie_rl)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub estimand: Estimand,
    pub value: f64,
    /// Percentile bounds at level 0.95; `None` without bootstrap replicates.
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub n_boot: usize,
    /// Replicates whose resample kept every required cell nonempty.
    pub n_boot_valid: usize,
}

/// Cell counts of one bootstrap resample: a multinomial draw over the
/// observed cells, taken as successive conditional binomials.
fn resample_counts(cells: &[(Cell, u64)], n: u64, rng: &mut ChaCha8Rng) -> Result<Vec<(Cell, u64)>> {
    let mut left_n = n;
    let mut left_mass = n;
    let mut out = Vec::with_capacity(cells.len());
    for (cell, k) in cells {
        let drawn = if left_n == 0 {
            0
        } else if *k == left_mass {
            left_n
        } else {
            let p = *k as f64 / left_mass as f64;
            Binomial::new(left_n, p).map_err(|e| Error::Internal(format!("binomial draw: {e}")))?.sample(rng)
        };
        out.push((cell.clone(), drawn));
        left_n -= drawn;
        left_mass -= k;
    }
    Ok(out)
}

/// Plug-in estimate with a percentile bootstrap interval from `n_boot`
/// resamples; resamples with an empty required cell are discarded.
pub fn estimate(ds: &Dataset, estimand: Estimand, n_boot: usize, seed: u64) -> Result<Estimate> {
    let value = estimand.evaluate(&empirical_law(ds)?)?;
    if n_boot == 0 {
        return Ok(Estimate { estimand, value, ci_low: None, ci_high: None, n_boot, n_boot_valid: 0 });
    }
    let cells: Vec<(Cell, u64)> = ds.counts().into_iter().collect();
    let n = ds.len() as u64;
    let replicates: Vec<Option<f64>> = (0..n_boot)
        .into_par_iter()
        .map(|b| -> Result<Option<f64>> {
            let counts = resample_counts(&cells, n, &mut stream(seed, b as u64))?;
            match estimand.evaluate(&ds.law_from_counts(counts)) {
                Ok(v) => Ok(Some(v)),
                Err(Error::DegenerateStratum(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let valid: Vec<f64> = replicates.into_iter().flatten().collect();
    if valid.is_empty() {
        return Err(Error::DegenerateStratum("every bootstrap resample has an empty required cell".into()));
    }
    let n_valid = valid.len();
    let mut data = Data::new(valid);
    let (lo, hi) = (data.quantile(0.025), data.quantile(0.975));
    Ok(Estimate { estimand, value, ci_low: Some(lo), ci_high: Some(hi), n_boot, n_boot_valid: n_valid })
}

impl Estimate {
    pub fn to_report(&self) -> crate::report::Report {
        let mut r = crate::report::Report::new();
        r.text("estimand", self.estimand.to_string()).num("value", self.value);
        match (self.ci_low, self.ci_high) {
            (Some(lo), Some(hi)) => {
                r.num("ci_low", lo).num("ci_high", hi);
            }
            _ => {
                r.text("ci_low", "none").text("ci_high", "none");
            }
        }
        r.num("n_boot", self.n_boot as f64).num("n_boot_valid", self.n_boot_valid as f64);
        r
    }
}
