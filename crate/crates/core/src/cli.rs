//! Command-line front end.
//!
//! | exit | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | invalid model |
//! | 2 | usage error |
//! | 3 | degenerate stratum (positivity failure) |
//! | 4 | reproduction failure |
//! | 5 | io or parse error |
//! | 6 | parameter outside its domain |
//! | 7 | unit space exceeds the enumeration cap |
//! | 8 | internal consistency failure |

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::criteria::{
    criterion_verdicts, null_status, reproduce_with_tolerance, sweep, verdicts_report, Family, TheoremCase,
};
use crate::effects::effect_report;
use crate::engine::{CounterfactualModel, CounterfactualTable};
use crate::identify::identification_report;
use crate::model::{
    additive_outcome_scm, pe_counterexample, separable_scm, thm1_counterexample, thm2_counterexample,
    thm3_counterexample, validate, ExposureLevels, FfrcistgSpec, Level, Scm,
};
use crate::random::{random_additive_params, random_separable_params};
use crate::report::{fmt_bool, fmt_num, Format, Report};
use crate::sample::{draw_samples, estimate, Dataset, Estimand};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "mediation", version, about = "Exact effect computation and criteria checks for discrete mediation models")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, default_value = "table")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

/// A model file or a builtin (`t1`, `t2`, `t3`, `pe`, `additive`, `separable`).
#[derive(Debug, Clone, clap::Args)]
pub struct ModelArgs {
    pub model: String,
    /// Builtin parameter, e.g. `--set pi=0.3`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every model invariant; exits 1 when any is violated.
    Validate { file: PathBuf },
    /// All effect measures of a model.
    Effects(ModelArgs),
    /// Identification functionals of the observational law and assumption checks.
    Identify(ModelArgs),
    /// Null and monotonicity statuses with criterion verdicts.
    Criteria(ModelArgs),
    /// Compare a theorem's closed form with enumeration.
    Reproduce {
        /// T1, T2, T3, S1 or PE.
        theorem: String,
        #[arg(long)]
        pi: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        pi0: Option<f64>,
        #[arg(long)]
        pi1: Option<f64>,
        #[arg(long)]
        pi2: Option<f64>,
        /// Four comma-separated probabilities.
        #[arg(long, value_delimiter = ',', num_args = 4)]
        betas: Option<Vec<f64>>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        m: Option<Level>,
        /// Run a grid with this many points per parameter instead of one case.
        #[arg(long)]
        grid: Option<usize>,
        /// Override the agreement tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Effect values and statuses over a family's grid (or seeds), as CSV.
    Sweep {
        family: String,
        /// Points per parameter, or number of seeds for random families.
        #[arg(long, default_value_t = 11)]
        grid: usize,
    },
    /// Draw a dataset from a model's observational law.
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plug-in estimate with a percentile bootstrap interval.
    Estimate {
        data: PathBuf,
        /// psi_te, psi_cde(m), psi_pe(m), psi_nie, psi_nie_r_L or psi_nie_rl.
        #[arg(long)]
        estimand: String,
        #[arg(long = "n-boot", default_value_t = 1000)]
        n_boot: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "a-star")]
        a_star: Option<Level>,
        #[arg(long)]
        a: Option<Level>,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidModel(_) => 1,
        Error::DegenerateStratum(_) => 3,
        Error::Reproduction(_) => 4,
        Error::Io(_) | Error::Parse(_) => 5,
        Error::Domain(_) => 6,
        Error::SizeLimit { .. } => 7,
        Error::Internal(_) => 8,
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}

/// Parses arguments, runs one subcommand, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok((out, code)) => {
            print!("{out}");
            code
        }
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', "; "));
            exit_code(&e)
        }
    }
}

enum Model {
    Scm(Scm),
    Ffrcistg(FfrcistgSpec),
}

impl Model {
    fn table(&self) -> Result<CounterfactualTable> {
        match self {
            Model::Scm(s) => s.counterfactuals(),
            Model::Ffrcistg(f) => f.counterfactuals(),
        }
    }
}

fn parse_sets(sets: &[String]) -> Result<BTreeMap<String, f64>> {
    sets.iter()
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("expected KEY=VALUE, got {kv}")))?;
            let v: f64 = v.trim().parse().map_err(|_| Error::Parse(format!("{k}: {v} is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn load_model_file(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    match Scm::from_json(&text) {
        Ok(scm) => Ok(Model::Scm(scm)),
        Err(scm_err) => match serde_json::from_str::<FfrcistgSpec>(&text) {
            Ok(spec) => Ok(Model::Ffrcistg(spec)),
            Err(_) => Err(scm_err),
        },
    }
}

fn resolve_model(args: &ModelArgs) -> Result<Model> {
    let sets = parse_sets(&args.set)?;
    let known: &[&str] = match args.model.as_str() {
        "t1" => &["pi", "beta"],
        "t2" => &["pi0", "pi1", "pi2", "beta"],
        "t3" => &["pi", "beta1", "beta2", "beta3", "beta4", "gamma"],
        "pe" => &["p"],
        "additive" => &["seed", "l"],
        "separable" => &["seed"],
        path => {
            if !sets.is_empty() {
                return Err(Error::Parse("--set applies only to builtin models".into()));
            }
            return load_model_file(Path::new(path));
        }
    };
    if let Some(k) = sets.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(Error::Parse(format!("builtin {} has no parameter {k} (expected {known:?})", args.model)));
    }
    let get = |k: &str, default: f64| sets.get(k).copied().unwrap_or(default);
    Ok(match args.model.as_str() {
        "t1" => Model::Scm(thm1_counterexample(get("pi", 0.5), get("beta", 0.9))?),
        "t2" => Model::Scm(thm2_counterexample(get("pi0", 0.4), get("pi1", 0.5), get("pi2", 0.1), get("beta", 0.9))?),
        "t3" => Model::Ffrcistg(thm3_counterexample(
            get("pi", 0.1),
            [get("beta1", 0.1), get("beta2", 0.2), get("beta3", 0.4), get("beta4", 0.3)],
            get("gamma", 0.5),
        )?),
        "pe" => Model::Scm(pe_counterexample(get("p", 0.5))?),
        "additive" => Model::Scm(additive_outcome_scm(&random_additive_params(get("seed", 0.0) as u64, get("l", 0.0) != 0.0))?),
        _ => Model::Scm(separable_scm(&random_separable_params(get("seed", 0.0) as u64))?),
    })
}

fn theorem_case(cmd: &Command) -> Result<TheoremCase> {
    let Command::Reproduce { theorem, pi, beta, pi0, pi1, pi2, betas, gamma, p, m, .. } = cmd else {
        unreachable!("called for reproduce only")
    };
    Ok(match theorem.to_ascii_uppercase().as_str() {
        "T1" => TheoremCase::T1 { pi: pi.unwrap_or(0.5), beta: beta.unwrap_or(0.9) },
        "S1" => TheoremCase::S1 { pi: pi.unwrap_or(0.5), beta: beta.unwrap_or(0.9) },
        "T2" => {
            let (p1, p2) = (pi1.unwrap_or(0.5), pi2.unwrap_or(0.1));
            TheoremCase::T2 { pi0: pi0.unwrap_or(1.0 - p1 - p2), pi1: p1, pi2: p2, beta: beta.unwrap_or(0.9) }
        }
        "T3" => {
            let b = betas.clone().unwrap_or_else(|| vec![0.1, 0.2, 0.4, 0.3]);
            TheoremCase::T3 { pi: pi.unwrap_or(0.1), betas: [b[0], b[1], b[2], b[3]], gamma: gamma.unwrap_or(0.5) }
        }
        "PE" => TheoremCase::Pe { p: p.unwrap_or(0.5), m: m.unwrap_or(0) },
        other => return Err(Error::Parse(format!("unknown theorem {other} (expected T1, T2, T3, S1 or PE)"))),
    })
}

fn execute(cli: &Cli) -> Result<(String, i32)> {
    let fmt = cli.format;
    let one = |r: Report| Ok((r.render(fmt), 0));
    match &cli.command {
        Command::Validate { file } => {
            let scm = match Scm::load(file) {
                Ok(scm) => scm,
                Err(Error::Parse(msg)) => return Ok((format!("malformed model file: {msg}\n"), 1)),
                Err(e) => return Err(e),
            };
            let report = validate(&scm);
            if report.is_valid() {
                Ok(("valid\n".into(), 0))
            } else {
                Ok((format!("{report}\n"), 1))
            }
        }
        Command::Effects(args) => one(effect_report(&resolve_model(args)?.table()?)?.to_report()),
        Command::Identify(args) => one(identification_report(&resolve_model(args)?.table()?)),
        Command::Criteria(args) => {
            let t = resolve_model(args)?.table()?;
            let status = null_status(&t);
            let mut r = status.to_report(&t);
            r.extend(verdicts_report(&criterion_verdicts(&status, &effect_report(&t)?)));
            one(r)
        }
        cmd @ Command::Reproduce { theorem, grid, tol, .. } => match grid {
            None => {
                let case = theorem_case(cmd)?;
                let tol = tol.unwrap_or_else(|| case.tolerance());
                one(reproduce_with_tolerance(&case, tol)?.to_report())
            }
            Some(steps) => {
                let cases = TheoremCase::grid(theorem, *steps)?;
                let mut worst: f64 = 0.0;
                for case in &cases {
                    let rep = reproduce_with_tolerance(case, tol.unwrap_or_else(|| case.tolerance()))?;
                    worst = worst.max(rep.difference);
                }
                let mut r = Report::new();
                r.text("theorem", theorem.to_ascii_uppercase()).num("cases", cases.len() as f64);
                r.num("max_difference", worst).flag("all_agree", true);
                one(r)
            }
        },
        Command::Sweep { family, grid } => {
            let family: Family = family.parse()?;
            Ok((sweep_csv(family, *grid)?, 0))
        }
        Command::Sample { model, n, seed, out } => {
            let Model::Scm(scm) = resolve_model(model)? else {
                return Err(Error::Domain("sampling needs a structural model".into()));
            };
            let ds = draw_samples(&scm, *n, *seed)?;
            ds.save_csv(out)?;
            let mut r = Report::new();
            r.text("out", out.display().to_string()).num("rows", ds.len() as f64).num("seed", *seed as f64);
            one(r)
        }
        Command::Estimate { data, estimand, n_boot, seed, a_star, a } => {
            let estimand: Estimand = estimand.parse()?;
            let exposure = match (a_star, a) {
                (Some(a_star), Some(a)) => Some(ExposureLevels { a_star: *a_star, a: *a }),
                (None, None) => None,
                _ => return Err(Error::Parse("--a-star and --a must be given together".into())),
            };
            let ds = Dataset::load_csv(data, exposure)?;
            one(estimate(&ds, estimand, *n_boot, *seed)?.to_report())
        }
    }
}

fn sweep_csv(family: Family, steps: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = family.param_names().iter().map(|s| s.to_string()).collect();
    header.extend(
        ["TE", "NDE", "NIE", "TE^R", "NDE^R", "NIE^R", "NIE^R_L", "sharp_null", "sharper_null", "monotonicity", "overlap_condition", "error"]
            .map(String::from),
    );
    w.write_record(&header)?;
    let points = family.grid(steps);
    for (point, row) in points.iter().zip(sweep(family, &points)) {
        let mut rec: Vec<String> = point.iter().map(|&x| fmt_num(x)).collect();
        match row {
            Ok(row) => {
                let e = &row.report;
                rec.extend([e.te, e.nde, e.nie, e.te_r, e.nde_r, e.nie_r].map(fmt_num));
                rec.push(e.nie_r_l.map(fmt_num).unwrap_or_default());
                rec.push(fmt_bool(row.status.sharp_null).into());
                rec.push(fmt_bool(row.status.sharper_null).into());
                rec.push(row.status.monotonicity.to_string());
                rec.push(fmt_bool(row.status.overlap_condition).into());
                rec.push(String::new());
            }
            Err(err) => {
                rec.extend(std::iter::repeat_n(String::new(), 11));
                rec.push(err.to_string().replace('\n', "; "));
            }
        }
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let errors = [
            Error::InvalidModel(Default::default()),
            Error::DegenerateStratum(String::new()),
            Error::Reproduction(String::new()),
            Error::Parse(String::new()),
            Error::Domain(String::new()),
            Error::SizeLimit { units: 2, cap: 1 },
            Error::Internal(String::new()),
        ];
        let mut codes: Vec<i32> = errors.iter().map(exit_code).collect();
        codes.sort_unstable();
        codes.dedup();
        assert_eq!(codes.len(), errors.len());
        assert!(!codes.contains(&0) && !codes.contains(&2));
    }

    #[test]
    fn builtins_resolve() {
        for name in ["t1", "t2", "t3", "pe", "additive", "separable"] {
            let args = ModelArgs { model: name.into(), set: vec![] };
            resolve_model(&args).unwrap().table().unwrap();
        }
        let bad = ModelArgs { model: "t1".into(), set: vec!["gamma=0.2".into()] };
        assert!(matches!(resolve_model(&bad), Err(Error::Parse(_))));
        let out_of_domain = ModelArgs { model: "t1".into(), set: vec!["pi=1.5".into()] };
        assert!(matches!(resolve_model(&out_of_domain), Err(Error::Domain(_))));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["mediation", "reproduce"]), 2);
        assert_eq!(run(["mediation", "bogus"]), 2);
        assert_eq!(run(["mediation", "reproduce", "T9"]), 5);
        assert_eq!(run(["mediation", "reproduce", "T1", "--pi", "0.5", "--beta", "0.9"]), 0);
    }

    #[test]
    fn sweep_has_one_row_per_point() {
        let csv = sweep_csv(Family::Theorem1, 3).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 10);
        assert!(lines[0].starts_with("pi,beta,TE,"));
    }
}
