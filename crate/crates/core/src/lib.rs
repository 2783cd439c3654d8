//! Exact counterfactual computation for discrete mediation models.
//!
//! Models are finite structural causal models (or explicit counterfactual
//! joints). Every counterfactual is obtained by enumerating the exogenous
//! noise space, so effect measures, identification functionals and the
//! indirect-effect criteria can be compared exactly.
//!
//! ```
//! use mediation::prelude::*;
//!
//! let scm = thm1_counterexample(0.5, 0.9).unwrap();
//! let table = scm.counterfactuals().unwrap();
//! let report = effect_report(&table).unwrap();
//! assert!(report.nie.abs() < 1e-12);
//! assert!((report.nie_r - 0.2).abs() < 1e-12);
//! ```

pub mod cli;
pub mod criteria;
pub mod effects;
pub mod engine;
mod error;
pub mod identify;
pub mod model;
pub mod random;
pub mod report;
pub mod sample;

pub use error::{Error, Result};

/// Absolute tolerance for identities that hold exactly under enumeration.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for near-boundary identities, independence tests and null checks.
pub const NULL_TOL: f64 = 1e-9;

pub mod prelude {
    pub use crate::criteria::{
        criterion_verdicts, m_always_affects_y_check, no_interaction_check, null_status,
        reproduce, reproduce_with_tolerance, search_violations, Criterion, CriterionVerdict, EffectSelector, Family,
        Monotonicity, NullStatus, Reproduction, TheoremCase,
    };
    pub use crate::effects::{
        controlled_direct_effect, effect_report, h_contrast, l_conditioned_randomized_effects,
        natural_effects, randomized_effects, reference_interaction, total_effect, EffectReport,
    };
    pub use crate::engine::{
        enumerate_units, evaluate, g_draw_mean, h_draw_mean, nested_outcome, observational_law,
        Arm, CompiledScm, CounterfactualModel, CounterfactualTable, DrawConditioning,
        Intervention, ObservedLaw, Unit, World,
    };
    pub use crate::identify::{
        check_assumption, identification_report, psi_cde, psi_nie, psi_nie_fixed_l, psi_nie_r_l, psi_nie_rl, psi_pe,
        psi_te, Assumption, AssumptionVerdict,
    };
    pub use crate::model::*;
    pub use crate::random::*;
    pub use crate::sample::{draw_from_law, draw_samples, empirical_law, estimate, Dataset, Estimand, Estimate};
    pub use crate::{Error, Result, EXACT_TOL, NULL_TOL};
}
