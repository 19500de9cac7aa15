//! Bell-test arena.
//!
//! Local-realistic strategies commit to counterfactual tables, a harness that
//! owns the setting coins runs them trial by trial, and an analysis layer
//! turns trial logs into Bell statistics, martingale certificates and
//! local-polytope verdicts.
//!
//! The probability and feasibility code is generic over [`Scalar`]; the
//! aliases below fix the common instantiations.

pub mod behavior;
pub mod config;
pub mod harness;
pub mod outcome;
pub mod polytope;
pub mod quantum;
pub mod record;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod simplex;
pub mod stats;
pub mod strategy;
pub mod table;
pub mod trial_log;

pub use behavior::{bell_lhs, no_signalling_check, Behavior, BehaviorError};
pub use config::{ConfigError, RunConfig, StrategySpec};
pub use harness::{run_experiment, run_trial, toss_settings, HarnessError, RunOutput};
pub use outcome::{Outcome, Setting, SettingPair};
pub use polytope::{chsh_facets, local_polytope_member, PolytopeError, PolytopeVerdict};
pub use quantum::{quantum_behavior, AngleSet};
pub use record::{History, Mode, StrategyClass, TrialRecord};
pub use report::{analyze, RunReport};
pub use scalar::Scalar;
pub use stats::{azuma_bound, bell_statistic, estimate_behavior, martingale_statistic};
pub use strategy::{LhvStrategy, NonlocalStrategy, Strategy};
pub use table::{delta, equality_count, select_outcomes, CounterfactualTable};

pub use num_rational::BigRational;

/// Double-precision behavior, the default for sampling and estimation.
pub type Behavior64 = Behavior<f64>;
/// Single-precision behavior.
pub type Behavior32 = Behavior<f32>;
/// Exact behavior; polytope verdicts over it involve no rounding.
pub type ExactBehavior = Behavior<BigRational>;
/// Polarizer angles in radians.
pub type Angles = AngleSet<f64>;
pub type Verdict64 = PolytopeVerdict<f64>;
pub type ExactVerdict = PolytopeVerdict<BigRational>;
