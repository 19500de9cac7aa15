//! Strategy contracts and the built-in strategy library.
//!
//! A local hidden-variable strategy commits to a full counterfactual table
//! without ever seeing the current settings: the settings are simply not
//! parameters of [`LhvStrategy::respond`]. Anything that wants to look at
//! both settings must implement [`NonlocalStrategy`] instead, and the harness
//! labels such runs as locality-violating.

use std::fmt;

use thiserror::Error;

use crate::behavior::{Behavior, BehaviorError};
use crate::outcome::{Outcome, Setting, SettingPair};
use crate::quantum::{quantum_behavior, AngleSet};
use crate::record::{History, StrategyClass};
use crate::rng::{sample_index, StreamFactory};
use crate::table::CounterfactualTable;

/// Stream name used by strategies for their private randomness.
pub const STRATEGY_STREAM: &str = "strategy";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error("weights must be 16 non-negative finite values summing to 1 (got sum {sum})")]
    InvalidWeights { sum: f64 },
    #[error("table list must not be empty")]
    EmptyTables,
    #[error("invalid target behavior: {0}")]
    InvalidBehavior(#[from] BehaviorError),
    #[error("strategy {name} failed at trial {trial_index}: {message}")]
    Failed { name: String, trial_index: u64, message: String },
}

/// Local-realistic responder.
pub trait LhvStrategy: Send + Sync {
    fn name(&self) -> &str;

    /// `true` if `respond` never reads the history; required for galaxy mode.
    fn memoryless(&self) -> bool;

    /// Potential outcomes for trial `trial_index`, committed before settings
    /// exist.
    fn respond(&self, trial_index: u64, history: &History) -> Result<CounterfactualTable, StrategyError>;
}

/// Responder that reads both settings of the current trial.
pub trait NonlocalStrategy: Send + Sync {
    fn name(&self) -> &str;

    /// `Nonlocal` for explicit cheats, `Quantum` for the quantum sampler.
    fn class(&self) -> StrategyClass;

    fn memoryless(&self) -> bool;

    fn respond(
        &self,
        trial_index: u64,
        history: &History,
        a: Setting,
        b: Setting,
    ) -> Result<(Outcome, Outcome), StrategyError>;
}

pub enum Strategy {
    Local(Box<dyn LhvStrategy>),
    Nonlocal(Box<dyn NonlocalStrategy>),
}

impl Strategy {
    pub fn name(&self) -> &str {
        match self {
            Strategy::Local(s) => s.name(),
            Strategy::Nonlocal(s) => s.name(),
        }
    }

    pub fn class(&self) -> StrategyClass {
        match self {
            Strategy::Local(_) => StrategyClass::Lhv,
            Strategy::Nonlocal(s) => s.class(),
        }
    }

    pub fn memoryless(&self) -> bool {
        match self {
            Strategy::Local(s) => s.memoryless(),
            Strategy::Nonlocal(s) => s.memoryless(),
        }
    }
}

impl fmt::Debug for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Strategy")
            .field("name", &self.name())
            .field("class", &self.class())
            .field("memoryless", &self.memoryless())
            .finish()
    }
}

/// Always answers with the same table.
#[derive(Debug, Clone)]
pub struct ConstantStrategy {
    table: CounterfactualTable,
}

pub fn constant_strategy(table: CounterfactualTable) -> ConstantStrategy {
    ConstantStrategy { table }
}

impl LhvStrategy for ConstantStrategy {
    fn name(&self) -> &str {
        "constant"
    }

    fn memoryless(&self) -> bool {
        true
    }

    fn respond(&self, _: u64, _: &History) -> Result<CounterfactualTable, StrategyError> {
        Ok(self.table)
    }
}

/// Samples a table independently each trial from fixed weights.
#[derive(Debug, Clone)]
pub struct IidRandomStrategy {
    weights: [f64; 16],
    stream: StreamFactory,
}

/// `weights[i]` is the probability of [`CounterfactualTable::from_index`]`(i)`.
pub fn iid_random_strategy(weights: [f64; 16], seed: u64) -> Result<IidRandomStrategy, StrategyError> {
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(StrategyError::InvalidWeights { sum });
    }
    Ok(IidRandomStrategy { weights, stream: StreamFactory::new(seed, STRATEGY_STREAM) })
}

impl IidRandomStrategy {
    pub fn weights(&self) -> &[f64; 16] {
        &self.weights
    }
}

impl LhvStrategy for IidRandomStrategy {
    fn name(&self) -> &str {
        "iid-random"
    }

    fn memoryless(&self) -> bool {
        true
    }

    fn respond(&self, trial_index: u64, _: &History) -> Result<CounterfactualTable, StrategyError> {
        let mut rng = self.stream.stream(trial_index);
        Ok(CounterfactualTable::from_index(sample_index(&mut rng, &self.weights)))
    }
}

/// Cycles through a fixed list of tables by trial index.
#[derive(Debug, Clone)]
pub struct TimePeriodicStrategy {
    tables: Vec<CounterfactualTable>,
}

/// Period equals `tables.len()`; trial `k` gets `tables[k mod period]`.
pub fn time_periodic_strategy(tables: Vec<CounterfactualTable>) -> Result<TimePeriodicStrategy, StrategyError> {
    if tables.is_empty() {
        return Err(StrategyError::EmptyTables);
    }
    Ok(TimePeriodicStrategy { tables })
}

impl TimePeriodicStrategy {
    pub fn period(&self) -> usize {
        self.tables.len()
    }
}

impl LhvStrategy for TimePeriodicStrategy {
    fn name(&self) -> &str {
        "periodic"
    }

    // Depends on the trial index only.
    fn memoryless(&self) -> bool {
        true
    }

    fn respond(&self, trial_index: u64, _: &History) -> Result<CounterfactualTable, StrategyError> {
        Ok(self.tables[(trial_index % self.tables.len() as u64) as usize])
    }
}

pub type HistoryRule = dyn Fn(&History) -> CounterfactualTable + Send + Sync;

/// Applies an arbitrary rule to the full two-sided history.
pub struct MemoryAdaptiveStrategy {
    name: String,
    rule: Box<HistoryRule>,
}

pub fn memory_adaptive_strategy<F>(name: impl Into<String>, rule: F) -> MemoryAdaptiveStrategy
where
    F: Fn(&History) -> CounterfactualTable + Send + Sync + 'static,
{
    MemoryAdaptiveStrategy { name: name.into(), rule: Box::new(rule) }
}

impl fmt::Debug for MemoryAdaptiveStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MemoryAdaptiveStrategy").field("name", &self.name).finish_non_exhaustive()
    }
}

impl LhvStrategy for MemoryAdaptiveStrategy {
    fn name(&self) -> &str {
        &self.name
    }

    fn memoryless(&self) -> bool {
        false
    }

    fn respond(&self, _: u64, history: &History) -> Result<CounterfactualTable, StrategyError> {
        Ok((self.rule)(history))
    }
}

/// Table maximizing the expected next increment of the martingale statistic
/// when the next setting pair is assumed to follow the empirical past pair
/// frequencies. Ties go to the lowest table index.
pub fn greedy_table(history: &History) -> CounterfactualTable {
    let counts = history.pair_counts();
    let weights: [i64; 4] = if history.is_empty() {
        [1; 4]
    } else {
        counts.map(|c| c as i64)
    };
    let score = |table: &CounterfactualTable| -> i64 {
        SettingPair::ALL
            .iter()
            .map(|&pair| i64::from(pair.bell_sign()) * weights[pair.index()] * i64::from(table.agrees(pair)))
            .sum()
    };
    let mut best = CounterfactualTable::from_index(0);
    let mut best_score = score(&best);
    for table in CounterfactualTable::all().skip(1) {
        let s = score(&table);
        if s > best_score {
            best = table;
            best_score = s;
        }
    }
    best
}

/// The built-in adaptive adversary, see [`greedy_table`].
pub fn greedy_memory_strategy() -> MemoryAdaptiveStrategy {
    memory_adaptive_strategy("greedy-memory", greedy_table)
}

/// Samples outcomes from a target behavior at the actual settings.
#[derive(Debug, Clone)]
pub struct BehaviorSampler {
    name: String,
    class: StrategyClass,
    target: Behavior<f64>,
    stream: StreamFactory,
}

impl BehaviorSampler {
    pub fn target(&self) -> &Behavior<f64> {
        &self.target
    }
}

/// Reads both settings and samples `(x, y)` from `target` at that pair.
pub fn nonlocal_cheat_strategy(target: Behavior<f64>, seed: u64) -> BehaviorSampler {
    BehaviorSampler {
        name: "cheat".into(),
        class: StrategyClass::Nonlocal,
        target,
        stream: StreamFactory::new(seed, STRATEGY_STREAM),
    }
}

/// Samples the photon-pair correlations at the given polarizer angles.
pub fn quantum_sampler(angles: &AngleSet<f64>, seed: u64) -> BehaviorSampler {
    BehaviorSampler {
        name: "quantum".into(),
        class: StrategyClass::Quantum,
        target: quantum_behavior(angles),
        stream: StreamFactory::new(seed, STRATEGY_STREAM),
    }
}

impl NonlocalStrategy for BehaviorSampler {
    fn name(&self) -> &str {
        &self.name
    }

    fn class(&self) -> StrategyClass {
        self.class
    }

    fn memoryless(&self) -> bool {
        true
    }

    fn respond(
        &self,
        trial_index: u64,
        _: &History,
        a: Setting,
        b: Setting,
    ) -> Result<(Outcome, Outcome), StrategyError> {
        let pair = SettingPair::new(a, b);
        let cells: [(Outcome, Outcome); 4] = [
            (Outcome::Plus, Outcome::Plus),
            (Outcome::Plus, Outcome::Minus),
            (Outcome::Minus, Outcome::Plus),
            (Outcome::Minus, Outcome::Minus),
        ];
        let weights = cells.map(|(x, y)| self.target.p(x, y, pair).max(0.0));
        let mut rng = self.stream.stream(trial_index);
        Ok(cells[sample_index(&mut rng, &weights)])
    }
}
