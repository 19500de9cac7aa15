//! The trial harness: owns the setting coins, queries the strategy, and
//! records what was observed.
//!
//! For a local strategy each trial runs in a fixed order: the strategy
//! commits its counterfactual table, then both coins are tossed, then the
//! outcomes are read off the table. Settings come from a stream keyed by the
//! setting seed alone, so nothing the strategy does can influence them.

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::outcome::{Outcome, Setting, SettingPair};
use crate::record::{History, Mode, StrategyClass, TrialRecord};
use crate::report::{analyze, RunReport};
use crate::rng::{StreamFactory, SETTINGS_STREAM};
use crate::stats::StatsError;
use crate::strategy::{Strategy, StrategyError};
use crate::table::{select_outcomes, CounterfactualTable};
use crate::trial_log::LogHeader;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("run aborted: {0}")]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Ordered events emitted while a trial runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarnessEvent {
    TableCommitted { trial_index: u64, table: CounterfactualTable },
    SettingsTossed { trial_index: u64, pair: SettingPair },
    NonlocalQueried { trial_index: u64, pair: SettingPair },
    OutcomesRecorded { trial_index: u64, x: Outcome, y: Outcome },
}

/// Two independent fair coins, one per wing.
pub fn toss_settings<R: Rng + ?Sized>(rng: &mut R) -> SettingPair {
    let coin = |heads: bool| if heads { Setting::Two } else { Setting::One };
    let a = coin(rng.gen::<bool>());
    let b = coin(rng.gen::<bool>());
    SettingPair::new(a, b)
}

/// The harness's private coin source.
#[derive(Debug, Clone)]
pub struct SettingSource {
    streams: StreamFactory,
}

impl SettingSource {
    pub fn new(setting_seed: u64) -> Self {
        Self { streams: StreamFactory::new(setting_seed, SETTINGS_STREAM) }
    }

    pub fn toss(&self, trial_index: u64) -> SettingPair {
        toss_settings(&mut self.streams.stream(trial_index))
    }
}

/// Runs one trial. `observe` sees the events in the order they happen.
pub fn run_trial(
    strategy: &Strategy,
    history: &History,
    trial_index: u64,
    settings: &SettingSource,
    mode: Mode,
    log_tables: bool,
    observe: &mut dyn FnMut(HarnessEvent),
) -> Result<TrialRecord, StrategyError> {
    let (pair, x, y, table) = match strategy {
        Strategy::Local(s) => {
            let table = s.respond(trial_index, history)?;
            observe(HarnessEvent::TableCommitted { trial_index, table });
            let pair = settings.toss(trial_index);
            observe(HarnessEvent::SettingsTossed { trial_index, pair });
            let (x, y) = select_outcomes(&table, pair.a, pair.b);
            (pair, x, y, log_tables.then_some(table))
        }
        Strategy::Nonlocal(s) => {
            let pair = settings.toss(trial_index);
            observe(HarnessEvent::SettingsTossed { trial_index, pair });
            observe(HarnessEvent::NonlocalQueried { trial_index, pair });
            let (x, y) = s.respond(trial_index, history, pair.a, pair.b)?;
            (pair, x, y, None)
        }
    };
    observe(HarnessEvent::OutcomesRecorded { trial_index, x, y });
    Ok(TrialRecord {
        trial_index,
        a: pair.a,
        b: pair.b,
        x,
        y,
        mode,
        strategy_class: strategy.class(),
        table,
    })
}

/// Runs `n_trials` against an already-built strategy.
///
/// Sequential mode feeds the growing history to the strategy. Galaxy mode
/// runs every trial with an empty history in parallel and returns records in
/// index order; the strategy must be memoryless.
pub fn run_trials(
    strategy: &Strategy,
    n_trials: u64,
    setting_seed: u64,
    mode: Mode,
    log_tables: bool,
    observe: &mut dyn FnMut(HarnessEvent),
) -> Result<Vec<TrialRecord>, HarnessError> {
    let settings = SettingSource::new(setting_seed);
    match mode {
        Mode::Sequential => {
            let mut history = History::new();
            for k in 0..n_trials {
                let record = run_trial(strategy, &history, k, &settings, mode, log_tables, observe)?;
                history.push(record);
            }
            Ok(history.into_records())
        }
        Mode::Galaxy => {
            if !strategy.memoryless() {
                return Err(ConfigError::invalid(
                    "mode",
                    format!("galaxy mode requires a memoryless strategy; \"{}\" uses history", strategy.name()),
                )
                .into());
            }
            let empty = History::new();
            let records = (0..n_trials)
                .into_par_iter()
                .map(|k| run_trial(strategy, &empty, k, &settings, mode, log_tables, &mut |_| {}))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(records)
        }
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub header: LogHeader,
    pub records: Vec<TrialRecord>,
    pub report: RunReport,
}

pub fn run_experiment(config: &RunConfig) -> Result<RunOutput, HarnessError> {
    run_experiment_observed(config, &mut |_| {})
}

pub fn run_experiment_observed(
    config: &RunConfig,
    observe: &mut dyn FnMut(HarnessEvent),
) -> Result<RunOutput, HarnessError> {
    config.validate()?;
    let strategy = config.strategy.build(config.strategy_seed)?;
    let log_tables = config.log_tables && strategy.class() == StrategyClass::Lhv;
    let records = run_trials(&strategy, config.n_trials, config.setting_seed, config.mode, log_tables, observe)?;
    let header = LogHeader::new(config, &strategy);
    let report = analyze(Some(&header), &records)?;
    Ok(RunOutput { header, records, report })
}

/// Outcomes a logged LHV trial would have produced under other settings.
/// `None` for records without a committed table.
pub fn counterfactual_replay(record: &TrialRecord, a: Setting, b: Setting) -> Option<(Outcome, Outcome)> {
    record.table.map(|t| select_outcomes(&t, a, b))
}
