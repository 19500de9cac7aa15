//! Trial records and the history visible to memory strategies.

use serde::{Deserialize, Serialize};

use crate::outcome::{Outcome, Setting, SettingPair};
use crate::table::CounterfactualTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sequential,
    Galaxy,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Sequential => "sequential",
            Mode::Galaxy => "galaxy",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyClass {
    Lhv,
    Nonlocal,
    Quantum,
}

impl StrategyClass {
    /// Anything that is not a local hidden-variable model breaks locality.
    pub fn violates_locality(self) -> bool {
        self != StrategyClass::Lhv
    }
}

impl std::fmt::Display for StrategyClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StrategyClass::Lhv => "lhv",
            StrategyClass::Nonlocal => "nonlocal",
            StrategyClass::Quantum => "quantum",
        })
    }
}

/// One trial's observed settings and outcomes. LHV runs also carry the
/// committed counterfactual table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub a: Setting,
    pub b: Setting,
    pub x: Outcome,
    pub y: Outcome,
    pub mode: Mode,
    pub strategy_class: StrategyClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<CounterfactualTable>,
}

impl TrialRecord {
    pub fn pair(&self) -> SettingPair {
        SettingPair::new(self.a, self.b)
    }

    pub fn outcomes_equal(&self) -> bool {
        self.x == self.y
    }
}

/// All past trials of the current run, plus running setting-pair counts.
#[derive(Debug, Clone, Default)]
pub struct History {
    records: Vec<TrialRecord>,
    pair_counts: [u64; 4],
    equal_counts: [u64; 4],
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record. Indices must be strictly increasing.
    pub fn push(&mut self, record: TrialRecord) {
        if let Some(last) = self.records.last() {
            assert!(
                record.trial_index > last.trial_index,
                "history indices must increase: {} after {}",
                record.trial_index,
                last.trial_index
            );
        }
        let pair = record.pair().index();
        self.pair_counts[pair] += 1;
        self.equal_counts[pair] += u64::from(record.outcomes_equal());
        self.records.push(record);
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Times each setting pair has occurred, in [`SettingPair::ALL`] order.
    pub fn pair_counts(&self) -> [u64; 4] {
        self.pair_counts
    }

    /// Times each setting pair produced equal outcomes.
    pub fn equal_counts(&self) -> [u64; 4] {
        self.equal_counts
    }

    pub fn into_records(self) -> Vec<TrialRecord> {
        self.records
    }
}
