//! Estimators over trial records.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::Behavior;
use crate::outcome::{Outcome, SettingPair};
use crate::record::TrialRecord;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("insufficient data: no trials with setting pair(s) {}", .missing.join(", "))]
    InsufficientData { missing: Vec<String> },
}

/// Trial counts per setting pair and per `(x, y, a, b)` cell.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CellCounts {
    /// Indexed like [`Behavior::probs`].
    pub cells: [u64; 16],
}

impl CellCounts {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a TrialRecord>) -> Self {
        let mut cells = [0u64; 16];
        for r in records {
            cells[4 * r.pair().index() + 2 * r.x.index() + r.y.index()] += 1;
        }
        Self { cells }
    }

    pub fn cell(&self, x: Outcome, y: Outcome, pair: SettingPair) -> u64 {
        self.cells[4 * pair.index() + 2 * x.index() + y.index()]
    }

    /// `N_ab`.
    pub fn pair_total(&self, pair: SettingPair) -> u64 {
        self.cells[4 * pair.index()..4 * pair.index() + 4].iter().sum()
    }

    /// `N_=,ab`: trials at `ab` with equal outcomes.
    pub fn pair_equal(&self, pair: SettingPair) -> u64 {
        self.cell(Outcome::Plus, Outcome::Plus, pair) + self.cell(Outcome::Minus, Outcome::Minus, pair)
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().sum()
    }

    pub fn missing_pairs(&self) -> Vec<SettingPair> {
        SettingPair::ALL.into_iter().filter(|&p| self.pair_total(p) == 0).collect()
    }

    fn require_all_pairs(&self) -> Result<(), StatsError> {
        let missing = self.missing_pairs();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(StatsError::InsufficientData { missing: missing.iter().map(|p| p.label()).collect() })
        }
    }
}

/// Relative frequencies `p̂(x, y | a, b) = count(x, y, a, b) / N_ab`.
pub fn estimate_behavior(records: &[TrialRecord]) -> Result<(Behavior<f64>, CellCounts), StatsError> {
    let counts = CellCounts::from_records(records);
    let behavior = behavior_from_counts(&counts)?;
    Ok((behavior, counts))
}

pub fn behavior_from_counts(counts: &CellCounts) -> Result<Behavior<f64>, StatsError> {
    counts.require_all_pairs()?;
    let probs = std::array::from_fn(|i| {
        let pair = SettingPair::from_index(i / 4);
        counts.cells[i] as f64 / counts.pair_total(pair) as f64
    });
    Ok(Behavior::new(probs).expect("relative frequencies are a valid behavior"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// `P̂(=|12) − P̂(=|11) − P̂(=|21) − P̂(=|22)` with the standard error of four
/// independent binomial proportions.
pub fn bell_statistic(records: &[TrialRecord]) -> Result<BellEstimate, StatsError> {
    bell_statistic_from_counts(&CellCounts::from_records(records))
}

pub fn bell_statistic_from_counts(counts: &CellCounts) -> Result<BellEstimate, StatsError> {
    counts.require_all_pairs()?;
    let mut value = 0.0;
    let mut variance = 0.0;
    for pair in SettingPair::ALL {
        let n = counts.pair_total(pair) as f64;
        let p = counts.pair_equal(pair) as f64 / n;
        value += f64::from(pair.bell_sign()) * p;
        variance += p * (1.0 - p) / n;
    }
    Ok(BellEstimate { value, stderr: variance.sqrt() })
}

/// Increment `Z = 4·1{x=y}·s(a,b)`, `s = +1` at (1,2) and `-1` elsewhere.
pub fn martingale_increment(record: &TrialRecord) -> i64 {
    4 * i64::from(record.outcomes_equal()) * i64::from(record.pair().bell_sign())
}

/// Running sums `S_0 = 0, S_k = Z_1 + … + Z_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MartingaleTrajectory {
    path: Vec<i64>,
}

impl MartingaleTrajectory {
    pub fn path(&self) -> &[i64] {
        &self.path
    }

    pub fn n(&self) -> u64 {
        (self.path.len() - 1) as u64
    }

    /// `S_n`.
    pub fn final_value(&self) -> i64 {
        *self.path.last().expect("S_0 always present")
    }

    /// `T_n = S_n / n`, or 0 for an empty run.
    pub fn normalized(&self) -> f64 {
        match self.n() {
            0 => 0.0,
            n => self.final_value() as f64 / n as f64,
        }
    }

    /// `max_k S_k`.
    pub fn max_excursion(&self) -> i64 {
        self.path.iter().copied().max().unwrap_or(0)
    }

    pub fn min_excursion(&self) -> i64 {
        self.path.iter().copied().min().unwrap_or(0)
    }
}

pub fn martingale_statistic(records: &[TrialRecord]) -> MartingaleTrajectory {
    let mut path = Vec::with_capacity(records.len() + 1);
    let mut s = 0i64;
    path.push(s);
    for r in records {
        s += martingale_increment(r);
        path.push(s);
    }
    MartingaleTrajectory { path }
}

/// Log of [`azuma_bound`]: `-n t² / 32`.
pub fn azuma_log_bound(n: u64, t: f64) -> f64 {
    -(n as f64) * t * t / 32.0
}

/// `exp(-n t² / 32)`: bound on `Pr{S_n >= n t}` for a supermartingale whose
/// increments lie in `[-4, 4]`.
pub fn azuma_bound(n: u64, t: f64) -> f64 {
    assert!(n >= 1, "azuma_bound needs n >= 1");
    assert!(t >= 0.0, "azuma_bound needs t >= 0");
    azuma_log_bound(n, t).exp()
}
