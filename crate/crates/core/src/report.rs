//! Run reports: everything recomputable from a trial log alone.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::default_azuma_thresholds;
use crate::outcome::SettingPair;
use crate::polytope::{local_polytope_member, max_facet, PolytopeError, PolytopeVerdict, VerdictSummary, CHSH_LOCAL_BOUND};
use crate::record::{Mode, StrategyClass, TrialRecord};
use crate::stats::{
    azuma_bound, azuma_log_bound, behavior_from_counts, bell_statistic_from_counts, martingale_statistic,
    BellEstimate, CellCounts, MartingaleTrajectory, StatsError,
};
use crate::trial_log::LogHeader;

/// Below this many trials in some setting pair, intervals are flagged wide.
pub const MIN_TRIALS_PER_PAIR: u64 = 30;

/// Standard errors by which a facet must exceed the local bound before a run
/// is called nonlocal.
pub const FACET_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    pub trials: u64,
    pub equal: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MartingaleSummary {
    pub final_s: i64,
    pub t_n: f64,
    pub max_excursion: i64,
    pub min_excursion: i64,
}

impl From<&MartingaleTrajectory> for MartingaleSummary {
    fn from(t: &MartingaleTrajectory) -> Self {
        Self {
            final_s: t.final_value(),
            t_n: t.normalized(),
            max_excursion: t.max_excursion(),
            min_excursion: t.min_excursion(),
        }
    }
}

/// `Pr{S_n >= n t} <= bound` for any local strategy under fair coins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AzumaCertificate {
    pub t: f64,
    pub bound: f64,
    pub log_bound: f64,
}

impl AzumaCertificate {
    pub fn new(n: u64, t: f64) -> Self {
        Self { t, bound: azuma_bound(n, t), log_bound: azuma_log_bound(n, t) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeSummary {
    /// Per-cell tolerance: five binomial standard deviations of a marginal
    /// difference at the smallest setting-pair count.
    pub tolerance: f64,
    pub no_signalling_gap: f64,
    pub max_facet: String,
    pub max_facet_value: f64,
    /// Standard error of the largest facet, `sqrt(Σ (1 - E_ab²) / N_ab)`.
    pub max_facet_stderr: f64,
    #[serde(flatten)]
    pub verdict: VerdictSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n_trials: u64,
    pub strategy: Option<String>,
    pub strategy_class: Option<StrategyClass>,
    pub mode: Option<Mode>,
    pub locality_violating: bool,
    pub config_hash: Option<String>,
    pub setting_seed: Option<u64>,
    pub strategy_seed: Option<u64>,
    pub counts: BTreeMap<String, PairCounts>,
    pub behavior: Value,
    pub bell_statistic: BellEstimate,
    pub martingale: MartingaleSummary,
    pub azuma: Vec<AzumaCertificate>,
    /// Certificate at `t = T_n` when `T_n > 0`.
    pub azuma_at_observed: Option<AzumaCertificate>,
    pub polytope: PolytopeSummary,
    /// Some setting pair has fewer than [`MIN_TRIALS_PER_PAIR`] trials.
    pub wide_confidence: bool,
}

/// Builds the report for a run from its header (if any) and records.
pub fn analyze(header: Option<&LogHeader>, records: &[TrialRecord]) -> Result<RunReport, StatsError> {
    let counts = CellCounts::from_records(records);
    let behavior = behavior_from_counts(&counts)?;
    let bell = bell_statistic_from_counts(&counts)?;
    let trajectory = martingale_statistic(records);
    let n = records.len() as u64;

    let strategy_class = header.map(|h| h.strategy_class).or_else(|| records.first().map(|r| r.strategy_class));
    let locality_violating = records.iter().any(|r| r.strategy_class.violates_locality());
    let thresholds = header.map_or_else(default_azuma_thresholds, |h| h.config.azuma_thresholds.clone());

    let min_pair = SettingPair::ALL.iter().map(|&p| counts.pair_total(p)).min().unwrap_or(0);
    let tolerance = 5.0 * (0.5 / min_pair as f64).sqrt();
    let facet = max_facet(&behavior);
    let facet_stderr = SettingPair::ALL
        .iter()
        .map(|&p| (1.0 - behavior.correlator(p).powi(2)).max(0.0) / counts.pair_total(p) as f64)
        .sum::<f64>()
        .sqrt();
    // The loose box tolerance absorbs sampling noise in the signalling screen
    // and the mixture weights, but would also swallow real violations, so
    // nonlocality is decided by facet significance.
    let membership = local_polytope_member(&behavior, &tolerance);
    let significant = facet.value - CHSH_LOCAL_BOUND > FACET_SIGMAS * facet_stderr + 1e-9;
    let verdict = match membership {
        Err(PolytopeError::Signalling { .. }) => VerdictSummary::from_result(&membership),
        _ if significant => VerdictSummary::Nonlocal { facet: facet.id(), value: facet.value },
        Ok(PolytopeVerdict::Nonlocal { .. }) => VerdictSummary::Inconclusive {
            reason: format!("facet {} exceeds the bound by less than {FACET_SIGMAS} stderr", facet.id()),
        },
        _ => VerdictSummary::from_result(&membership),
    };
    let polytope = PolytopeSummary {
        tolerance,
        no_signalling_gap: behavior.max_signalling_gap(),
        max_facet: facet.id(),
        max_facet_value: facet.value,
        max_facet_stderr: facet_stderr,
        verdict,
    };

    let t_n = trajectory.normalized();
    Ok(RunReport {
        n_trials: n,
        strategy: header.map(|h| h.strategy.clone()),
        strategy_class,
        mode: header.map(LogHeader::mode).or_else(|| records.first().map(|r| r.mode)),
        locality_violating,
        config_hash: header.map(|h| h.config_hash.clone()),
        setting_seed: header.map(|h| h.config.setting_seed),
        strategy_seed: header.map(|h| h.config.strategy_seed),
        counts: SettingPair::ALL
            .iter()
            .map(|&p| (p.label(), PairCounts { trials: counts.pair_total(p), equal: counts.pair_equal(p) }))
            .collect(),
        behavior: behavior.to_json()["p"].clone(),
        bell_statistic: bell,
        martingale: MartingaleSummary::from(&trajectory),
        azuma: thresholds.iter().map(|&t| AzumaCertificate::new(n, t)).collect(),
        azuma_at_observed: (t_n > 0.0).then(|| AzumaCertificate::new(n, t_n)),
        polytope,
        wide_confidence: min_pair < MIN_TRIALS_PER_PAIR,
    })
}

impl RunReport {
    /// Pretty JSON with a trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn verdict_label(&self) -> &'static str {
        match self.polytope.verdict {
            VerdictSummary::Local { .. } => "local",
            VerdictSummary::Nonlocal { .. } => "nonlocal",
            VerdictSummary::Signalling { .. } => "signalling",
            VerdictSummary::Inconclusive { .. } => "inconclusive",
        }
    }
}

pub const SUMMARY_CSV_HEADER: &str = "config_hash,strategy,strategy_class,mode,n_trials,bell_statistic,stderr,t_n,final_s,max_excursion,azuma_log_bound_at_t_n,max_facet_value,polytope_verdict,wide_confidence";

/// One CSV row summarizing the run (no header).
pub fn summary_csv_row(report: &RunReport) -> String {
    let opt = |v: Option<String>| v.unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        opt(report.config_hash.clone()),
        opt(report.strategy.clone()),
        opt(report.strategy_class.map(|c| c.to_string())),
        opt(report.mode.map(|m| m.to_string())),
        report.n_trials,
        report.bell_statistic.value,
        report.bell_statistic.stderr,
        report.martingale.t_n,
        report.martingale.final_s,
        report.martingale.max_excursion,
        opt(report.azuma_at_observed.map(|c| c.log_bound.to_string())),
        report.polytope.max_facet_value,
        report.verdict_label(),
        report.wide_confidence,
    )
}

pub fn write_summary_csv<W: Write>(mut out: W, reports: &[RunReport]) -> std::io::Result<()> {
    writeln!(out, "{SUMMARY_CSV_HEADER}")?;
    for r in reports {
        writeln!(out, "{}", summary_csv_row(r))?;
    }
    out.flush()
}

/// `trial_index,S_n` rows for `S_0 .. S_n`.
pub fn write_trajectory_csv<W: Write>(mut out: W, trajectory: &MartingaleTrajectory) -> std::io::Result<()> {
    writeln!(out, "trial_index,S_n")?;
    for (k, s) in trajectory.path().iter().enumerate() {
        writeln!(out, "{k},{s}")?;
    }
    out.flush()
}
