//! JSON Lines trial log.
//!
//! The first line is `{"header": {...}}` carrying the resolved config and
//! its hash; every following line is one [`TrialRecord`] in index order.
//! Hand-written logs may omit the header.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::config::RunConfig;
use crate::record::{Mode, StrategyClass, TrialRecord};
use crate::strategy::Strategy;

pub const LOG_FORMAT: &str = "bell-trial-log/1";

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("log header config hash {found} does not match its config ({expected})")]
    HashMismatch { expected: String, found: String },
    #[error("log is incomplete: header announces {expected} trials, found {found}")]
    Incomplete { expected: u64, found: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogHeader {
    pub format: String,
    pub config_hash: String,
    pub strategy: String,
    pub strategy_class: StrategyClass,
    pub config: RunConfig,
}

impl LogHeader {
    pub fn new(config: &RunConfig, strategy: &Strategy) -> Self {
        let mut config = config.clone();
        config.output_dir = None;
        Self {
            format: LOG_FORMAT.to_string(),
            config_hash: config.config_hash(),
            strategy: strategy.name().to_string(),
            strategy_class: strategy.class(),
            config,
        }
    }

    pub fn mode(&self) -> Mode {
        self.config.mode
    }
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    header: LogHeader,
}

pub fn write_log<W: Write>(mut out: W, header: &LogHeader, records: &[TrialRecord]) -> std::io::Result<()> {
    serde_json::to_writer(&mut out, &HeaderLine { header: header.clone() })?;
    out.write_all(b"\n")?;
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Parses a log, checking the header hash, index order and completeness.
pub fn read_log<R: BufRead>(input: R) -> Result<(Option<LogHeader>, Vec<TrialRecord>), LogError> {
    let mut header: Option<LogHeader> = None;
    let mut records: Vec<TrialRecord> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| LogError::Malformed { line: line_no, message };
        let value: Value = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        if value.get("header").is_some() {
            if header.is_some() || !records.is_empty() {
                return Err(malformed("header must be the first line".into()));
            }
            let parsed: HeaderLine = serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;
            let expected = parsed.header.config.config_hash();
            if expected != parsed.header.config_hash {
                return Err(LogError::HashMismatch { expected, found: parsed.header.config_hash });
            }
            header = Some(parsed.header);
            continue;
        }
        let record: TrialRecord = serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;
        if let Some(prev) = records.last() {
            if record.trial_index <= prev.trial_index {
                return Err(malformed(format!(
                    "trial_index {} does not follow {}",
                    record.trial_index, prev.trial_index
                )));
            }
        }
        records.push(record);
    }
    if let Some(h) = &header {
        let found = records.len() as u64;
        let contiguous = records.iter().enumerate().all(|(k, r)| r.trial_index == k as u64);
        if found != h.config.n_trials || !contiguous {
            return Err(LogError::Incomplete { expected: h.config.n_trials, found });
        }
    }
    Ok((header, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::StrategySpec;
    use crate::harness::run_experiment;

    fn sample_log() -> Vec<u8> {
        let config = RunConfig::new(20, StrategySpec::GreedyMemory);
        let out = run_experiment(&config).unwrap();
        let mut buf = Vec::new();
        write_log(&mut buf, &out.header, &out.records).unwrap();
        buf
    }

    #[test]
    fn round_trips() {
        let buf = sample_log();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"header\":{\"format\":\"bell-trial-log/1\""));
        assert_eq!(text.lines().count(), 21);
        let (header, records) = read_log(buf.as_slice()).unwrap();
        assert_eq!(header.unwrap().strategy, "greedy-memory");
        assert_eq!(records.len(), 20);
    }

    #[test]
    fn reports_line_numbers() {
        let mut text = String::from_utf8(sample_log()).unwrap();
        text.push_str("{\"trial_index\": 99, \"a\": 3}\n");
        match read_log(text.as_bytes()) {
            Err(LogError::Malformed { line, .. }) => assert_eq!(line, 22),
            other => panic!("expected malformed, got {other:?}"),
        }
        let garbage = "{\"trial_index\":0,\"a\":1,\"b\":1,\"x\":1,\"y\":1,\"mode\":\"sequential\",\"strategy_class\":\"lhv\"}\nnot json\n";
        match read_log(garbage.as_bytes()) {
            Err(LogError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed, got {other:?}"),
        }
    }

    #[test]
    fn detects_truncation_and_tampering() {
        let text = String::from_utf8(sample_log()).unwrap();
        let truncated: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        assert!(matches!(read_log(truncated.as_bytes()), Err(LogError::Incomplete { expected: 20, found: 9 })));
        let tampered = text.replacen("\"setting_seed\":1", "\"setting_seed\":5", 1);
        assert!(matches!(read_log(tampered.as_bytes()), Err(LogError::HashMismatch { .. })));
    }

    #[test]
    fn headerless_logs_are_accepted() {
        let text = String::from_utf8(sample_log()).unwrap();
        let body: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
        let (header, records) = read_log(body.as_bytes()).unwrap();
        assert!(header.is_none());
        assert_eq!(records.len(), 20);
    }

    #[test]
    fn rejects_out_of_order_indices() {
        let rec = |k: u64| format!("{{\"trial_index\":{k},\"a\":1,\"b\":1,\"x\":1,\"y\":1,\"mode\":\"sequential\",\"strategy_class\":\"lhv\"}}\n");
        let text = format!("{}{}", rec(1), rec(1));
        assert!(matches!(read_log(text.as_bytes()), Err(LogError::Malformed { line: 2, .. })));
    }
}
