use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use anyhow::Context;
use bell_core::config::{AnglesSpec, StrategySpec};
use bell_core::harness::{run_experiment, HarnessError};
use bell_core::polytope::{local_polytope_member, PolytopeError, PolytopeVerdict};
use bell_core::report::{analyze, write_summary_csv, write_trajectory_csv, RunReport};
use bell_core::scalar::{shortest_decimal_rational, Scalar};
use bell_core::stats::{azuma_log_bound, martingale_statistic};
use bell_core::trial_log::{read_log, write_log};
use bell_core::{no_signalling_check, Behavior, CounterfactualTable, RunConfig};

use crate::overrides::resolve_run_config;
use crate::{AnalyzeArgs, CheckArgs, CliError, DemoArgs, RunArgs};

pub const DEMO_TRIALS: u64 = 100_000;
const DEMO_SETTING_SEED: u64 = 20_031;
const DEMO_STRATEGY_SEED: u64 = 7;

pub const LOG_FILE: &str = "trials.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

pub fn cmd_run(args: &RunArgs) -> Result<u8, CliError> {
    let config = resolve_run_config(args)?;
    let out_dir = config.output_dir.clone().expect("resolved config has an output dir");
    let output = run_experiment(&config).map_err(|e| match e {
        HarnessError::Config(c) => CliError::config(c),
        other => CliError::runtime(other),
    })?;

    fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    write_log(create(&out_dir.join(LOG_FILE))?, &output.header, &output.records).context("writing trial log")?;
    fs::write(out_dir.join(REPORT_FILE), output.report.to_json_string()).context("writing report")?;
    write_summary_csv(create(&out_dir.join(SUMMARY_FILE))?, std::slice::from_ref(&output.report))
        .context("writing summary")?;
    write_trajectory_csv(create(&out_dir.join(TRAJECTORY_FILE))?, &martingale_statistic(&output.records))
        .context("writing trajectory")?;

    let r = &output.report;
    println!(
        "{} ({}, {}): n = {}, bell_statistic = {:.6} ± {:.6}, T_n = {:.6}, polytope: {}",
        output.header.strategy,
        output.header.strategy_class,
        config.mode,
        r.n_trials,
        r.bell_statistic.value,
        r.bell_statistic.stderr,
        r.martingale.t_n,
        r.verdict_label(),
    );
    println!("wrote {}", out_dir.display());
    Ok(0)
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<u8, CliError> {
    let file = File::open(&args.log)
        .map_err(|e| CliError::runtime(format!("cannot open {}: {e}", args.log.display())))?;
    let (header, records) =
        read_log(BufReader::new(file)).map_err(|e| CliError::runtime(format!("{}: {e}", args.log.display())))?;
    let report = analyze(header.as_ref(), &records).map_err(CliError::runtime)?;
    let text = report.to_json_string();
    match &args.out {
        Some(path) => fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    if let Some(path) = &args.trajectory {
        write_trajectory_csv(create(path)?, &martingale_statistic(&records)).context("writing trajectory")?;
    }
    Ok(0)
}

/// Fixed-point with at most four decimals, trailing zeros dropped.
fn short(value: f64) -> String {
    let text = format!("{value:.4}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    if text == "-0" {
        "0".into()
    } else {
        text.into()
    }
}

fn describe_verdict<T: Scalar>(verdict: &PolytopeVerdict<T>) -> (u8, String, Vec<String>) {
    match verdict {
        PolytopeVerdict::Local { weights } => {
            let lines = CounterfactualTable::all()
                .zip(weights.iter())
                .filter(|(_, w)| !w.is_zero())
                .map(|(t, w)| format!("  weight {} on table {}", w, t))
                .collect();
            (0, "local: yes".into(), lines)
        }
        PolytopeVerdict::Nonlocal { facet } => {
            let value = facet.value.to_f64_lossy();
            (
                1,
                format!("local: NO (facet {} > 2)", short(value)),
                vec![format!("  violated facet {} = {}", facet.id(), facet.value)],
            )
        }
    }
}

pub fn cmd_check_behavior(args: &CheckArgs) -> Result<u8, CliError> {
    if !(args.tol.is_finite() && args.tol > 0.0) {
        return Err(CliError::input("--tol must be a positive number"));
    }
    let text = fs::read_to_string(&args.behavior)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", args.behavior.display())))?;
    let behavior = Behavior::<f64>::from_json_str(&text).map_err(|e| CliError::input(format!("invalid behavior: {e}")))?;

    if !no_signalling_check(&behavior, &args.tol) {
        println!("no-signalling: FAIL (marginal gap {}); local: NO", behavior.max_signalling_gap());
        return Ok(2);
    }

    let exact = behavior.to_exact();
    let (code, local_line, certificate, arithmetic) = match &exact {
        Some(exact) => {
            let tol = shortest_decimal_rational(args.tol).expect("finite tolerance");
            let (code, line, cert) = verdict_or_error(local_polytope_member(exact, &tol))?;
            (code, line, cert, "exact rational")
        }
        None => {
            let (code, line, cert) = verdict_or_error(local_polytope_member(&behavior, &args.tol))?;
            (code, line, cert, "floating point")
        }
    };
    println!("no-signalling: pass; {local_line}");
    println!("certificate ({arithmetic}, tol {}):", args.tol);
    for line in certificate {
        println!("{line}");
    }
    Ok(code)
}

fn verdict_or_error<T: Scalar>(
    result: Result<PolytopeVerdict<T>, PolytopeError>,
) -> Result<(u8, String, Vec<String>), CliError> {
    match result {
        Ok(v) => Ok(describe_verdict(&v)),
        Err(PolytopeError::Signalling { gap }) => Err(CliError { code: 2, message: format!("signalling behavior (gap {gap})") }),
        Err(e) => Err(CliError::runtime(e)),
    }
}

fn demo_quartet() -> Vec<(&'static str, StrategySpec)> {
    let plus = CounterfactualTable::from_values([1, 1, 1, 1]).expect("valid");
    vec![
        ("constant", StrategySpec::Constant { table: plus }),
        ("periodic", StrategySpec::Periodic { tables: vec![plus, plus.negated()] }),
        ("greedy-memory", StrategySpec::GreedyMemory),
        ("quantum", StrategySpec::Quantum { angles: AnglesSpec::default() }),
    ]
}

pub fn cmd_demo(args: &DemoArgs) -> Result<u8, CliError> {
    if args.n == 0 {
        return Err(CliError::config("n_trials: must be at least 1"));
    }
    let out_dir: PathBuf = args.out.clone().unwrap_or_else(|| "demo-out".into());
    fs::create_dir_all(&out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;

    println!(
        "{:<14} {:<8} {:>8} {:>15} {:>9} {:>10} {:>16}  {:<10} flags",
        "strategy", "class", "n", "bell_statistic", "stderr", "T_n", "azuma_log_bound", "within"
    );
    let mut reports: Vec<RunReport> = Vec::new();
    for (label, spec) in demo_quartet() {
        let mut config = RunConfig::new(args.n, spec);
        config.setting_seed = DEMO_SETTING_SEED;
        config.strategy_seed = DEMO_STRATEGY_SEED;
        let output = match run_experiment(&config) {
            Ok(o) => o,
            Err(HarnessError::Stats(e)) => {
                println!("{label:<14} {:<8} {:>8} {:>15}  flags: {e}", "-", args.n, "-");
                continue;
            }
            Err(e) => return Err(CliError::runtime(e)),
        };
        let r = &output.report;
        let t_n = r.martingale.t_n;
        let log_bound = azuma_log_bound(r.n_trials, t_n.max(0.0));
        let lhv = !r.locality_violating;
        let bell = r.bell_statistic;
        let within = if lhv {
            if bell.value <= 4.0 * bell.stderr { "<=0+4se" } else { "VIOLATED" }
        } else if (bell.value - (2f64.sqrt() - 1.0)).abs() <= 4.0 * bell.stderr {
            "~sqrt2-1"
        } else {
            "off"
        };
        let mut flags = Vec::new();
        if r.wide_confidence {
            flags.push("wide-CI");
        }
        if r.locality_violating {
            flags.push("locality-violating");
        }
        println!(
            "{label:<14} {:<8} {:>8} {:>15.6} {:>9.6} {:>10.6} {:>16.3}  {:<10} {}",
            output.header.strategy_class.to_string(),
            r.n_trials,
            bell.value,
            bell.stderr,
            t_n,
            log_bound,
            within,
            flags.join(",")
        );
        let path = out_dir.join(format!("{label}-trajectory.csv"));
        write_trajectory_csv(create(&path)?, &martingale_statistic(&output.records)).context("writing trajectory")?;
        reports.push(output.report);
    }
    write_summary_csv(create(&out_dir.join(SUMMARY_FILE))?, &reports).context("writing summary")?;
    println!("trajectories and summary written to {}", out_dir.display());
    Ok(0)
}
