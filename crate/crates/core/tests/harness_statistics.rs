use bell_core::config::{AnglesSpec, StrategySpec, TargetSpec};
use bell_core::harness::{counterfactual_replay, run_trials, SettingSource};
use bell_core::stats::{martingale_statistic, CellCounts};
use bell_core::strategy::iid_random_strategy;
use bell_core::{
    bell_lhs, quantum_behavior, run_experiment, Angles, Behavior, CounterfactualTable, LhvStrategy, Mode, RunConfig,
    SettingPair, Strategy, StrategyClass,
};

fn spec_quantum() -> StrategySpec {
    StrategySpec::Quantum { angles: AnglesSpec::default() }
}

#[test]
fn settings_are_fair_by_chi_square() {
    let n = 100_000u64;
    let source = SettingSource::new(42);
    let mut counts = [0u64; 4];
    for k in 0..n {
        counts[source.toss(k).index()] += 1;
    }
    let expected = n as f64 / 4.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    assert!(chi2 < 16.27, "chi-square {chi2} for {counts:?}");
    let sigma = (0.25f64 * 0.75 / n as f64).sqrt();
    assert!((sigma - 0.00137).abs() < 1e-5);
    for c in counts {
        assert!((c as f64 / n as f64 - 0.25).abs() <= 4.0 * sigma);
    }
}

#[test]
fn strategy_seed_does_not_move_settings() {
    let strategy_a = spec_quantum().build(1).unwrap();
    let strategy_b = spec_quantum().build(99).unwrap();
    let ra = run_trials(&strategy_a, 5000, 7, Mode::Sequential, true, &mut |_| {}).unwrap();
    let rb = run_trials(&strategy_b, 5000, 7, Mode::Sequential, true, &mut |_| {}).unwrap();
    assert!(ra.iter().zip(&rb).all(|(p, q)| (p.a, p.b) == (q.a, q.b)));
    assert!(ra.iter().zip(&rb).any(|(p, q)| (p.x, p.y) != (q.x, q.y)));
}

#[test]
fn lhv_logs_replay_locally() {
    let table = CounterfactualTable::from_values([1, -1, 1, -1]).unwrap();
    let strategy = StrategySpec::Periodic { tables: vec![table, table.negated()] }.build(0).unwrap();
    let records = run_trials(&strategy, 2000, 3, Mode::Sequential, true, &mut |_| {}).unwrap();
    for r in &records {
        let t = r.table.expect("LHV records keep their table");
        assert_eq!(counterfactual_replay(r, r.a, r.b), Some((r.x, r.y)));
        // Flipping only Bob's setting leaves Alice's outcome alone.
        let (x, _) = counterfactual_replay(r, r.a, r.b.flipped()).unwrap();
        assert_eq!(x, r.x);
        assert_eq!(t.left(r.a), r.x);
    }
}

#[test]
fn galaxy_matches_sequential_for_memoryless_strategies() {
    let specs = [
        spec_quantum(),
        StrategySpec::IidRandom { weights: vec![1.0 / 16.0; 16] },
        StrategySpec::Cheat { target: TargetSpec::Named("uniform".into()) },
    ];
    for spec in specs {
        let mut config = RunConfig::new(20_000, spec);
        let seq = run_experiment(&config).unwrap();
        config.mode = Mode::Galaxy;
        let gal = run_experiment(&config).unwrap();
        for (s, g) in seq.records.iter().zip(&gal.records) {
            assert_eq!((s.trial_index, s.a, s.b, s.x, s.y, s.table), (g.trial_index, g.a, g.b, g.x, g.y, g.table));
            assert_eq!(g.mode, Mode::Galaxy);
        }
        assert_eq!(seq.report.bell_statistic, gal.report.bell_statistic);
    }
    let mut config = RunConfig::new(10, StrategySpec::GreedyMemory);
    config.mode = Mode::Galaxy;
    assert!(run_experiment(&config).is_err());
}

fn cells_within_4_sigma(target: &Behavior<f64>, counts: &CellCounts) {
    for pair in SettingPair::ALL {
        let n = counts.pair_total(pair) as f64;
        for x in bell_core::Outcome::ALL {
            for y in bell_core::Outcome::ALL {
                let p = *target.p(x, y, pair);
                let observed = counts.cell(x, y, pair) as f64 / n;
                let sigma = (p * (1.0 - p) / n).sqrt().max(1.0 / n);
                assert!((observed - p).abs() <= 4.0 * sigma, "cell {x:?},{y:?},{}: {observed} vs {p}", pair.label());
            }
        }
    }
}

#[test]
fn cheat_and_quantum_samplers_converge_cellwise() {
    let target = quantum_behavior(&Angles::preset_chsh());
    for spec in [StrategySpec::Cheat { target: TargetSpec::Named("quantum-preset".into()) }, spec_quantum()] {
        let strategy = spec.build(11).unwrap();
        let records = run_trials(&strategy, 1_000_000, 12, Mode::Sequential, false, &mut |_| {}).unwrap();
        let counts = CellCounts::from_records(&records);
        cells_within_4_sigma(&target, &counts);

        // E[Z] = bell_lhs under fair coins.
        let traj = martingale_statistic(&records);
        let sd = 4.0 / (records.len() as f64).sqrt();
        assert!((traj.normalized() - bell_lhs(&target)).abs() <= 4.0 * sd);

        // Alice's marginal does not depend on Bob's setting.
        let n12 = counts.pair_total(SettingPair::ALL[1]) as f64;
        let plus12 = (counts.cell(bell_core::Outcome::Plus, bell_core::Outcome::Plus, SettingPair::ALL[1])
            + counts.cell(bell_core::Outcome::Plus, bell_core::Outcome::Minus, SettingPair::ALL[1]))
            as f64
            / n12;
        assert!((plus12 - 0.5).abs() <= 4.0 * (0.25 / n12).sqrt());
    }
}

#[test]
fn cheat_targets_have_expected_statistics() {
    for (name, expected) in [("uniform", -1.0), ("pr-box", -1.0), ("pr-box-aligned", 1.0)] {
        let config = RunConfig::new(50_000, StrategySpec::Cheat { target: TargetSpec::Named(name.into()) });
        let out = run_experiment(&config).unwrap();
        assert_eq!(out.header.strategy_class, StrategyClass::Nonlocal);
        assert!(out.report.locality_violating);
        let est = out.report.bell_statistic;
        assert!((est.value - expected).abs() <= 4.0 * est.stderr.max(1e-12), "{name}: {est:?}");
    }
}

#[test]
fn iid_uniform_tables_are_uniform() {
    let n = 160_000u64;
    let strategy = iid_random_strategy([1.0 / 16.0; 16], 5).unwrap();
    let history = bell_core::History::new();
    let mut counts = [0u64; 16];
    for k in 0..n {
        counts[strategy.respond(k, &history).unwrap().index()] += 1;
    }
    let sigma = ((1.0 / 16.0) * (15.0 / 16.0) / n as f64).sqrt();
    for c in counts {
        assert!((c as f64 / n as f64 - 1.0 / 16.0).abs() <= 4.0 * sigma, "{counts:?}");
    }

    let mut point = [0.0; 16];
    point[9] = 1.0;
    let strategy = iid_random_strategy(point, 5).unwrap();
    assert!((0..100).all(|k| strategy.respond(k, &history).unwrap().index() == 9));
}

#[test]
fn alternating_all_equal_tables_give_minus_two() {
    let plus = CounterfactualTable::from_values([1, 1, 1, 1]).unwrap();
    let config = RunConfig::new(100_000, StrategySpec::Periodic { tables: vec![plus, plus.negated()] });
    assert_eq!(run_experiment(&config).unwrap().report.bell_statistic.value, -2.0);
}

#[test]
fn quantum_favoured_pair_matches_prediction() {
    let strategy = spec_quantum().build(3).unwrap();
    assert!(matches!(strategy, Strategy::Nonlocal(_)));
    let records = run_trials(&strategy, 1_000_000, 4, Mode::Sequential, false, &mut |_| {}).unwrap();
    let counts = CellCounts::from_records(&records);
    let pair = SettingPair::ALL[1];
    let n = counts.pair_total(pair) as f64;
    let p_hat = counts.pair_equal(pair) as f64 / n;
    let p = (22.5f64.to_radians()).cos().powi(2);
    assert!((p - 0.8536).abs() < 1e-4);
    assert!((p_hat - p).abs() <= 4.0 * (p * (1.0 - p) / n).sqrt(), "{p_hat}");
}
