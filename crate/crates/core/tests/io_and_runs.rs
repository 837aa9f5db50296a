use std::fs;

use copvfc::output::{emit_csv, format_float, emit_summary, read_csv_column, TRACE_COLUMNS};
use copvfc::sim::{average_metric, TableRow};
use copvfc::{parse_config, run_scenario, Error, ScenarioConfig, Strategy, Trace};

fn short(strategy: Strategy) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default().with_strategy(strategy);
    cfg.t_end = 2.0;
    cfg
}

#[test]
fn three_row_trace_gives_four_lines() {
    let (mut trace, _) = run_scenario(&short(Strategy::Proposed)).unwrap();
    trace.rows.truncate(3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    emit_csv(&trace, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.ends_with('\n'));
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], TRACE_COLUMNS.join(","));
}

#[test]
fn averages_survive_csv_round_trip() {
    let (trace, metrics) = run_scenario(&short(Strategy::MdkPid)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    emit_csv(&trace, &path).unwrap();
    for (col, want) in [("fext_x", metrics.avg_fx), ("fext_y", metrics.avg_fy), ("p_r2h", metrics.avg_power)] {
        let series = read_csv_column(&path, col).unwrap();
        assert_eq!(series.len(), trace.rows.len());
        let got = average_metric(&series[1..]).unwrap();
        assert!((got - want).abs() <= 1e-9, "{col}: {got} vs {want}");
    }
}

fn aborting_config() -> ScenarioConfig {
    let mut cfg = short(Strategy::Opvfc).with_k1(100.0);
    cfg.field.ea = 10.0;
    cfg.pvfc.ea = 10.0;
    cfg
}

#[test]
fn abort_run_ends_with_flagged_row() {
    let (trace, metrics): (Trace, _) = run_scenario(&aborting_config()).unwrap();
    let abort = trace.abort.expect("small budget must abort");
    let last = trace.rows.last().unwrap();
    assert!(last.abort_flag);
    assert_eq!(last.t, abort.t);
    assert_eq!(metrics.aborted_at, Some(abort.t));
    assert!(last.field_energy > abort.budget);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    emit_csv(&trace, &path).unwrap();
    let flags = read_csv_column(&path, "abort_flag").unwrap();
    assert_eq!(*flags.last().unwrap(), 1.0);
    assert!(flags[..flags.len() - 1].iter().all(|f| *f == 0.0));
    let t_written = *read_csv_column(&path, "t").unwrap().last().unwrap();
    assert_eq!(t_written, format_float(abort.t).parse::<f64>().unwrap());
}

#[test]
fn summary_leaves_aborted_metrics_empty() {
    let (_, aborted) = run_scenario(&aborting_config()).unwrap();
    let (_, fine) = run_scenario(&short(Strategy::Proposed)).unwrap();
    let table = [
        TableRow { label: "opvfc_k1_100".into(), metrics: aborted },
        TableRow { label: "proposed".into(), metrics: fine },
    ];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    emit_summary(&table, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "strategy,avg_fx,avg_fy,avg_power,aborted_at");
    assert!(lines[1].starts_with("opvfc_k1_100,,,,"));
    assert!(lines[2].starts_with("proposed,") && lines[2].ends_with(','));
}

#[test]
fn emit_reports_unwritable_path() {
    let (trace, _) = run_scenario(&short(Strategy::Proposed)).unwrap();
    let path = std::path::Path::new("/nonexistent-dir/t.csv");
    match emit_csv(&trace, path) {
        Err(Error::Io { path: p, .. }) => assert_eq!(p, path),
        other => panic!("expected an I/O error, got {other:?}"),
    }
}

#[test]
fn empty_config_file_gives_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    fs::write(&path, "").unwrap();
    let cfg = parse_config(&path).unwrap();
    assert_eq!(cfg, ScenarioConfig::default());
    assert_eq!(cfg.strategy, Strategy::Proposed);
    assert_eq!(cfg.t_end, 20.0);
}

#[test]
fn same_seed_same_trace_other_seed_differs() {
    let cfg = short(Strategy::Proposed);
    let (a, _) = run_scenario(&cfg).unwrap();
    let (b, _) = run_scenario(&cfg).unwrap();
    assert_eq!(a.rows, b.rows);
    let (c, _) = run_scenario(&ScenarioConfig { seed: cfg.seed + 1, ..cfg }).unwrap();
    assert_ne!(a.rows, c.rows);
}

#[test]
fn halving_the_step_changes_metrics_by_under_one_percent() {
    let coarse = ScenarioConfig::default();
    let fine = ScenarioConfig { dt_sim: coarse.dt_sim / 2.0, ..coarse.clone() };
    for strategy in [Strategy::Proposed, Strategy::MdkPid] {
        let (_, a) = run_scenario(&coarse.with_strategy(strategy)).unwrap();
        let (_, b) = run_scenario(&fine.with_strategy(strategy)).unwrap();
        for (x, y) in [(a.avg_fx, b.avg_fx), (a.avg_fy, b.avg_fy), (a.avg_power, b.avg_power)] {
            assert!(((x - y) / y).abs() < 0.01, "{strategy}: {x} vs {y}");
        }
    }
}
