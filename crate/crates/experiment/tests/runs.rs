use std::fs;

use nhbraid_experiment::config::ScenarioName;
use nhbraid_experiment::output::{summary_csv, AGGREGATE_HEADER, SERIES_HEADER, SUMMARY_HEADER};
use nhbraid_experiment::scenario::aggregate;
use nhbraid_experiment::{run_scenario, write_results, Manifest, ResolvedConfig};

fn small(name: ScenarioName, extra: &[&str]) -> ResolvedConfig {
    let mut sets: Vec<String> =
        ["chain1.n_sites=30", "chain2.n_sites=30", "perturbation.center=15"].iter().map(|s| s.to_string()).collect();
    sets.extend(extra.iter().map(|s| s.to_string()));
    ResolvedConfig::resolve(name, None, &sets, None).unwrap()
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

#[test]
fn fig2a_writes_one_series_of_500_rows() {
    let cfg = small(ScenarioName::Fig2a, &[]);
    let out = run_scenario(&cfg).unwrap();
    assert_eq!(out.rows.len(), 1);
    assert!(out.rows[0].final_loss <= 0.01);
    assert!((out.calibration_factor - 2.0).abs() < 1e-8);
    let dir = tempfile::tempdir().unwrap();
    let files = write_results(&out, &cfg, dir.path()).unwrap();
    let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into()).collect();
    assert_eq!(names, ["summary.csv", "aggregate.csv", "series_fig2a.csv", "run.json"]);
    let series = fs::read_to_string(dir.path().join("series_fig2a.csv")).unwrap();
    let lines: Vec<&str> = series.lines().collect();
    assert_eq!(lines.len(), 501);
    assert_eq!(lines[0], SERIES_HEADER);
    assert!(lines[1].starts_with("0,1,"), "{}", lines[1]);
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().next().unwrap(), SUMMARY_HEADER);
    let agg = fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    assert_eq!(agg.lines().next().unwrap(), AGGREGATE_HEADER);

    // Every number in the summary reads back to the same bits.
    let fields: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    let r = &out.rows[0];
    assert_eq!(fields[0], "fig2a");
    assert!(fields[1].parse::<f64>().unwrap().is_nan());
    for (s, v) in fields[3..].iter().zip([r.final_f_target, r.final_f_self, r.final_loss, r.gate_distance, r.leakage]) {
        assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    let manifest = Manifest::from_json(&fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(manifest.resolved_config().unwrap(), cfg);
    assert_eq!(manifest.rows, 1);
    assert_eq!(manifest.calibration_factor, out.calibration_factor);
}

#[test]
fn null_perturbation_reproduces_fig2a() {
    let a = run_scenario(&small(ScenarioName::Fig2a, &[])).unwrap();
    let b = run_scenario(&small(ScenarioName::Fig2b, &["sweep.grid=0, 0.05"])).unwrap();
    let (x, y) = (&a.rows[0], &b.rows[0]);
    assert_eq!(y.sweep_value, 0.0);
    assert_eq!(x.final_f_target.to_bits(), y.final_f_target.to_bits());
    assert_eq!(x.final_f_self.to_bits(), y.final_f_self.to_bits());
    assert_eq!(x.gate_distance.to_bits(), y.gate_distance.to_bits());
    assert_eq!(x.leakage.to_bits(), y.leakage.to_bits());
}

#[test]
fn fig3d_row_count_and_order() {
    let cfg = small(
        ScenarioName::Fig3d,
        &["sweep.grid=logspace(1e-3, 0.15, 3)", "ensemble.realizations=2", "drive.duration=10"],
    );
    let out = pool(2).install(|| run_scenario(&cfg)).unwrap();
    assert_eq!(out.rows.len(), 3 * 2 * 2);
    assert!(out.rows[..6].iter().all(|r| r.scenario == "fig3d-composite"));
    assert!(out.rows[6..].iter().all(|r| r.scenario == "fig3d-single"));
    assert!(out.rows.windows(2).all(|w| w[0].scenario != w[1].scenario
        || (w[0].sweep_value, w[0].realization) < (w[1].sweep_value, w[1].realization)));
    let agg = aggregate(&out.rows);
    assert_eq!(agg.len(), 6);
    assert!(agg.iter().all(|a| a.realizations == 2 && a.stderr_loss > 0.0));
    assert!(out.series.is_empty());
}

#[test]
fn ensemble_is_independent_of_thread_count() {
    let cfg = small(ScenarioName::Fig3b, &["ensemble.realizations=4", "drive.duration=10"]);
    let one = pool(1).install(|| run_scenario(&cfg)).unwrap();
    let three = pool(3).install(|| run_scenario(&cfg)).unwrap();
    let again = pool(1).install(|| run_scenario(&cfg)).unwrap();
    assert_eq!(summary_csv(&one.rows), summary_csv(&three.rows));
    assert_eq!(summary_csv(&one.rows), summary_csv(&again.rows));
    // Distinct realizations draw distinct errors.
    let losses: Vec<u64> = one.rows.iter().map(|r| r.final_loss.to_bits()).collect();
    assert!(losses.windows(2).all(|w| w[0] != w[1]));
    let other = small(ScenarioName::Fig3b, &["ensemble.realizations=4", "drive.duration=10", "errors.seed=2"]);
    assert_ne!(summary_csv(&run_scenario(&other).unwrap().rows), summary_csv(&one.rows));
}

#[test]
fn series_tags_for_sweeps() {
    let cfg = small(ScenarioName::Fig2b, &["sweep.grid=0, 0.05", "output.series=true"]);
    let out = run_scenario(&cfg).unwrap();
    let tags: Vec<&str> = out.series.iter().map(|s| s.tag.as_str()).collect();
    assert_eq!(tags, ["fig2b_p000_r000", "fig2b_p001_r000"]);
}

#[test]
fn unwritable_output_reports_the_path() {
    let cfg = small(ScenarioName::Fig2a, &["output.series=false"]);
    let out = run_scenario(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let e = write_results(&out, &cfg, &blocker.join("sub")).unwrap_err();
    assert!(e.to_string().contains("file"), "{e}");
    assert_eq!(e.exit_code(), 1);
}
