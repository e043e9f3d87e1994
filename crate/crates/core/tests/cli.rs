use std::path::Path;
use std::process::{Command, Output};

use mwsn::output::SWEEP_HEADER;

fn mwsn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mwsn")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn analyze_prints_golden_counts() {
    let out = mwsn(&["analyze", "--td", "1000", "--pd", "0.99"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for line in [
        "min_nodes_static(pd=0.99) = 94",
        "min_nodes_mobile(pd=0.99, t=1000) = 13",
        "nodes_no_overlap(td=1000) = 3",
        "detect_prob_mobile(t=1000) = 0.973107",
        "detect_prob_static = 0.387909",
    ] {
        assert!(text.lines().any(|l| l == line), "missing `{line}` in\n{text}");
    }
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# long event\nn_nodes = 26\ntarget_duration = 1000\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let text = stdout(&mwsn(&["analyze", "--config", cfg]));
    assert!(text.contains("n_nodes = 26\n"));
    let text = stdout(&mwsn(&["analyze", "--config", cfg, "--n", "10"]));
    assert!(text.contains("n_nodes = 10\n"));
    assert!(text.contains("t_s = 1000\n"));
}

#[test]
fn bad_config_exits_one_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "runs = 10\nwarp_factor = 9\n").unwrap();

    let o = mwsn(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warp_factor"));
    assert!(!out.exists());

    let o = mwsn(&["sweep", "--runs", "10", "--dt", "100", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dt"));
    assert!(!out.exists());

    let o = mwsn(&["simulate", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_two() {
    let o = mwsn(&["simulate", "--runs", "5", "--out", "/nonexistent-dir/out.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    assert!(mwsn(&["--help"]).status.success());
    assert!(mwsn(&["sweep", "--help"]).status.success());
}

fn sweep_to(path: &Path) -> Output {
    mwsn(&[
        "sweep",
        "--runs",
        "50",
        "--n-values",
        "2,10",
        "--td-values",
        "100,300",
        "--models",
        "random_walk,static",
        "--out",
        path.to_str().unwrap(),
    ])
}

#[test]
fn sweep_csv_round_trips_and_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(sweep_to(&a).status.success());
    assert!(sweep_to(&b).status.success());
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());

    let mut reader = csv::Reader::from_path(&a).unwrap();
    let headers: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(headers.join(","), SWEEP_HEADER);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 8);
    let keys: Vec<(String, usize, f64)> =
        rows.iter().map(|r| (r[0].to_string(), r[1].parse().unwrap(), r[2].parse().unwrap())).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.total_cmp(&y.2)));
    assert_eq!(keys, sorted);
    for r in &rows {
        for field in 3..7 {
            let v: f64 = r[field].parse().unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
        assert_eq!(&r[7], "50");
    }
}

#[test]
fn simulate_output_repeats_exactly() {
    let args = ["simulate", "--runs", "200", "--model", "coverage_based", "--target", "linear_crossing", "--seed", "9"];
    let first = mwsn(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, mwsn(&args).stdout);
}

#[test]
fn snapshot_writes_positions_and_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let (pos, hist) = (dir.path().join("pos.csv"), dir.path().join("hist.csv"));
    let o = mwsn(&[
        "snapshot",
        "--n",
        "20",
        "--runs",
        "4",
        "--times",
        "0,200",
        "--out",
        pos.to_str().unwrap(),
        "--hist-out",
        hist.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let positions = std::fs::read_to_string(&pos).unwrap();
    assert_eq!(positions.lines().next(), Some("time_s,node_index,x_m,y_m"));
    assert_eq!(positions.lines().count(), 1 + 2 * 20);

    let mut reader = csv::Reader::from_path(&hist).unwrap();
    let total: u64 = reader.records().map(|r| r.unwrap()[2].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 4 * 20);
}
