use std::process::{Command, Output};

fn cwlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cwlab"))
        .args(args)
        .env_remove("CWLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

/// Parses CSV output into (header, rows).
fn csv_rows(out: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    let text = stdout(out);
    let mut lines = text.lines();
    let split = |l: &str| l.split(',').map(str::to_owned).collect::<Vec<_>>();
    let header = split(lines.next().expect("header"));
    (header, lines.map(split).collect())
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|c| c == name)
        .expect("column present")
}

#[test]
fn limit_check_converges_to_gaussian_variance() {
    let out = cwlab(&[
        "limit-check",
        "--beta",
        "0.5",
        "--k",
        "2",
        "--alpha",
        "0.5",
        "--n",
        "256:16384:2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&out);
    assert_eq!(
        header,
        [
            "n",
            "beta",
            "k",
            "alpha",
            "exact_moment",
            "limit_moment",
            "abs_gap"
        ]
    );
    assert_eq!(rows.len(), 7);
    let last = rows.last().unwrap();
    assert_eq!(last[0], "16384");
    let moment: f64 = last[column(&header, "exact_moment")].parse().unwrap();
    assert!((moment / 2.0 - 1.0).abs() < 0.02, "{moment}");
    let summary = String::from_utf8(out.stderr).unwrap();
    assert!(summary.contains("PASS"), "{summary}");
}

#[test]
fn phase_scan_flags_both_regimes() {
    let out = cwlab(&["phase", "--beta", "0.2:3.0:+0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, ["beta", "m", "phase"]);
    assert_eq!(rows.len(), 29);
    let mut previous = 0.0;
    for row in &rows {
        let beta: f64 = row[0].parse().unwrap();
        let m: f64 = row[1].parse().unwrap();
        if beta <= 1.0 {
            assert_eq!(m, 0.0);
            assert_eq!(row[2], "subcritical");
        } else {
            assert!(m > previous, "m must increase: {m} after {previous}");
            assert_eq!(row[2], "supercritical");
            previous = m;
        }
    }
}

#[test]
fn odd_correlation_vanishes() {
    let out = cwlab(&["correlations", "--beta", "1", "--ell", "3", "--n", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, ["n", "beta", "ell", "exact", "hs", "asymptotic"]);
    assert_eq!(rows.len(), 1);
    for name in ["exact", "hs", "asymptotic"] {
        assert_eq!(rows[0][column(&header, name)].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn rows_follow_grid_order() {
    let out = cwlab(&[
        "correlations",
        "--beta",
        "0.5,0.25",
        "--n",
        "40,10,20",
        "--ell",
        "2",
        "--threads",
        "4",
    ]);
    let (_, rows) = csv_rows(&out);
    let keys: Vec<(String, String)> = rows.iter().map(|r| (r[1].clone(), r[0].clone())).collect();
    let b1 = "5.0000000000000000e-1".to_string();
    let b2 = "2.5000000000000000e-1".to_string();
    let expected: Vec<(String, String)> = [&b1, &b2]
        .iter()
        .flat_map(|b| ["40", "10", "20"].map(|n| ((*b).clone(), n.to_string())))
        .collect();
    assert_eq!(keys, expected);
}

#[test]
fn output_is_reproducible() {
    let args = [
        "sample",
        "--beta",
        "0.5,2",
        "--n",
        "30",
        "--samples",
        "20000",
        "--seed",
        "11",
        "--format",
        "json",
    ];
    let first = cwlab(&args);
    assert_eq!(first.status.code(), Some(0));
    for threads in ["1", "3"] {
        let mut with_threads = args.to_vec();
        with_threads.extend(["--threads", threads]);
        assert_eq!(cwlab(&with_threads).stdout, first.stdout);
    }
    let other_seed = cwlab(&[
        "sample",
        "--beta",
        "0.5,2",
        "--n",
        "30",
        "--samples",
        "20000",
        "--seed",
        "12",
        "--format",
        "json",
    ]);
    assert_ne!(other_seed.stdout, first.stdout);
}

#[test]
fn json_mirrors_csv() {
    let csv = cwlab(&["moments", "--beta", "0.5", "--n", "100,200", "--k", "2,4"]);
    let json = cwlab(&[
        "moments", "--beta", "0.5", "--n", "100,200", "--k", "2,4", "--format", "json",
    ]);
    let (header, rows) = csv_rows(&csv);
    let doc: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(doc["metadata"]["command"], "moments");
    assert_eq!(doc["metadata"]["config"]["n"], "100,200");
    let records = doc["records"].as_array().unwrap();
    assert_eq!(records.len(), rows.len());
    for (record, row) in records.iter().zip(&rows) {
        for (name, text) in header.iter().zip(row) {
            let value = &record[name];
            let from_json = value.as_f64().expect("numeric field");
            assert_eq!(from_json, text.parse::<f64>().unwrap(), "{name}");
        }
    }
}

#[test]
fn writes_to_file() {
    let dir = std::env::temp_dir().join(format!("cwlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("census.csv");
    let out = cwlab(&[
        "census",
        "--k",
        "4",
        "--n",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("k,n,r,w,w0,w_plus,w0_closed_form,count_bound,plus_bound,source\n"));
    assert!(text.contains("\n4,2,0,8,6,2,6,true,true,enumeration\n"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn laplace_check_agrees_at_large_n() {
    let out = cwlab(&[
        "laplace-check",
        "--beta",
        "0.5,1,2",
        "--n",
        "100000",
        "--ell",
        "0,2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&out);
    let err = column(&header, "rel_error");
    for row in rows {
        let e: f64 = row[err].parse().unwrap();
        assert!(e < 0.02, "{row:?}");
    }
}

#[test]
fn exit_codes() {
    // Unknown command and malformed flags: usage error.
    let out = cwlab(&["bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert_eq!(
        cwlab(&["phase", "--beta", "3:1:+0.1"]).status.code(),
        Some(2)
    );
    assert_eq!(cwlab(&["phase", "--beta", "-1"]).status.code(), Some(2));
    assert_eq!(
        cwlab(&["correlations", "--beta", "0.5", "--n", "4", "--ell", "6"])
            .status
            .code(),
        Some(2)
    );
    // No limit law for this scaling.
    assert_eq!(
        cwlab(&["limit-check", "--beta", "2", "--n", "100", "--alpha", "0.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cwlab(&["census", "--k", "8", "--n", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        cwlab(&["laplace-check", "--beta", "0.5", "--n", "100", "--ell", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cwlab(&["census", "--k", "2", "--n", "2", "--threads", "x"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn threads_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_cwlab"))
        .args(["phase", "--beta", "1.5"])
        .env("CWLAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let bad = Command::new(env!("CARGO_BIN_EXE_cwlab"))
        .args(["phase", "--beta", "1.5"])
        .env("CWLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
