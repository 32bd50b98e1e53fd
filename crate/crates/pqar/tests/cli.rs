// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pqar::SegmentationReport;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn pqar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = pqar(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write_csv(dir: &TempDir, name: &str, values: &[f64]) -> PathBuf {
    let path = dir.path().join(name);
    let text: String = values.iter().map(|v| format!("{v}\n")).collect();
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: [&str; 4] = ["--islands", "6", "--subpopulation", "16"];

#[test]
fn level_shift_is_found() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let y: Vec<f64> = (0..400)
        .map(|t| rng.gen_range(-10.0..10.0) + if t >= 260 { 50.0 } else { 0.0 })
        .collect();
    let input = write_csv(&dir, "shift.csv", &y);
    let out = ok(&[&["segment", s(&input), "--seed", "2"][..], &SMALL].concat());
    let r = SegmentationReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(r.num_breaks, 1);
    assert!((r.relative_locations[0] - 0.65).abs() < 0.01, "{:?}", r.relative_locations);
    assert_eq!(r.segments[0].end, r.breaks[0]);
    assert_eq!(r.segments[1].start, r.breaks[0] + 1);
}

#[test]
fn constant_series_has_no_break() {
    let dir = TempDir::new().unwrap();
    let input = write_csv(&dir, "flat.csv", &[3.25; 100]);
    let out = ok(&[&["segment", s(&input)][..], &SMALL].concat());
    let r = SegmentationReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(r.num_breaks, 0);
    assert!(r.segments[0].fits[0].degenerate || r.segments[0].fits[0].loss == 0.0);
}

#[test]
fn reports_are_reproducible_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("sim.csv");
    ok(&["simulate", "--preset", "sim1", "--n", "600", "--seed", "4", "--out", s(&csv)]);
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        ok(&[
            &["--threads", threads, "segment", s(&csv), "--tau", "0.25,0.75"][..],
            &["--seed", "11", "--out", s(&out)],
            &SMALL,
        ]
        .concat());
        fs::read(out).unwrap()
    };
    let a = run("1", "a.json");
    let b = run("4", "b.json");
    let c = run("4", "c.json");
    assert_eq!(a, b);
    assert_eq!(b, c);
    let r = SegmentationReport::from_json(std::str::from_utf8(&a).unwrap()).unwrap();
    assert_eq!(r.to_json().unwrap().as_bytes(), &a[..]);
    assert!(r.wall_time_secs.is_none());
}

#[test]
fn plot_data_matches_report() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("sim.csv");
    ok(&["simulate", "--preset", "sim3", "--n", "400", "--seed", "5", "--out", s(&csv)]);
    let plot = dir.path().join("plot.csv");
    let out = ok(&[
        &["segment", s(&csv), "--tau", "0.5", "--emit-plot-data", s(&plot)][..],
        &SMALL,
    ]
    .concat());
    let r = SegmentationReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let mut rdr = csv::Reader::from_path(&plot).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["t", "y", "q_0.5", "break"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 400);
    for seg in &r.segments {
        let fit = &seg.fits[0];
        let mut loss = 0.0;
        for t in seg.start..=seg.end {
            let row = &rows[t - 1];
            assert_eq!(&row[3], if t == seg.start && t > 1 { "1" } else { "0" });
            if row[2].is_empty() {
                assert!(t - seg.start < seg.order);
                continue;
            }
            let u = row[1].parse::<f64>().unwrap() - row[2].parse::<f64>().unwrap();
            loss += u * (0.5 - f64::from(u < 0.0));
        }
        assert!((loss - fit.loss).abs() <= 1e-8 * fit.loss.max(1.0), "{loss} vs {}", fit.loss);
    }
}

#[test]
fn simulate_writes_series_and_truth() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("s1.csv");
    ok(&["simulate", "--preset", "sim1", "--seed", "9", "--out", s(&csv)]);
    let mut rdr = csv::Reader::from_path(&csv).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1024);
    assert_eq!(&rows[0][0], "1");
    let truth: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("s1.csv.truth.json")).unwrap())
            .unwrap();
    assert_eq!(truth["fractions"], serde_json::json!([0.5, 0.75]));
    assert_eq!(truth["breaks"], serde_json::json!([512, 768]));
    assert_eq!(truth["seed"], 9);

    let again = dir.path().join("again.csv");
    ok(&["simulate", "--preset", "SIM1", "--seed", "9", "--out", s(&again)]);
    assert_eq!(fs::read(&csv).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn simulated_tbill_is_finite() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("tb.csv");
    ok(&["simulate", "--preset", "tbill", "--seed", "3", "--out", s(&csv)]);
    let series = pqar::io::read_series(&csv).unwrap();
    assert_eq!(series.len(), 2392);
    assert!(series.values().iter().all(|v| v.is_finite()));
}

#[test]
fn simulate_from_regime_file() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"regimes": [
            {"spec": {"coefficients": [{"constant": 0.0}], "innovation": {"constant": 1.0}}, "len": 30},
            {"spec": {"coefficients": [{"constant": 2.0}], "innovation": {"constant": 0.0}}, "len": 20}
        ]}"#,
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    ok(&["simulate", "--spec", s(&spec), "--out", s(&csv)]);
    let series = pqar::io::read_series(&csv).unwrap();
    assert_eq!(series.len(), 50);
    assert_eq!(series.values()[29], 1.0);
    assert_eq!(series.values()[30], 2.0);
    let truth: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out.csv.truth.json")).unwrap())
            .unwrap();
    assert_eq!(truth["breaks"], serde_json::json!([30]));
}

#[test]
fn bad_inputs_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.csv");
    for args in [
        vec!["simulate", "--preset", "sim9", "--out", s(&out)],
        vec!["simulate", "--preset", "sim1", "--n", "0", "--out", s(&out)],
        vec!["segment", "/nonexistent/input.csv"],
        vec!["bogus-subcommand"],
    ] {
        let r = pqar(&args);
        assert_eq!(r.status.code(), Some(2), "{args:?}");
        assert!(!r.stderr.is_empty());
    }

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1.0\n2.0\nabc\n4.0\n").unwrap();
    let r = pqar(&["segment", s(&bad)]);
    assert_eq!(r.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&r.stderr);
    assert!(msg.contains('3'), "{msg}");

    let nan = dir.path().join("nan.csv");
    fs::write(&nan, "1.0\nNaN\n").unwrap();
    assert_eq!(pqar(&["segment", s(&nan)]).status.code(), Some(2));

    let good = write_csv(&dir, "good.csv", &[1.0; 50]);
    for extra in [["--tau", "1.5"], ["--weights", "0.2,0.3"], ["--islands", "0"]] {
        let r = pqar(&[&["segment", s(&good)][..], &extra].concat());
        assert_eq!(r.status.code(), Some(2), "{extra:?}");
    }
}

#[test]
fn newer_schema_major_is_rejected() {
    let dir = TempDir::new().unwrap();
    let input = write_csv(&dir, "flat.csv", &[1.0; 40]);
    let out = ok(&[&["segment", s(&input)][..], &SMALL].concat());
    let text = String::from_utf8(out.stdout).unwrap();
    let minor = text.replace("\"schema_version\": \"1.0\"", "\"schema_version\": \"1.7\"");
    assert!(SegmentationReport::from_json(&minor).is_ok());
    let major = text.replace("\"schema_version\": \"1.0\"", "\"schema_version\": \"2.0\"");
    assert!(matches!(
        SegmentationReport::from_json(&major),
        Err(pqar::PqarError::SchemaVersion { .. })
    ));
}

#[test]
fn experiment_with_one_replication() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("exp.csv");
    let json = dir.path().join("exp.json");
    let out = ok(&[
        &["experiment", "--preset", "sim3", "--n", "300", "--reps", "1"][..],
        &["--tau", "0.5", "--out", s(&csv), "--json", s(&json)],
        &SMALL,
    ]
    .concat());
    assert!(String::from_utf8_lossy(&out.stdout).contains("sim3"));
    let mut rdr = csv::Reader::from_path(&csv).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    let std_col = headers.iter().position(|h| h == "lambda1_std").unwrap();
    assert_eq!(&rows[0][std_col], "");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(summary["runs"].as_array().unwrap().len(), 1);

    let r = pqar(&["experiment", "--preset", "sim3", "--reps", "0"]);
    assert_eq!(r.status.code(), Some(2));
}
