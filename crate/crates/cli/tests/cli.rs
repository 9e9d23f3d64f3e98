use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_droughtscan"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run_in(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn small_dataset(dir: &Path) {
    ok(dir, &["synth", "--cells", "40", "--seed", "7", "--out", "data", "-q"]);
}

#[test]
fn synth_then_report_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--cells", "100", "--seed", "7", "--out", "data", "-q"]);
    ok(d, &["report", "data/synthetic.csv", "--seed", "7", "--out", "a", "-q"]);
    ok(d, &["report", "data/synthetic.csv", "--seed", "7", "--out", "b", "-q"]);
    assert_eq!(tree(&d.join("a")), tree(&d.join("b")));
    let summary = std::fs::read_to_string(d.join("a/summary.txt")).unwrap();
    assert!(summary.starts_with("cells processed: 100\n"), "{summary}");
}

#[test]
fn replay_from_written_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_dataset(d);
    ok(
        d,
        &["report", "data/synthetic.csv", "--seed", "3", "--clusters", "3", "--reps", "20", "--out", "first", "-q"],
    );
    ok(d, &["report", "--config", "first/run.conf", "--out", "second", "-q"]);
    assert_eq!(tree(&d.join("first")), tree(&d.join("second")));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_dataset(d);
    std::fs::write(d.join("c.conf"), "input = data/synthetic.csv\nk = 3\nseed = 1\n").unwrap();
    ok(d, &["extract", "--config", "c.conf", "--k", "2", "--out", "x", "-q"]);
    let conf = std::fs::read_to_string(d.join("x/run.conf")).unwrap();
    assert!(conf.contains("k = 2\n"));
    assert!(conf.contains("seed = 1\n"));
    let rows = std::fs::read_to_string(d.join("x/lnpv.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 40 * 2);
}

#[test]
fn extract_single_cell() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut csv = String::from("lon,lat,year,month,pdsi\n");
    for m in 1..=12 {
        csv.push_str(&format!("-178.75,-58.75,1900,{m},{}\n", -(m as f64) * 0.3));
    }
    std::fs::write(d.join("one.csv"), &csv).unwrap();
    let before = std::fs::read(d.join("one.csv")).unwrap();
    ok(d, &["extract", "one.csv", "--out", "o", "-q"]);
    let out = std::fs::read_to_string(d.join("o/lnpv.csv")).unwrap();
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert!(rows.len() <= 10);
    assert!(rows.iter().all(|r| r.starts_with("-178.75,-58.75,")));
    assert_eq!(rows[0], "-178.75,-58.75,1,1900,12,-3.5999999999999996");
    assert_eq!(std::fs::read(d.join("one.csv")).unwrap(), before, "input must not change");
}

#[test]
fn geojson_is_structurally_valid() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_dataset(d);
    ok(d, &["report", "data/synthetic.csv", "--reps", "10", "--clusters", "2", "--out", "r", "-q"]);
    for name in ["lnpv.geojson", "clusters.geojson"] {
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("r").join(name)).unwrap()).unwrap();
        assert_eq!(v["type"], "FeatureCollection");
        let features = v["features"].as_array().unwrap();
        assert_eq!(features.len(), 40);
        for f in features {
            assert_eq!(f["type"], "Feature");
            assert_eq!(f["geometry"]["type"], "Point");
            let c = f["geometry"]["coordinates"].as_array().unwrap();
            assert_eq!(c.len(), 2);
            let (lon, lat) = (c[0].as_f64().unwrap(), c[1].as_f64().unwrap());
            assert!((-180.0..=180.0).contains(&lon) && (-90.0..=90.0).contains(&lat));
            assert!(f["properties"].is_object());
        }
    }
}

#[test]
fn every_subcommand_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_dataset(d);
    let input = "data/synthetic.csv";
    ok(d, &["ingest", input, "--out", "i", "-q"]);
    assert!(d.join("i/dataset.csv").exists());
    ok(d, &["coverage", input, "--out", "c", "-q"]);
    assert!(d.join("c/coverage.csv").exists());
    ok(d, &["cluster", input, "--clusters", "auto:2..4", "--scaling", "standardize", "--out", "k", "-q"]);
    assert!(d.join("k/silhouette.csv").exists());
    ok(d, &["trend", input, "--out", "t", "-q"]);
    assert!(d.join("t/mann_kendall_monthly.csv").exists());
    ok(d, &["nullband", input, "--reps", "10", "--out", "n", "-q"]);
    assert!(d.join("n/exceedance.csv").exists());
    ok(d, &["nullband", "--cells", "100", "--reps", "10", "--out", "n2", "-q"]);
    assert!(d.join("n2/nullband.csv").exists());
    ok(d, &["wavelet", input, "--out", "w", "-q"]);
    assert!(d.join("w/wavelet_global.csv").exists());
    ok(d, &["classify", "--input", input, "--out", "cl", "-q"]);
    assert!(d.join("cl/classes.csv").exists());
    let out = ok(d, &["classify", "-4.5", "-3.0", "0"]);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "-4.5,extreme drought\n-3,severe drought\n0,near normal\n"
    );
}

#[test]
fn wavelet_on_plain_series() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let series: String = (0..115)
        .map(|t| format!("{}\n", (2.0 * std::f64::consts::PI * t as f64 / 8.0).sin()))
        .collect();
    std::fs::write(d.join("s.txt"), series).unwrap();
    let out = ok(d, &["wavelet", "--series", "s.txt", "--out", "w"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("dominant period 8.00"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run_in(d, &["--help"]).status.code(), Some(0));
    assert_eq!(run_in(d, &["--version"]).status.code(), Some(0));
    assert_eq!(run_in(d, &["report", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run_in(d, &["report", "--out", "o"]).status.code(), Some(1));
    assert_eq!(run_in(d, &["report", "missing.csv", "--out", "o"]).status.code(), Some(2));
    std::fs::write(d.join("bad.conf"), "k = ten\n").unwrap();
    assert_eq!(run_in(d, &["report", "x.csv", "--config", "bad.conf", "--out", "o"]).status.code(), Some(1));
    std::fs::write(d.join("offgrid.csv"), "lon,lat,year,month,pdsi\n0.0,0.0,1900,1,-1\n").unwrap();
    let out = run_in(d, &["report", "offgrid.csv", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    assert!(!d.join("o").exists(), "failed runs must not leave output");
}

#[test]
fn threads_do_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_dataset(d);
    ok(d, &["report", "data/synthetic.csv", "--threads", "1", "--reps", "20", "--out", "a", "-q"]);
    ok(d, &["report", "data/synthetic.csv", "--threads", "3", "--reps", "20", "--out", "b", "-q"]);
    assert_eq!(tree(&d.join("a")), tree(&d.join("b")));
}
