//! The `tsize` binary end to end.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tsize(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsize")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp_design(name: &str, body: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("tsize-{}-{name}.toml", std::process::id()));
    std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
    p
}

#[test]
fn size_chain_for_first_two_sample_row() {
    let out = stdout(&tsize(&["size", &fixture("table1_equal_01.toml"), "--format", "csv"]));
    let values: Vec<(String, String)> = out
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string())
        })
        .collect();
    let want = [("normal", "125.58"), ("g1", "127.50"), ("g2", "127.53"), ("two_step", "127.59"), ("inversion", "127.53")];
    for (m, v) in want {
        assert!(values.contains(&(m.to_string(), v.to_string())), "{m} {v} missing from\n{out}");
    }
}

#[test]
fn reproduce_bioequivalence_table() {
    let out = stdout(&tsize(&["reproduce-table", "4"]));
    let g2: Vec<&str> = out.lines().filter(|l| l.contains(",size,g2,")).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(g2, ["10.14", "18.65", "27.22", "35.80", "44.39", "52.98"]);
    let again = stdout(&tsize(&["reproduce-table", "4"]));
    assert_eq!(out, again, "CSV must be identical across runs");
}

#[test]
fn power_at_the_null_is_alpha() {
    let p = temp_design(
        "null",
        "[design]\nkind = \"two-sample\"\nmu0 = 0.3\nmu1 = 0.3\nsigma_sq = 2.0\n[levels]\nalpha = 0.05\nn = 40\n",
    );
    let out = stdout(&tsize(&["power", p.to_str().unwrap(), "--format", "csv"]));
    assert!(out.contains("exact_two_sided,40,5.00"), "{out}");
}

#[test]
fn overrides_replace_file_values() {
    let out = stdout(&tsize(&["power", &fixture("table5_margin3.toml"), "--n", "12,12", "--format", "csv"]));
    assert!(out.contains("welch_exact,24,22.63"), "{out}");
    assert!(out.contains("welch_approx,24,17.56"), "{out}");
    let out = stdout(&tsize(&["power", &fixture("table5_margin3.toml"), "--n", "50", "--margins", "-1.5,1.5", "--alpha", "0.05"]));
    assert!(out.contains("80.64%"), "{out}");
}

#[test]
fn simulate_prints_a_report() {
    let out = stdout(&tsize(&["simulate", &fixture("table4_row1.toml"), "--n", "5,5", "--reps", "2000", "--seed", "3", "--format", "csv"]));
    let line = out.lines().nth(1).unwrap();
    assert!(line.starts_with("5,5,2000,0,"), "{out}");
}

#[test]
fn schema_violation_exits_nonzero_and_names_the_field() {
    let p = temp_design("bad", "[design]\nkind = \"two-sample\"\nmu0 = 0.0\nmu1 = 1.0\nsigma_sq = 1.0\nvariance = 2.0\n");
    let o = tsize(&["size", p.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("variance"), "{err}");
}

#[test]
fn numerical_failure_exits_nonzero() {
    let p = temp_design("zero", "[design]\nkind = \"one-sample\"\nmu = 0.0\nsigma_sq = 1.0\n");
    let o = tsize(&["size", p.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("domain error"));
}

#[test]
fn missing_file_is_reported() {
    let o = tsize(&["size", "/nonexistent/design.toml"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read"));
}

#[test]
fn rounding_policies() {
    let up = stdout(&tsize(&["size", &fixture("table4_row1.toml"), "--format", "csv", "--round", "up"]));
    let nearest = stdout(&tsize(&["size", &fixture("table4_row1.toml"), "--format", "csv", "--round", "nearest"]));
    assert!(up.contains("inversion,10.29,11,6,5"), "{up}");
    assert!(nearest.contains("inversion,10.29,10,5,5"), "{nearest}");
    let none = stdout(&tsize(&["size", &fixture("table4_row1.toml"), "--format", "csv", "--round", "none"]));
    assert!(none.contains("inversion,10.29,,,"), "{none}");
    assert!(!tsize(&["size", &fixture("table4_row1.toml"), "--round", "down"]).status.success());
}

#[test]
fn every_fixture_loads() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let study = tsize::config::Study::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        study.scenario().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        count += 1;
    }
    assert_eq!(count, 75);
}
