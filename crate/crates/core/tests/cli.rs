//! End-to-end checks of the `fundsel` binary: file formats, exit codes and
//! rerun determinism.

use std::path::Path;
use std::process::{Command, Output};

fn fundsel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fundsel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Data rows of a CSV artifact as field vectors, header first.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# manifest: manifest.json\n"), "{}", path.display());
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn write_dvalues(path: &Path, d: &[f64]) {
    let mut s = String::from("fund_id,z,d_value,los,local_fdr\n");
    for (i, v) in d.iter().enumerate() {
        s.push_str(&format!("F{i},{},{v},{},{v}\n", 2.0 - i as f64 * 0.1, 1.0 - v));
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn select_keeps_every_unit_when_all_d_are_small() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("d.csv");
    write_dvalues(&input, &[0.02; 8]);
    let out = dir.path().join("out");
    let o = fundsel(&["select", "--dvalues", input.to_str().unwrap(), "--theta", "0.1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = rows(&out.join("selection.csv"));
    let col = table[0].iter().position(|h| h == "selected_skilled").unwrap();
    assert_eq!(table.len(), 9);
    assert!(table[1..].iter().all(|r| r[col] == "1"));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn select_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("d.csv");
    write_dvalues(&input, &[0.01, 0.4, 0.05, 0.9, 0.12, 0.3]);
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = fundsel(&["select", "--dvalues", input.to_str().unwrap(), "--theta", "0.1", "--lambda", "2", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push((
            std::fs::read(out.join("selection.csv")).unwrap(),
            std::fs::read(out.join("manifest.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let o = fundsel(&["select", "--no-such-flag", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[config]:"), "{}", stderr(&o));

    let missing = dir.path().join("missing.csv");
    let o = fundsel(&["select", "--dvalues", missing.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error[data]:"), "{}", stderr(&o));

    let o = fundsel(&["fit", "--returns", "r.csv", "--factors", "f.csv", "--grid-tau", "0.3:0.1:0.05", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[config]:"), "{}", stderr(&o));
    // Each error is one line.
    assert_eq!(stderr(&o).trim_end().lines().count(), 1);
}

#[test]
fn config_file_sections_feed_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("d.csv");
    write_dvalues(&input, &[0.01, 0.5, 0.02, 0.6]);
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("[select]\ndvalues = {:?}\ntheta = 0.05\n", input.to_str().unwrap())).unwrap();
    let out = dir.path().join("out");
    let o = fundsel(&["select", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = rows(&out.join("selection.csv"));
    let col = table[0].iter().position(|h| h == "selected_skilled").unwrap();
    let picked: Vec<&str> = table[1..].iter().map(|r| r[col].as_str()).collect();
    assert_eq!(picked, ["1", "0", "1", "0"]);

    std::fs::write(&cfg, "[select]\nbogus = 1\n").unwrap();
    let o = fundsel(&["select", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_reports_each_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let o = fundsel(&[
        "simulate", "--dep", "d1", "--sparsity", "s1", "--p", "100", "--reps", "2", "--theta", "0.1", "--seed", "7",
        "--mc-samples", "500", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = rows(&out.join("sim_summary.csv"));
    let method = table[0].iter().position(|h| h == "method").unwrap();
    let methods: Vec<&str> = table[1..].iter().map(|r| r[method].as_str()).collect();
    for m in ["ours", "bh", "storey"] {
        assert!(methods.contains(&m), "{methods:?}");
    }
    for col in ["mean_fdp", "mean_fnp"] {
        let c = table[0].iter().position(|h| h == col).unwrap();
        for r in &table[1..] {
            let v: f64 = r[c].parse().unwrap();
            assert!((0.0..=1.0).contains(&v), "{col} = {v}");
        }
    }
}
