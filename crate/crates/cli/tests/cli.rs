use std::path::Path;
use std::process::Command;

fn railframe(args: &[&str], cwd: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_railframe"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

#[test]
fn dump_config_is_one_json_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = railframe(&["dump-config"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with('{') && text.contains("\"halt_policy\":\"freeze\""));

    std::fs::write(dir.path().join("cfg.json"), &text).unwrap();
    let again = railframe(&["--config", "cfg.json", "dump-config"], dir.path());
    assert!(again.status.success());
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn errors_exit_nonzero_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = railframe(
        &["train", "--data", "missing.jsonl", "--strategy", "eps-eps", "--out", "x.ckpt"],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.jsonl"));

    let bad = railframe(&["train", "--data", "d", "--strategy", "rel", "--out", "x"], dir.path());
    assert!(!bad.status.success());
}

#[test]
fn small_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |args: &[&str]| {
        let out = railframe(args, d);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    run(&["gen-data", "--episodes", "6", "--seed", "3", "--out", "data.jsonl"]);
    run(&["train", "--data", "data.jsonl", "--strategy", "zero-chunk", "--steps", "20", "--chunk", "8", "--out", "z.ckpt"]);
    run(&["eval", "--ckpt", "z.ckpt", "--grid", "quick", "--seeds", "0", "--halt-policy", "zero", "--out", "out"]);
    run(&["report", "--in", "out"]);
    let records = std::fs::read_to_string(d.join("out/records_zero-chunk.csv")).unwrap();
    assert_eq!(records.lines().count(), 1 + 54);
    assert!(d.join("out/tables.csv").exists());
    assert!(d.join("out/chart.svg").exists());
    assert!(d.join("z.curve.csv").exists());
}
