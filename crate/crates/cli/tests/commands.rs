use std::path::Path;
use std::process::{Command, Output};

fn meshnca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meshnca"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn meshnca")
}

fn ok(args: &[&str]) -> String {
    let out = meshnca(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn train_inspect_synth() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("stripes.json");
    let h = dir.path().join("history.csv");
    let out = ok(&[
        "train", "--mesh", "icosphere:1", "--epochs", "4", "--pool-size", "8", "--min-steps", "4", "--max-steps", "6",
        "--out", p(&w), "--history", p(&h),
    ]);
    assert!(out.contains("loss:"), "{out}");
    let history = std::fs::read_to_string(&h).unwrap();
    assert_eq!(history.lines().next(), Some("epoch,loss,lr,k_steps"));
    assert_eq!(history.lines().count(), 5);

    let info = ok(&["inspect", p(&w)]);
    assert!(info.contains("name: stripes"));
    assert!(info.contains("parameters: 12432"));

    let ply = dir.path().join("out.ply");
    let dump = dir.path().join("out.bin");
    ok(&["synth", "--mesh", "icosphere:2", "--weights", p(&w), "--steps", "3", "--out", p(&ply), "--state-dump", p(&dump)]);
    assert!(std::fs::read_to_string(&ply).unwrap().starts_with("ply\n"));
    assert_eq!(std::fs::read(&dump).unwrap().len(), 16 + 162 * 16 * 4);
}

#[test]
fn zero_step_synthesis_is_gray() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.json");
    ok(&["train", "--mesh", "icosphere:0", "--epochs", "0", "--out", p(&w)]);
    let ply = dir.path().join("o.ply");
    ok(&["synth", "--mesh", "icosphere:1", "--weights", p(&w), "--steps", "0", "--out", p(&ply)]);
    let text = std::fs::read_to_string(&ply).unwrap();
    let body = text.split("end_header\n").nth(1).unwrap();
    for line in body.lines().take(42) {
        let cols: Vec<&str> = line.split(' ').collect();
        assert_eq!(&cols[6..9], &["128", "128", "128"]);
    }
}

#[test]
fn synth_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.json");
    ok(&["train", "--mesh", "icosphere:1", "--epochs", "3", "--pool-size", "4", "--out", p(&w)]);
    let run = |seed: &str, name: &str| {
        let ply = dir.path().join(name);
        ok(&["synth", "--mesh", "icosphere:1", "--weights", p(&w), "--steps", "20", "--seed", seed, "--out", p(&ply)]);
        std::fs::read(ply).unwrap()
    };
    assert_eq!(run("1", "a.ply"), run("1", "b.ply"));
}

#[test]
fn print_config_is_json() {
    let out = ok(&["train", "--print-config", "--epochs", "7", "--mask-scheme", "shuffle", "--seed", "3"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["train"]["epochs"], 7);
    assert_eq!(v["train"]["mask_scheme"]["shuffle_map"]["seed"], 3);
    assert_eq!(v["model"]["channels"], 16);
}

#[test]
fn bench_prints_its_summary_line() {
    let out = ok(&["bench", "--mesh", "icosphere:2", "--duration", "0.2", "--warmup", "1"]);
    let last = out.lines().last().unwrap();
    let sps: f64 = last.strip_prefix("bench: steps_per_sec=").unwrap().parse().unwrap();
    assert!(sps > 0.0);
}

#[test]
fn bad_input_fails_cleanly() {
    assert!(!meshnca(&["synth", "--mesh", "cube", "--weights", "x.json", "--out", "o.ply"]).status.success());
    assert!(!meshnca(&["inspect", "/nonexistent/w.json"]).status.success());
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.json");
    ok(&["train", "--mesh", "icosphere:0", "--epochs", "0", "--out", p(&w)]);
    let out = meshnca(&["synth", "--mesh", "icosphere:0", "--weights", p(&w), "--sh-degree", "2", "--out", "o.ply"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("SH degree"));
}

#[test]
fn csv_target() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let rows: String = (0..12).map(|i| format!("{},0.5,{}\n", i as f64 / 11.0, 1.0 - i as f64 / 11.0)).collect();
    std::fs::write(&csv, format!("r,g,b\n{rows}")).unwrap();
    let w = dir.path().join("w.json");
    ok(&["train", "--mesh", "icosphere:0", "--target", p(&csv), "--epochs", "2", "--pool-size", "4", "--out", p(&w)]);
    let out = meshnca(&["train", "--mesh", "icosphere:1", "--target", p(&csv), "--epochs", "1", "--out", p(&w)]);
    assert!(!out.status.success());
}
