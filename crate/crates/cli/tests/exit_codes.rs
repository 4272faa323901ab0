use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_congest-minor"))
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("congest-minor-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn unknown_flag_exits_2() {
    let s = bin().args(["mwm", "--graph", "x.el", "--epsilom", "0.5"]).output().unwrap();
    assert_eq!(s.status.code(), Some(2));
}

#[test]
fn missing_file_exits_1() {
    let s = bin().args(["mis", "--graph", "/nonexistent/graph.el"]).output().unwrap();
    assert_eq!(s.status.code(), Some(1));
}

#[test]
fn gen_then_mwm_with_oracle() {
    let path = tmp("w.json");
    let s = bin().args(["gen", "planar", "10", "--seed", "3", "--weights", "16", "--out"]).arg(&path).output().unwrap();
    assert!(s.status.success());
    let out = bin()
        .args(["mwm", "--epsilon", "0.5", "--seed", "7", "--oracle", "--check", "--graph"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["algorithm"], "mwm");
    assert!(v["ratio"].as_f64().unwrap() >= 0.5);
    assert_eq!(v["invariants"]["ok"], true);
}

#[test]
fn bench_csv_has_header_and_rows() {
    let out = bin()
        .args(["bench", "--algorithm", "mis", "--instance", "grid:3:3", "--seeds", "2", "--csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("index,algorithm,instance,seed,status"));
    assert!(lines[1].starts_with("0,mis,grid:3:3,0,ok"));
}
