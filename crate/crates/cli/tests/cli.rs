use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coot-mvsihe"))
}

fn test_image() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/corpus/test/hopper_09.png")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn unreadable_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("enhance")
        .arg(dir.path().join("missing.png"))
        .arg(dir.path().join("out.png"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bad_configuration_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(&config, r#"{"coot": {"population": 10}, "unknown_field": 1}"#).unwrap();
    let out = bin()
        .arg("enhance")
        .arg(test_image())
        .arg(dir.path().join("out.png"))
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);

    let out = bin()
        .arg("enhance")
        .arg(test_image())
        .arg(dir.path().join("out.png"))
        .args(["--pop", "1"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);

    let out = bin()
        .args(["batch", "."])
        .args(["--methods", "he,clahe"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{"coot": {"max_iters": 50}, "fitness_mode": "brisque_niqe"}"#,
    )
    .unwrap();
    let trace = dir.path().join("trace.csv");
    let report = dir.path().join("report.csv");
    let out = bin()
        .arg("enhance")
        .arg(test_image())
        .arg(dir.path().join("out.png"))
        .arg("--config")
        .arg(&config)
        .args(["--iters", "4", "--fitness", "niqe", "--trace"])
        .arg(&trace)
        .arg("--report")
        .arg(&report)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 5);
    let report = std::fs::read_to_string(&report).unwrap();
    assert!(report.starts_with("input,output,delta,k_h1,k_h2,k_h3,fitness,ambe,psnr,ssi\n"));
    assert_eq!(report.lines().count(), 2);
}

#[test]
fn training_shortfall_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(test_image(), dir.path().join("only.png")).unwrap();
    let out = bin()
        .arg("train-niqe")
        .arg(dir.path())
        .arg("--out")
        .arg(dir.path().join("model.txt"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("short"));
}

#[test]
fn score_and_feature_dumps() {
    let out = bin().arg("score").arg(test_image()).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("path,niqe,brisque"));
    let cols: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(cols[1].parse::<f64>().unwrap() > 0.0);

    let out = bin().arg("brisque-features").arg(test_image()).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 37);
    assert_eq!(text.lines().nth(1).unwrap().split(',').count(), 37);
}

#[test]
fn batch_writes_rows_and_averages() {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("images/severe");
    std::fs::create_dir_all(&images).unwrap();
    std::fs::copy(test_image(), images.join("a.png")).unwrap();
    let report = dir.path().join("rows.csv");
    let out = bin()
        .arg("batch")
        .arg(dir.path().join("images"))
        .args(["--methods", "he,mvsihe", "--report"])
        .arg(&report)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = std::fs::read_to_string(&report).unwrap();
    assert_eq!(rows.lines().count(), 3);
    assert!(rows.contains(",severe,"));
    let averages = std::fs::read_to_string(dir.path().join("rows_averages.csv")).unwrap();
    assert_eq!(averages.lines().count(), 3);
}
