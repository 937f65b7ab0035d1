//! End-to-end checks of the command-line interface: artifact inventory,
//! exit codes, staged runs, and report regeneration.

use std::path::{Path, PathBuf};
use std::process::Command;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_foodprice")
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic_panel.csv")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("foodprice_cli_{}_{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(binary())
        .args(args)
        .output()
        .expect("spawn foodprice")
}

#[test]
fn full_run_writes_the_artifact_inventory() {
    let out = temp_dir("inventory");
    let status = run(&[
        "run",
        "--data",
        fixture().to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    for name in [
        "summary_stats.csv",
        "normality.csv",
        "clusters.json",
        "heatmap.csv",
        "selected_features.json",
        "cv_results.csv",
        "model_comparison.csv",
        "manifest.json",
        "processed.csv",
        "split.json",
        "train_meta.json",
    ] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    assert!(out.join("kde").is_dir());
    assert!(out.join("kde/FFPI.csv").exists());
    assert!(out.join("models/svr.json").exists());

    // Only 12 cluster representatives exist, so top_k = 30 falls short:
    // the selection shrinks and the manifest records the shortfall.
    let selected: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("selected_features.json")).unwrap())
            .unwrap();
    assert_eq!(selected["selected"].as_array().unwrap().len(), 12);
    assert_eq!(selected["k"], 30);

    // The manifest lists every artifact it wrote, with digests.
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let notes = manifest["notes"].as_array().unwrap();
    assert!(
        notes.iter().any(|n| n.as_str().unwrap().contains("only 12 of requested top_k=30")),
        "shortfall note missing: {notes:?}"
    );
    let outputs = manifest["outputs"].as_array().unwrap();
    for record in outputs {
        let rel = record["path"].as_str().unwrap();
        let bytes = std::fs::read(out.join(rel)).unwrap();
        let digest = {
            use sha2::Digest;
            let mut hasher = sha2::Sha256::new();
            hasher.update(&bytes);
            hasher
                .finalize()
                .iter()
                .map(|b| format!("{b:02x}"))
                .collect::<String>()
        };
        assert_eq!(record["digest"].as_str().unwrap(), digest, "digest of {rel}");
    }
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn exit_codes_follow_the_contract() {
    let out = temp_dir("codes");

    // 2: config error (unknown model name).
    let bad_model = run(&[
        "run",
        "--data",
        fixture().to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
        "--models",
        "svr,bogus",
    ]);
    assert_eq!(bad_model.status.code(), Some(2));

    // 2: config error (no data path anywhere).
    let no_data = run(&["run", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(no_data.status.code(), Some(2));

    // 3: data error (file does not exist).
    let missing = run(&[
        "run",
        "--data",
        "/definitely/not/here.csv",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(missing.status.code(), Some(3));

    // 3: missing upstream artifact names the expected file.
    let premature = run(&[
        "evaluate",
        "--data",
        fixture().to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(premature.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&premature.stderr);
    assert!(stderr.contains("processed.csv"), "stderr: {stderr}");

    // 4: stage failure (constant feature column reaches the screen).
    let const_csv = out.join("constant.csv");
    std::fs::create_dir_all(&out).unwrap();
    let mut text = String::from("year,FFPI,FLAT,OK\n");
    for year in 2000..2023 {
        text.push_str(&format!("{year},{},5.0,{}\n", year - 1900, (year % 7) as f64));
    }
    std::fs::write(&const_csv, text).unwrap();
    let flat = run(&[
        "run",
        "--data",
        const_csv.to_str().unwrap(),
        "--out-dir",
        out.join("flat_out").to_str().unwrap(),
    ]);
    assert_eq!(flat.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&flat.stderr);
    assert!(stderr.contains("FLAT"), "stderr: {stderr}");

    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn report_regenerates_the_comparison_without_retraining() {
    let out = temp_dir("report");
    let ok = run(&[
        "run",
        "--data",
        fixture().to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(ok.status.success());
    let original = std::fs::read(out.join("model_comparison.csv")).unwrap();
    let model_bytes = std::fs::read(out.join("models/svr.json")).unwrap();
    std::fs::remove_file(out.join("model_comparison.csv")).unwrap();

    let report = run(&[
        "report",
        "--data",
        fixture().to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(report.status.success());
    let regenerated = std::fs::read(out.join("model_comparison.csv")).unwrap();
    assert_eq!(original, regenerated, "report changed the comparison bytes");
    // Models were read, not refit.
    assert_eq!(model_bytes, std::fs::read(out.join("models/svr.json")).unwrap());
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn flags_override_config_file_keys() {
    let out = temp_dir("override");
    std::fs::create_dir_all(&out).unwrap();
    let config_path = out.join("config.json");
    std::fs::write(
        &config_path,
        format!(
            r#"{{"data_path": {:?}, "out_dir": {:?}, "seed": 7, "top_k": 4}}"#,
            fixture().to_str().unwrap(),
            out.join("artifacts").to_str().unwrap()
        ),
    )
    .unwrap();
    let ok = run(&[
        "eda",
        "--config",
        config_path.to_str().unwrap(),
        "--seed",
        "42",
    ]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("artifacts/manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["config"]["seed"], 42, "flag should win");
    assert_eq!(manifest["config"]["top_k"], 4, "file key should survive");
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn rejects_config_files_with_unknown_keys() {
    let out = temp_dir("badcfg");
    std::fs::create_dir_all(&out).unwrap();
    let config_path = out.join("config.json");
    std::fs::write(&config_path, r#"{"data_path": "x.csv", "out_dir": "y", "sead": 7}"#).unwrap();
    let bad = run(&["run", "--config", config_path.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&out);
}
