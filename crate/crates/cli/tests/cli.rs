//! CLI contract: usage text, exit codes and upstream-artifact errors.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn conversum() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_conversum"));
    cmd.env("RUST_LOG", "error");
    cmd
}

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/smoke")
}

fn write_config(dir: &Path, dataset_dir: &Path) -> PathBuf {
    let config = serde_json::json!({
        "dataset": {"dir": dataset_dir, "kind": "cross_lingual"},
        "generation": {
            "num_candidates": 8,
            "num_beam_groups": 8,
            "max_length": 80,
            "diversity_penalty": 1.0,
            "target_languages": ["bengali", "english"],
            "seed": 0
        },
        "train": {
            "epochs": 2,
            "batch_size": 4,
            "validate_every_steps": 20,
            "learning_rate": 0.02,
            "lr_schedule": "warmup_linear",
            "seed": 0,
            "loss": {"base_margin": 0.01, "rank_scaled": true}
        },
        "backends": {"encoder": "stub", "generator": "stub", "lang_id": "tag-prefix"},
        "cache_dir": dir.join("cache"),
        "output_dir": dir.join("out"),
        "seed": 7,
        "system_name": "conversum"
    });
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn help_exits_zero_for_every_subcommand() {
    for args in [
        vec!["--help"],
        vec!["generate", "--help"],
        vec!["score", "--help"],
        vec!["train", "--help"],
        vec!["evaluate", "--help"],
        vec!["compare-llm", "--help"],
    ] {
        let output = conversum().args(&args).output().unwrap();
        assert_eq!(output.status.code(), Some(0), "args {args:?}");
        let text = String::from_utf8_lossy(&output.stdout);
        assert!(text.contains("Usage"), "no usage text for {args:?}");
    }
}

#[test]
fn unreadable_dataset_path_exits_two_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no-such-dataset");
    let config = write_config(dir.path(), &missing);
    let output = conversum()
        .args(["--config", config.to_str().unwrap(), "generate"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("no-such-dataset"));
}

#[test]
fn missing_config_file_exits_two() {
    let output = conversum()
        .args(["--config", "/nonexistent/conversum.json", "generate"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("cannot read config"));
}

#[test]
fn train_without_score_reports_missing_upstream_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &fixture_dir());
    let output = conversum()
        .args(["--config", config.to_str().unwrap(), "train"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = stderr_of(&output);
    assert!(stderr.contains("missing upstream artifact"), "{stderr}");
    assert!(stderr.contains("scores"), "{stderr}");
}

#[test]
fn score_without_generate_reports_missing_cache_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &fixture_dir());
    let output = conversum()
        .args(["--config", config.to_str().unwrap(), "score"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = stderr_of(&output);
    assert!(stderr.contains("missing upstream artifact"), "{stderr}");
    assert!(stderr.contains("conversum generate"), "{stderr}");
}

#[test]
fn evaluate_without_train_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &fixture_dir());
    let generate = conversum()
        .args(["--config", config.to_str().unwrap(), "generate"])
        .output()
        .unwrap();
    assert_eq!(generate.status.code(), Some(0));
    let output = conversum()
        .args(["--config", config.to_str().unwrap(), "evaluate"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr_of(&output).contains("missing upstream artifact"));
}

#[test]
fn unknown_backend_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &fixture_dir());
    let mut config: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&config_path).unwrap()).unwrap();
    config["backends"]["encoder"] = serde_json::json!("neural-encoder-v9");
    std::fs::write(&config_path, serde_json::to_string(&config).unwrap()).unwrap();
    let output = conversum()
        .args(["--config", config_path.to_str().unwrap(), "score"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("neural-encoder-v9"));
}

#[test]
fn compare_llm_without_llm_section_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &fixture_dir());
    let output = conversum()
        .args(["--config", config.to_str().unwrap(), "compare-llm"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("llm"));
}

#[test]
fn regenerate_is_idempotent_with_zero_new_generations() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &fixture_dir());
    let manifest_path = dir.path().join("out/generate_manifest.json");

    let counts = |path: &Path| -> (u64, u64) {
        let manifest: serde_json::Value =
            serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
        (
            manifest["counts"]["generated"].as_u64().unwrap(),
            manifest["counts"]["cache_hits"].as_u64().unwrap(),
        )
    };

    let first = conversum()
        .args(["--config", config.to_str().unwrap(), "generate"])
        .output()
        .unwrap();
    assert_eq!(first.status.code(), Some(0), "{}", stderr_of(&first));
    assert_eq!(counts(&manifest_path), (12, 0));

    let second = conversum()
        .args(["--config", config.to_str().unwrap(), "generate"])
        .output()
        .unwrap();
    assert_eq!(second.status.code(), Some(0), "{}", stderr_of(&second));
    assert_eq!(
        counts(&manifest_path),
        (0, 12),
        "re-run must only hit the cache"
    );
}

#[test]
fn worker_pool_generation_matches_single_worker_bytes() {
    let single = tempfile::tempdir().unwrap();
    let pooled = tempfile::tempdir().unwrap();
    for (dir, workers) in [(&single, "1"), (&pooled, "4")] {
        let config = write_config(dir.path(), &fixture_dir());
        let output = conversum()
            .args([
                "--config",
                config.to_str().unwrap(),
                "--workers",
                workers,
                "generate",
            ])
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(0), "{}", stderr_of(&output));
    }
    let read_all = |dir: &Path| {
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.join("cache"))
            .unwrap()
            .map(|entry| {
                let entry = entry.unwrap();
                (
                    entry.file_name().to_string_lossy().into_owned(),
                    std::fs::read(entry.path()).unwrap(),
                )
            })
            .collect();
        files.sort_by(|a, b| a.0.cmp(&b.0));
        files
    };
    assert_eq!(read_all(single.path()), read_all(pooled.path()));
}

#[test]
fn strict_mode_fails_on_invalid_records() {
    let dir = tempfile::tempdir().unwrap();
    let dataset_dir = dir.path().join("data");
    std::fs::create_dir_all(&dataset_dir).unwrap();
    for split in ["train", "validation", "test"] {
        let good = r#"{"id":"a","text":"One full sentence here. Another one follows. A third sentence. A fourth sentence. A fifth one. A sixth one. A seventh one. An eighth one.","summary":"One full sentence here.","source_lang":"english","target_lang":"bengali"}"#;
        let bad =
            r#"{"id":"b","text":"","summary":"s","source_lang":"english","target_lang":"bengali"}"#;
        std::fs::write(
            dataset_dir.join(format!("{split}.jsonl")),
            format!("{good}\n{bad}\n"),
        )
        .unwrap();
    }
    let config = write_config(dir.path(), &dataset_dir);

    // Lenient: succeeds, skipping the invalid record.
    let lenient = conversum()
        .args(["--config", config.to_str().unwrap(), "generate"])
        .output()
        .unwrap();
    assert_eq!(lenient.status.code(), Some(0), "{}", stderr_of(&lenient));

    // Strict: first invalid record aborts.
    let strict = conversum()
        .args(["--config", config.to_str().unwrap(), "--strict", "generate"])
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(1));
    assert!(
        stderr_of(&strict).contains("empty text"),
        "{}",
        stderr_of(&strict)
    );
}
