use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
}

/// The binary with a clean `CDBERT_` environment, run inside `dir`.
fn cdbert(dir: &Path, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cdbert"));
    for (k, _) in std::env::vars() {
        if k.starts_with("CDBERT_") {
            cmd.env_remove(k);
        }
    }
    cmd.current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("run.toml");
    let text = format!(
        "dictionary = {:?}\nradicals = {:?}\natlas = {:?}\ntask = {:?}\n{extra}",
        data("toy_dict.jsonl"),
        data("radicals.tsv"),
        data("glyphs.atlas"),
        data("fusion_task.jsonl"),
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn help_exits_zero_and_touches_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let commands = [
        "ingest",
        "pretrain",
        "gradcheck",
        "build-polymrc",
        "eval-polymrc",
        "few-shot",
        "retrieve",
        "fuse-train",
    ];
    let o = cdbert(dir.path(), &["--help"]);
    assert!(o.status.success());
    for c in commands {
        assert!(stdout(&o).contains(c), "top-level help lists {c}");
        let o = cdbert(dir.path(), &[c, "--help", "--out", "should-not-exist"]);
        assert_eq!(o.status.code(), Some(0), "{c} --help");
    }
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn gradcheck_passes_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = cdbert(dir.path(), &["gradcheck"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let out = stdout(&o);
    for name in [
        "matmul",
        "softmax",
        "mem_loss",
        "cl4sa_loss",
        "el_loss",
        "glyph_contrastive_loss",
    ] {
        assert!(
            out.lines().any(|l| l.starts_with("ok") && l.contains(name)),
            "{name} missing:\n{out}"
        );
    }
    assert!(!out.contains("FAIL"));
}

#[test]
fn errors_are_categorized() {
    let dir = tempfile::tempdir().unwrap();
    let o = cdbert(dir.path(), &["--set", "lerning_rate=1", "ingest"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lerning_rate"));

    let o = cdbert(dir.path(), &["--config", "absent.toml", "ingest"]);
    assert_eq!(o.status.code(), Some(4));

    let o = cdbert(dir.path(), &["ingest"]);
    assert_eq!(o.status.code(), Some(3), "a dictionary must be configured");

    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"entry\": \"山\"\n").unwrap();
    let bad = bad.to_str().unwrap();
    let o = cdbert(
        dir.path(),
        &[
            "--set",
            &format!("dictionary={bad:?}"),
            "ingest",
            "--strict",
        ],
    );
    assert_eq!(o.status.code(), Some(5));
    let o = cdbert(
        dir.path(),
        &[
            "--set",
            &format!("dictionary={bad:?}"),
            "--out",
            "lenient",
            "ingest",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let rejections = std::fs::read_to_string(dir.path().join("lenient/rejections.txt")).unwrap();
    assert!(rejections.starts_with("line 1:"));

    let o = cdbert(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn environment_overrides_the_file_and_flags_override_both() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "seed = 4\nsplit_train = 0.5\nsplit_val = 0.25\nsplit_test = 0.25\n",
    );
    let o = Command::new(env!("CARGO_BIN_EXE_cdbert"))
        .current_dir(dir.path())
        .env("CDBERT_SEED", "5")
        .env("CDBERT_OUT_DIR", "from-env")
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            "from-flag",
            "build-polymrc",
        ])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let resolved = std::fs::read_to_string(dir.path().join("from-flag/config.toml")).unwrap();
    assert!(resolved.contains("seed = 5"));
    assert!(resolved.contains("split_train = 0.5"));
    assert!(!dir.path().join("from-env").exists());
}

#[test]
fn polymrc_oracle_round_trip_and_few_shot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let cfg = cfg.to_str().unwrap();
    let o = cdbert(
        dir.path(),
        &["--config", cfg, "--out", "mrc", "build-polymrc"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stats: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("mrc/stats.json")).unwrap())
            .unwrap();
    assert!(stats["test"]["count"].as_u64().unwrap() > 0);

    let o = cdbert(
        dir.path(),
        &[
            "--config",
            cfg,
            "--out",
            "ev",
            "eval-polymrc",
            "mrc/test.jsonl",
            "--oracle",
        ],
    );
    assert!(o.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ev/eval.json")).unwrap())
            .unwrap();
    assert_eq!(report["overall"]["accuracy"], 1.0);
    assert!(dir.path().join("ev/config.toml").exists());

    let o = cdbert(
        dir.path(),
        &[
            "--config",
            cfg,
            "--out",
            "fs",
            "few-shot",
            "mrc/train.jsonl",
        ],
    );
    assert!(o.status.success());
    for s in 0..3 {
        let shots =
            std::fs::read_to_string(dir.path().join(format!("fs/shots-{s}.jsonl"))).unwrap();
        assert_eq!(shots.lines().count(), 10);
    }
}

#[test]
fn pretrain_is_reproducible_and_feeds_downstream_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "steps = 4\nglyph_steps = 2\nbatch_size = 8\nlr = 5e-3\nd = 16\n",
    );
    let cfg = cfg.to_str().unwrap();
    for out in ["a", "b"] {
        let o = cdbert(
            dir.path(),
            &["--config", cfg, "--seed", "11", "--out", out, "pretrain"],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in [
        "model.ckpt",
        "train_log.jsonl",
        "glyph_table.ckpt",
        "vocab.txt",
    ] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert!(a == b, "{f} differs between identical runs");
    }
    let config = |d: &str| std::fs::read_to_string(dir.path().join(d).join("config.toml")).unwrap();
    assert_eq!(
        config("a").replace("out_dir = \"a\"", "out_dir = \"b\""),
        config("b")
    );
    let log = std::fs::read_to_string(dir.path().join("a/train_log.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
    for key in ["step", "L", "L_mem", "L_cl4sa", "L_el"] {
        assert!(first.get(key).is_some(), "log record lacks {key}");
    }

    let o = cdbert(
        dir.path(),
        &[
            "--config",
            cfg,
            "--set",
            "model_dir=\"a\"",
            "retrieve",
            "老人眼睛花了",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(lines.iter().any(|l| l["surface"] == "花"));
    for l in &lines {
        let sum: f64 = l["weights"]
            .as_array()
            .unwrap()
            .iter()
            .map(|w| w.as_f64().unwrap())
            .sum();
        assert!((sum - 1.0).abs() < 1e-6);
    }

    let o = cdbert(
        dir.path(),
        &[
            "--config",
            cfg,
            "--set",
            "model_dir=\"a\"",
            "--out",
            "fu",
            "fuse-train",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("fu/fusion.json").exists());
}
