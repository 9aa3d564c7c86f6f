use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use loadsense::learn::TrainedModel;

fn loadsense() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_loadsense"));
    cmd.env_remove("LOADSENSE_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    loadsense().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth_small(dir: &Path, n: usize) -> PathBuf {
    let data = dir.join("data");
    let out = run(&["synth", "--out", s(&data), "--participants", &n.to_string()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    data
}

fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn happy_path_writes_headed_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth_small(tmp.path(), 8);
    assert!(data.join("run.json").exists());

    let v = run(&["validate", "--dataset", s(&data)]);
    assert_eq!(code(&v), 0, "{}", String::from_utf8_lossy(&v.stdout));

    let feats = tmp.path().join("feats");
    assert_eq!(code(&run(&["features", "--dataset", s(&data), "--out", s(&feats)])), 0);
    let csv = fs::read_to_string(feats.join("features.csv")).unwrap();
    assert!(csv.starts_with("# loadsense features seed=7 format_version=1\n"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 8 * 6);

    let stats = tmp.path().join("stats");
    assert_eq!(code(&run(&["stats", "--dataset", s(&data), "--out", s(&stats)])), 0);
    for name in ["descriptives.txt", "reliability.csv", "checks.txt"] {
        assert!(stats.join(name).exists(), "{name}");
    }

    let eval = tmp.path().join("eval");
    let out = run(&["evaluate", "--dataset", s(&data), "--out", s(&eval), "--task", "nback", "--folds", "4"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(eval.join("report_nback_multi.txt")).unwrap();
    assert!(text.contains("33.33%"));
    let run_json: serde_json::Value = serde_json::from_str(&fs::read_to_string(eval.join("run.json")).unwrap()).unwrap();
    assert_eq!(run_json["command"], "evaluate");
    assert_eq!(run_json["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["evaluate", "--dataset", "x", "--out", s(tmp.path())]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--task"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(code(&run(&["features", "--dataset", "x", "--out", "y", "--bogus"])), 2);
    assert_eq!(code(&run(&["--threads", "0", "features", "--dataset", "x", "--out", "y"])), 2);
}

#[test]
fn unreadable_dataset_fails_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope");
    let out = run(&["features", "--dataset", s(&missing), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(code(&out), 1);
    assert!(!out.stderr.is_empty());
}

#[test]
fn synth_refuses_a_non_empty_directory() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("keep.txt"), "x").unwrap();
    assert_eq!(code(&run(&["synth", "--out", s(tmp.path()), "--participants", "2"])), 1);
    assert_eq!(fs::read_to_string(tmp.path().join("keep.txt")).unwrap(), "x");
}

#[test]
fn output_inside_the_dataset_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth_small(tmp.path(), 2);
    let out = run(&["features", "--dataset", s(&data), "--out", s(&data.join("derived"))]);
    assert_eq!(code(&out), 2);
    assert!(!data.join("derived").exists());
}

#[test]
fn seed_flag_beats_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    let status = loadsense()
        .env("LOADSENSE_SEED", "11")
        .args(["synth", "--out", s(&a), "--participants", "2"])
        .status()
        .unwrap();
    assert!(status.success());
    let status = loadsense()
        .env("LOADSENSE_SEED", "11")
        .args(["--seed", "12", "synth", "--out", s(&b), "--participants", "2"])
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(code(&run(&["--seed", "11", "synth", "--out", s(&c), "--participants", "2"])), 0);

    let head = |p: &Path| fs::read_to_string(p.join("synth_config.txt")).unwrap();
    assert!(head(&a).starts_with("# loadsense synth seed=11 "));
    assert!(head(&b).starts_with("# loadsense synth seed=12 "));
    assert_eq!(tree(&a), tree(&c));
    assert_ne!(tree(&a), tree(&b));
}

#[test]
fn repeated_runs_and_thread_counts_agree_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth_small(tmp.path(), 8);
    let mut trees = Vec::new();
    for (i, threads) in ["1", "1", "8"].iter().enumerate() {
        let out = tmp.path().join(format!("e{i}"));
        let o = run(&[
            "--threads", threads, "evaluate", "--dataset", s(&data), "--out", s(&out), "--task", "visual_search",
            "--scheme", "binary", "--folds", "3", "--subset", "heart_alone", "--subset", "all",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        trees.push(tree(&out));
    }
    assert_eq!(trees[0], trees[1]);
    assert_eq!(trees[0], trees[2]);
}

#[test]
fn trained_model_reloads_and_predicts() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth_small(tmp.path(), 9);
    let out = tmp.path().join("model");
    let o = run(&["train", "--dataset", s(&data), "--out", s(&out), "--task", "nback", "--model", "lda"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let model = TrainedModel::from_json(&fs::read_to_string(out.join("model.json")).unwrap()).unwrap();
    assert_eq!(model.labels, vec!["easy", "medium", "hard"]);
    let row = vec![Some(80.0); model.features.len()];
    assert!(model.predict(&[row])[0] < 3);

    let two = run(&[
        "train", "--dataset", s(&data), "--out", s(&tmp.path().join("m2")), "--task", "nback", "--subset", "all",
        "--subset", "heart_alone",
    ]);
    assert_eq!(code(&two), 2);
}

#[test]
fn report_rerenders_a_saved_evaluation() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth_small(tmp.path(), 8);
    let eval = tmp.path().join("eval");
    let o = run(&[
        "--seed", "3", "evaluate", "--dataset", s(&data), "--out", s(&eval), "--task", "nback", "--folds", "2",
        "--subset", "eye_drive",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let again = tmp.path().join("again");
    let input = eval.join("report_nback_multi.json");
    assert_eq!(code(&run(&["report", "--input", s(&input), "--out", s(&again)])), 0);
    for ext in ["txt", "csv"] {
        let name = format!("report_nback_multi.{ext}");
        let body = |p: &Path| {
            let t = fs::read_to_string(p.join(&name)).unwrap();
            t.split_once('\n').unwrap().1.to_string()
        };
        assert_eq!(body(&eval), body(&again), "{name}");
    }
}
