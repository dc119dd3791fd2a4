//! End-to-end checks of the command-line interface.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ucode(args: &[&str], extra: &[&Path]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ucode"));
    cmd.args(args);
    for p in extra {
        cmd.arg(p);
    }
    cmd.output().unwrap()
}

#[test]
fn train_requires_an_input() {
    let out = ucode(&["train", "--out", "/tmp/nope"], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn train_builtin_writes_artifacts_and_descends() {
    let dir = tempfile::tempdir().unwrap();
    let out = ucode(
        &[
            "train", "--builtin", "bowtie", "--k", "2", "--hidden", "8", "--epochs", "100",
            "--seed", "1", "--weight-decay", "0", "--out",
        ],
        &[dir.path()],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["assignment.csv", "labels.txt", "history.csv", "checkpoint.json", "manifest.json"] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    let history = fs::read_to_string(dir.path().join("history.csv")).unwrap();
    let losses: Vec<f64> = history
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(losses.len(), 100);
    assert!(losses.last().unwrap() < losses.first().unwrap());
}

#[test]
fn overlap_training_writes_a_cover() {
    let dir = tempfile::tempdir().unwrap();
    let out = ucode(
        &[
            "train", "--builtin", "bowtie", "--k", "2", "--hidden", "8", "--epochs", "30",
            "--seed", "1", "--overlap", "--out",
        ],
        &[dir.path()],
    );
    assert!(out.status.success());
    assert!(dir.path().join("cover.tsv").exists());
}

#[test]
fn manifest_round_trip_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out = ucode(
        &[
            "train", "--builtin", "bowtie", "--k", "2", "--hidden", "8", "--epochs", "40",
            "--seed", "7", "--out",
        ],
        &[&a],
    );
    assert!(out.status.success());
    let manifest = a.join("manifest.json");
    let out = ucode(
        &["train", "--manifest"],
        &[&manifest, Path::new("--out"), &b],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read(a.join("history.csv")).unwrap(),
        fs::read(b.join("history.csv")).unwrap()
    );
    assert_eq!(
        fs::read(a.join("checkpoint.json")).unwrap(),
        fs::read(b.join("checkpoint.json")).unwrap()
    );
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let ini = dir.path().join("run.ini");
    fs::write(&ini, "epochs = 10\nhidden = 8\nk = 2\nseed = 4\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = ucode(
        &["train", "--builtin", "bowtie", "--config"],
        &[&ini, Path::new("--epochs"), Path::new("25"), Path::new("--out"), &out_dir],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let history = fs::read_to_string(out_dir.join("history.csv")).unwrap();
    // flag --epochs 25 wins over the file's 10
    assert_eq!(history.lines().count(), 26);
}

#[test]
fn eval_identity_scores_100() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.txt");
    fs::write(&labels, "0\n0\n1\n1\n1\n").unwrap();
    let out = ucode(&["eval", "--mode", "hard", "--pred"], &[&labels, Path::new("--truth"), &labels]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"nmi\": 100.0"), "{text}");
}

#[test]
fn eval_overlap_identity_scores_100() {
    let dir = tempfile::tempdir().unwrap();
    let cover = dir.path().join("cover.tsv");
    fs::write(&cover, "0\t0\n0\t1\n0\t2\n1\t2\n1\t3\n1\t4\n").unwrap();
    let out = ucode(&["eval", "--mode", "overlap", "--pred"], &[&cover, Path::new("--truth"), &cover]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"onmi\": 100.0"), "{text}");
}

#[test]
fn eval_mismatched_sizes_fails() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    fs::write(&a, "0\n1\n").unwrap();
    fs::write(&b, "0\n1\n1\n").unwrap();
    let out = ucode(&["eval", "--mode", "hard", "--pred"], &[&a, Path::new("--truth"), &b]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_flags_overlapping_argmin() {
    let dir = tempfile::tempdir().unwrap();
    let out = ucode(&["oracle", "--builtin", "bowtie", "--k", "2", "--out"], &[dir.path()]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("argmin matches overlapping reference: true"), "{text}");
    assert!(dir.path().join("ranked.csv").exists());
    assert!(dir.path().join("sweep.csv").exists());
}

#[test]
fn oracle_rejects_large_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edges.tsv");
    let mut text = String::new();
    for u in 0..19 {
        text.push_str(&format!("{u}\t{}\n", u + 1));
    }
    fs::write(&edges, text).unwrap();
    let out = ucode(&["oracle", "--edges"], &[&edges]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn synth_writes_a_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = ucode(
        &[
            "synth", "--n", "100", "--k", "4", "--p-in", "0.3", "--p-out", "0.02", "--seed", "3",
            "--out",
        ],
        &[dir.path()],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["edges.tsv", "features.csv", "cover.tsv", "manifest.json"] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    // generated bundles load and train end to end
    let run = dir.path().join("run");
    let out = ucode(
        &["train", "--edges"],
        &[
            &dir.path().join("edges.tsv"),
            Path::new("--features"),
            &dir.path().join("features.csv"),
            Path::new("--k"),
            Path::new("4"),
            Path::new("--hidden"),
            Path::new("16"),
            Path::new("--epochs"),
            Path::new("5"),
            Path::new("--out"),
            &run,
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn synth_rejects_invalid_probability() {
    let out = ucode(
        &["synth", "--n", "10", "--k", "2", "--p-in", "1.5", "--p-out", "0.1", "--out", "/tmp/x"],
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
}
