use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sur_core::eval::run_full_evaluation;
use sur_core::io;
use sur_core::stats::{q_function, Resolution};

fn jndsur(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jndsur"))
        .args(args)
        .current_dir(dir)
        .env_remove("RUST_BACKTRACE")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = jndsur(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails(dir: &Path, args: &[&str]) -> String {
    let out = jndsur(dir, args);
    assert!(!out.status.success(), "{args:?} should fail");
    String::from_utf8(out.stderr).unwrap()
}

fn data_lines(p: &Path) -> Vec<String> {
    fs::read_to_string(p).unwrap().lines().skip(1).map(str::to_owned).collect()
}

#[test]
fn fit_three_sets() {
    let d = tempfile::tempdir().unwrap();
    let mut text = String::from("clip_id,resolution,jnd_order,anchor_qp,subject_id,jnd_qp\n");
    for (clip, order, anchor) in [("a", 1, 0), ("a", 2, 25), ("b", 1, 0)] {
        for m in 0..10 {
            text += &format!("{clip},720p,{order},{anchor},{m},{}\n", anchor + 5 + m % 4);
        }
    }
    fs::write(d.path().join("s.csv"), text).unwrap();
    let stdout = ok(d.path(), &["fit", "s.csv", "--out-dir", "out"]);
    assert!(stdout.contains("3 sample sets fitted"));
    assert_eq!(data_lines(&d.path().join("out/models.csv")).len(), 3);
    assert_eq!(data_lines(&d.path().join("out/pass_rates.csv")).len(), 2);
}

#[test]
fn fit_errors_name_the_problem_and_write_nothing() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("empty.csv"), "").unwrap();
    assert!(fails(d.path(), &["fit", "empty.csv", "--out-dir", "out"]).contains("empty input"));
    fs::write(
        d.path().join("bad.csv"),
        "clip_id,resolution,jnd_order,anchor_qp,subject_id,jnd_qp\na,1080p,1,0,0,20\na,1080p,1,0,1,x\n",
    )
    .unwrap();
    assert!(fails(d.path(), &["fit", "bad.csv", "--out-dir", "out"]).contains("bad.csv:3"));
    assert!(fails(d.path(), &["fit", "missing.csv"]).contains("missing.csv"));
    assert!(!d.path().join("out").exists());
}

#[test]
fn simulate_campaign_rows_and_noise() {
    let d = tempfile::tempdir().unwrap();
    let mut variances = vec![];
    for eta in ["0.0", "0.5"] {
        fs::write(
            d.path().join("c.toml"),
            format!("mu = 30.0\nsigma = 3.0\nsubjects = 30\nseed = 4\nnoise = {eta}\n"),
        )
        .unwrap();
        ok(d.path(), &["simulate", "--config", "c.toml", "--out-dir", eta]);
        let sets = io::read_samples(&d.path().join(eta).join("samples.csv")).unwrap();
        assert_eq!(sets[0].len(), 30);
        let ys = sets[0].samples();
        let m = ys.iter().sum::<f64>() / 30.0;
        variances.push(ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / 29.0);
    }
    assert!(variances[1] > variances[0], "{variances:?}");
}

#[test]
fn predict_with_constant_model() {
    let d = tempfile::tempdir().unwrap();
    let h = 2.0 * 2f64.sqrt();
    let mut samples = String::from("clip_id,resolution,jnd_order,anchor_qp,subject_id,jnd_qp\n");
    let mut rows = vec![];
    for i in 0..12 {
        let id = format!("c{i}");
        samples += &format!("{id},360p,1,0,0,{}\n{id},360p,1,0,1,{}\n", 30.0 - h, 30.0 + h);
        let v: Vec<f64> = (0..36).map(|j| ((i * 36 + j) % 7) as f64).collect();
        rows.push(io::FeatureRow {
            clip_id: id,
            resolution: Resolution::R360p,
            features: sur_core::features::FeatureVector::new(0, v).unwrap(),
        });
    }
    fs::write(d.path().join("s.csv"), samples).unwrap();
    io::write_features(&d.path().join("f.csv"), &rows).unwrap();
    ok(d.path(), &["train", "--features", "f.csv", "--samples", "s.csv", "--out-dir", "m"]);
    ok(d.path(), &["predict", "--model", "m/model.json", "--features", "f.csv", "--out-dir", "p"]);
    let curves = io::read_curves(&d.path().join("p/curves.csv")).unwrap();
    assert_eq!(curves.len(), 12 * 51);
    for c in curves {
        let want = q_function((f64::from(c.qp) - 30.0) / 4.0);
        assert!((c.sur - want).abs() < 1e-9, "qp {}: {} vs {want}", c.qp, c.sur);
    }
}

#[test]
fn model_version_mismatch_rejected() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("m.json"), r#"{"format":"jndsur-predictor","version":9,"predictor":{}}"#).unwrap();
    fs::write(d.path().join("f.csv"), "x\n").unwrap();
    assert!(fails(d.path(), &["predict", "--model", "m.json", "--features", "f.csv"]).contains("version 9"));
}

#[test]
fn evaluate_matches_library_and_oracle_is_zero() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("gen.toml"), "[corpus]\nclips = 25\nresolutions = [\"360p\"]\nseed = 12\n").unwrap();
    ok(d.path(), &["simulate", "--config", "gen.toml", "--out-dir", "corpus"]);
    fs::write(d.path().join("run.toml"), "out_dir = \"rep\"\n[corpus]\nmanifest = \"corpus/manifest.toml\"\n[eval]\nseed = 5\n").unwrap();
    let stdout = ok(d.path(), &["evaluate", "--config", "run.toml"]);
    assert!(stdout.contains("predicted_ref"));

    let cfg = io::load_run_config(&d.path().join("run.toml")).unwrap();
    let corpus = cfg.corpus.as_ref().unwrap().load().unwrap();
    let report = run_full_evaluation(&corpus, &cfg.eval).unwrap();
    io::write_report(&d.path().join("lib"), &report).unwrap();
    for f in io::REPORT_FILES {
        assert_eq!(fs::read(d.path().join("rep").join(f)).unwrap(), fs::read(d.path().join("lib").join(f)).unwrap(), "{f}");
    }

    ok(d.path(), &["evaluate", "--config", "run.toml", "--oracle-predictor", "--out-dir", "oracle"]);
    for line in data_lines(&d.path().join("oracle/records.csv")) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(&cols[13..15], ["0", "0"], "{line}");
    }
}

#[test]
fn extract_needs_existing_manifest_paths() {
    let d = tempfile::tempdir().unwrap();
    fs::write(
        d.path().join("m.toml"),
        "version = 1\n[[clips]]\nid = \"a\"\nresolution = \"360p\"\nframes = 3\nframe_rate = 30.0\nsource = \"gone.yuv\"\n",
    )
    .unwrap();
    assert!(fails(d.path(), &["extract", "--config", "m.toml"]).contains("gone.yuv"));
}
