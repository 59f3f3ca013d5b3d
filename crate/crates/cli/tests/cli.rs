//! End-to-end runs of the `nashae` binary on small problems.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nashae_cli::data;
use nashae_cli::report::MetricsReport;
use nashae_cli::run::SweepResult;

fn nashae(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nashae"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = nashae(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A config small enough to train in well under a second.
fn tiny_config(dir: &Path, extra: &str) -> PathBuf {
    tiny_config_seeds(dir, "[0, 5]", extra)
}

fn tiny_config_seeds(dir: &Path, seeds: &str, extra: &str) -> PathBuf {
    let p = dir.join("tiny.json");
    let text = format!(
        r#"{{"schema_version": 1, "waveform_len": 60, "duty_cycle_count": 12, "hidden": [16, 8],
            "predictor_hidden": [8], "latent_dim": 3, "epochs": 4, "batch_size": 10,
            "seeds": {seeds}, "metrics": ["count", "r2", "tad", "bvae"]{extra}}}"#
    );
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn generate_data_default_is_360_rows_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.bin");
    let b = dir.path().join("b.bin");
    let c = dir.path().join("c.csv");
    ok(&["generate-data", "--out", s(&a), "--seed", "3"]);
    ok(&["generate-data", "--out", s(&b), "--seed", "3"]);
    ok(&["generate-data", "--out", s(&c), "--seed", "3", "--format", "csv"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(
        std::fs::read(data::sidecar_path(&a)).unwrap(),
        std::fs::read(data::sidecar_path(&b)).unwrap()
    );
    let bin = data::read(&a).unwrap();
    let csv = data::read(&c).unwrap();
    assert_eq!(bin.rows(), 360);
    assert_eq!(bin.samples.cols(), 1000);
    assert_eq!(bin.factors, csv.factors);
    assert!(bin.samples.max_abs_diff(&csv.samples) <= 1e-12);
    let side: serde_json::Value = serde_json::from_slice(&std::fs::read(data::sidecar_path(&a)).unwrap()).unwrap();
    assert_eq!(side["rows"], 360);
    assert_eq!(side["generator"]["seed"], 3);
    assert_eq!(side["normalization"]["mean"].as_array().unwrap().len(), 1000);
}

#[test]
fn train_eval_round_trip_and_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path(), "");
    let (o1, o2) = (dir.path().join("r1"), dir.path().join("r2"));
    ok(&["train", "--config", s(&cfg), "--out", s(&o1)]);
    ok(&["train", "--config", s(&cfg), "--out", s(&o2)]);
    for f in ["seed-0/trace.csv", "seed-0/latents.csv", "seed-0/model.ckpt", "seed-5/metrics.json", "summary.csv"] {
        assert_eq!(std::fs::read(o1.join(f)).unwrap(), std::fs::read(o2.join(f)).unwrap(), "{f}");
    }
    // 36 rows in batches of 10, 10, 10, 6 for 4 epochs.
    let trace = std::fs::read_to_string(o1.join("seed-0/trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 16);
    assert!(trace.starts_with("step,epoch,recon,adversarial,combined,mean_predictor_loss"));

    // Scoring the checkpoint against the data reproduces the training report.
    let data_path = dir.path().join("d.csv");
    ok(&["generate-data", "--out", s(&data_path), "--format", "csv", "--waveform-len", "60", "--duty-cycles", "12"]);
    let (e1, e2) = (dir.path().join("e1.json"), dir.path().join("e2.json"));
    let model = o1.join("seed-0");
    for e in [&e1, &e2] {
        ok(&["eval", "--model", s(&model), "--data", s(&data_path), "--out", s(e)]);
    }
    assert_eq!(std::fs::read(&e1).unwrap(), std::fs::read(&e2).unwrap());
    let from_eval: MetricsReport = serde_json::from_slice(&std::fs::read(&e1).unwrap()).unwrap();
    let from_train: MetricsReport =
        serde_json::from_slice(&std::fs::read(o1.join("seed-0/metrics.json")).unwrap()).unwrap();
    assert_eq!(from_eval.learned_latents, from_train.learned_latents);
    assert_eq!(from_eval.r2, from_train.r2);
    assert_eq!(from_eval.tad, from_train.tad);

    // The latent dump scores the same without the model.
    let e3 = dir.path().join("e3.json");
    ok(&["eval", "--latents", s(&o1.join("seed-0/latents.csv")), "--metrics", "count,r2,tad", "--out", s(&e3)]);
    let from_dump: MetricsReport = serde_json::from_slice(&std::fs::read(&e3).unwrap()).unwrap();
    assert_eq!(from_dump.r2, from_eval.r2);
    assert_eq!(from_dump.tad, from_eval.tad);
}

#[test]
fn width_mismatch_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path(), "");
    let out = dir.path().join("r");
    ok(&["train", "--config", s(&cfg), "--out", s(&out)]);
    let wide = dir.path().join("wide.bin");
    ok(&["generate-data", "--out", s(&wide), "--waveform-len", "70", "--duty-cycles", "4"]);
    let res = nashae(&["eval", "--model", s(&out.join("seed-0")), "--data", s(&wide), "--out", s(&dir.path().join("x.json"))]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("width mismatch"));
}

#[test]
fn config_errors_exit_two_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path(), r#", "lambda": 1.5"#);
    let res = nashae(&["train", "--config", s(&cfg), "--out", s(&dir.path().join("r"))]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("`lambda`"));
}

#[test]
fn diverging_training_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path(), r#", "ae_lr": 1e300, "predictor_lr": 1e300"#);
    let res = nashae(&["train", "--config", s(&cfg), "--out", s(&dir.path().join("r"))]);
    assert_eq!(res.status.code(), Some(4), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn missing_data_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let res = nashae(&["eval", "--latents", "/nonexistent/z.csv", "--out", s(&dir.path().join("x.json"))]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("/nonexistent/z.csv"));
}

#[test]
fn synthetic_latents_through_tad_only_eval() {
    let dir = tempfile::tempdir().unwrap();
    let z = dir.path().join("z.csv");
    let rep = dir.path().join("tad.json");
    ok(&["synth-latents", "--mu", "1", "--r", "0", "--seed", "2", "--out", s(&z)]);
    ok(&["eval", "--latents", s(&z), "--metrics", "tad", "--out", s(&rep)]);
    let r: MetricsReport = serde_json::from_slice(&std::fs::read(&rep).unwrap()).unwrap();
    let tad = r.tad.unwrap();
    assert!((tad - 0.417).abs() <= 0.02, "{tad}");
    assert!(r.bvae_score.is_none() && r.learned_latents.is_none());
}

#[test]
fn single_trial_sweep_matches_train() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config_seeds(dir.path(), "[0]", "");
    let sweep = dir.path().join("sw");
    let train = dir.path().join("tr");
    let out = ok(&[
        "sweep", "--lambdas", "0.2", "--latent-sizes", "3", "--trials", "1", "--config", s(&cfg), "--out", s(&sweep),
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("lambda=0.2 m=3 trials=1"));
    ok(&["train", "--config", s(&cfg), "--out", s(&train)]);
    let rows = SweepResult::read_rows(&sweep.join("trials.csv")).unwrap();
    let report: MetricsReport =
        serde_json::from_slice(&std::fs::read(train.join("seed-0/metrics.json")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(Some(rows[0].learned), report.learned_latents);
    assert_eq!(Some(rows[0].mean_r2), report.mean_r2);
    // The summary is the mean of the written rows.
    let summary = std::fs::read_to_string(sweep.join("summary.csv")).unwrap();
    let again = SweepResult::from_rows(2, rows);
    assert!(summary.contains(&format!(",{},", again.cells[0].mean_abs_diff)));
}

#[test]
fn sweep_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path(), "");
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        ok(&[
            "sweep", "--lambdas", "0,0.2", "--latent-sizes", "2,3", "--trials", "2", "--config", s(&cfg),
            "--threads", threads, "--out", s(&out),
        ]);
        std::fs::read(out.join("trials.csv")).unwrap()
    };
    assert_eq!(run("1", "a"), run("3", "b"));
}
