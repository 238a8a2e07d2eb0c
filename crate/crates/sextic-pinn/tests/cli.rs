use std::fs;
use std::path::Path;
use std::process::Command;

use sextic_pinn::checkpoint::Checkpoint;
use sextic_pinn::cli::{run, run_gradcheck_with, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use sextic_pinn::report::{import_history, import_table, write_table};
use sextic_pinn_core::loss::{collocation_grid, loss_gradient};
use sextic_pinn_core::problem::example1;
use sextic_pinn_core::report::build_table;
use sextic_pinn_core::{BvpProblem, CombineMode, MlpParams, TrainConfig};

const BIN: &str = env!("CARGO_BIN_EXE_sextic-pinn");

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["sextic-pinn"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn dir_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_owned()
}

#[test]
fn list_problems() {
    let (code, out, _) = call(&["list-problems"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "example1\nexample2\n");
}

#[test]
fn help_and_bad_flags() {
    assert_eq!(call(&["--help"]).0, EXIT_OK);
    assert_eq!(call(&["--version"]).0, EXIT_OK);
    assert_eq!(call(&["train", "--bogus"]).0, EXIT_USAGE);
    assert_eq!(call(&[]).0, EXIT_USAGE);
    assert_eq!(call(&["train", "--epochs", "many"]).0, EXIT_USAGE);
}

#[test]
fn unknown_problem_names_valid_ones() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = call(&["train", "--problem", "nosuch", "--output-dir", &dir_arg(dir.path())]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("example1") && err.contains("example2"), "{err}");
    assert!(!dir.path().join("model.ckpt").exists());
}

#[test]
fn zero_epochs_writes_initialization_table() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) =
        call(&["train", "--problem", "example1", "--epochs", "0", "--output-dir", &dir_arg(dir.path())]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("epochs = 0"));
    assert!(out.contains("max_abs_error = "));

    let init = MlpParams::init(&TrainConfig::default().network_config()).unwrap();
    let expected = build_table(&init, &example1(), &collocation_grid(0.0, 1.0, 11).unwrap()).unwrap();
    let mut buf = Vec::new();
    write_table(&expected, &mut buf).unwrap();
    assert_eq!(fs::read(dir.path().join("table.csv")).unwrap(), buf);

    let ck = Checkpoint::load(&dir.path().join("model.ckpt")).unwrap();
    assert_eq!(ck.params, init);
    assert_eq!(ck.problem.as_deref(), Some("example1"));
    assert_eq!(import_history(&dir.path().join("history.csv")).unwrap().len(), 1);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let args = ["train", "--problem", "example2", "--epochs", "500", "--output-dir", &dir_arg(d.path())];
        assert_eq!(call(&args).0, EXIT_OK);
    }
    // Overwriting an existing output directory gives the same bytes again.
    assert_eq!(
        call(&["train", "--problem", "example2", "--epochs", "500", "--output-dir", &dir_arg(a.path())]).0,
        EXIT_OK
    );
    for f in ["model.ckpt", "history.csv", "table.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn thread_pool_output_matches_serial() {
    let serial = tempfile::tempdir().unwrap();
    let pooled = tempfile::tempdir().unwrap();
    for (d, threads) in [(&serial, "0"), (&pooled, "3")] {
        let status = Command::new(BIN)
            .args(["train", "--problem", "example1", "--epochs", "200", "--output-dir", &dir_arg(d.path())])
            .env("SEXTIC_PINN_THREADS", threads)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    }
    for f in ["model.ckpt", "history.csv", "table.csv"] {
        assert_eq!(fs::read(serial.path().join(f)).unwrap(), fs::read(pooled.path().join(f)).unwrap(), "{f}");
    }
    let bad = Command::new(BIN).args(["train", "--epochs", "0"]).env("SEXTIC_PINN_THREADS", "lots").output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
}

#[test]
fn seed_changes_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(call(&["train", "--epochs", "5", "--seed", "1", "--output-dir", &dir_arg(a.path())]).0, EXIT_OK);
    assert_eq!(call(&["train", "--epochs", "5", "--seed", "2", "--output-dir", &dir_arg(b.path())]).0, EXIT_OK);
    assert_ne!(fs::read(a.path().join("table.csv")).unwrap(), fs::read(b.path().join("table.csv")).unwrap());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, format!("problem = \"example2\"\nepochs = 3\nseed = 5\noutput_dir = \"{}\"\n", out_dir.display()))
        .unwrap();
    let (code, out, _) = call(&["train", "--config", cfg.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("problem = \"example2\""));
    assert!(out.contains("epochs = 3"));
    assert!(out.contains("seed = 9"));
    let ck = Checkpoint::load(&out_dir.join("model.ckpt")).unwrap();
    assert_eq!(ck.network.seed, 9);

    fs::write(&cfg, "epochz = 3\n").unwrap();
    let (code, _, err) = call(&["train", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("epochz"), "{err}");
    assert_eq!(call(&["train", "--config", "/nonexistent/run.toml"]).0, EXIT_USAGE);
    assert_eq!(call(&["train", "--grid-points", "1"]).0, EXIT_USAGE);
}

#[test]
fn divergence_keeps_last_good_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "train",
        "--problem",
        "example1",
        "--optimizer",
        "sgd",
        "--learning-rate",
        "1e60",
        "--epochs",
        "10",
        "--output-dir",
        &dir_arg(dir.path()),
    ];
    let (code, _, err) = call(&args);
    assert_eq!(code, EXIT_NUMERICAL);
    assert!(err.contains("epoch 1"), "{err}");
    let ck = Checkpoint::load(&dir.path().join("model.ckpt")).unwrap();
    assert_eq!(ck.params, MlpParams::init(&TrainConfig::default().network_config()).unwrap());
}

#[test]
fn evaluate_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        call(&["train", "--problem", "example2", "--epochs", "50", "--output-dir", &dir_arg(dir.path())]).0,
        EXIT_OK
    );
    let ck = dir.path().join("model.ckpt");

    let (code, out, _) = call(&["evaluate", "--checkpoint", ck.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<&str> = out.lines().skip(1).filter(|l| !l.starts_with("max_abs_error")).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows[0].starts_with("0.00000000,1.00000000,"));
    // The default grid reproduces the table written by `train`.
    let written = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert!(out.starts_with(&written), "{out}");

    let saved = dir.path().join("eval.csv");
    let (code, out, _) = call(&[
        "evaluate",
        "--checkpoint",
        ck.to_str().unwrap(),
        "--grid-size",
        "2",
        "--output",
        saved.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let xs: Vec<&str> = out.lines().skip(1).take(2).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(xs, ["0.00000000", "1.00000000"]);
    assert_eq!(import_table(&saved).unwrap().rows.len(), 2);

    let (code, out, _) = call(&["evaluate", "--checkpoint", ck.to_str().unwrap(), "--problem", "example1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.lines().nth(6).unwrap().starts_with("0.50000000,0.82436064,"));
}

#[test]
fn evaluate_rejects_corrupt_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ckpt");
    fs::write(&bad, "format = \"sextic-pinn-checkpoint\"\nversion = 1\n").unwrap();
    assert_ne!(call(&["evaluate", "--checkpoint", bad.to_str().unwrap()]).0, EXIT_OK);
    assert_ne!(call(&["evaluate", "--checkpoint", dir.path().join("missing").to_str().unwrap()]).0, EXIT_OK);
    assert_eq!(call(&["evaluate", "--grid-size", "2"]).0, EXIT_USAGE);
}

#[test]
fn gradcheck_passes_across_seeds() {
    for seed in ["42", "1", "2", "3", "4"] {
        for problem in ["example1", "example2"] {
            let (code, out, err) = call(&["gradcheck", "--seed", seed, "--problem", problem]);
            assert_eq!(code, EXIT_OK, "seed {seed} {problem}: {out}{err}");
            assert_eq!(out.lines().filter(|l| l.contains("worst relative error")).count(), 8);
        }
    }
    assert_eq!(call(&["gradcheck", "--problem", "nosuch"]).0, EXIT_USAGE);
}

#[test]
fn gradcheck_flags_corrupted_gradient() {
    let corrupted = |p: &MlpParams, problem: &BvpProblem, points: &[f64], mode: CombineMode| {
        let mut g = loss_gradient(p, problem, points, mode)?;
        let last = g.len() - 1;
        g[last] *= 1.001;
        Ok(g)
    };
    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(run_gradcheck_with(42, "example1", &corrupted, &mut out, &mut err), EXIT_NUMERICAL);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(run_gradcheck_with(42, "example1", &loss_gradient, &mut out, &mut err), EXIT_OK);
}

#[test]
fn binary_exit_codes() {
    let ok = Command::new(BIN).arg("list-problems").output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let usage = Command::new(BIN).args(["train", "--problem", "nosuch"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(EXIT_USAGE));
}
