use std::fs;
use std::path::Path;
use std::process::Command;

use lrrl::bandit::ExperimentTrace;
use lrrl::environment::{write_idx_images, write_idx_labels, IdxImages, MNIST_PIXELS};
use lrrl::harness::{self, Algorithm, ConfigError, CsvKind, ExperimentConfig};
use lrrl::rng::stream;
use proptest::prelude::*;
use rand::Rng;

const SMALL: &str = r#"
trials = 3
algorithms = ["lrrl-altgdmin", "lrrl-altgd", "mom", "thompson"]

[problem]
d = 8
tasks = 6
rank = 2
arms = 4
horizon = 40
seed = 11

[gd]
iterations = 10
sample_split = false
"#;

fn parse(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(text).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn sweep_config_round_trips() {
    let text = format!("{SMALL}\n[sweep]\ntasks = [10, 25, 50, 75, 100]\n");
    let cfg = parse(&text);
    assert_eq!(cfg.sweep_points().len(), 5);
    let again = parse(&cfg.to_toml_string());
    assert_eq!(again, cfg);
    assert_eq!(parse(&again.to_toml_string()), cfg);
}

#[test]
fn config_errors_are_specific() {
    match ExperimentConfig::from_toml_str(&format!("{SMALL}\n[gd.extra]\nx = 1\n")) {
        Err(ConfigError::Parse { line, .. }) => assert!(line > 1),
        other => panic!("unexpected {other:?}"),
    }
    match ExperimentConfig::from_toml_str(&SMALL.replace("rank = 2", "rank = 7")) {
        Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "problem.rank"),
        other => panic!("unexpected {other:?}"),
    }
    match ExperimentConfig::from_toml_str(&format!("{SMALL}\n[sweep]\ntasks = []\n")) {
        Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "sweep.tasks"),
        other => panic!("unexpected {other:?}"),
    }
    match ExperimentConfig::from_toml_str(&format!("{SMALL}\n[sweep]\nrank = [2, 9]\n")) {
        Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "sweep.rank"),
        other => panic!("unexpected {other:?}"),
    }
    match ExperimentConfig::from_toml_str(&SMALL.replace("trials = 3", "trials = 0")) {
        Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "trials"),
        other => panic!("unexpected {other:?}"),
    }
    match ExperimentConfig::from_toml_str(&SMALL.replace("sample_split = false", "c_gamma = 0.7")) {
        Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "gd.c_gamma"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn single_arm_regret_csv_is_all_zero() {
    let text = SMALL.replace("arms = 4", "arms = 1").replace("trials = 3", "trials = 1");
    let cfg = parse(&text);
    let result = harness::run_experiment(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("regret.csv");
    harness::write_csv(&result, CsvKind::Regret, &path).unwrap();
    let (header, rows) = read_csv(&path);
    assert_eq!(header, ["algorithm", "T", "r", "round", "mean_cum_regret", "var"]);
    assert_eq!(rows.len(), 4 * 40);
    for row in rows {
        assert_eq!(row[4].parse::<f64>().unwrap(), 0.0);
        assert_eq!(row[5].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn csv_schemas_and_metadata() {
    let cfg = parse(SMALL);
    let result = harness::run_experiment(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    harness::write_outputs(&cfg, &result, dir.path()).unwrap();
    let expected = [
        ("regret.csv", "algorithm,T,r,round,mean_cum_regret,var"),
        ("err_theta.csv", "algorithm,T,r,epoch,mean_err,var"),
        (
            "se_iter.csv",
            "algorithm,T,r,epoch,gd_iter,mean_se,mean_err_theta,var_err_theta",
        ),
    ];
    for (file, header) in expected {
        let text = fs::read_to_string(dir.path().join(file)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# seed=11");
        assert!(lines.next().unwrap().starts_with("# git-describe="));
        assert_eq!(lines.next().unwrap(), header);
        assert!(text.ends_with('\n'));
        let (_, rows) = read_csv(&dir.path().join(file));
        assert!(!rows.is_empty());
        for row in &rows {
            assert_eq!(row.len(), header.split(',').count());
            for v in &row[4.min(row.len() - 1)..] {
                if !v.contains('.') {
                    continue;
                }
                // Scientific, 6 significant digits, signed two-digit exponent.
                let (m, e) = v.split_once('e').unwrap();
                assert_eq!(m.trim_start_matches('-').len(), 7, "{v}");
                assert!(e.starts_with('-') || e.starts_with('+'));
                assert!(e.len() >= 3);
            }
        }
    }
    // Epoch 0 is the initialization; MoM and Thompson start from Θ̂ = 0.
    let (_, rows) = read_csv(&dir.path().join("err_theta.csv"));
    for row in rows.iter().filter(|r| r[3] == "0" && (r[0] == "mom" || r[0] == "thompson")) {
        assert_eq!(row[4], "1.00000e+00");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["points"].as_array().unwrap().len(), 4);
}

#[test]
fn single_row_round_trips_through_csv_parser() {
    let trace = ExperimentTrace {
        algorithm: "thompson".into(),
        tasks: 2,
        cumulative_regret: vec![1e-6],
        err_theta: vec![Some(0.5)],
        ..ExperimentTrace::default()
    };
    let point = harness::aggregate_traces(Algorithm::Thompson, 2, 1, &[&trace]);
    let result = harness::AggregateResult {
        seed: 3,
        trials: 1,
        points: vec![point],
        failures: vec![],
        estimation_failures: 0,
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("regret.csv");
    harness::write_csv(&result, CsvKind::Regret, &path).unwrap();
    let (_, rows) = read_csv(&path);
    assert_eq!(rows, vec![vec!["thompson", "2", "1", "1", "1.00000e-06", "0.00000e+00"]]);
}

#[test]
fn duplicated_trial_has_zero_variance() {
    let cfg = parse(&SMALL.replace("trials = 3", "trials = 1"));
    let problem = cfg.problem_at(6, 2);
    let schedule = cfg.schedule.build(40).unwrap();
    let seed = lrrl::rng::TrialSeed::new(11, 0);
    let env = harness::synthetic_env(&problem, seed).unwrap();
    let traces = harness::run_trial(&cfg, &problem, &schedule, &env, seed).unwrap();
    let single = harness::aggregate_traces(Algorithm::LrrlAltGdMin, 6, 2, &[&traces[0]]);
    let twice = harness::aggregate_traces(Algorithm::LrrlAltGdMin, 6, 2, &[&traces[0], &traces[0]]);
    assert_eq!(single.regret.mean, twice.regret.mean);
    assert!(twice.regret.var.iter().all(|&v| v == 0.0));
    assert!(twice.se_iter.iter().all(|c| c.var_err_theta == 0.0));
}

/// Variance via the pairwise-difference identity `Σ_{i<j} (x_i − x_j)² / (n(n−1))`.
fn pairwise_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += (xs[i] - xs[j]).powi(2);
        }
    }
    s / (n * (n - 1)) as f64
}

proptest! {
    #[test]
    fn aggregation_matches_two_pass_oracle(xs in proptest::collection::vec(-1e3f64..1e3, 2..40)) {
        let (mean, var) = harness::mean_and_variance(&xs);
        let oracle_mean = xs.iter().sum::<f64>() / xs.len() as f64;
        prop_assert!((mean - oracle_mean).abs() <= 1e-12 * oracle_mean.abs().max(1.0));
        let oracle_var = pairwise_variance(&xs);
        prop_assert!((var - oracle_var).abs() <= 1e-12 * oracle_var.max(1.0));
        prop_assert!(var >= 0.0);
    }

    #[test]
    fn sci_format_parses_back(x in -1e30f64..1e30) {
        let s = harness::format_sci(x);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-6 * x.abs());
    }
}

#[test]
fn pipeline_is_byte_identical_across_runs() {
    let cfg = parse(SMALL);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    harness::run_pipeline(&cfg, a.path(), 1).unwrap();
    harness::run_pipeline(&cfg, b.path(), 2).unwrap();
    for file in ["regret.csv", "err_theta.csv", "se_iter.csv", "summary.json"] {
        assert_eq!(
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn noiseless_error_vs_iteration_is_monotone_after_third_step() {
    let text = r#"
trials = 3
algorithms = ["lrrl-altgdmin"]
[problem]
d = 20
tasks = 30
rank = 2
arms = 5
horizon = 240
noise_variance = 0.0
[gd]
iterations = 150
sample_split = false
"#;
    let result = harness::run_experiment(&parse(text)).unwrap();
    let p = result.point(Algorithm::LrrlAltGdMin, 30, 2).unwrap();
    let epoch1: Vec<f64> = p.se_iter.iter().filter(|c| c.epoch == 1).map(|c| c.mean_err_theta).collect();
    assert_eq!(epoch1.len(), 150);
    for (i, w) in epoch1.windows(2).enumerate().skip(2) {
        // Allow round-off once the error has reached machine precision.
        assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-13, "iteration {}: {} -> {}", i + 2, w[0], w[1]);
    }
    assert!(*epoch1.last().unwrap() < 1e-8);
}

/// IDX fixture with `per_digit` random images of each digit in `digits`.
fn write_mnist_fixture(dir: &Path, digits: &[u8], per_digit: usize) -> (std::path::PathBuf, std::path::PathBuf) {
    let mut rng = stream(77, &[]);
    let mut pixels = Vec::new();
    let mut labels = Vec::new();
    for &d in digits {
        for _ in 0..per_digit {
            pixels.extend((0..MNIST_PIXELS).map(|_| rng.random::<u8>()));
            labels.push(d);
        }
    }
    let images = IdxImages { rows: 28, cols: 28, pixels };
    let ip = dir.join("images.idx");
    let lp = dir.join("labels.idx");
    fs::write(&ip, write_idx_images(&images)).unwrap();
    fs::write(&lp, write_idx_labels(&labels)).unwrap();
    (ip, lp)
}

fn mnist_config(images: &Path, labels: &Path, out: &Path) -> String {
    format!(
        r#"
trials = 2
algorithms = ["lrrl-altgdmin", "thompson"]
output_dir = "{}"
[dataset.mnist]
images = "{}"
labels = "{}"
[problem]
d = 784
tasks = 3
rank = 2
arms = 2
horizon = 12
[gd]
iterations = 5
sample_split = false
[schedule]
epochs = 2
"#,
        out.display(),
        images.display(),
        labels.display()
    )
}

#[test]
fn mnist_fixture_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let (ip, lp) = write_mnist_fixture(dir.path(), &[0, 1, 2, 3], 3);
    let out = dir.path().join("out");
    let cfg = parse(&mnist_config(&ip, &lp, &out));
    let (result, written) = harness::run_pipeline(&cfg, &out, 1).unwrap();
    assert!(result.failures.is_empty());
    assert!(written.iter().any(|p| p.ends_with("regret.csv")));
    // No planted Θ*, so no error curves.
    assert!(!out.join("err_theta.csv").exists());
    let (_, rows) = read_csv(&out.join("regret.csv"));
    assert_eq!(rows.len(), 2 * 12);
}

#[test]
fn mnist_config_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let text = mnist_config(Path::new("i"), Path::new("l"), dir.path());
    match ExperimentConfig::from_toml_str(&text.replace("arms = 2", "arms = 3")) {
        Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "problem.arms"),
        other => panic!("unexpected {other:?}"),
    }
    match ExperimentConfig::from_toml_str(&text.replace("tasks = 3", "tasks = 46")) {
        Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "problem.tasks"),
        other => panic!("unexpected {other:?}"),
    }
}

fn lrrl() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lrrl"));
    cmd.env("RUST_LOG", "error").env_remove("LRRL_OUTPUT_DIR").env_remove("LRRL_WORKERS");
    cmd
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    fs::write(&good, SMALL.replace("trials = 3", "trials = 1")).unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, SMALL.replace("rank = 2", "rank = 9")).unwrap();

    assert_eq!(lrrl().args(["validate"]).arg(&good).status().unwrap().code(), Some(0));
    let out = lrrl().args(["validate"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("problem.rank"));
    assert_eq!(lrrl().args(["run"]).arg(&bad).status().unwrap().code(), Some(1));
    assert_eq!(
        lrrl().args(["run"]).arg(dir.path().join("missing.toml")).status().unwrap().code(),
        Some(1)
    );

    let out_dir = dir.path().join("from-env");
    let status = lrrl()
        .args(["run"])
        .arg(&good)
        .env("LRRL_OUTPUT_DIR", &out_dir)
        .env("LRRL_WORKERS", "1")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out_dir.join("regret.csv").exists());

    // Every trial fails: task (0, 1) needs digit 0, which the fixture lacks.
    let (ip, lp) = write_mnist_fixture(dir.path(), &[3, 7], 2);
    let cfg = dir.path().join("mnist.toml");
    fs::write(&cfg, mnist_config(&ip, &lp, &dir.path().join("mnist-out"))).unwrap();
    assert_eq!(lrrl().args(["run"]).arg(&cfg).status().unwrap().code(), Some(2));
}

#[test]
fn cli_schedule_and_mnist_check() {
    let out = lrrl().args(["schedule", "--n", "256", "--mode", "doubling"]).output().unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "[0, 16, 64, 256]");
    let out = lrrl()
        .args(["schedule", "--n", "200", "--mode", "uniform", "--epochs", "4"])
        .output()
        .unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "[0, 50, 100, 150, 200]");
    assert_eq!(lrrl().args(["schedule", "--n", "2"]).status().unwrap().code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let (ip, lp) = write_mnist_fixture(dir.path(), &[3, 7], 2);
    let out = lrrl().arg("mnist-check").arg(&ip).arg(&lp).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("images: 4"));
    assert!(text.contains("digit 3: 2"));
    assert!(text.contains("usable digit-pair tasks: 1 of 45"));

    let mut bytes = fs::read(&ip).unwrap();
    bytes[2] = 0x07;
    fs::write(&ip, bytes).unwrap();
    let out = lrrl().arg("mnist-check").arg(&ip).arg(&lp).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("offset 0"));
}
