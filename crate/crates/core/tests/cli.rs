//! The `mspmf` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mspmf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mspmf")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn generate(dir: &Path, extra: &[&str]) -> PathBuf {
    let mut args = vec!["generate", "--out", p(dir)];
    for (flag, value) in [("--users", "30"), ("--items", "25"), ("--density", "0.3")] {
        if !extra.contains(&flag) {
            args.extend([flag, value]);
        }
    }
    args.extend_from_slice(extra);
    let out = mspmf(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("manifest.toml")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn missing_manifest_names_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nowhere/manifest.toml");
    let out = mspmf(&["train", "--manifest", p(&missing), "--out", p(&tmp.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(p(&missing)));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(mspmf(&["train", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(mspmf(&[]).status.code(), Some(1));
    assert_eq!(mspmf(&["--help"]).status.code(), Some(0));
}

#[test]
fn central_trace_strictly_decreases() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = generate(&tmp.path().join("d"), &["--user-sources", "1"]);
    let out_dir = tmp.path().join("run");
    let out = mspmf(&["train", "--manifest", p(&manifest), "--out", p(&out_dir), "--k", "3", "--max-iters", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let losses: Vec<f64> = read(&out_dir.join("trace.tsv"))
        .lines()
        .map(|l| l.split('\t').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(losses.len(), 101);
    assert!(losses.windows(2).all(|w| w[1] < w[0]));
    for f in ["U.tsv", "V.tsv", "user_0_U.tsv", "user_0_Z.tsv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    assert!(!out_dir.join("ledger.tsv").exists());
}

#[test]
fn distributed_train_writes_ledger() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = generate(&tmp.path().join("d"), &["--user-sources", "1", "--item-sources", "1"]);
    let out_dir = tmp.path().join("run");
    let out = mspmf(&[
        "train", "--manifest", p(&manifest), "--out", p(&out_dir), "--k", "3", "--max-iters", "5", "--mode", "distributed",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let ledger = read(&out_dir.join("ledger.tsv"));
    let first = ledger.lines().next().unwrap();
    assert_eq!(first.split('\t').take(3).collect::<Vec<_>>(), ["1", "user:0", "latent_down"]);
    assert!(ledger.contains("\tuser:0\tpartial_up\t"));
    assert!(ledger.contains("\titem:0\tlocal_loss_up\t8"));
}

#[test]
fn compare_reports_equivalence() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = generate(&tmp.path().join("d"), &["--user-sources", "2", "--item-sources", "1"]);
    let out = mspmf(&["compare", "--manifest", p(&manifest), "--k", "4", "--max-iters", "60"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let diff: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("max_abs_factor_diff\t"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(diff <= 1e-9);
}

#[test]
fn divergence_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = generate(&tmp.path().join("d"), &[]);
    let out = mspmf(&["train", "--manifest", p(&manifest), "--out", p(&tmp.path().join("r")), "--alpha", "1000"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(read(&tmp.path().join("r/trace.tsv")).contains("inf") || read(&tmp.path().join("r/trace.tsv")).contains("NaN"));
}

#[test]
fn evaluate_fits_noise_free_data() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = generate(
        &tmp.path().join("d"),
        &["--noise", "0", "--rank", "2", "--density", "0.6", "--user-sources", "0"],
    );
    let out_dir = tmp.path().join("eval");
    let out = mspmf(&[
        "evaluate", "--manifest", p(&manifest), "--out", p(&out_dir), "--k", "6", "--alpha", "0.02", "--max-iters",
        "3000", "--epsilon", "0", "--lambda-u", "0.001", "--lambda-v", "0.001", "--repetitions", "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(&out_dir.join("report.json"))).unwrap();
    let rmse = report["mean_rmse"].as_f64().unwrap();
    assert!(rmse < 0.05, "rmse {rmse}");
    assert!(report["mean_user_mean_rmse"].is_f64());
    assert!(report["mean_item_mean_rmse"].is_f64());
    assert_eq!(report["user_buckets"]["buckets"].as_array().unwrap().len(), 10);
    let tsv = read(&out_dir.join("report.tsv"));
    let header: Vec<&str> = tsv.lines().next().unwrap().split('\t').collect();
    assert!(header.contains(&"user_mean_rmse") && header.contains(&"item_mean_rmse"));
    assert!(read(&out_dir.join("buckets.tsv")).contains("user\t>640\t0\t"));
}

#[test]
fn evaluate_rejects_empty_test_half() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = generate(&tmp.path().join("d"), &[]);
    let out = mspmf(&["evaluate", "--manifest", p(&manifest), "--out", p(&tmp.path().join("e")), "--train-fraction", "1.0"]);
    assert_eq!(out.status.code(), Some(1));

    let tiny = tmp.path().join("tiny");
    std::fs::create_dir_all(&tiny).unwrap();
    std::fs::write(tiny.join("r.tsv"), "u1\ti1\t1\nu2\ti1\t2\nu1\ti2\t3\n").unwrap();
    std::fs::write(tiny.join("m.toml"), "ratings = \"r.tsv\"\nscale = [1.0, 5.0]\n").unwrap();
    let out = mspmf(&[
        "evaluate", "--manifest", p(&tiny.join("m.toml")), "--out", p(&tmp.path().join("e2")), "--train-fraction", "0.9",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}

#[test]
fn generate_is_reproducible_and_noise_flag_touches_only_sources() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["--user-sources", "1", "--item-sources", "1", "--seed", "4"];
    let a = generate(&tmp.path().join("a"), &args);
    let b = generate(&tmp.path().join("b"), &args);
    let mut noisy = args.to_vec();
    noisy.push("--noise-sources");
    let c = generate(&tmp.path().join("c"), &noisy);
    let dir = |m: &Path| m.parent().unwrap().to_path_buf();
    for f in ["manifest.toml", "ratings.tsv", "user_0.tsv", "item_0.tsv"] {
        assert_eq!(std::fs::read(dir(&a).join(f)).unwrap(), std::fs::read(dir(&b).join(f)).unwrap(), "{f}");
    }
    assert_eq!(read(&dir(&a).join("ratings.tsv")), read(&dir(&c).join("ratings.tsv")));
    assert_ne!(read(&dir(&a).join("user_0.tsv")), read(&dir(&c).join("user_0.tsv")));
    assert_ne!(read(&dir(&a).join("item_0.tsv")), read(&dir(&c).join("item_0.tsv")));

    let nnz = read(&dir(&a).join("ratings.tsv")).lines().count() as f64;
    assert!((nnz / (30.0 * 25.0) - 0.3).abs() / 0.3 <= 0.05);
}

#[test]
fn split_writes_partitions() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = generate(&tmp.path().join("d"), &["--user-sources", "1"]);
    let out_dir = tmp.path().join("splits");
    let out = mspmf(&["split", "--manifest", p(&manifest), "--out", p(&out_dir), "--repetitions", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let total = read(&tmp.path().join("d/ratings.tsv")).lines().count();
    for r in 0..3 {
        let rep = out_dir.join(format!("rep_{r}"));
        let train = read(&rep.join("train/ratings.tsv")).lines().count();
        let test = read(&rep.join("test.tsv")).lines().count();
        assert_eq!(train + test, total);
        assert!(rep.join("train/user_0.tsv").exists());
    }
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = generate(&tmp.path().join("d"), &[]);
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "manifest = \"d/manifest.toml\"\nout = \"from_config\"\n[hyper]\nk = 3\nmax_iters = 5\n").unwrap();
    let width = |dir: &Path| read(&dir.join("U.tsv")).lines().next().unwrap().split('\t').count() - 1;

    assert_eq!(mspmf(&["train", "--config", p(&cfg)]).status.code(), Some(0));
    assert_eq!(width(&tmp.path().join("from_config")), 3);

    let flagged = tmp.path().join("flagged");
    let out = mspmf(&["train", "--config", p(&cfg), "--k", "5", "--out", p(&flagged), "--manifest", p(&manifest)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(width(&flagged), 5);
    assert_eq!(read(&flagged.join("trace.tsv")).lines().count(), 6);
}

#[test]
fn transfer_report_table() {
    let out = mspmf(&["transfer-report", "--shared-users", "4000000", "--k", "10", "--iterations", "100", "--nnz", "80000000000"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("1.16 TB"));
    assert!(text.contains("610.35 MB"));
    assert!(text.contains("5.0%"));

    let out = mspmf(&["transfer-report", "--shared-users", "10", "--iterations", "0", "--nnz", "100"]);
    let text = String::from_utf8_lossy(&out.stdout);
    let total = text.lines().find(|l| l.starts_with("distributed total")).unwrap();
    assert!(total.split_whitespace().any(|w| w == "0"), "{total}");
    assert!(text.contains("0.0%"));
}
