use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use trustrec::cli::{cmd_ingest, cmd_run, cmd_synth, cmd_train, RunConfig};
use trustrec::dataset::DatasetPaths;
use trustrec::factorization::TrainedModel;
use trustrec::synth::SynthConfig;

fn bin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trustrec"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn small_synth(dir: &Path) -> PathBuf {
    let data = dir.join("data");
    let cfg = SynthConfig {
        users: 40,
        items: 30,
        ratings_per_user: 10,
        seed: 3,
        ..SynthConfig::default()
    };
    cmd_synth(&cfg, &data).unwrap();
    data
}

const QUICK: &str = "factors = 3\nepochs = 15\nfolds = 2\nalpha_grid = 0, 0.5\nbeta_grid = 0, 1\n";

#[test]
fn ingest_prints_stats() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path());
    let out = bin(&["ingest"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("users\t40\n"));
    assert!(text.contains("ratings\t400\n"));
    assert!(text.contains("rating_sparsity\t"));
}

#[test]
fn malformed_input_exits_nonzero_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_synth(dir.path());
    let reviews = data.join("reviews.jsonl");
    let mut text = fs::read_to_string(&reviews).unwrap();
    text.push_str("{\"user_id\": \"user0000\", \"item_id\": \"item0001\", \"rating\": 9}\n");
    fs::write(&reviews, text).unwrap();
    let out = bin(&["ingest"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("reviews.jsonl:401"), "{err}");
    assert!(err.contains("rating out of range"), "{err}");
}

#[test]
fn empty_dataset_has_zero_counts() {
    let dir = tempfile::tempdir().unwrap();
    let paths = DatasetPaths::in_dir(dir.path().join("data"));
    fs::create_dir_all(dir.path().join("data")).unwrap();
    for p in [
        &paths.users,
        &paths.items,
        &paths.reviews,
        &paths.tips,
        &paths.friends,
    ] {
        fs::write(p, "").unwrap();
    }
    let stats = cmd_ingest(&RunConfig::parse("", dir.path()).unwrap()).unwrap();
    assert_eq!(
        (stats.users, stats.items, stats.ratings, stats.friend_edges),
        (0, 0, 0, 0)
    );
    assert_eq!(stats.rating_sparsity, 0.0);
}

#[test]
fn category_and_threshold_filters_apply() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path());
    let all = cmd_ingest(&RunConfig::parse("", dir.path()).unwrap()).unwrap();
    let hotels = cmd_ingest(&RunConfig::parse("category_tags = Hotels\n", dir.path()).unwrap()).unwrap();
    assert_eq!(hotels.items, all.items / 2);
    let strict = cmd_ingest(&RunConfig::parse("min_ratings = 1000\n", dir.path()).unwrap()).unwrap();
    assert_eq!(strict.users, 0);
}

#[test]
fn eval_writes_every_artifact_and_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path());
    fs::write(dir.path().join("run.cfg"), QUICK).unwrap();
    let out = bin(
        &[
            "eval", "--config", "run.cfg", "--alpha", "0.9", "--beta", "0", "--k", "5", "--out", "res",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let res = dir.path().join("res");
    for f in [
        "report.csv",
        "grid.csv",
        "grid_folds.csv",
        "model.txt",
        "trust.tsv",
        "pagerank.tsv",
        "split.tsv",
    ] {
        assert!(res.join(f).is_file(), "{f} missing");
    }
    let grid = fs::read_to_string(res.join("grid.csv")).unwrap();
    assert_eq!(grid.lines().collect::<Vec<_>>().len(), 2, "{grid}");
    assert!(grid.lines().nth(1).unwrap().starts_with("0.9,0,mean,"));
    let report = fs::read_to_string(res.join("report.csv")).unwrap();
    let row = report.lines().nth(1).unwrap();
    assert!(
        row.starts_with("LOCABAL+,full:C=1:C1-C6=111111,0.9,0,5,"),
        "{row}"
    );
    let folds = fs::read_to_string(res.join("grid_folds.csv")).unwrap();
    assert_eq!(folds.lines().count(), 3);
}

#[test]
fn mf_run_skips_trust_dumps() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path());
    let cfg = RunConfig::parse(&format!("{QUICK}variant = MF\n"), dir.path()).unwrap();
    let run = cmd_run(&cfg).unwrap();
    assert_eq!(run.grid.cells.len(), 1);
    assert_eq!(run.report.alpha, None);
    let out = dir.path().join("out");
    assert!(out.join("model.txt").is_file());
    assert!(!out.join("trust.tsv").exists());
    assert!(!out.join("pagerank.tsv").exists());
}

#[test]
fn knn_variants_run_without_model_dump() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path());
    for variant in ["U2UCF", "U2USocial"] {
        let cfg = RunConfig::parse(
            &format!("{QUICK}variant = {variant}\nout = {variant}\n"),
            dir.path(),
        )
        .unwrap();
        let run = cmd_run(&cfg).unwrap();
        assert_eq!(run.report.algorithm, variant);
        assert!(!dir.path().join(variant).join("model.txt").exists());
    }
}

#[test]
fn trained_model_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path());
    let cfg = RunConfig::parse(&format!("{QUICK}variant = LOCABAL\nalpha = 0.5\n"), dir.path()).unwrap();
    let model = cmd_train(&cfg).unwrap();
    let file = fs::File::open(dir.path().join("out/model.txt")).unwrap();
    let back = TrainedModel::read(std::io::BufReader::new(file)).unwrap();
    assert_eq!(back.params, model.params);
    assert!(back.params.h.is_some());
}

#[test]
fn trust_and_synth_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(
        &[
            "synth",
            "--users",
            "30",
            "--items",
            "20",
            "--ratings-per-user",
            "5",
            "--seed",
            "1",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("data/users.jsonl").is_file());
    let out = bin(&["trust", "--ablation", "noE", "--beta", "0.5"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trust = fs::read_to_string(dir.path().join("out/trust.tsv")).unwrap();
    // 30 reputation lines then one line per review
    assert_eq!(trust.lines().count(), 30 + 150);
    let out = bin(&["grid", "--variant", "MF"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bad = bin(&["eval", "--ablation", "noX"], dir.path());
    assert!(!bad.status.success());
}
