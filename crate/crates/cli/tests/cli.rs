use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use geneprio_cli::commands::{ComparisonFile, ReportFile};
use geneprio_cli::{exit, main_with_args};
use geneprio_testkit::synth;

fn write_dataset(dir: &Path, name: &str, d: &geneprio::Dataset) -> PathBuf {
    let path = dir.join(name);
    let f = fs::File::create(&path).unwrap();
    d.write(f, b',', "gene", "label").unwrap();
    path
}

fn run(args: &[&str]) -> i32 {
    let mut full = vec!["geneprio"];
    full.extend_from_slice(args);
    main_with_args(full)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn evaluate_twice_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_dataset(tmp.path(), "planted.csv", &synth::planted(1, 150, 5, 30, 3));
    let out = tmp.path().join("out");
    let mut reports = Vec::new();
    for threads in ["1", "3"] {
        let code = run(&[
            "evaluate", "--dataset", s(&data), "--fraction", "0.1", "--trees", "30",
            "--seed", "42", "--threads", threads, "--out-dir", s(&out),
        ]);
        assert_eq!(code, exit::OK);
        reports.push(fs::read_to_string(out.join("report.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let a = reports[0].as_bytes();
    let parsed: ReportFile = serde_json::from_slice(a).unwrap();
    assert_eq!(parsed.config.seed, 42);
    assert_eq!(parsed.report.per_fold.len(), 10);
    assert!(out.join("timings.json").exists());
}

#[test]
fn select_output_reruns_from_its_own_config() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_dataset(tmp.path(), "d.csv", &synth::planted(2, 120, 3, 40, 2));
    let out = tmp.path().join("sel");
    assert_eq!(
        run(&["select", "--dataset", s(&data), "--fraction", "0.1", "--out-dir", s(&out)]),
        exit::OK
    );
    let first = fs::read_to_string(out.join("features.tsv")).unwrap();
    assert!(first.starts_with("# config: {"));
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines[1], "feature\trelevance\tmean_redundancy\tcriterion");
    assert_eq!(lines.len(), 2 + 5);

    let copy = tmp.path().join("features_first.tsv");
    fs::copy(out.join("features.tsv"), &copy).unwrap();
    assert_eq!(run(&["select", "--config", s(&copy)]), exit::OK);
    assert_eq!(fs::read_to_string(out.join("features.tsv")).unwrap(), first);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_dataset(tmp.path(), "d.csv", &synth::planted(3, 120, 3, 40, 2));
    let cfg = tmp.path().join("run.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"dataset": "{}", "fractions": [0.5], "out_dir": "{}"}}"#,
            s(&data),
            s(&tmp.path().join("o"))
        ),
    )
    .unwrap();
    assert_eq!(run(&["select", "--config", s(&cfg), "--fraction", "0.05"]), exit::OK);
    let text = fs::read_to_string(tmp.path().join("o/features.tsv")).unwrap();
    assert_eq!(text.lines().count(), 2 + 3);
}

#[test]
fn merge_then_evaluate_and_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let pair = synth::complementary_pair(4, 160, 2, 10, 2, 3);
    let a = write_dataset(tmp.path(), "go.csv", &pair.a);
    let b = write_dataset(tmp.path(), "pathdip.csv", &pair.b);
    let out = tmp.path().join("m");
    assert_eq!(run(&["merge", s(&a), s(&b), "--out-dir", s(&out)]), exit::OK);
    let merged = out.join("merged.csv");
    let d = geneprio::Dataset::load(&merged, "gene", "label").unwrap();
    assert_eq!(d.n_genes(), 160);
    assert_eq!(d.n_features(), pair.a.n_features() + pair.b.n_features());
    assert!(d.feature_names()[0].starts_with("go:"));

    let common = ["--trees", "20", "--seed", "7", "--fraction", "0.1"];
    let mut args = vec!["evaluate", "--dataset", s(&merged), "--out-dir"];
    let r_merged = tmp.path().join("rm");
    args.push(s(&r_merged));
    args.extend_from_slice(&common);
    assert_eq!(run(&args), exit::OK);
    let r_single = tmp.path().join("ra");
    let mut args = vec!["evaluate", "--dataset", s(&a), "--out-dir", s(&r_single)];
    args.extend_from_slice(&common);
    assert_eq!(run(&args), exit::OK);

    let rep_m = r_merged.join("report.json");
    let rep_a = r_single.join("report.json");
    let cmp = tmp.path().join("cmp");
    assert_eq!(
        run(&["compare", s(&rep_m), s(&rep_a), "--name", "go", "--out-dir", s(&cmp)]),
        exit::OK
    );
    let c: ComparisonFile =
        serde_json::from_str(&fs::read_to_string(cmp.join("comparison.json")).unwrap()).unwrap();
    assert_eq!(c.t_tests.len(), 4);
    assert_eq!(c.config.baseline_name, "go");

    assert_eq!(
        run(&["compare", s(&rep_m), s(&rep_m), "--out-dir", s(&cmp)]),
        exit::OK
    );
    let c: ComparisonFile =
        serde_json::from_str(&fs::read_to_string(cmp.join("comparison.json")).unwrap()).unwrap();
    assert!(c.t_tests.iter().all(|t| t.p == 1.0));
}

#[test]
fn rank_writes_top_lists() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_dataset(tmp.path(), "d.csv", &synth::planted(5, 150, 3, 30, 2));
    let out = tmp.path().join("r");
    assert_eq!(
        run(&[
            "rank", "--dataset", s(&data), "--fraction", "0.2", "--trees", "20",
            "--permutation-repeats", "3", "--out-dir", s(&out),
        ]),
        exit::OK
    );
    let ranking = fs::read_to_string(out.join("ranking.tsv")).unwrap();
    let rows: Vec<&str> = ranking.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "rank\tgene_id\tprobability\tlabel");
    assert_eq!(rows.len(), 1 + 7);
    assert!(rows[1..].iter().all(|r| r.ends_with("\tunlabeled")));

    let imp = fs::read_to_string(out.join("importance.tsv")).unwrap();
    let rows: Vec<&str> = imp.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 1 + 5);
    assert!(rows[1].ends_with("\t100.00"));
    assert!(out.join("model.json").exists());
}

#[test]
fn error_classes_have_distinct_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.csv");
    assert_eq!(run(&["select", "--dataset", s(&missing)]), exit::IO);

    let good = write_dataset(tmp.path(), "d.csv", &synth::planted(6, 60, 2, 5, 1));
    assert_eq!(
        run(&["select", "--dataset", s(&good), "--fraction", "1.5"]),
        exit::CONFIG
    );
    assert_eq!(run(&["select"]), exit::CONFIG);

    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, "gene,label,f1\nA,1,0\nB,0,x\n").unwrap();
    assert_eq!(run(&["select", "--dataset", s(&bad)]), exit::DATA);

    let junk = tmp.path().join("junk.json");
    fs::write(&junk, "{\"not\": \"a report\"}").unwrap();
    assert_eq!(run(&["compare", s(&junk), s(&junk)]), exit::ARTIFACT);

    assert_eq!(run(&["evaluate", "--no-such-flag"]), exit::USAGE);
    assert_eq!(run(&["select", "--fraction", "0.1", "--fractions", "0.1,0.2"]), exit::USAGE);
}

#[test]
fn reports_from_different_plans_cannot_be_compared() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_dataset(tmp.path(), "d.csv", &synth::planted(7, 100, 2, 10, 1));
    for seed in ["1", "2"] {
        let out = tmp.path().join(seed);
        assert_eq!(
            run(&[
                "evaluate", "--dataset", s(&data), "--trees", "10", "--seed", seed,
                "--fraction", "0.2", "--out-dir", s(&out),
            ]),
            exit::OK
        );
    }
    let a = tmp.path().join("1/report.json");
    let b = tmp.path().join("2/report.json");
    assert_eq!(
        run(&["compare", s(&a), s(&b), "--out-dir", s(tmp.path())]),
        exit::PIPELINE
    );
}

#[test]
fn binary_reads_thread_count_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_dataset(tmp.path(), "d.csv", &synth::planted(8, 60, 2, 5, 1));
    let bin = env!("CARGO_BIN_EXE_geneprio");
    let status = Command::new(bin)
        .args(["select", "--dataset", s(&data), "--out-dir", s(tmp.path())])
        .env("GENEPRIO_THREADS", "many")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(exit::CONFIG));
    let status = Command::new(bin)
        .args(["select", "--dataset", s(&data), "--out-dir", s(tmp.path())])
        .env("GENEPRIO_THREADS", "2")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(exit::OK));
    // an explicit flag wins over the environment
    let status = Command::new(bin)
        .args(["select", "--dataset", s(&data), "--threads", "1", "--out-dir", s(tmp.path())])
        .env("GENEPRIO_THREADS", "many")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(exit::OK));
}
