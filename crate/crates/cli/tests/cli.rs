mod common;

use std::fs;

use common::{compare_runs, fixtures, run_pipeline, topcov, validate};
use topcov::{ModelType, ReferenceTopicSet, TopicModel};

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn ingest(dir: &std::path::Path) {
    let input = fixtures().join("mini_corpus.jsonl");
    let out = topcov(dir, &["ingest", "--input", input.to_str().unwrap(), "--out", "corpus"]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn pipeline_outputs_validate_and_repeat() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_pipeline(a.path()).unwrap();
    validate(a.path()).unwrap();
    run_pipeline(b.path()).unwrap();
    assert_eq!(compare_runs(a.path(), b.path()), Vec::<String>::new());
}

#[test]
fn coverage_of_refset_by_itself() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ingest(d);
    let ann = fixtures().join("refset_annotations.jsonl");
    let out = topcov(d, &["refset", "--corpus", "corpus", "--annotations", ann.to_str().unwrap(), "--out", "refset"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let refset = ReferenceTopicSet::load(&d.join("refset/refset.json")).unwrap();
    TopicModel::new(refset.topics, ModelType::External, 0).unwrap().save(&d.join("same.json")).unwrap();

    let out = topcov(d, &["coverage", "--models", "same.json", "--refset", "refset/refset.json", "--out", "cov"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(d.join("cov/coverage.csv")).unwrap();
    assert_eq!(csv, "model_id,model_type,num_topics,aucdc,sup\nsame,EXTERNAL,8,0.990000,NA\n");
    let cdc = fs::read_to_string(d.join("cov/cdc_same.csv")).unwrap();
    assert_eq!(cdc.lines().count(), 52);
    assert!(cdc.starts_with("threshold,coverage\n0.000000,0.000000\n0.020000,1.000000\n"));
}

#[test]
fn errors_are_one_parsable_line() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["ingest", "--input", "missing.jsonl", "--out", "x"],
        vec!["coverage", "--models", "nope.json", "--refset", "nope.json", "--out", "x"],
        vec!["train", "--corpus", "x"],
        vec!["frobnicate"],
    ] {
        let out = topcov(dir.path(), &args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = stderr(&out);
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("error: kind="), "{err}");
        assert!(err.contains(" msg="), "{err}");
    }
}

#[test]
fn malformed_input_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.jsonl"), "{\"id\":\"a\",\"title\":\"\",\"text\":\"x y\"}\nnot json\n").unwrap();
    let out = topcov(dir.path(), &["ingest", "--input", "bad.jsonl", "--out", "c"]);
    let err = stderr(&out);
    assert!(err.starts_with("error: kind=parse msg="), "{err}");
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ingest(d);
    fs::write(d.join("run.toml"), "seed = 5\n[train]\nmodel = \"nmf\"\ntopics = 3\nmax_iters = 1\n").unwrap();
    let out = topcov(d, &["--config", "run.toml", "train", "--corpus", "corpus", "--out", "m"]);
    assert!(stderr(&out).contains("kind=config"), "unknown keys must be rejected: {}", stderr(&out));

    fs::write(d.join("run.toml"), "seed = 5\n[train]\nmodel = \"nmf\"\ntopics = 3\n").unwrap();
    let out = topcov(d, &["--config", "run.toml", "train", "--corpus", "corpus", "--out", "m", "-t", "4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let m = TopicModel::load(&d.join("m/nmf-t4-s5.json")).unwrap();
    assert_eq!((m.model_type, m.num_topics(), m.seed), (ModelType::Nmf, 4, 5));
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(d.join("m/meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["topics"], 4);
    assert_eq!(meta["seeds"], serde_json::json!([5]));
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ingest(d);
    for (jobs, out_dir) in [("1", "one"), ("3", "three")] {
        let out = topcov(d, &["--jobs", jobs, "train", "--corpus", "corpus", "-t", "5", "--seeds", "1,2,3", "--iters", "50", "--out", out_dir]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for f in ["lda-t5-s1.json", "lda-t5-s2.json", "lda-t5-s3.json", "meta.json"] {
        assert_eq!(fs::read(d.join("one").join(f)).unwrap(), fs::read(d.join("three").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn incompatible_models_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ingest(d);
    let out = topcov(d, &["train", "--corpus", "corpus", "-t", "3", "--iters", "10", "--out", "m"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let small = topcov::synthetic::random_sparse_topics(3, 10, 2, 0).unwrap();
    TopicModel::new(small, ModelType::External, 0).unwrap().save(&d.join("other.json")).unwrap();
    let out = topcov(d, &["coherence", "--corpus", "corpus", "--models", "m/lda-t3-s0.json", "other.json", "--out", "c"]);
    assert!(stderr(&out).starts_with("error: kind=incompatible"), "{}", stderr(&out));
    assert!(!d.join("c/coherence.csv").exists());
}
