mod common;

use metaselect::experiment::{
    execute, recommend, run_experiment, write_reports, ExperimentManifest, RankingReport,
    RunOptions, TABLE_HEADERS,
};
use metaselect::recommend::Strategy;
use tempfile::tempdir;

fn opts() -> RunOptions {
    RunOptions::default()
}

#[test]
fn synthetic_run_is_deterministic_and_valid() {
    let dir = tempdir().unwrap();
    let path = common::write_synthetic_manifest(dir.path(), 2, "");
    let m = ExperimentManifest::load(&path).unwrap();
    let a = run_experiment(&m, &opts()).unwrap();
    let b = run_experiment(&m, &opts()).unwrap();
    assert_eq!(a.body_json().unwrap(), b.body_json().unwrap());
    a.validate().unwrap();

    assert_eq!(a.rows.len(), 5);
    assert_eq!(a.experience.len(), 15);
    assert_eq!(a.provenance.evaluated_training_datasets.len(), 3);
    assert!(a.rules_ranking.is_some() && a.meta_ranking.is_some());
    assert_eq!(a.intervals.as_ref().unwrap().len(), 5);
    assert_eq!(a.overlaps.len(), 10);
    for row in &a.rows {
        assert_eq!(row.recalls.len(), 2);
    }
}

#[test]
fn seed_override_is_recorded() {
    let dir = tempdir().unwrap();
    let path = common::write_synthetic_manifest(dir.path(), 2, "");
    let m = ExperimentManifest::load(&path).unwrap();
    let over = RunOptions {
        seed_override: Some(12345),
        ..RunOptions::default()
    };
    let r = run_experiment(&m, &over).unwrap();
    assert_eq!(r.provenance.seed, 12345);
    let base = run_experiment(&m, &opts()).unwrap();
    assert_eq!(base.provenance.seed, 7);
    assert_eq!(r.provenance.manifest_hash, base.provenance.manifest_hash);
}

#[test]
fn degenerate_single_set_single_candidate() {
    let dir = tempdir().unwrap();
    common::write_synthetic_manifest(dir.path(), 1, "");
    let manifest = r#"{
        "version": 1,
        "training_datasets": [{"id": "a", "path": "train0.csv", "target": "label", "positive_label": "attack"}],
        "test_dataset": {"id": "t", "path": "test.csv", "target": "label", "positive_label": "attack"},
        "repetitions": 1,
        "candidates": ["naive_bayes"],
        "characterization": {"assigned_task": "classify"}
    }"#;
    let m = ExperimentManifest::from_json(manifest, dir.path()).unwrap();
    let r = run_experiment(&m, &opts()).unwrap();
    assert_eq!(r.rows.len(), 1);
    assert_eq!(r.rows[0].sd_observed_recall, 0.0);
    assert_eq!(r.rows[0].observed_rank, 1);
    assert!(r.meta_ranking.is_none());
    assert!(r.intervals.is_none());
    assert_eq!(r.strategy(Strategy::Rules).unwrap().recall_efficiency, 1.0);
    assert!(r.strategy(Strategy::Rules).unwrap().spearman.is_none());
    r.validate().unwrap();
}

#[test]
fn whole_dataset_leakage_mode_runs() {
    let dir = tempdir().unwrap();
    let path = common::write_synthetic_manifest(dir.path(), 1, r#", "leakage_mode": "paper""#);
    let m = ExperimentManifest::load(&path).unwrap();
    let r = run_experiment(&m, &opts()).unwrap();
    assert_eq!(r.provenance.leakage_mode, "paper");
    r.validate().unwrap();
}

#[test]
fn reports_round_trip_and_layout() {
    let dir = tempdir().unwrap();
    let path = common::write_synthetic_manifest(dir.path(), 2, "");
    let m = ExperimentManifest::load(&path).unwrap();
    let r = run_experiment(&m, &opts()).unwrap();
    let out = dir.path().join("results");
    let files = write_reports(&r, &out).unwrap();
    assert_eq!(files.len(), 3);

    let json = std::fs::read_to_string(out.join("report.json")).unwrap();
    assert_eq!(RankingReport::from_json(&json).unwrap(), r);

    let text = std::fs::read_to_string(out.join("report.txt")).unwrap();
    let header = text.lines().next().unwrap();
    let mut at = 0;
    for h in TABLE_HEADERS {
        let pos = header[at..].find(h).unwrap_or_else(|| panic!("missing header {h}"));
        at += pos + h.len();
    }

    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + r.rows.len());
}

#[test]
fn cell_failure_aborts_or_is_recorded() {
    let dir = tempdir().unwrap();
    common::write_synthetic_manifest(dir.path(), 1, "");
    // one attack row: the stratified split cannot keep it on both sides
    std::fs::write(
        dir.path().join("bad.csv"),
        "x0,x1,x2,proto,label\n0.9,0.2,0.3,tcp,attack\n0.2,0.1,0.1,udp,normal\n0.3,0.3,0.3,tcp,normal\n0.1,0.1,0.2,udp,normal\n",
    )
    .unwrap();
    let manifest = r#"{
        "version": 1,
        "training_datasets": [
            {"id": "good", "path": "train0.csv", "target": "label", "positive_label": "attack"},
            {"id": "bad", "path": "bad.csv", "target": "label", "positive_label": "attack"}
        ],
        "test_dataset": {"id": "t", "path": "test.csv", "target": "label", "positive_label": "attack"},
        "repetitions": 1,
        "candidates": ["decision_tree"],
        "characterization": {"assigned_task": "classify"}
    }"#;
    let m = ExperimentManifest::from_json(manifest, dir.path()).unwrap();
    let err = run_experiment(&m, &opts()).unwrap_err().to_string();
    assert!(err.contains("`bad`") && err.contains("repetition 0"), "{err}");

    let keep = RunOptions {
        keep_going: true,
        ..RunOptions::default()
    };
    let r = run_experiment(&m, &keep).unwrap();
    assert_eq!(r.failures.len(), 1);
    assert_eq!(r.failures[0].dataset, "bad");
    assert_eq!(r.rows.len(), 1);
    assert!(r.meta_ranking.is_none());
}

#[test]
fn unknown_candidate_is_rejected() {
    let manifest = r#"{
        "version": 1,
        "training_datasets": [{"id": "a", "path": "a.csv", "target": "y", "positive_label": "1"}],
        "test_dataset": {"id": "t", "path": "t.csv", "target": "y", "positive_label": "1"},
        "candidates": ["perceptron"],
        "characterization": {"assigned_task": "classify"}
    }"#;
    assert!(ExperimentManifest::from_json(manifest, "").is_err());
}

#[test]
fn recommend_uses_exported_model() {
    let dir = tempdir().unwrap();
    let path = common::write_synthetic_manifest(dir.path(), 1, r#", "meta_model": "model.json""#);
    let m = ExperimentManifest::load(&path).unwrap();
    let run = execute(&m, &opts()).unwrap();
    let model = run.meta_model.expect("three training sets train the meta-learner");
    model.save(dir.path().join("model.json")).unwrap();

    let rec = recommend(&m).unwrap();
    assert_eq!(rec.meta.entries.len(), 5);
    let from_run = run.report.meta_ranking.unwrap();
    assert_eq!(rec.meta.entries, from_run.entries);
    assert_eq!(rec.rules.unwrap().entries, run.report.rules_ranking.unwrap().entries);
}

#[test]
fn recommend_without_model_fails() {
    let dir = tempdir().unwrap();
    let path = common::write_synthetic_manifest(dir.path(), 1, "");
    let m = ExperimentManifest::load(&path).unwrap();
    assert!(recommend(&m).is_err());
}
