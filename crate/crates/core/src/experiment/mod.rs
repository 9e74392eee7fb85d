//! The end-to-end experiment: load datasets, run the base-learning grid,
//! train the meta-learner, rank candidates both ways and compare the
//! rankings with observed test recall.

mod manifest;
mod report;

use rayon::prelude::*;

use crate::dataset::{make_subsets, stratified_split, DatasetTable};
use crate::error::{Error, Result};
use crate::evaluation::{
    bonferroni_ci, recall, recall_efficiency, spearman_test, ConfusionCounts, RecallSample,
};
use crate::learners::{predict, timed_fit_predict, AlgorithmId, LearnerSpec};
use crate::matrix::NumericMatrix;
use crate::metafeatures::{extract, MetaFeatureVector};
use crate::preprocess::{fit_pipeline, transform, PreprocessModel};
use crate::recommend::{
    clamp_recall, rank_entries, rank_rules, train_meta, ExperiencePair, MetaModel, Ranking,
    Strategy,
};

pub use manifest::{
    derive_seed, parse_seed_override, CharacterizationSource, DataFormat, DatasetSpec,
    ExperimentManifest, LeakageMode, SplitSource, MANIFEST_FORMAT_VERSION, SEED_ENV_VAR,
};
pub use report::{
    emit_report, write_reports, AlgorithmRow, CellFailure, IntervalOverlap, Provenance,
    RankingReport, ReportFormat, StrategySummary, REPORT_FORMAT_VERSION, TABLE_HEADERS,
};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Record failed cells and continue instead of aborting.
    pub keep_going: bool,
    /// Replaces the manifest seed.
    pub seed_override: Option<u64>,
}

/// A finished run: the report plus the fitted meta-learner, if one could be
/// trained.
#[derive(Clone, Debug)]
pub struct ExperimentRun {
    pub report: RankingReport,
    pub meta_model: Option<MetaModel>,
}

/// Training datasets (explicit ones first, then split-source subsets) and
/// the test dataset.
pub fn load_datasets(
    manifest: &ExperimentManifest,
    seed: u64,
) -> Result<(Vec<DatasetTable>, DatasetTable)> {
    let base = &manifest.base_dir;
    let mut training = manifest
        .training_datasets
        .iter()
        .map(|spec| spec.load(base))
        .collect::<Result<Vec<_>>>()?;
    if let Some(source) = &manifest.split_source {
        let id = &source.dataset.id;
        let table = source.dataset.load(base)?;
        let subsets = make_subsets(&table, source.subsets, derive_seed(seed, id, 0, "subsets"))
            .map_err(|e| e.in_dataset(id))?;
        training.extend(subsets);
    }
    let test = manifest.test_dataset.load(base)?;
    Ok((training, test))
}

struct Prepared {
    x_train: NumericMatrix,
    y_train: Vec<bool>,
    x_held: NumericMatrix,
    y_held: Vec<bool>,
    /// Present when the training dataset shares the test schema.
    x_test: Option<NumericMatrix>,
}

struct CellResult {
    holdout_recall: f64,
    test_recall: Option<f64>,
    runtime_secs: f64,
}

struct Cell {
    dataset: usize,
    repetition: usize,
    algorithm: AlgorithmId,
    outcome: Result<CellResult>,
}

fn prepare(
    table: &DatasetTable,
    shared_model: Option<&PreprocessModel>,
    test: Option<&DatasetTable>,
    ratio: f64,
    split_seed: u64,
) -> Result<Prepared> {
    let split = stratified_split(table, ratio, split_seed)?;
    let fitted;
    let model = match shared_model {
        Some(m) => m,
        None => {
            fitted = fit_pipeline(&split.train)?;
            &fitted
        }
    };
    Ok(Prepared {
        x_train: transform(model, &split.train)?,
        y_train: split.train.labels(),
        x_held: transform(model, &split.test)?,
        y_held: split.test.labels(),
        x_test: test.map(|t| transform(model, t)).transpose()?,
    })
}

fn run_cell(spec: &LearnerSpec, data: &Prepared, y_test: &[bool]) -> Result<CellResult> {
    let score = |truth: &[bool], pred: &[bool]| {
        ConfusionCounts::from_predictions(truth, pred).and_then(|c| recall(&c))
    };
    match &data.x_test {
        Some(x_test) => {
            let (model, pred_test, secs) =
                timed_fit_predict(spec, &data.x_train, &data.y_train, x_test)?;
            let pred_held = predict(&model, &data.x_held)?;
            Ok(CellResult {
                holdout_recall: score(&data.y_held, &pred_held)?,
                test_recall: Some(score(y_test, &pred_test)?),
                runtime_secs: secs,
            })
        }
        None => {
            let (_, pred_held, secs) =
                timed_fit_predict(spec, &data.x_train, &data.y_train, &data.x_held)?;
            Ok(CellResult {
                holdout_recall: score(&data.y_held, &pred_held)?,
                test_recall: None,
                runtime_secs: secs,
            })
        }
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn run_experiment(manifest: &ExperimentManifest, options: &RunOptions) -> Result<RankingReport> {
    execute(manifest, options).map(|run| run.report)
}

/// Runs the experiment and also returns the trained meta-learner.
pub fn execute(manifest: &ExperimentManifest, options: &RunOptions) -> Result<ExperimentRun> {
    manifest.validate()?;
    let started_at = chrono::Utc::now().to_rfc3339();
    let seed = options.seed_override.unwrap_or(manifest.seed);
    let registry = manifest.registry()?;
    let pc = manifest.load_characterization()?;
    let (candidates, mut warnings) = manifest.resolve_candidates(&registry, &pc)?;
    let candidate_ids: Vec<String> = candidates.iter().map(|a| a.as_str().to_string()).collect();

    let (training, test) = load_datasets(manifest, seed)?;
    let test_schema = test.predictor_schema();
    let compatible: Vec<bool> = training
        .iter()
        .map(|t| t.predictor_schema() == test_schema)
        .collect();
    for (t, &ok) in training.iter().zip(&compatible) {
        if !ok {
            warnings.push(format!(
                "training dataset `{}` does not share the test schema; it feeds meta-learning only",
                t.name()
            ));
        }
    }
    if !compatible.iter().any(|&c| c) {
        return Err(Error::InvalidManifest(format!(
            "no training dataset shares the predictor schema of `{}`",
            test.name()
        )));
    }

    let meta_features: Vec<MetaFeatureVector> = training
        .par_iter()
        .map(|t| extract(t).map_err(|e| e.in_dataset(t.name())))
        .collect::<Result<_>>()?;
    let test_mf = extract(&test).map_err(|e| e.in_dataset(test.name()))?;
    let y_test = test.labels();

    let shared_models: Vec<Option<PreprocessModel>> = match manifest.leakage_mode {
        LeakageMode::Strict => vec![None; training.len()],
        LeakageMode::Paper => training
            .par_iter()
            .map(|t| fit_pipeline(t).map(Some).map_err(|e| e.in_dataset(t.name())))
            .collect::<Result<_>>()?,
    };

    let tasks: Vec<(usize, usize)> = (0..training.len())
        .flat_map(|d| (0..manifest.repetitions).map(move |r| (d, r)))
        .collect();
    let cells: Vec<Cell> = tasks
        .par_iter()
        .flat_map_iter(|&(d, r)| {
            let table = &training[d];
            let prepared = prepare(
                table,
                shared_models[d].as_ref(),
                compatible[d].then_some(&test),
                manifest.split_ratio,
                derive_seed(seed, table.name(), r, "split"),
            );
            let cells: Vec<Cell> = candidates
                .iter()
                .map(|&algorithm| {
                    let outcome = match &prepared {
                        Err(e) => Err(Error::InvalidParameter(e.to_string())),
                        Ok(data) => {
                            let mut spec = LearnerSpec::new(
                                algorithm,
                                derive_seed(seed, table.name(), r, algorithm.as_str()),
                            );
                            if let Some(params) = manifest.hyperparams.get(&algorithm) {
                                for (k, v) in params {
                                    spec = spec.with_param(k, *v);
                                }
                            }
                            run_cell(&spec, data, &y_test)
                        }
                    };
                    Cell {
                        dataset: d,
                        repetition: r,
                        algorithm,
                        outcome,
                    }
                })
                .collect();
            cells
        })
        .collect();

    // aggregation, in grid order
    let mut failures = Vec::new();
    let mut ok_cells = Vec::new();
    for cell in cells {
        match cell.outcome {
            Ok(res) => ok_cells.push((cell.dataset, cell.repetition, cell.algorithm, res)),
            Err(source) => {
                let dataset = training[cell.dataset].name().to_string();
                if !options.keep_going {
                    return Err(Error::Cell {
                        dataset,
                        algorithm: cell.algorithm.as_str().into(),
                        repetition: cell.repetition,
                        source: Box::new(source),
                    });
                }
                log::warn!("cell {dataset}/{}/{} failed: {source}", cell.algorithm, cell.repetition);
                failures.push(CellFailure {
                    dataset,
                    algorithm: cell.algorithm.as_str().into(),
                    repetition: cell.repetition,
                    message: source.to_string(),
                });
            }
        }
    }

    let mut experience = Vec::new();
    for (d, table) in training.iter().enumerate() {
        for &a in &candidates {
            let held: Vec<f64> = ok_cells
                .iter()
                .filter(|c| c.0 == d && c.2 == a)
                .map(|c| c.3.holdout_recall)
                .collect();
            if !held.is_empty() {
                experience.push(ExperiencePair {
                    dataset: table.name().to_string(),
                    meta_features: meta_features[d],
                    algorithm: a.as_str().to_string(),
                    recall: mean(&held),
                });
            }
        }
    }

    let mut samples = Vec::new();
    let mut runtimes = Vec::new();
    for &a in &candidates {
        let per_rep: Vec<f64> = (0..manifest.repetitions)
            .filter_map(|r| {
                let v: Vec<f64> = ok_cells
                    .iter()
                    .filter(|c| c.1 == r && c.2 == a)
                    .filter_map(|c| c.3.test_recall)
                    .collect();
                (!v.is_empty()).then(|| mean(&v))
            })
            .collect();
        if per_rep.is_empty() {
            return Err(Error::Empty(format!("no test recall recorded for `{a}`")));
        }
        samples.push(RecallSample::new(a.as_str(), per_rep)?);
        let secs: Vec<f64> = ok_cells
            .iter()
            .filter(|c| c.2 == a && c.3.test_recall.is_some())
            .map(|c| c.3.runtime_secs)
            .collect();
        runtimes.push(mean(&secs));
    }

    let observed: Vec<(String, f64)> = samples
        .iter()
        .map(|s| (s.algorithm.clone(), s.mean))
        .collect();
    let observed_ranking = rank_entries(&observed)?;
    let observed_rank = |id: &str| {
        observed_ranking
            .iter()
            .find(|e| e.algorithm == id)
            .map(|e| e.rank)
            .expect("every candidate is ranked")
    };

    let rules_ranking: Option<Ranking> = match &registry.rule_tree {
        Some(tree) => Some(rank_rules(tree, &test_mf, &pc, &candidate_ids)?),
        None => {
            warnings.push("registry has no rule tree; rules strategy skipped".into());
            None
        }
    };
    let meta_model = match train_meta(&experience, &candidate_ids) {
        Ok(m) => Some(m),
        Err(e @ Error::InsufficientExperience { .. }) => {
            warnings.push(format!("meta-learner not trained: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    let predictions = meta_model.as_ref().map(|m| m.predict_recall(&test_mf));
    let meta_ranking = match &meta_model {
        Some(m) => Some(crate::recommend::rank_meta(m, &test_mf)?),
        None => None,
    };

    let rows: Vec<AlgorithmRow> = candidates
        .iter()
        .zip(&samples)
        .zip(&runtimes)
        .map(|((&a, s), &secs)| {
            let raw = predictions.as_ref().and_then(|p| p.get(a.as_str()).copied());
            AlgorithmRow {
                algorithm: a.as_str().into(),
                display_name: a.display_name().into(),
                observed_mean_recall: s.mean,
                sd_observed_recall: s.sd,
                recalls: s.recalls.clone(),
                mean_runtime_secs: secs,
                meta_predicted_recall: raw.map(clamp_recall),
                meta_predicted_raw: raw,
                observed_rank: observed_rank(a.as_str()),
                rules_rank: rules_ranking.as_ref().and_then(|r| r.rank_of(a.as_str())),
                meta_rank: meta_ranking.as_ref().and_then(|r| r.rank_of(a.as_str())),
            }
        })
        .collect();

    let best_observed = observed_ranking[0].algorithm.clone();
    let best_recall = samples
        .iter()
        .map(|s| s.mean)
        .fold(f64::NEG_INFINITY, f64::max);
    let observed_ranks: Vec<usize> = rows.iter().map(|r| r.observed_rank).collect();
    let mut strategies = Vec::new();
    for ranking in [&rules_ranking, &meta_ranking].into_iter().flatten() {
        let top = ranking.top().algorithm.clone();
        let top_recall = rows
            .iter()
            .find(|r| r.algorithm == top)
            .map(|r| r.observed_mean_recall)
            .expect("top pick is a candidate");
        let spearman = if rows.len() >= 2 {
            let ranks: Vec<usize> = rows
                .iter()
                .map(|r| ranking.rank_of(&r.algorithm).expect("ranked"))
                .collect();
            Some(spearman_test(&ranks, &observed_ranks)?)
        } else {
            None
        };
        strategies.push(StrategySummary {
            strategy: ranking.strategy,
            top_pick: top,
            top_pick_observed_recall: top_recall,
            best_observed_recall: best_recall,
            recall_efficiency: recall_efficiency(top_recall, best_recall)?,
            spearman,
        });
    }

    let (intervals, overlaps) = if samples.iter().all(|s| s.recalls.len() >= 2) {
        let iv = bonferroni_ci(&samples, manifest.family_confidence)?;
        let mut overlaps = Vec::new();
        for (i, a) in iv.iter().enumerate() {
            for b in &iv[i + 1..] {
                overlaps.push(IntervalOverlap {
                    first: a.algorithm.clone(),
                    second: b.algorithm.clone(),
                    overlap: a.overlaps(b),
                });
            }
        }
        (Some(iv), overlaps)
    } else {
        if manifest.repetitions >= 2 {
            warnings.push("some recall samples have fewer than 2 values; intervals skipped".into());
        }
        (None, Vec::new())
    };

    let report = RankingReport {
        version: REPORT_FORMAT_VERSION,
        rows,
        test_meta_features: test_mf,
        best_observed,
        rules_ranking,
        meta_ranking,
        strategies,
        family_confidence: manifest.family_confidence,
        intervals,
        overlaps,
        experience,
        failures,
        warnings,
        provenance: Provenance {
            manifest_hash: manifest.hash(),
            seed,
            repetitions: manifest.repetitions,
            split_ratio: manifest.split_ratio,
            leakage_mode: match manifest.leakage_mode {
                LeakageMode::Strict => "strict".into(),
                LeakageMode::Paper => "paper".into(),
            },
            test_dataset: test.name().to_string(),
            training_datasets: training.iter().map(|t| t.name().to_string()).collect(),
            evaluated_training_datasets: training
                .iter()
                .zip(&compatible)
                .filter(|(_, &c)| c)
                .map(|(t, _)| t.name().to_string())
                .collect(),
            aggregation: "test recall averaged over evaluated training datasets per repetition; \
                          mean and sample SD over repetitions"
                .into(),
            rule_tree: registry.rule_tree.as_ref().map(|t| t.label.clone()),
            crate_version: env!("CARGO_PKG_VERSION").into(),
            started_at,
            finished_at: chrono::Utc::now().to_rfc3339(),
        },
    };
    report.validate()?;
    Ok(ExperimentRun { report, meta_model })
}

/// Rankings for the manifest's test dataset without base learning. The meta
/// ranking needs an exported model in the manifest's `meta_model` field.
#[derive(Clone, Debug)]
pub struct Recommendation {
    pub test_meta_features: MetaFeatureVector,
    pub candidates: Vec<AlgorithmId>,
    pub rules: Option<Ranking>,
    pub meta: Ranking,
    /// Raw predicted recall per algorithm.
    pub predicted_recall: Vec<(String, f64)>,
}

pub fn recommend(manifest: &ExperimentManifest) -> Result<Recommendation> {
    let Some(model_path) = &manifest.meta_model else {
        return Err(Error::InvalidManifest(
            "`meta_model` is required to recommend without base learning".into(),
        ));
    };
    let model = MetaModel::load(manifest.resolve(model_path))?;
    let registry = manifest.registry()?;
    let pc = manifest.load_characterization()?;
    let (candidates, _) = manifest.resolve_candidates(&registry, &pc)?;
    let ids: Vec<String> = candidates.iter().map(|a| a.as_str().to_string()).collect();
    if let Some(missing) = ids.iter().find(|id| !model.regressors.contains_key(*id)) {
        return Err(Error::UnknownAlgorithm(format!("{missing} (not in the meta model)")));
    }
    let test = manifest.test_dataset.load(&manifest.base_dir)?;
    let mf = extract(&test).map_err(|e| e.in_dataset(test.name()))?;
    let predicted = model.predict_recall(&mf);
    let predicted_recall: Vec<(String, f64)> = ids
        .iter()
        .map(|id| (id.clone(), predicted[id]))
        .collect();
    let meta = crate::recommend::rank_scores(Strategy::Meta, &predicted_recall)?;
    let rules = registry
        .rule_tree
        .as_ref()
        .map(|tree| rank_rules(tree, &mf, &pc, &ids))
        .transpose()?;
    Ok(Recommendation {
        test_meta_features: mf,
        candidates,
        rules,
        meta,
        predicted_recall,
    })
}
