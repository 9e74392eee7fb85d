//! The five candidate base learners behind one train/predict interface.
//!
//! Defaults:
//!
//! | algorithm       | settings                                                        |
//! |-----------------|-----------------------------------------------------------------|
//! | `decision_tree` | Gini, unlimited depth, `min_samples_split = 2`                  |
//! | `random_forest` | 100 trees, Gini, `ceil(sqrt(d))` features per split, bootstrap  |
//! | `naive_bayes`   | Gaussian, `var_smoothing = 1e-9`                                |
//! | `kernel_svc`    | RBF, `C = 1`, `gamma = 1 / (d * Var(X))`, `tol = 1e-3`          |
//! | `kernel_svr`    | RBF, `C = 1`, same `gamma`, `epsilon = 0.1`, threshold `0.5`    |
//!
//! Equal class scores always resolve to the negative class.

mod forest;
mod naive_bayes;
mod svm;
mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::NumericMatrix;

pub use forest::Forest;
pub use naive_bayes::GaussianNb;
pub use svm::{auto_gamma, fit_svc, fit_svr, KernelExpansion};
pub use tree::{Tree, TreeNode};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmId {
    DecisionTree,
    RandomForest,
    NaiveBayes,
    KernelSvc,
    KernelSvr,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 5] = [
        AlgorithmId::DecisionTree,
        AlgorithmId::RandomForest,
        AlgorithmId::NaiveBayes,
        AlgorithmId::KernelSvc,
        AlgorithmId::KernelSvr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmId::DecisionTree => "decision_tree",
            AlgorithmId::RandomForest => "random_forest",
            AlgorithmId::NaiveBayes => "naive_bayes",
            AlgorithmId::KernelSvc => "kernel_svc",
            AlgorithmId::KernelSvr => "kernel_svr",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            AlgorithmId::DecisionTree => "Decision Tree",
            AlgorithmId::RandomForest => "Random Forest",
            AlgorithmId::NaiveBayes => "Naive Bayes",
            AlgorithmId::KernelSvc => "SVM",
            AlgorithmId::KernelSvr => "SVR",
        }
    }

    fn allowed_params(self) -> &'static [&'static str] {
        match self {
            AlgorithmId::DecisionTree => &["max_depth", "min_samples_split"],
            AlgorithmId::RandomForest => &[
                "n_trees",
                "max_features",
                "max_depth",
                "min_samples_split",
                "bootstrap",
            ],
            AlgorithmId::NaiveBayes => &["var_smoothing"],
            AlgorithmId::KernelSvc => &["c", "gamma", "tol"],
            AlgorithmId::KernelSvr => &["c", "gamma", "epsilon", "tol", "threshold"],
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmId::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub algorithm: AlgorithmId,
    /// Overrides of the defaults; `0` for `max_depth`, `max_features` or
    /// `gamma` keeps the automatic value.
    #[serde(default)]
    pub hyperparams: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
}

impl LearnerSpec {
    pub fn new(algorithm: AlgorithmId, seed: u64) -> Self {
        LearnerSpec {
            algorithm,
            hyperparams: BTreeMap::new(),
            seed,
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.hyperparams.insert(key.to_string(), value);
        self
    }

    fn param(&self, key: &str, default: f64) -> f64 {
        self.hyperparams.get(key).copied().unwrap_or(default)
    }

    pub fn validate(&self) -> Result<()> {
        let allowed = self.algorithm.allowed_params();
        for (key, &value) in &self.hyperparams {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "`{key}` is not a hyperparameter of {}",
                    self.algorithm
                )));
            }
            let ok = value.is_finite()
                && match key.as_str() {
                    "c" | "tol" | "var_smoothing" => value > 0.0,
                    "epsilon" | "gamma" => value >= 0.0,
                    "threshold" => true,
                    "n_trees" => value >= 1.0 && value.fract() == 0.0,
                    "min_samples_split" => value >= 2.0 && value.fract() == 0.0,
                    "max_depth" | "max_features" => value >= 0.0 && value.fract() == 0.0,
                    "bootstrap" => value == 0.0 || value == 1.0,
                    _ => false,
                };
            if !ok {
                return Err(Error::InvalidParameter(format!(
                    "invalid value {value} for `{key}` of {}",
                    self.algorithm
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    DecisionTree(Tree),
    RandomForest(Forest),
    NaiveBayes(GaussianNb),
    KernelSvc(KernelExpansion),
    KernelSvr {
        expansion: KernelExpansion,
        threshold: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub version: u32,
    pub spec: LearnerSpec,
    pub n_features: usize,
    pub model: FittedModel,
}

impl TrainedModel {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::json("trained model", e))
    }

    pub fn from_json(text: &str) -> Result<TrainedModel> {
        serde_json::from_str(text).map_err(|e| Error::json("trained model", e))
    }
}

pub fn train(spec: &LearnerSpec, x: &NumericMatrix, y: &[bool]) -> Result<TrainedModel> {
    spec.validate()?;
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            found: y.len(),
        });
    }
    if y.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "training needs at least 2 rows, got {}",
            y.len()
        )));
    }
    if x.cols() == 0 {
        return Err(Error::InvalidParameter("training matrix has no columns".into()));
    }
    if y.iter().all(|&b| b) || y.iter().all(|&b| !b) {
        return Err(Error::SingleClass);
    }
    if x.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }

    let d = x.cols();
    let unlimited = |v: f64| if v == 0.0 { None } else { Some(v as usize) };
    let model = match spec.algorithm {
        AlgorithmId::DecisionTree => {
            let params = tree::TreeParams {
                max_depth: unlimited(spec.param("max_depth", 0.0)),
                min_samples_split: spec.param("min_samples_split", 2.0) as usize,
                max_features: None,
            };
            let columns = tree::column_major(x);
            FittedModel::DecisionTree(tree::grow(&columns, y, (0..y.len()).collect(), &params, None))
        }
        AlgorithmId::RandomForest => {
            let auto_features = (d as f64).sqrt().ceil() as usize;
            let params = forest::ForestParams {
                n_trees: spec.param("n_trees", 100.0) as usize,
                bootstrap: spec.param("bootstrap", 1.0) == 1.0,
                tree: tree::TreeParams {
                    max_depth: unlimited(spec.param("max_depth", 0.0)),
                    min_samples_split: spec.param("min_samples_split", 2.0) as usize,
                    max_features: Some(
                        unlimited(spec.param("max_features", 0.0))
                            .unwrap_or(auto_features)
                            .min(d),
                    ),
                },
            };
            let columns = tree::column_major(x);
            FittedModel::RandomForest(forest::fit(&columns, y, &params, spec.seed))
        }
        AlgorithmId::NaiveBayes => {
            FittedModel::NaiveBayes(GaussianNb::fit(x, y, spec.param("var_smoothing", 1e-9)))
        }
        AlgorithmId::KernelSvc => {
            let gamma = resolve_gamma(spec, x);
            FittedModel::KernelSvc(fit_svc(
                x,
                y,
                spec.param("c", 1.0),
                gamma,
                spec.param("tol", 1e-3),
            ))
        }
        AlgorithmId::KernelSvr => {
            let gamma = resolve_gamma(spec, x);
            let z: Vec<f64> = y.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
            FittedModel::KernelSvr {
                expansion: fit_svr(
                    x,
                    &z,
                    spec.param("c", 1.0),
                    gamma,
                    spec.param("epsilon", 0.1),
                    spec.param("tol", 1e-3),
                ),
                threshold: spec.param("threshold", 0.5),
            }
        }
    };

    Ok(TrainedModel {
        version: MODEL_FORMAT_VERSION,
        spec: spec.clone(),
        n_features: d,
        model,
    })
}

fn resolve_gamma(spec: &LearnerSpec, x: &NumericMatrix) -> f64 {
    match spec.param("gamma", 0.0) {
        g if g > 0.0 => g,
        _ => auto_gamma(x),
    }
}

/// Labels from raw regression output: positive strictly above the threshold.
pub fn threshold_labels(raw: &[f64], threshold: f64) -> Vec<bool> {
    raw.iter().map(|&v| v > threshold).collect()
}

pub fn predict(model: &TrainedModel, x: &NumericMatrix) -> Result<Vec<bool>> {
    if x.cols() != model.n_features {
        return Err(Error::SchemaMismatch(format!(
            "model expects {} features, matrix has {}",
            model.n_features,
            x.cols()
        )));
    }
    Ok(match &model.model {
        FittedModel::DecisionTree(tree) => x.row_iter().map(|r| tree.positive_rate(r) > 0.5).collect(),
        FittedModel::RandomForest(forest) => {
            x.row_iter().map(|r| forest.positive_rate(r) > 0.5).collect()
        }
        FittedModel::NaiveBayes(nb) => x
            .row_iter()
            .map(|r| {
                let lj = nb.log_joint(r);
                lj[1] > lj[0]
            })
            .collect(),
        FittedModel::KernelSvc(expansion) => expansion
            .decision_all(x)
            .into_iter()
            .map(|s| s > 0.0)
            .collect(),
        FittedModel::KernelSvr {
            expansion,
            threshold,
        } => threshold_labels(&expansion.decision_all(x), *threshold),
    })
}

/// Trains, predicts `test`, and reports wall-clock seconds for both steps.
pub fn timed_fit_predict(
    spec: &LearnerSpec,
    x: &NumericMatrix,
    y: &[bool],
    test: &NumericMatrix,
) -> Result<(TrainedModel, Vec<bool>, f64)> {
    let start = Instant::now();
    let model = train(spec, x, y)?;
    let predictions = predict(&model, test)?;
    Ok((model, predictions, start.elapsed().as_secs_f64()))
}

pub fn measure_runtime(
    spec: &LearnerSpec,
    x: &NumericMatrix,
    y: &[bool],
    test: &NumericMatrix,
) -> Result<f64> {
    timed_fit_predict(spec, x, y, test).map(|(_, _, secs)| secs)
}
