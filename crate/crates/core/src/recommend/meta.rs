use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{auto_gamma, fit_svr, KernelExpansion};
use crate::matrix::NumericMatrix;
use crate::metafeatures::{MetaFeatureVector, META_FEATURE_NAMES};
use crate::preprocess::MinMax;

use super::{rank_scores, Ranking, Strategy};

pub const META_MODEL_FORMAT_VERSION: u32 = 1;

const C: f64 = 1.0;
const EPSILON: f64 = 0.1;
const TOL: f64 = 1e-3;

/// One observation for the meta-learner: a dataset's meta-features and an
/// algorithm's mean observed recall on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperiencePair {
    pub dataset: String,
    pub meta_features: MetaFeatureVector,
    pub algorithm: String,
    pub recall: f64,
}

/// One RBF epsilon-SVR per algorithm over min-max scaled meta-features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaModel {
    pub version: u32,
    pub feature_names: Vec<String>,
    pub scaling: Vec<MinMax>,
    pub c: f64,
    pub epsilon: f64,
    pub regressors: BTreeMap<String, KernelExpansion>,
}

impl MetaModel {
    pub fn algorithms(&self) -> Vec<String> {
        self.regressors.keys().cloned().collect()
    }

    fn scale(&self, mf: &MetaFeatureVector) -> Vec<f64> {
        mf.to_array()
            .iter()
            .zip(&self.scaling)
            .map(|(&v, s)| if v.is_nan() { 0.0 } else { s.apply(v) })
            .collect()
    }

    /// Raw regression outputs. Clamp with [`clamp_recall`] for display only.
    pub fn predict_recall(&self, mf: &MetaFeatureVector) -> BTreeMap<String, f64> {
        let x = self.scale(mf);
        self.regressors
            .iter()
            .map(|(id, r)| (id.clone(), r.decision(&x)))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("meta model", e))
    }

    pub fn from_json(text: &str) -> Result<MetaModel> {
        let model: MetaModel =
            serde_json::from_str(text).map_err(|e| Error::json("meta model", e))?;
        if model.version != META_MODEL_FORMAT_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported meta model version {}",
                model.version
            )));
        }
        if model.scaling.len() != META_FEATURE_NAMES.len() {
            return Err(Error::DimensionMismatch {
                expected: META_FEATURE_NAMES.len(),
                found: model.scaling.len(),
            });
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<MetaModel> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        MetaModel::from_json(&text)
    }
}

pub fn clamp_recall(raw: f64) -> f64 {
    raw.clamp(0.0, 1.0)
}

/// Fits one regressor per candidate. Scaling ranges come from all pairs.
pub fn train_meta(experience: &[ExperiencePair], candidates: &[String]) -> Result<MetaModel> {
    if candidates.is_empty() {
        return Err(Error::Empty("no candidates for the meta-learner".into()));
    }
    for p in experience {
        if !(0.0..=1.0).contains(&p.recall) {
            return Err(Error::InvalidParameter(format!(
                "recall {} for `{}` outside [0, 1]",
                p.recall, p.algorithm
            )));
        }
        if p.meta_features.to_array().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
    }
    for c in candidates {
        let count = experience.iter().filter(|p| &p.algorithm == c).count();
        if count < 2 {
            return Err(Error::InsufficientExperience {
                algorithm: c.clone(),
                count,
            });
        }
    }

    let scaling: Vec<MinMax> = (0..META_FEATURE_NAMES.len())
        .map(|j| {
            let col: Vec<f64> = experience
                .iter()
                .filter(|p| candidates.contains(&p.algorithm))
                .map(|p| p.meta_features.to_array()[j])
                .collect();
            MinMax::fit(&col)
        })
        .collect::<Result<_>>()?;

    let regressors: Vec<(String, KernelExpansion)> = candidates
        .par_iter()
        .map(|c| {
            let pairs: Vec<&ExperiencePair> =
                experience.iter().filter(|p| &p.algorithm == c).collect();
            let rows: Vec<Vec<f64>> = pairs
                .iter()
                .map(|p| {
                    p.meta_features
                        .to_array()
                        .iter()
                        .zip(&scaling)
                        .map(|(&v, s)| s.apply(v))
                        .collect()
                })
                .collect();
            let x = NumericMatrix::from_rows(&rows)?;
            let z: Vec<f64> = pairs.iter().map(|p| p.recall).collect();
            let model = fit_svr(&x, &z, C, auto_gamma(&x), EPSILON, TOL);
            Ok((c.clone(), model))
        })
        .collect::<Result<_>>()?;

    Ok(MetaModel {
        version: META_MODEL_FORMAT_VERSION,
        feature_names: META_FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        scaling,
        c: C,
        epsilon: EPSILON,
        regressors: regressors.into_iter().collect(),
    })
}

/// Ranks by raw predicted recall.
pub fn rank_meta(model: &MetaModel, mf: &MetaFeatureVector) -> Result<Ranking> {
    let scores: Vec<(String, f64)> = model.predict_recall(mf).into_iter().collect();
    rank_scores(Strategy::Meta, &scores)
}
