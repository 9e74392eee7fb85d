use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{self, ColumnKind, DatasetTable};
use crate::error::{Error, Result};
use crate::learners::AlgorithmId;
use crate::taxonomy::{filter_techniques, MappingRegistry, ProblemCharacterization};

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

/// Overrides the manifest seed when set.
pub const SEED_ENV_VAR: &str = "METASELECT_SEED";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    #[default]
    Csv,
    /// Headerless KDDTrain+/KDDTest+ records.
    NslKdd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub id: String,
    pub path: PathBuf,
    #[serde(default)]
    pub format: DataFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_label: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub kind_overrides: BTreeMap<String, ColumnKind>,
}

impl DatasetSpec {
    /// Loads the file, resolving the path against `base`, and names the
    /// table after the spec id.
    pub fn load(&self, base: &Path) -> Result<DatasetTable> {
        let path = base.join(&self.path);
        let table = match self.format {
            DataFormat::NslKdd => dataset::load_nslkdd(&path),
            DataFormat::Csv => {
                let (Some(target), Some(positive)) = (&self.target, &self.positive_label) else {
                    return Err(Error::InvalidManifest(format!(
                        "dataset `{}` needs `target` and `positive_label`",
                        self.id
                    )));
                };
                let overrides = (!self.kind_overrides.is_empty()).then_some(&self.kind_overrides);
                dataset::load_csv(&path, target, positive, overrides)
            }
        };
        table
            .map(|t| t.with_name(self.id.clone()))
            .map_err(|e| e.in_dataset(&self.id))
    }
}

/// A dataset cut into `subsets` stratification-safe blocks, each used as a
/// training dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSource {
    #[serde(flatten)]
    pub dataset: DatasetSpec,
    pub subsets: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakageMode {
    /// Preprocessing fitted on each training partition only.
    #[default]
    Strict,
    /// Preprocessing fitted on the whole training dataset before splitting.
    Paper,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CharacterizationSource {
    Path(PathBuf),
    Inline(ProblemCharacterization),
}

fn default_repetitions() -> usize {
    20
}

fn default_ratio() -> f64 {
    0.8
}

fn default_registry() -> String {
    "default".into()
}

fn default_confidence() -> f64 {
    0.90
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub version: u32,
    #[serde(default)]
    pub training_datasets: Vec<DatasetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_source: Option<SplitSource>,
    pub test_dataset: DatasetSpec,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_ratio")]
    pub split_ratio: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub leakage_mode: LeakageMode,
    /// Taken from the taxonomy filter when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<AlgorithmId>>,
    #[serde(default = "default_registry")]
    pub registry: String,
    pub characterization: CharacterizationSource,
    /// Exported meta model used by `recommend`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta_model: Option<PathBuf>,
    #[serde(default = "default_confidence")]
    pub family_confidence: f64,
    /// Per-algorithm hyperparameter overrides.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub hyperparams: BTreeMap<AlgorithmId, BTreeMap<String, f64>>,
    /// Directory relative paths resolve against; set by [`Self::load`].
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentManifest {
    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut m: ExperimentManifest =
            serde_json::from_str(text).map_err(|e| Error::json("manifest", e))?;
        m.base_dir = base_dir.into();
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        ExperimentManifest::from_json(&text, base)
            .map_err(|e| match e {
                Error::Json { source, .. } => Error::json(path.display().to_string(), source),
                other => other,
            })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidManifest(msg));
        if self.version != MANIFEST_FORMAT_VERSION {
            return bad(format!("unsupported version {}", self.version));
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return bad(format!("split ratio {} outside (0, 1)", self.split_ratio));
        }
        if !(self.family_confidence > 0.0 && self.family_confidence < 1.0) {
            return bad(format!("family confidence {} outside (0, 1)", self.family_confidence));
        }
        if self.training_datasets.is_empty() && self.split_source.is_none() {
            return bad("no training datasets".into());
        }
        if let Some(s) = &self.split_source {
            if s.subsets == 0 {
                return bad("split source needs at least 1 subset".into());
            }
        }
        let mut ids: Vec<&str> = self.training_datasets.iter().map(|d| d.id.as_str()).collect();
        ids.extend(self.split_source.iter().map(|s| s.dataset.id.as_str()));
        ids.push(self.test_dataset.id.as_str());
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return bad(format!("duplicate dataset id `{}`", w[0]));
        }
        if let Some(c) = &self.candidates {
            if c.is_empty() {
                return bad("candidate list is empty".into());
            }
            let mut sorted = c.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != c.len() {
                return bad("candidate list repeats an algorithm".into());
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the manifest's canonical JSON (sorted keys).
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("manifest serializes");
        let digest = Sha256::digest(value.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.base_dir.join(path)
    }

    pub fn registry(&self) -> Result<MappingRegistry> {
        MappingRegistry::resolve(&self.registry, Some(&self.base_dir))
    }

    pub fn load_characterization(&self) -> Result<ProblemCharacterization> {
        match &self.characterization {
            CharacterizationSource::Inline(pc) => Ok(pc.clone()),
            CharacterizationSource::Path(p) => ProblemCharacterization::load(self.resolve(p)),
        }
    }

    /// Explicit candidates, or the taxonomy filter's techniques that name a
    /// known base learner.
    pub fn resolve_candidates(
        &self,
        registry: &MappingRegistry,
        pc: &ProblemCharacterization,
    ) -> Result<(Vec<AlgorithmId>, Vec<String>)> {
        if let Some(c) = &self.candidates {
            return Ok((c.clone(), Vec::new()));
        }
        let outcome = filter_techniques(registry, pc)?;
        let mut warnings: Vec<String> = outcome.warning.into_iter().collect();
        let mut ids = Vec::new();
        for t in outcome.candidates {
            match t.id.parse::<AlgorithmId>() {
                Ok(id) => ids.push(id),
                Err(_) => warnings.push(format!("technique `{}` has no base learner, skipped", t.id)),
            }
        }
        if ids.is_empty() {
            return Err(Error::InvalidManifest(
                "the characterization leaves no runnable candidate".into(),
            ));
        }
        Ok((ids, warnings))
    }
}

/// Parses an optional seed override such as the value of [`SEED_ENV_VAR`].
pub fn parse_seed_override(value: Option<&str>) -> Result<Option<u64>> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidParameter(format!("seed override `{v}` is not a u64"))),
    }
}

/// Task seed from the global seed and the cell coordinates, so results do
/// not depend on scheduling.
pub fn derive_seed(seed: u64, dataset: &str, repetition: usize, task: &str) -> u64 {
    let digest = Sha256::digest(format!("{seed}/{dataset}/{repetition}/{task}").as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}
