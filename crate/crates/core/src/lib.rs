//! Algorithm selection for binary attack detection.
//!
//! A problem characterization narrows the technique registry to candidate
//! algorithms, which are then ranked two ways: by a rules-of-thumb decision
//! tree over dataset meta-features and by a meta-learner that predicts each
//! candidate's recall. [`experiment::run_experiment`] drives the whole
//! pipeline from a manifest and compares both rankings to observed recall.

pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod learners;
pub mod matrix;
pub mod metafeatures;
pub mod preprocess;
pub mod recommend;
pub mod taxonomy;

pub use dataset::{Column, ColumnData, ColumnKind, DatasetTable, Schema};
pub use error::{Error, Result};
pub use learners::{AlgorithmId, LearnerSpec, TrainedModel};
pub use matrix::NumericMatrix;
pub use metafeatures::{MetaFeature, MetaFeatureVector};
pub use preprocess::PreprocessModel;
pub use recommend::{MetaModel, Ranking, RuleTree, Strategy};
pub use taxonomy::{MappingRegistry, ProblemCharacterization};
pub use experiment::{run_experiment, ExperimentManifest, RankingReport};
