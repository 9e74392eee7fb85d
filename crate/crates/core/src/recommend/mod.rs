//! Candidate rankings from the rules-of-thumb tree and from the meta-learner.

mod meta;
mod rules;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use meta::{clamp_recall, rank_meta, train_meta, ExperiencePair, MetaModel, META_MODEL_FORMAT_VERSION};
pub use rules::{rank_rules, Comparison, Factor, Predicate, RuleNode, RuleTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Rules,
    Meta,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Rules => "rules",
            Strategy::Meta => "meta",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub algorithm: String,
    pub score: f64,
    pub rank: usize,
}

/// Entries sorted by rank, rank 1 first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub strategy: Strategy,
    pub entries: Vec<RankEntry>,
}

impl Ranking {
    pub fn top(&self) -> &RankEntry {
        &self.entries[0]
    }

    pub fn rank_of(&self, algorithm: &str) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.algorithm == algorithm)
            .map(|e| e.rank)
    }

    /// Ranks listed in the order of `algorithms`.
    pub fn ranks_for(&self, algorithms: &[String]) -> Option<Vec<usize>> {
        algorithms.iter().map(|a| self.rank_of(a)).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Ranks by descending score; equal scores fall back to ascending id.
pub fn rank_scores(strategy: Strategy, scores: &[(String, f64)]) -> Result<Ranking> {
    Ok(Ranking {
        strategy,
        entries: rank_entries(scores)?,
    })
}

/// [`rank_scores`] without a strategy tag.
pub fn rank_entries(scores: &[(String, f64)]) -> Result<Vec<RankEntry>> {
    if scores.is_empty() {
        return Err(Error::Empty("no candidates to rank".into()));
    }
    let mut sorted: Vec<&(String, f64)> = scores.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    if let Some(w) = sorted.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidParameter(format!("duplicate candidate `{}`", w[0].0)));
    }
    if sorted.iter().any(|(_, s)| !s.is_finite()) {
        return Err(Error::NonFinite);
    }
    // stable sort keeps id order among ties
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, (id, score))| RankEntry {
            algorithm: id.clone(),
            score: *score,
            rank: i + 1,
        })
        .collect())
}
