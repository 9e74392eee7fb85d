use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metafeatures::{MetaFeature, MetaFeatureVector};
use crate::taxonomy::ProblemCharacterization;

use super::{rank_scores, Ranking, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparison {
    fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Comparison::Lt => lhs < rhs,
            Comparison::Le => lhs <= rhs,
            Comparison::Gt => lhs > rhs,
            Comparison::Ge => lhs >= rhs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Data,
    Resources,
    Experience,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "predicate", rename_all = "snake_case")]
pub enum Predicate {
    Feature {
        feature: MetaFeature,
        op: Comparison,
        value: f64,
    },
    /// True when the characterization lists `tag` under `factor`.
    Tag { factor: Factor, tag: String },
}

impl Predicate {
    pub fn holds(&self, mf: &MetaFeatureVector, pc: &ProblemCharacterization) -> bool {
        match self {
            Predicate::Feature { feature, op, value } => op.holds(mf.get(*feature), *value),
            Predicate::Tag { factor, tag } => match factor {
                Factor::Data => pc.data_considerations.contains(tag),
                Factor::Resources => pc.resource_considerations.contains(tag),
                Factor::Experience => pc.experience_considerations.contains(tag),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum RuleNode {
    Split {
        test: Predicate,
        then: Box<RuleNode>,
        otherwise: Box<RuleNode>,
    },
    /// Preference order, most preferred first.
    Leaf { order: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleTree {
    #[serde(default)]
    pub label: String,
    pub root: RuleNode,
}

impl RuleTree {
    fn leaves(&self) -> Vec<&[String]> {
        let mut out = Vec::new();
        let mut stack = vec![&self.root];
        while let Some(node) = stack.pop() {
            match node {
                RuleNode::Leaf { order } => out.push(order.as_slice()),
                RuleNode::Split { then, otherwise, .. } => {
                    stack.push(otherwise);
                    stack.push(then);
                }
            }
        }
        out
    }

    /// Every leaf must be a duplicate-free ordering of the same id set.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidRegistry(msg));
        let leaves = self.leaves();
        let reference: BTreeSet<&String> = leaves[0].iter().collect();
        if reference.is_empty() {
            return bad("leaf with an empty order".into());
        }
        for leaf in &leaves {
            let set: BTreeSet<&String> = leaf.iter().collect();
            if set.len() != leaf.len() {
                return bad(format!("leaf {leaf:?} repeats an algorithm"));
            }
            if set != reference {
                return bad(format!("leaf {leaf:?} is not a permutation of {reference:?}"));
            }
        }
        for node in self.nodes() {
            if let RuleNode::Split {
                test: Predicate::Feature { value, .. },
                ..
            } = node
            {
                if value.is_nan() {
                    return bad("NaN threshold".into());
                }
            }
        }
        Ok(())
    }

    fn nodes(&self) -> Vec<&RuleNode> {
        let mut out = Vec::new();
        let mut stack = vec![&self.root];
        while let Some(node) = stack.pop() {
            out.push(node);
            if let RuleNode::Split { then, otherwise, .. } = node {
                stack.push(otherwise);
                stack.push(then);
            }
        }
        out
    }

    /// Algorithm ids named anywhere in the tree.
    pub fn algorithms(&self) -> BTreeSet<String> {
        self.leaves().into_iter().flatten().cloned().collect()
    }

    /// The leaf order reached by the input.
    pub fn evaluate(&self, mf: &MetaFeatureVector, pc: &ProblemCharacterization) -> &[String] {
        let mut node = &self.root;
        loop {
            match node {
                RuleNode::Leaf { order } => return order,
                RuleNode::Split {
                    test,
                    then,
                    otherwise,
                } => node = if test.holds(mf, pc) { then } else { otherwise },
            }
        }
    }
}

/// Leaf order restricted to `candidates`; scores count down from n so that
/// rank 1 is the most preferred.
pub fn rank_rules(
    tree: &RuleTree,
    mf: &MetaFeatureVector,
    pc: &ProblemCharacterization,
    candidates: &[String],
) -> Result<Ranking> {
    if candidates.is_empty() {
        return Err(Error::Empty("no candidates to rank".into()));
    }
    let order = tree.evaluate(mf, pc);
    if let Some(c) = candidates.iter().find(|c| !order.contains(c)) {
        return Err(Error::LeafMissingCandidate(c.clone()));
    }
    let kept: Vec<&String> = order.iter().filter(|a| candidates.contains(a)).collect();
    let n = kept.len();
    let scores: Vec<(String, f64)> = kept
        .into_iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), (n - i) as f64))
        .collect();
    rank_scores(Strategy::Rules, &scores)
}
