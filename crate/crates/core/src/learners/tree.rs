//! CART classification tree with Gini impurity.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        /// fraction of positive training samples reaching the leaf
        positive_rate: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn positive_rate(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { positive_rate, .. } => return *positive_rate,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Grows a tree over `samples` (indices may repeat, as in a bootstrap draw).
/// `columns` holds the feature matrix column-major.
pub(crate) fn grow(
    columns: &[Vec<f64>],
    y: &[bool],
    samples: Vec<usize>,
    params: &TreeParams,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Tree {
    let mut nodes = Vec::new();
    // (node slot, samples, depth)
    let mut stack = vec![(0usize, samples, 0usize)];
    nodes.push(TreeNode::Leaf {
        positive_rate: 0.0,
        samples: 0,
    });
    let mut features: Vec<usize> = (0..columns.len()).collect();
    let mut pairs: Vec<(f64, bool)> = Vec::new();

    while let Some((slot, idx, depth)) = stack.pop() {
        let n = idx.len();
        let pos = idx.iter().filter(|&&i| y[i]).count();
        let leaf = TreeNode::Leaf {
            positive_rate: if n == 0 { 0.0 } else { pos as f64 / n as f64 },
            samples: n,
        };
        let depth_ok = params.max_depth.is_none_or(|d| depth < d);
        if pos == 0 || pos == n || n < params.min_samples_split || !depth_ok {
            nodes[slot] = leaf;
            continue;
        }

        let budget = match (params.max_features, rng.as_deref_mut()) {
            (Some(k), Some(r)) if k < columns.len() => {
                features.shuffle(r);
                k
            }
            _ => columns.len(),
        };

        let mut best: Option<Split> = None;
        let mut examined = 0;
        for &f in features.iter() {
            if examined >= budget {
                break;
            }
            pairs.clear();
            pairs.extend(idx.iter().map(|&i| (columns[f][i], y[i])));
            pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            if pairs[0].0 == pairs[n - 1].0 {
                // constant within the node; does not count against the budget
                continue;
            }
            examined += 1;
            if let Some(s) = best_threshold(&pairs, pos) {
                if best.as_ref().is_none_or(|b| s.1 > b.score) {
                    best = Some(Split {
                        feature: f,
                        threshold: s.0,
                        score: s.1,
                    });
                }
            }
        }

        let Some(split) = best else {
            nodes[slot] = leaf;
            continue;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| columns[split.feature][i] <= split.threshold);
        let left = nodes.len();
        let right = left + 1;
        nodes.push(TreeNode::Leaf {
            positive_rate: 0.0,
            samples: 0,
        });
        nodes.push(TreeNode::Leaf {
            positive_rate: 0.0,
            samples: 0,
        });
        nodes[slot] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        stack.push((right, right_idx, depth + 1));
        stack.push((left, left_idx, depth + 1));
    }

    Tree { nodes }
}

/// Best threshold over sorted (value, label) pairs, scored by
/// `sum_child (pos^2 + neg^2) / size`, which grows as weighted Gini falls.
fn best_threshold(pairs: &[(f64, bool)], total_pos: usize) -> Option<(f64, f64)> {
    let n = pairs.len();
    let total_neg = n - total_pos;
    let (mut lp, mut ln) = (0usize, 0usize);
    let mut best: Option<(f64, f64)> = None;
    for k in 0..n - 1 {
        if pairs[k].1 {
            lp += 1;
        } else {
            ln += 1;
        }
        let (lo, hi) = (pairs[k].0, pairs[k + 1].0);
        if lo == hi {
            continue;
        }
        let nl = (k + 1) as f64;
        let nr = (n - k - 1) as f64;
        let (rp, rn) = ((total_pos - lp) as f64, (total_neg - ln) as f64);
        let score = ((lp * lp + ln * ln) as f64) / nl + (rp * rp + rn * rn) / nr;
        if best.is_none_or(|b| score > b.1) {
            let mut threshold = lo + (hi - lo) / 2.0;
            if threshold >= hi {
                threshold = lo;
            }
            best = Some((threshold, score));
        }
    }
    best
}

pub(crate) fn column_major(x: &crate::matrix::NumericMatrix) -> Vec<Vec<f64>> {
    (0..x.cols()).map(|j| x.column(j)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> TreeParams {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            max_features: None,
        }
    }

    #[test]
    fn learns_xor() {
        let columns = vec![vec![0.0, 0.0, 1.0, 1.0], vec![0.0, 1.0, 0.0, 1.0]];
        let y = [false, true, true, false];
        let tree = grow(&columns, &y, (0..4).collect(), &params(), None);
        for i in 0..4 {
            let row = [columns[0][i], columns[1][i]];
            assert_eq!(tree.positive_rate(&row) > 0.5, y[i]);
        }
        assert_eq!(tree.depth(), 2);
    }

    #[test]
    fn depth_limit_stops_growth() {
        let columns = vec![vec![0.0, 1.0, 2.0, 3.0]];
        let y = [false, true, false, true];
        let mut p = params();
        p.max_depth = Some(1);
        let tree = grow(&columns, &y, (0..4).collect(), &p, None);
        assert_eq!(tree.depth(), 1);
    }

    #[test]
    fn threshold_is_between_distinct_values() {
        let pairs = [(1.0, false), (1.0, false), (2.0, true), (3.0, true)];
        let (t, _) = best_threshold(&pairs, 2).unwrap();
        assert_eq!(t, 1.5);
    }

    #[test]
    fn constant_features_give_a_leaf() {
        let columns = vec![vec![1.0, 1.0, 1.0]];
        let tree = grow(&columns, &[true, false, true], (0..3).collect(), &params(), None);
        assert_eq!(tree.nodes.len(), 1);
        assert!((tree.positive_rate(&[1.0]) - 2.0 / 3.0).abs() < 1e-15);
    }
}
