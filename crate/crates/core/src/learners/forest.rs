//! Bagged ensemble of randomized CART trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, Tree, TreeParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

pub(crate) struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub tree: TreeParams,
}

/// Each tree draws from its own stream, seeded from `(seed, tree index)`, so
/// the result does not depend on how the trees are scheduled.
pub(crate) fn fit(columns: &[Vec<f64>], y: &[bool], params: &ForestParams, seed: u64) -> Forest {
    let n = y.len();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64 + 1);
            let samples: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow(columns, y, samples, &params.tree, Some(&mut rng))
        })
        .collect();
    Forest { trees }
}

impl Forest {
    /// Mean of the trees' leaf positive rates.
    pub fn positive_rate(&self, row: &[f64]) -> f64 {
        let total: f64 = self.trees.iter().map(|t| t.positive_rate(row)).sum();
        total / self.trees.len() as f64
    }
}
