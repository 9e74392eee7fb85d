//! Recall, recall efficiency, Spearman rank correlation and
//! Bonferroni-adjusted t intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    /// Counts with `true` as the positive (attack) class.
    pub fn from_predictions(truth: &[bool], predicted: &[bool]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                found: predicted.len(),
            });
        }
        let mut c = ConfusionCounts::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub fn recall(c: &ConfusionCounts) -> Result<f64> {
    let positives = c.tp + c.fn_;
    if positives == 0 {
        return Err(Error::NoPositives);
    }
    Ok(c.tp as f64 / positives as f64)
}

/// Observed recall of the top recommendation over the best observed recall.
pub fn recall_efficiency(top_recommended_recall: f64, best_observed_recall: f64) -> Result<f64> {
    if best_observed_recall <= 0.0 {
        return Err(Error::InvalidParameter(
            "best observed recall must be positive".into(),
        ));
    }
    for v in [top_recommended_recall, best_observed_recall] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("recall {v} outside [0, 1]")));
        }
    }
    Ok(top_recommended_recall / best_observed_recall)
}

fn check_permutation(ranks: &[usize]) -> Result<()> {
    let n = ranks.len();
    let mut seen = vec![false; n + 1];
    for &r in ranks {
        if r == 0 || r > n || seen[r] {
            return Err(Error::NotPermutation(n));
        }
        seen[r] = true;
    }
    Ok(())
}

/// Spearman's rho for two tie-free rankings, `1 - 6 sum d^2 / (n (n^2 - 1))`.
pub fn spearman(ranks_a: &[usize], ranks_b: &[usize]) -> Result<f64> {
    if ranks_a.len() != ranks_b.len() {
        return Err(Error::DimensionMismatch {
            expected: ranks_a.len(),
            found: ranks_b.len(),
        });
    }
    let n = ranks_a.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "rank correlation needs at least 2 items, got {n}"
        )));
    }
    check_permutation(ranks_a)?;
    check_permutation(ranks_b)?;
    let d2: i64 = ranks_a
        .iter()
        .zip(ranks_b)
        .map(|(&a, &b)| {
            let d = a as i64 - b as i64;
            d * d
        })
        .sum();
    let n = n as i64;
    Ok(1.0 - (6 * d2) as f64 / (n * (n * n - 1)) as f64)
}

// Two-sided alpha = 0.10 critical values of Spearman's rho, n = 4..=20.
/// Largest sum of squared rank differences still significant at two-sided
/// alpha = 0.10, for n = 4..=10, from the exact permutation distribution.
const SPEARMAN_MAX_D2_10: [u64; 7] = [0, 2, 6, 16, 30, 48, 72];

/// Two-sided alpha = 0.10 critical values for n = 11..=20.
const SPEARMAN_CRITICAL_10: [f64; 10] = [
    0.536, 0.503, 0.484, 0.464, 0.446, 0.429, 0.414, 0.401, 0.391, 0.380,
];

/// Smallest |rho| significant at two-sided alpha = 0.10. Exact for n <= 10,
/// tabulated to n = 20, t approximation beyond; `None` when no ranking of
/// size n can reach significance.
pub fn spearman_critical_value(n: usize) -> Option<f64> {
    match n {
        0..=3 => None,
        4..=10 => {
            let d2 = SPEARMAN_MAX_D2_10[n - 4] as f64;
            let n = n as f64;
            Some(1.0 - 6.0 * d2 / (n * (n * n - 1.0)))
        }
        11..=20 => Some(SPEARMAN_CRITICAL_10[n - 11]),
        _ => {
            let df = (n - 2) as f64;
            let t = StudentsT::new(0.0, 1.0, df).ok()?.inverse_cdf(0.95);
            Some(t / (df + t * t).sqrt())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpearmanTest {
    pub rho: f64,
    pub n: usize,
    pub alpha: f64,
    pub critical_value: Option<f64>,
    pub significant: bool,
}

pub fn spearman_test(ranks_a: &[usize], ranks_b: &[usize]) -> Result<SpearmanTest> {
    let rho = spearman(ranks_a, ranks_b)?;
    let n = ranks_a.len();
    let critical_value = spearman_critical_value(n);
    Ok(SpearmanTest {
        rho,
        n,
        alpha: 0.10,
        critical_value,
        significant: critical_value.is_some_and(|c| rho.abs() >= c),
    })
}

/// Per-repetition recalls of one algorithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecallSample {
    pub algorithm: String,
    pub recalls: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (n - 1); 0 for a single value.
    pub sd: f64,
}

impl RecallSample {
    pub fn new(algorithm: impl Into<String>, recalls: Vec<f64>) -> Result<Self> {
        if recalls.is_empty() {
            return Err(Error::Empty("recall sample has no values".into()));
        }
        let n = recalls.len() as f64;
        let mean = recalls.iter().sum::<f64>() / n;
        let sd = if recalls.len() < 2 {
            0.0
        } else {
            (recalls.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Ok(RecallSample {
            algorithm: algorithm.into(),
            recalls,
            mean,
            sd,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BonferroniInterval {
    pub algorithm: String,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub half_width: f64,
    /// per-interval alpha after the Bonferroni split
    pub alpha: f64,
    pub n: usize,
}

impl BonferroniInterval {
    pub fn overlaps(&self, other: &BonferroniInterval) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

/// `mean +- t(1 - alpha/2, n - 1) * sd / sqrt(n)` with
/// `alpha = (1 - family_confidence) / m`.
pub fn bonferroni_ci(
    samples: &[RecallSample],
    family_confidence: f64,
) -> Result<Vec<BonferroniInterval>> {
    if samples.is_empty() {
        return Err(Error::Empty("no samples for confidence intervals".into()));
    }
    if !(family_confidence > 0.0 && family_confidence < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "family confidence must lie in (0, 1), got {family_confidence}"
        )));
    }
    let alpha = (1.0 - family_confidence) / samples.len() as f64;
    samples
        .iter()
        .map(|s| {
            let n = s.recalls.len();
            if n < 2 {
                return Err(Error::InvalidParameter(format!(
                    "`{}` has {n} recall values, intervals need at least 2",
                    s.algorithm
                )));
            }
            let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?
                .inverse_cdf(1.0 - alpha / 2.0);
            let half_width = t * s.sd / (n as f64).sqrt();
            Ok(BonferroniInterval {
                algorithm: s.algorithm.clone(),
                mean: s.mean,
                lower: s.mean - half_width,
                upper: s.mean + half_width,
                half_width,
                alpha,
                n,
            })
        })
        .collect()
}

/// Pairs of algorithms whose intervals overlap, in input order.
pub fn overlapping_pairs(intervals: &[BonferroniInterval]) -> Vec<(String, String)> {
    let mut pairs = Vec::new();
    for (i, a) in intervals.iter().enumerate() {
        for b in &intervals[i + 1..] {
            if a.overlaps(b) {
                pairs.push((a.algorithm.clone(), b.algorithm.clone()));
            }
        }
    }
    pairs
}
