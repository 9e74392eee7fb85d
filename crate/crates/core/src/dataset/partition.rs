use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::DatasetTable;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SplitPair {
    pub train: DatasetTable,
    pub test: DatasetTable,
    pub ratio: f64,
    pub seed: u64,
}

/// Stratified train/test partition.
///
/// Each class contributes `round(ratio * n_class)` rows to the training side,
/// clamped so both sides keep at least one row of every class. Rows keep
/// their original relative order on both sides.
pub fn stratified_split(table: &DatasetTable, ratio: f64, seed: u64) -> Result<SplitPair> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let labels = table.labels();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();

    for (class, label) in [
        (true, table.positive_label()),
        (false, table.negative_label()),
    ] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < 2 {
            return Err(Error::ClassTooSmall {
                label: label.to_string(),
                count: members.len(),
            });
        }
        members.shuffle(&mut rng);
        let n = members.len();
        let n_train = ((ratio * n as f64).round() as usize).clamp(1, n - 1);
        train_rows.extend_from_slice(&members[..n_train]);
        test_rows.extend_from_slice(&members[n_train..]);
    }
    train_rows.sort_unstable();
    test_rows.sort_unstable();

    Ok(SplitPair {
        train: table.select_rows(format!("{}_train", table.name()), &train_rows)?,
        test: table.select_rows(format!("{}_test", table.name()), &test_rows)?,
        ratio,
        seed,
    })
}

/// Cuts a table into contiguous, order-preserving blocks.
///
/// Boundaries are `k - 1` distinct uniform draws over the interior row
/// positions. A block holding a single class is merged into the block after
/// it (the trailing block merges backwards), so fewer than `k` subsets can be
/// returned on strongly clustered labels.
pub fn make_subsets(table: &DatasetTable, k: usize, seed: u64) -> Result<Vec<DatasetTable>> {
    let n = table.row_count();
    if k == 0 {
        return Err(Error::InvalidParameter("subset count must be at least 1".into()));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "subset count {k} exceeds row count {n}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bounds: Vec<usize> = index::sample(&mut rng, n - 1, k - 1)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    bounds.sort_unstable();
    bounds.push(n);

    let labels = table.labels();
    let mut blocks: Vec<(usize, usize)> = Vec::with_capacity(k);
    let mut start = 0;
    for &end in &bounds {
        let block = &labels[start..end];
        let mixed = block.iter().any(|&b| b) && block.iter().any(|&b| !b);
        if mixed {
            blocks.push((start, end));
            start = end;
        }
    }
    if start < n {
        match blocks.last_mut() {
            Some(last) => last.1 = n,
            None => blocks.push((0, n)),
        }
    }

    blocks
        .iter()
        .enumerate()
        .map(|(i, &(lo, hi))| table.slice_rows(format!("{}_subset_{}", table.name(), i + 1), lo..hi))
        .collect()
}
