#![allow(dead_code)]

//! Shared oracles and synthetic data for the integration tests.

pub mod props;

use std::path::{Path, PathBuf};

use metaselect::dataset::{Column, DatasetTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cyclic Jacobi eigenvalue iteration for a symmetric matrix, written
/// independently of the library's decomposition. Returns eigenvalues in
/// descending order with matching eigenvectors as columns.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-22 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].total_cmp(&m[i][i]));
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = (0..n).map(|r| order.iter().map(|&i| v[r][i]).collect()).collect();
    (values, vectors)
}

/// Sample covariance (n - 1) of row-major data.
pub fn covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let means: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    rows.iter()
                        .map(|r| (r[a] - means[a]) * (r[b] - means[b]))
                        .sum::<f64>()
                        / (n - 1.0)
                })
                .collect()
        })
        .collect()
}

/// All permutations of 1..=n.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, left: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..left.len() {
            let x = left.remove(i);
            prefix.push(x);
            go(prefix, left, out);
            prefix.pop();
            left.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (1..=n).collect(), &mut out);
    out
}

/// Spearman rho as the Pearson correlation of the rank vectors.
pub fn pearson_rho(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<usize>() as f64 / n;
    let mb = b.iter().sum::<usize>() as f64 / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x as f64 - ma, y as f64 - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}

/// Exact two-sided null probability P(|rho| >= r) for n items, by
/// enumerating every permutation against the identity.
pub fn exact_two_sided_p(n: usize, r: f64) -> f64 {
    let ident: Vec<usize> = (1..=n).collect();
    let perms = permutations(n);
    let hits = perms
        .iter()
        .filter(|p| pearson_rho(&ident, p).abs() >= r - 1e-12)
        .count();
    hits as f64 / perms.len() as f64
}

/// A table with a separable label: positive iff `x0 > 0.5`. `x0` avoids
/// (0.4, 0.6), the other numeric columns are noise, and `proto` is a noise
/// categorical column.
pub fn separable_table(name: &str, rows: usize, seed: u64) -> DatasetTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x0 = Vec::with_capacity(rows);
    let mut x1 = Vec::with_capacity(rows);
    let mut x2 = Vec::with_capacity(rows);
    let mut proto = Vec::with_capacity(rows);
    let mut label = Vec::with_capacity(rows);
    for i in 0..rows {
        // alternate classes so every block of rows holds both
        let positive = i % 2 == 0;
        let v: f64 = rng.gen_range(0.0..0.4);
        x0.push(if positive { 0.6 + v } else { v });
        x1.push(rng.gen_range(0.0..1.0));
        x2.push(rng.gen_range(0.0..1.0));
        proto.push(["tcp", "udp", "icmp"][rng.gen_range(0..3)].to_string());
        label.push(if positive { "attack" } else { "normal" }.to_string());
    }
    DatasetTable::new(
        name,
        vec![
            Column::numeric("x0", x0),
            Column::numeric("x1", x1),
            Column::numeric("x2", x2),
            Column::categorical("proto", proto),
            Column::categorical("label", label),
        ],
        "label",
        "attack",
    )
    .unwrap()
}

/// Random mixed table with `n_num` numeric and `n_cat` categorical
/// predictors and a random binary label with both classes present.
pub fn random_table(rng: &mut ChaCha8Rng, rows: usize, n_num: usize, n_cat: usize) -> DatasetTable {
    let mut columns = Vec::new();
    for j in 0..n_num {
        let scale = rng.gen_range(0.1..100.0);
        let values = (0..rows).map(|_| rng.gen_range(-1.0..1.0) * scale).collect();
        columns.push(Column::numeric(format!("n{j}"), values));
    }
    for j in 0..n_cat {
        let k = rng.gen_range(1..5);
        let values: Vec<String> = (0..rows).map(|_| format!("c{}", rng.gen_range(0..k))).collect();
        columns.push(Column::categorical(format!("c{j}"), values));
    }
    let mut labels: Vec<String> = (0..rows)
        .map(|_| if rng.gen_bool(0.4) { "pos" } else { "neg" }.to_string())
        .collect();
    labels[0] = "pos".into();
    labels[1] = "neg".into();
    columns.push(Column::categorical("y", labels));
    DatasetTable::new("random", columns, "y", "pos").unwrap()
}

/// Writes three separable training sets and a test set to `dir` and returns
/// the manifest path.
pub fn write_synthetic_manifest(dir: &Path, repetitions: usize, extra: &str) -> PathBuf {
    use metaselect::dataset::write_csv;
    for (i, rows) in [(0, 200), (1, 260), (2, 320)] {
        write_csv(&separable_table("t", rows, 100 + i), dir.join(format!("train{i}.csv"))).unwrap();
    }
    write_csv(&separable_table("test", 400, 999), dir.join("test.csv")).unwrap();
    let ds = |id: &str, file: &str| {
        format!(
            r#"{{"id": "{id}", "path": "{file}", "target": "label", "positive_label": "attack",
                "kind_overrides": {{"proto": "categorical"}}}}"#
        )
    };
    let manifest = format!(
        r#"{{
            "version": 1,
            "training_datasets": [{}, {}, {}],
            "test_dataset": {},
            "repetitions": {repetitions},
            "seed": 7,
            "characterization": {{
                "assigned_task": "classify",
                "data_considerations": ["labeled", "tabular", "mixed_feature_types"],
                "resource_considerations": ["commodity_cpu"]
            }},
            "hyperparams": {{"random_forest": {{"n_trees": 25}}}}
            {extra}
        }}"#,
        ds("train0", "train0.csv"),
        ds("train1", "train1.csv"),
        ds("train2", "train2.csv"),
        ds("test", "test.csv"),
    );
    let path = dir.join("manifest.json");
    std::fs::write(&path, manifest).unwrap();
    path
}
