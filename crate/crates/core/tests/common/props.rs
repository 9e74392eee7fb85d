//! Property checks over seeded random inputs. Each returns a description of
//! the first violation found.

use metaselect::dataset::{make_subsets, stratified_split, Column, DatasetTable};
use metaselect::evaluation::spearman;
use metaselect::learners::AlgorithmId;
use metaselect::matrix::NumericMatrix;
use metaselect::metafeatures::{column_gradient, extract, MetaFeature, MetaFeatureVector};
use metaselect::preprocess::{fit_pipeline, minmax_scale, onehot_encode, pca_rotate, transform, MinMax};
use metaselect::recommend::{
    rank_meta, rank_rules, rank_scores, train_meta, Comparison, ExperiencePair, Predicate,
    RuleNode, RuleTree, Strategy,
};
use metaselect::taxonomy::ProblemCharacterization;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{covariance, jacobi_eigen, random_table};

pub type Check = std::result::Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn minmax_conventions() -> Check {
    let (v, p) = minmax_scale(&[2.0, 4.0, 6.0], None).map_err(|e| e.to_string())?;
    ensure(v == [0.0, 0.5, 1.0], || format!("[2,4,6] scaled to {v:?}"))?;
    let (v, _) = minmax_scale(&[5.0, 5.0, 5.0], None).map_err(|e| e.to_string())?;
    ensure(v == [0.0; 3], || format!("constant column scaled to {v:?}"))?;
    let (v, _) = minmax_scale(&[-5.0, 15.0], Some(MinMax { min: 0.0, max: 10.0 }))
        .map_err(|e| e.to_string())?;
    ensure(v == [0.0, 1.0], || format!("clamped apply gave {v:?}"))?;
    ensure(p == MinMax { min: 2.0, max: 6.0 }, || format!("fitted params {p:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.gen_range(1..40);
        let col: Vec<f64> = (0..n).map(|_| rng.gen_range(-1e3..1e3)).collect();
        let (scaled, params) = minmax_scale(&col, None).map_err(|e| e.to_string())?;
        ensure(scaled.iter().all(|v| (0.0..=1.0).contains(v)), || "fit left [0,1]".into())?;
        let probe: Vec<f64> = (0..10).map(|_| rng.gen_range(-5e3..5e3)).collect();
        let (applied, _) = minmax_scale(&probe, Some(params)).map_err(|e| e.to_string())?;
        ensure(applied.iter().all(|v| (0.0..=1.0).contains(v)), || "apply left [0,1]".into())?;
    }
    Ok(())
}

pub fn onehot_conventions() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let k = rng.gen_range(1..6);
        let n = rng.gen_range(1..30);
        let col: Vec<String> = (0..n).map(|_| format!("v{}", rng.gen_range(0..k))).collect();
        let (m, cats) = onehot_encode(&col, None).map_err(|e| e.to_string())?;
        ensure(m.cols() == cats.len(), || "column count differs from categories".into())?;
        for i in 0..m.rows() {
            let s: f64 = m.row(i).iter().sum();
            ensure(s == 1.0, || format!("fitted row {i} sums to {s}"))?;
        }
        let mut seen = cats.clone();
        seen.sort();
        seen.dedup();
        ensure(seen.len() == cats.len(), || "duplicate categories".into())?;
        let (unseen, _) = onehot_encode(&["zz".to_string()], Some(&cats)).map_err(|e| e.to_string())?;
        ensure(unseen.row(0).iter().all(|&v| v == 0.0), || "unseen category not all-zero".into())?;
    }
    Ok(())
}

/// Orthonormal components, variance preserved, eigenvalues matching an
/// independent Jacobi decomposition of the covariance.
pub fn pca_against_oracle(matrices: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for t in 0..matrices {
        let d = rng.gen_range(1..7);
        let n = rng.gen_range(d.max(2)..40);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-10.0..10.0)).collect())
            .collect();
        let x = NumericMatrix::from_rows(&rows).map_err(|e| e.to_string())?;
        let (rotated, model) = pca_rotate(&x, None).map_err(|e| e.to_string())?;
        for (a, ca) in model.components.iter().enumerate() {
            for (b, cb) in model.components.iter().enumerate() {
                let dot: f64 = ca.iter().zip(cb).map(|(p, q)| p * q).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                ensure((dot - want).abs() < 1e-8, || {
                    format!("matrix {t}: components {a},{b} dot {dot}")
                })?;
            }
            let pivot = ca.iter().fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m });
            ensure(pivot > 0.0, || format!("matrix {t}: component {a} sign convention"))?;
        }
        let before: f64 = (0..d).map(|j| covariance(&rows)[j][j]).sum();
        let rot_rows: Vec<Vec<f64>> = (0..n).map(|i| rotated.row(i).to_vec()).collect();
        let after: f64 = (0..d).map(|j| covariance(&rot_rows)[j][j]).sum();
        ensure((before - after).abs() < 1e-8 * before.max(1.0), || {
            format!("matrix {t}: variance {before} -> {after}")
        })?;
        let (oracle, _) = jacobi_eigen(&covariance(&rows));
        for (k, (got, want)) in model.explained_variance.iter().zip(&oracle).enumerate() {
            ensure((got - want.max(0.0)).abs() < 1e-8 * want.abs().max(1.0), || {
                format!("matrix {t}: eigenvalue {k} {got} vs oracle {want}")
            })?;
        }
        let rot_cov = covariance(&rot_rows);
        for k in 0..d {
            ensure((rot_cov[k][k] - oracle[k]).abs() < 1e-8 * oracle[k].abs().max(1.0), || {
                format!("matrix {t}: rotated variance {k} {} vs {}", rot_cov[k][k], oracle[k])
            })?;
        }
    }
    Ok(())
}

pub fn pipeline_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..30 {
        let n_num = rng.gen_range(0..5);
        let n_cat = rng.gen_range(if n_num == 0 { 1 } else { 0 }..3);
        let rows = rng.gen_range(5..50);
        let table = random_table(&mut rng, rows, n_num, n_cat);
        let model = fit_pipeline(&table).map_err(|e| e.to_string())?;
        let again = fit_pipeline(&table).map_err(|e| e.to_string())?;
        ensure(model == again, || "pipeline fit not deterministic".into())?;
        let x = transform(&model, &table).map_err(|e| e.to_string())?;
        ensure(x.cols() == model.output_width(), || "width mismatch".into())?;
        for i in 0..x.rows() {
            for &v in &x.row(i)[..n_num] {
                ensure((0.0..=1.0).contains(&v), || format!("numeric block value {v}"))?;
            }
        }
    }
    Ok(())
}

/// The 4-row hand example: A = [0, 0.5, 1, 0.25] numeric, B = [x, y, x, y].
pub fn metafeature_oracle() -> Check {
    let g = column_gradient(&[0.0, 0.5, 1.0, 0.25]).map_err(|e| e.to_string())?;
    let hand = (0.5 + 0.5 + 0.75) / 3.0;
    ensure(g == hand, || format!("gradient {g} vs {hand}"))?;
    let table = DatasetTable::new(
        "four",
        vec![
            Column::numeric("A", vec![0.0, 0.5, 1.0, 0.25]),
            Column::categorical("B", ["x", "y", "x", "y"]),
            Column::categorical("t", ["p", "n", "p", "n"]),
        ],
        "t",
        "p",
    )
    .map_err(|e| e.to_string())?;
    let mf = extract(&table).map_err(|e| e.to_string())?;
    let want = [4.0, 2.0, 2.0, 1.0, 2.0, 2.0, 2.0, 1.0, hand, hand, hand, 0.0];
    ensure(mf.to_array() == want, || format!("{:?} vs {want:?}", mf.to_array()))
}

pub fn stratified_split_bounds() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for t in 0..100 {
        let rows = rng.gen_range(4..80);
        let table = random_table(&mut rng, rows, 2, 1);
        let (pos, neg) = table.class_counts();
        if pos < 2 || neg < 2 {
            continue;
        }
        let ratio = rng.gen_range(0.05..0.95);
        let split = stratified_split(&table, ratio, rng.gen()).map_err(|e| e.to_string())?;
        let (tp, tn) = split.train.class_counts();
        let (hp, hn) = split.test.class_counts();
        ensure(tp + hp == pos && tn + hn == neg, || format!("table {t}: rows lost"))?;
        for (got, total) in [(tp, pos), (tn, neg)] {
            let want = ratio * total as f64;
            ensure((got as f64 - want).abs() <= 1.0, || {
                format!("table {t}: class gets {got} training rows, expected about {want}")
            })?;
            ensure(got >= 1 && got < total, || format!("table {t}: a side lost a class"))?;
        }
    }
    Ok(())
}

pub fn subsets_partition() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for t in 0..100 {
        let rows = rng.gen_range(10..120);
        let table = random_table(&mut rng, rows, 1, 0);
        let k = rng.gen_range(1..10);
        let subsets = make_subsets(&table, k, rng.gen()).map_err(|e| e.to_string())?;
        ensure(!subsets.is_empty() && subsets.len() <= k, || {
            format!("table {t}: {} subsets for k={k}", subsets.len())
        })?;
        let joined: Vec<f64> = subsets
            .iter()
            .flat_map(|s| s.column("n0").unwrap().as_numeric().unwrap().to_vec())
            .collect();
        ensure(joined == table.column("n0").unwrap().as_numeric().unwrap(), || {
            format!("table {t}: subsets do not concatenate to the table")
        })?;
        for s in &subsets {
            let (p, n) = s.class_counts();
            ensure(p > 0 && n > 0, || format!("table {t}: single-class subset"))?;
        }
    }
    Ok(())
}

fn random_tree(rng: &mut ChaCha8Rng, ids: &[String], depth: usize) -> RuleNode {
    if depth == 0 || rng.gen_bool(0.3) {
        let mut order = ids.to_vec();
        order.shuffle(rng);
        return RuleNode::Leaf { order };
    }
    let features = [MetaFeature::NRows, MetaFeature::NCols, MetaFeature::GradAvg, MetaFeature::NDiscrete];
    RuleNode::Split {
        test: Predicate::Feature {
            feature: *features.choose(rng).unwrap(),
            op: [Comparison::Lt, Comparison::Le, Comparison::Gt, Comparison::Ge][rng.gen_range(0..4)],
            value: rng.gen_range(0.0..10.0),
        },
        then: Box::new(random_tree(rng, ids, depth - 1)),
        otherwise: Box::new(random_tree(rng, ids, depth - 1)),
    }
}

fn random_mf(rng: &mut ChaCha8Rng) -> MetaFeatureVector {
    let mut v = [0.0; 12];
    v.iter_mut().for_each(|x| *x = rng.gen_range(0.0..10.0));
    MetaFeatureVector::from_array(v)
}

fn is_bijection(ranks: &[usize]) -> bool {
    let mut r = ranks.to_vec();
    r.sort_unstable();
    r.iter().enumerate().all(|(i, &v)| v == i + 1)
}

pub fn ranking_permutations() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let all: Vec<String> = AlgorithmId::ALL.iter().map(|a| a.as_str().to_string()).collect();
    let pc = ProblemCharacterization::default();
    for t in 0..100 {
        let tree = RuleTree {
            label: String::new(),
            root: random_tree(&mut rng, &all, 4),
        };
        tree.validate().map_err(|e| e.to_string())?;
        let mut cands = all.clone();
        cands.shuffle(&mut rng);
        cands.truncate(rng.gen_range(1..=all.len()));
        let mf = random_mf(&mut rng);
        let r = rank_rules(&tree, &mf, &pc, &cands).map_err(|e| e.to_string())?;
        let ranks: Vec<usize> = r.entries.iter().map(|e| e.rank).collect();
        ensure(r.len() == cands.len() && is_bijection(&ranks), || {
            format!("tree {t}: ranks {ranks:?}")
        })?;
        ensure(r == rank_rules(&tree, &mf, &pc, &cands).unwrap(), || "rules not deterministic".into())?;

        let scores: Vec<(String, f64)> = cands
            .iter()
            .map(|c| (c.clone(), (rng.gen_range(0..4) as f64) / 4.0))
            .collect();
        let r = rank_scores(Strategy::Meta, &scores).map_err(|e| e.to_string())?;
        let ranks: Vec<usize> = r.entries.iter().map(|e| e.rank).collect();
        ensure(is_bijection(&ranks), || format!("scores {t}: ranks {ranks:?}"))?;
        for w in r.entries.windows(2) {
            ensure(
                w[0].score > w[1].score || (w[0].score == w[1].score && w[0].algorithm < w[1].algorithm),
                || format!("scores {t}: order violated at {:?}", w),
            )?;
        }
        let transformed: Vec<(String, f64)> =
            scores.iter().map(|(a, s)| (a.clone(), (3.0 * s).exp() - 7.0)).collect();
        let r2 = rank_scores(Strategy::Meta, &transformed).map_err(|e| e.to_string())?;
        let order = |r: &metaselect::Ranking| r.entries.iter().map(|e| e.algorithm.clone()).collect::<Vec<_>>();
        ensure(order(&r) == order(&r2), || format!("scores {t}: monotone transform changed ranking"))?;
    }

    for t in 0..10 {
        let experience: Vec<ExperiencePair> = (0..4)
            .flat_map(|d| {
                let mf = random_mf(&mut rng);
                all.iter()
                    .map(|a| ExperiencePair {
                        dataset: format!("d{d}"),
                        meta_features: mf,
                        algorithm: a.clone(),
                        recall: rng.gen_range(0.5..1.0),
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let model = train_meta(&experience, &all).map_err(|e| e.to_string())?;
        let r = rank_meta(&model, &random_mf(&mut rng)).map_err(|e| e.to_string())?;
        let ranks: Vec<usize> = r.entries.iter().map(|e| e.rank).collect();
        ensure(r.len() == all.len() && is_bijection(&ranks), || {
            format!("model {t}: ranks {ranks:?}")
        })?;
    }
    Ok(())
}

pub fn spearman_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..200 {
        let n = rng.gen_range(2..12);
        let mut a: Vec<usize> = (1..=n).collect();
        a.shuffle(&mut rng);
        let mut b: Vec<usize> = (1..=n).collect();
        b.shuffle(&mut rng);
        let rev: Vec<usize> = a.iter().map(|&r| n + 1 - r).collect();
        let s = |x: &[usize], y: &[usize]| spearman(x, y).map_err(|e| e.to_string());
        ensure(s(&a, &a)? == 1.0, || format!("self correlation of {a:?}"))?;
        ensure(s(&a, &rev)? == -1.0, || format!("reverse correlation of {a:?}"))?;
        ensure(s(&a, &b)? == s(&b, &a)?, || "asymmetric".into())?;
        let oracle = super::pearson_rho(&a, &b);
        ensure((s(&a, &b)? - oracle).abs() < 1e-12, || "disagrees with Pearson on ranks".into())?;
    }
    Ok(())
}
