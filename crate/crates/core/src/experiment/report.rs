use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{recall_efficiency, BonferroniInterval, SpearmanTest};
use crate::metafeatures::MetaFeatureVector;
use crate::recommend::{ExperiencePair, Ranking, Strategy};

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Column headers of the text table, after the algorithm column.
pub const TABLE_HEADERS: [&str; 7] = [
    "Observed Mean Recall",
    "Meta-Learner Predicted Recall",
    "Mean Runtime (s)",
    "SD of Observed Recall",
    "Observed Ranks",
    "Rules-of-Thumb Predicted Ranks",
    "Meta-Learner Predicted Ranks",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmRow {
    pub algorithm: String,
    pub display_name: String,
    pub observed_mean_recall: f64,
    pub sd_observed_recall: f64,
    /// One value per repetition.
    pub recalls: Vec<f64>,
    pub mean_runtime_secs: f64,
    /// Clamped to [0, 1].
    pub meta_predicted_recall: Option<f64>,
    pub meta_predicted_raw: Option<f64>,
    pub observed_rank: usize,
    pub rules_rank: Option<usize>,
    pub meta_rank: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: Strategy,
    pub top_pick: String,
    pub top_pick_observed_recall: f64,
    pub best_observed_recall: f64,
    pub recall_efficiency: f64,
    /// Absent with fewer than 2 candidates.
    pub spearman: Option<SpearmanTest>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalOverlap {
    pub first: String,
    pub second: String,
    pub overlap: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellFailure {
    pub dataset: String,
    pub algorithm: String,
    pub repetition: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub manifest_hash: String,
    pub seed: u64,
    pub repetitions: usize,
    pub split_ratio: f64,
    pub leakage_mode: String,
    pub test_dataset: String,
    pub training_datasets: Vec<String>,
    /// Training datasets sharing the test set's predictor schema; only these
    /// contribute observed recall.
    pub evaluated_training_datasets: Vec<String>,
    pub aggregation: String,
    pub rule_tree: Option<String>,
    pub crate_version: String,
    pub started_at: String,
    pub finished_at: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub version: u32,
    pub rows: Vec<AlgorithmRow>,
    pub test_meta_features: MetaFeatureVector,
    pub best_observed: String,
    pub rules_ranking: Option<Ranking>,
    pub meta_ranking: Option<Ranking>,
    pub strategies: Vec<StrategySummary>,
    pub family_confidence: f64,
    pub intervals: Option<Vec<BonferroniInterval>>,
    pub overlaps: Vec<IntervalOverlap>,
    pub experience: Vec<ExperiencePair>,
    pub failures: Vec<CellFailure>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
    Csv,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Json, ReportFormat::Text, ReportFormat::Csv];

    pub fn file_name(self) -> &'static str {
        match self {
            ReportFormat::Json => "report.json",
            ReportFormat::Text => "report.txt",
            ReportFormat::Csv => "report.csv",
        }
    }
}

fn is_permutation(ranks: &[usize]) -> bool {
    let mut sorted = ranks.to_vec();
    sorted.sort_unstable();
    sorted.iter().enumerate().all(|(i, &r)| r == i + 1)
}

impl RankingReport {
    pub fn row(&self, algorithm: &str) -> Option<&AlgorithmRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm)
    }

    pub fn strategy(&self, strategy: Strategy) -> Option<&StrategySummary> {
        self.strategies.iter().find(|s| s.strategy == strategy)
    }

    /// The report with runtimes and timestamps cleared; a pure function of
    /// manifest, data and seed.
    pub fn body(&self) -> RankingReport {
        let mut body = self.clone();
        for row in &mut body.rows {
            row.mean_runtime_secs = 0.0;
        }
        body.provenance.started_at.clear();
        body.provenance.finished_at.clear();
        body
    }

    pub fn body_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.body()).map_err(|e| Error::json("report", e))
    }

    /// Checks rank columns are permutations and every recall efficiency
    /// recomputes exactly from the row values.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(format!("report: {msg}")));
        if self.rows.is_empty() {
            return bad("no algorithm rows".into());
        }
        let observed: Vec<usize> = self.rows.iter().map(|r| r.observed_rank).collect();
        if !is_permutation(&observed) {
            return bad(format!("observed ranks {observed:?} are not a permutation"));
        }
        for (name, col) in [
            ("rules", self.rows.iter().map(|r| r.rules_rank).collect::<Vec<_>>()),
            ("meta", self.rows.iter().map(|r| r.meta_rank).collect()),
        ] {
            if col.iter().all(Option::is_none) {
                continue;
            }
            let Some(ranks) = col.into_iter().collect::<Option<Vec<usize>>>() else {
                return bad(format!("{name} ranks are partially missing"));
            };
            if !is_permutation(&ranks) {
                return bad(format!("{name} ranks {ranks:?} are not a permutation"));
            }
        }
        let best = self
            .rows
            .iter()
            .map(|r| r.observed_mean_recall)
            .fold(f64::NEG_INFINITY, f64::max);
        for s in &self.strategies {
            let Some(top) = self.row(&s.top_pick) else {
                return bad(format!("{} top pick `{}` has no row", s.strategy, s.top_pick));
            };
            if top.observed_mean_recall != s.top_pick_observed_recall
                || best != s.best_observed_recall
            {
                return bad(format!("{} summary disagrees with the rows", s.strategy));
            }
            let expected = recall_efficiency(top.observed_mean_recall, best)?;
            if expected != s.recall_efficiency {
                return bad(format!(
                    "{} recall efficiency {} does not recompute ({expected})",
                    s.strategy, s.recall_efficiency
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("report", e))
    }

    pub fn from_json(text: &str) -> Result<RankingReport> {
        serde_json::from_str(text).map_err(|e| Error::json("report", e))
    }

    pub fn to_text(&self) -> String {
        let opt_f = |v: Option<f64>, digits: usize| match v {
            Some(x) => format!("{x:.digits$}"),
            None => "-".into(),
        };
        let opt_r = |v: Option<usize>| v.map_or("-".into(), |r| r.to_string());
        let mut header = vec!["Algorithm".to_string()];
        header.extend(TABLE_HEADERS.iter().map(|h| h.to_string()));
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.display_name.clone(),
                    format!("{:.9}", r.observed_mean_recall),
                    opt_f(r.meta_predicted_recall, 9),
                    format!("{:.6}", r.mean_runtime_secs),
                    format!("{:.6}", r.sd_observed_recall),
                    r.observed_rank.to_string(),
                    opt_r(r.rules_rank),
                    opt_r(r.meta_rank),
                ]
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|j| {
                body.iter()
                    .map(|row| row[j].chars().count())
                    .chain([header[j].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join(" | ")
                .trim_end()
                .to_string()
        };

        let mut out = String::new();
        let _ = writeln!(out, "{}", line(&header));
        let _ = writeln!(
            out,
            "{}",
            widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-")
        );
        for row in &body {
            let _ = writeln!(out, "{}", line(row));
        }
        out.push('\n');
        let _ = writeln!(out, "Best observed: {}", self.best_observed);
        for s in &self.strategies {
            let _ = write!(
                out,
                "{} strategy: top pick {}, recall efficiency {:.6}",
                s.strategy, s.top_pick, s.recall_efficiency
            );
            if let Some(sp) = &s.spearman {
                let verdict = if sp.significant { "significant" } else { "not significant" };
                let _ = write!(out, ", Spearman rho {:.3} ({verdict} at alpha {})", sp.rho, sp.alpha);
            }
            out.push('\n');
        }
        if let Some(intervals) = &self.intervals {
            let _ = writeln!(
                out,
                "\n{:.0}% Bonferroni intervals:",
                self.family_confidence * 100.0
            );
            for iv in intervals {
                let _ = writeln!(
                    out,
                    "  {:<14} [{:.6}, {:.6}]",
                    iv.algorithm, iv.lower, iv.upper
                );
            }
            for o in &self.overlaps {
                let _ = writeln!(
                    out,
                    "  {} / {}: {}",
                    o.first,
                    o.second,
                    if o.overlap { "overlap" } else { "disjoint" }
                );
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        for f in &self.failures {
            let _ = writeln!(
                out,
                "failed: {} / {} / repetition {}: {}",
                f.dataset, f.algorithm, f.repetition, f.message
            );
        }
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Csv {
            path: PathBuf::from("<report>"),
            source: e,
        };
        w.write_record([
            "algorithm",
            "observed_mean_recall",
            "meta_predicted_recall",
            "mean_runtime_s",
            "sd_observed_recall",
            "observed_rank",
            "rules_rank",
            "meta_rank",
        ])
        .map_err(csv_err)?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.algorithm.clone(),
                r.observed_mean_recall.to_string(),
                opt(r.meta_predicted_recall.map(|v| v.to_string())),
                r.mean_runtime_secs.to_string(),
                r.sd_observed_recall.to_string(),
                r.observed_rank.to_string(),
                opt(r.rules_rank.map(|v| v.to_string())),
                opt(r.meta_rank.map(|v| v.to_string())),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::io("<report>", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Writes one format to `path`.
pub fn emit_report(report: &RankingReport, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Json => report.to_json()?,
        ReportFormat::Text => report.to_text(),
        ReportFormat::Csv => report.to_csv()?,
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes report.json, report.txt and report.csv into `dir`, creating it.
pub fn write_reports(report: &RankingReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    ReportFormat::ALL
        .iter()
        .map(|&f| {
            let path = dir.join(f.file_name());
            emit_report(report, f, &path).map(|_| path)
        })
        .collect()
}
