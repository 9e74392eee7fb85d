use std::path::Path;

use super::{Column, ColumnData, DatasetTable};
use crate::error::{Error, Result};

/// Canonical names of the 41 connection features, in file order.
pub const NSLKDD_FEATURES: [&str; 41] = [
    "duration",
    "protocol_type",
    "service",
    "flag",
    "src_bytes",
    "dst_bytes",
    "land",
    "wrong_fragment",
    "urgent",
    "hot",
    "num_failed_logins",
    "logged_in",
    "num_compromised",
    "root_shell",
    "su_attempted",
    "num_root",
    "num_file_creations",
    "num_shells",
    "num_access_files",
    "num_outbound_cmds",
    "is_host_login",
    "is_guest_login",
    "count",
    "srv_count",
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_count",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
];

const SYMBOLIC: [&str; 3] = ["protocol_type", "service", "flag"];

pub const NSLKDD_TARGET: &str = "label";
pub const NSLKDD_POSITIVE: &str = "attack";
pub const NSLKDD_NEGATIVE: &str = "normal";

// 41 features, attack label, difficulty level
const RECORD_WIDTH: usize = 43;

/// Loads a KDDTrain+/KDDTest+ text file (no header).
///
/// The difficulty column is dropped and every label other than `normal` is
/// mapped to `attack`, the positive class.
pub fn load_nslkdd(path: impl AsRef<Path>) -> Result<DatasetTable> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;

    let mut features: Vec<Vec<String>> = vec![Vec::new(); NSLKDD_FEATURES.len()];
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        if record.len() != RECORD_WIDTH {
            return Err(Error::RaggedRow {
                row: i + 1,
                expected: RECORD_WIDTH,
                found: record.len(),
            });
        }
        for (j, field) in record.iter().take(NSLKDD_FEATURES.len()).enumerate() {
            if field.is_empty() {
                return Err(Error::MissingValue {
                    column: NSLKDD_FEATURES[j].to_string(),
                    row: i + 1,
                });
            }
            features[j].push(field.to_string());
        }
        let label = &record[NSLKDD_FEATURES.len()];
        labels.push(if label == NSLKDD_NEGATIVE {
            NSLKDD_NEGATIVE
        } else {
            NSLKDD_POSITIVE
        });
    }
    if labels.is_empty() {
        return Err(Error::Empty(format!("{} has no records", path.display())));
    }

    let mut columns = Vec::with_capacity(RECORD_WIDTH - 1);
    for (name, values) in NSLKDD_FEATURES.iter().zip(features) {
        let data = if SYMBOLIC.contains(name) {
            ColumnData::Categorical(values)
        } else {
            let parsed = values
                .iter()
                .enumerate()
                .map(|(row, v)| {
                    v.parse::<f64>().map_err(|_| Error::NotNumeric {
                        column: name.to_string(),
                        row: row + 1,
                        value: v.clone(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            ColumnData::Numeric(parsed)
        };
        columns.push(Column {
            name: name.to_string(),
            data,
        });
    }
    columns.push(Column::categorical(NSLKDD_TARGET, labels));

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "nslkdd".into());
    DatasetTable::new(name, columns, NSLKDD_TARGET, NSLKDD_POSITIVE)
}
