use std::collections::BTreeMap;
use std::path::Path;

use super::{Column, ColumnData, ColumnKind, DatasetTable};
use crate::error::{Error, Result};

/// Loads a headered, comma-delimited CSV file.
///
/// A column whose every value parses as a number is numeric, anything else is
/// categorical. `kind_overrides` takes precedence over inference. The target
/// column is always categorical. Empty fields are rejected as missing values.
pub fn load_csv(
    path: impl AsRef<Path>,
    target: &str,
    positive_label: &str,
    kind_overrides: Option<&BTreeMap<String, ColumnKind>>,
) -> Result<DatasetTable> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Empty(format!("{} has no header row", path.display())));
    }

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        // header is line 1
        let row = i + 2;
        if record.len() != headers.len() {
            return Err(Error::RaggedRow {
                row,
                expected: headers.len(),
                found: record.len(),
            });
        }
        for (j, field) in record.iter().enumerate() {
            if field.is_empty() {
                return Err(Error::MissingValue {
                    column: headers[j].clone(),
                    row,
                });
            }
            raw[j].push(field.to_string());
        }
    }
    if raw[0].is_empty() {
        return Err(Error::Empty(format!("{} has no data rows", path.display())));
    }
    if !headers.iter().any(|h| h == target) {
        return Err(Error::MissingColumn(target.to_string()));
    }
    if let Some(overrides) = kind_overrides {
        if let Some(unknown) = overrides.keys().find(|k| !headers.contains(k)) {
            return Err(Error::MissingColumn(unknown.clone()));
        }
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());

    let mut columns = Vec::with_capacity(headers.len());
    for (header, values) in headers.into_iter().zip(raw) {
        let requested = if header == target {
            Some(ColumnKind::Categorical)
        } else {
            kind_overrides.and_then(|o| o.get(&header).copied())
        };
        let data = match requested {
            Some(ColumnKind::Categorical) => ColumnData::Categorical(values),
            Some(ColumnKind::Numeric) => ColumnData::Numeric(parse_numeric(&header, &values)?),
            None => match parse_numeric(&header, &values) {
                Ok(parsed) => ColumnData::Numeric(parsed),
                Err(_) => ColumnData::Categorical(values),
            },
        };
        columns.push(Column { name: header, data });
    }

    DatasetTable::new(name, columns, target, positive_label)
}

fn parse_numeric(column: &str, values: &[String]) -> Result<Vec<f64>> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(Error::NotNumeric {
                column: column.to_string(),
                row: i + 2,
                value: v.clone(),
            }),
        })
        .collect()
}

/// Writes a table as headered CSV. Numbers use the shortest representation
/// that parses back to the same `f64`.
pub fn write_csv(table: &DatasetTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
    writer
        .write_record(table.columns().iter().map(|c| c.name.as_str()))
        .map_err(csv_err)?;
    let mut record = Vec::with_capacity(table.columns().len());
    for row in 0..table.row_count() {
        record.clear();
        for column in table.columns() {
            record.push(match &column.data {
                ColumnData::Numeric(v) => v[row].to_string(),
                ColumnData::Categorical(v) => v[row].clone(),
            });
        }
        writer.write_record(&record).map_err(csv_err)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn infers_kinds_by_parseability() {
        let f = write_tmp("a,b,t\n1,x,pos\n2,y,neg\n3,x,pos\n");
        let t = load_csv(f.path(), "t", "pos", None).unwrap();
        assert_eq!(t.column("a").unwrap().kind(), ColumnKind::Numeric);
        assert_eq!(t.column("b").unwrap().kind(), ColumnKind::Categorical);
        assert_eq!(t.column("t").unwrap().kind(), ColumnKind::Categorical);
        assert_eq!(t.labels(), vec![true, false, true]);
        assert_eq!(t.row_count(), 3);
    }

    #[test]
    fn numeric_target_stays_categorical() {
        let f = write_tmp("a,t\n1,0\n2,1\n");
        let t = load_csv(f.path(), "t", "1", None).unwrap();
        assert_eq!(t.column("t").unwrap().kind(), ColumnKind::Categorical);
        assert_eq!(t.labels(), vec![false, true]);
    }

    #[test]
    fn overrides_take_precedence() {
        let f = write_tmp("a,b,t\n1,2,p\n3,4,n\n");
        let overrides = BTreeMap::from([("a".to_string(), ColumnKind::Categorical)]);
        let t = load_csv(f.path(), "t", "p", Some(&overrides)).unwrap();
        assert_eq!(t.column("a").unwrap().as_categorical().unwrap(), &["1", "3"]);
        assert_eq!(t.column("b").unwrap().kind(), ColumnKind::Numeric);

        let bad = BTreeMap::from([("zz".to_string(), ColumnKind::Numeric)]);
        assert!(matches!(
            load_csv(f.path(), "t", "p", Some(&bad)),
            Err(Error::MissingColumn(_))
        ));

        let f = write_tmp("a,t\nx,p\ny,n\n");
        let forced = BTreeMap::from([("a".to_string(), ColumnKind::Numeric)]);
        assert!(matches!(
            load_csv(f.path(), "t", "p", Some(&forced)),
            Err(Error::NotNumeric { .. })
        ));
    }

    #[test]
    fn load_errors() {
        let f = write_tmp("a,t\n1,a\n2,b\n3,c\n");
        let err = load_csv(f.path(), "t", "a", None).unwrap_err();
        assert!(err.to_string().contains("target not binary"), "{err}");

        let f = write_tmp("a,t\n1,a\n2,b\n");
        assert!(matches!(load_csv(f.path(), "y", "a", None), Err(Error::MissingColumn(_))));

        let f = write_tmp("a,t\n1,a\n2\n");
        assert!(matches!(
            load_csv(f.path(), "t", "a", None),
            Err(Error::RaggedRow { row: 3, expected: 2, found: 1 })
        ));

        let f = write_tmp("");
        assert!(matches!(load_csv(f.path(), "t", "a", None), Err(Error::Empty(_))));

        let f = write_tmp("a,t\n");
        assert!(matches!(load_csv(f.path(), "t", "a", None), Err(Error::Empty(_))));

        let f = write_tmp("a,t\n,a\n2,b\n");
        assert!(matches!(load_csv(f.path(), "t", "a", None), Err(Error::MissingValue { .. })));
    }

    #[test]
    fn write_then_reload_preserves_values_and_kinds() {
        let f = write_tmp("a,b,c,t\n0.1,x,1,p\n-2.5e-7,y,2,n\n3,x,3,p\n");
        let overrides = BTreeMap::from([("c".to_string(), ColumnKind::Categorical)]);
        let t = load_csv(f.path(), "t", "p", Some(&overrides)).unwrap();
        let out = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        write_csv(&t, out.path()).unwrap();
        let back = load_csv(out.path(), "t", "p", Some(&t.kinds())).unwrap();
        assert_eq!(back.columns(), t.columns());
    }
}
