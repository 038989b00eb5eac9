//! CSV ingestion and table persistence.
//!
//! `load_csv` turns an arbitrary headered CSV into a [`Table`]: numeric
//! columns are parsed as reals, anything else is integer-coded by first
//! appearance, and the label column is coded the same way. Persisted tables
//! use a plain numeric CSV plus a `<file>.meta.json` sidecar carrying the
//! class count and row and column origins.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::table::{Origin, Table};
use crate::error::{Error, Result};

/// Selects the label column by header name or zero-based position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(LabelColumn::Name(s.to_string()))
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Index(i) => write!(f, "#{i}"),
            LabelColumn::Name(n) => f.write_str(n),
        }
    }
}

impl LabelColumn {
    fn resolve(&self, headers: &[String]) -> Option<usize> {
        match self {
            LabelColumn::Index(i) => (*i < headers.len()).then_some(*i),
            LabelColumn::Name(name) => headers
                .iter()
                .position(|h| h == name)
                // A bare number that is not a header name is read as a position.
                .or_else(|| name.parse::<usize>().ok().filter(|&i| i < headers.len())),
        }
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(
        cell.trim().to_ascii_lowercase().as_str(),
        "" | "na" | "n/a" | "nan" | "null" | "?"
    )
}

/// Integer codes assigned in order of first appearance.
#[derive(Default)]
struct Codebook {
    codes: HashMap<String, u32>,
}

impl Codebook {
    fn code(&mut self, value: &str) -> u32 {
        let next = self.codes.len() as u32;
        *self.codes.entry(value.to_string()).or_insert(next)
    }

    fn len(&self) -> usize {
        self.codes.len()
    }
}

pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn) -> Result<Table> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, label)
}

/// Same as [`load_csv`] over any reader.
pub fn read_csv(reader: impl std::io::Read, label: &LabelColumn) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let label_idx = label.resolve(&headers).ok_or_else(|| Error::Parse {
        row: 0,
        column: label.to_string(),
        message: "label column not found in header".into(),
    })?;

    let mut cells: Vec<Vec<String>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row: i + 1,
            column: String::new(),
            message: e.to_string(),
        })?;
        cells.push(rec.iter().map(str::to_string).collect());
    }
    if cells.is_empty() {
        return Err(Error::EmptyTable);
    }
    if headers.len() < 2 {
        return Err(Error::InvalidTable("no feature columns besides the label".into()));
    }

    let n = cells.len();
    let feature_cols: Vec<usize> = (0..headers.len()).filter(|&c| c != label_idx).collect();
    let d = feature_cols.len();
    let mut x = vec![0.0; n * d];

    for (j, &c) in feature_cols.iter().enumerate() {
        let numeric = cells
            .iter()
            .all(|r| is_missing(&r[c]) || r[c].trim().parse::<f64>().is_ok());
        if numeric {
            let mut parsed = Vec::with_capacity(n);
            for (i, r) in cells.iter().enumerate() {
                if is_missing(&r[c]) {
                    parsed.push(None);
                    continue;
                }
                let v: f64 = r[c].trim().parse().expect("checked numeric");
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row: i + 1,
                        column: headers[c].clone(),
                        message: format!("non-finite value '{}'", r[c]),
                    });
                }
                parsed.push(Some(v));
            }
            let present: Vec<f64> = parsed.iter().flatten().copied().collect();
            let mean = if present.is_empty() {
                0.0
            } else {
                present.iter().sum::<f64>() / present.len() as f64
            };
            for (i, v) in parsed.into_iter().enumerate() {
                x[i * d + j] = v.unwrap_or(mean);
            }
        } else {
            let mut book = Codebook::default();
            let codes: Vec<Option<u32>> = cells
                .iter()
                .map(|r| (!is_missing(&r[c])).then(|| book.code(r[c].trim())))
                .collect();
            // Missing categoricals get their own code after every observed one.
            let missing_code = book.len() as f64;
            for (i, code) in codes.into_iter().enumerate() {
                x[i * d + j] = code.map_or(missing_code, f64::from);
            }
        }
    }

    let mut labels = Codebook::default();
    let mut y = Vec::with_capacity(n);
    for (i, r) in cells.iter().enumerate() {
        if is_missing(&r[label_idx]) {
            return Err(Error::Parse {
                row: i + 1,
                column: headers[label_idx].clone(),
                message: "missing label".into(),
            });
        }
        y.push(labels.code(r[label_idx].trim()));
    }
    if labels.len() < 2 {
        return Err(Error::SingleClass);
    }

    let names = feature_cols.iter().map(|&c| headers[c].clone()).collect();
    Table::new(x, d, y, labels.len())?.with_feature_names(names)
}

#[derive(Debug, Serialize, Deserialize)]
struct TableMeta {
    class_count: usize,
    feature_names: Vec<String>,
    row_origin: Vec<Origin>,
    col_origin: Vec<Origin>,
}

/// Path of the origin sidecar for a persisted table.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Writes `table` as numeric CSV (features then a `label` column) and its
/// origin sidecar.
pub fn save_table(table: &Table, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    let names: Vec<String> = (0..table.n_cols()).map(|j| table.feature_name(j)).collect();
    let mut header = names.clone();
    header.push("label".into());
    w.write_record(&header)?;
    for i in 0..table.n_rows() {
        let mut rec: Vec<String> = table.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(table.label(i).to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    let meta = TableMeta {
        class_count: table.class_count(),
        feature_names: names,
        row_origin: table.row_origins().to_vec(),
        col_origin: table.col_origins().to_vec(),
    };
    let side = sidecar_path(path);
    std::fs::write(&side, serde_json::to_vec_pretty(&meta)?).map_err(|e| Error::io(side, e))
}

/// Reads a table written by [`save_table`].
pub fn read_table(path: impl AsRef<Path>) -> Result<Table> {
    let path = path.as_ref();
    let side = sidecar_path(path);
    let meta: TableMeta = serde_json::from_slice(&std::fs::read(&side).map_err(|e| Error::io(&side, e))?)?;
    let mut rdr = csv::Reader::from_path(path)?;
    let d = meta.feature_names.len();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |column: &str, message: String| Error::Parse {
            row: i + 1,
            column: column.to_string(),
            message,
        };
        if rec.len() != d + 1 {
            return Err(bad("", format!("expected {} fields, found {}", d + 1, rec.len())));
        }
        for (j, cell) in rec.iter().take(d).enumerate() {
            x.push(
                cell.parse::<f64>()
                    .map_err(|e| bad(&meta.feature_names[j], e.to_string()))?,
            );
        }
        y.push(rec[d].parse::<u32>().map_err(|e| bad("label", e.to_string()))?);
    }
    Table::new(x, d, y, meta.class_count)?
        .with_feature_names(meta.feature_names)?
        .with_origins(meta.row_origin, meta.col_origin)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str, label: &str) -> Result<Table> {
        read_csv(s.as_bytes(), &LabelColumn::Name(label.into()))
    }

    #[test]
    fn labels_coded_by_first_appearance() {
        let t = parse("f,y\n1,a\n2,b\n3,a\n", "y").unwrap();
        assert_eq!(t.labels(), &[0, 1, 0]);
        assert_eq!(t.class_count(), 2);
        assert_eq!(t.feature_names().unwrap(), &["f".to_string()]);
    }

    #[test]
    fn missing_numeric_imputed_with_column_mean() {
        // Present values 1, 2.5, 4 have mean 2.5.
        let t = parse("a,b,y\n1,9,x\n,9,y\n2.5,9,x\n4,9,y\n", "y").unwrap();
        assert_eq!(t.column(0), vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn categoricals_and_missing_category() {
        let t = parse("c,y\nred,0\nblue,1\n,0\nred,1\n", "y").unwrap();
        assert_eq!(t.column(0), vec![0.0, 1.0, 2.0, 0.0]);
    }

    #[test]
    fn single_class_and_empty_are_errors() {
        assert!(matches!(parse("f,y\n1,a\n2,a\n", "y"), Err(Error::SingleClass)));
        assert!(matches!(parse("f,y\n", "y"), Err(Error::EmptyTable)));
        assert!(matches!(parse("f,y\n1,a\n", "z"), Err(Error::Parse { .. })));
    }

    #[test]
    fn infinite_literal_reports_position() {
        match parse("f,y\n1,a\ninf,b\n", "y") {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "f");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn label_by_index() {
        let t = read_csv("y,f\na,1\nb,2\n".as_bytes(), &LabelColumn::Index(0)).unwrap();
        assert_eq!(t.column(0), vec![1.0, 2.0]);
        let t = parse("y,f\na,1\nb,2\n", "0").unwrap();
        assert_eq!(t.labels(), &[0, 1]);
    }

    #[test]
    fn persisted_table_round_trips_with_origins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let t = Table::from_rows(&[vec![0.1, -3.25], vec![1e-7, 2.0]], vec![1, 0], 3)
            .unwrap()
            .append_rows(vec![0.3333333333333333, 4.0], vec![2], Origin::Injected)
            .unwrap();
        save_table(&t, &path).unwrap();
        let back = read_table(&path).unwrap();
        assert_eq!(back.values(), t.values());
        assert_eq!(back.labels(), t.labels());
        assert_eq!(back.class_count(), 3);
        assert_eq!(back.row_origins(), t.row_origins());
    }
}
