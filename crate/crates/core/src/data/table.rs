use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a row or column came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    #[default]
    Original,
    /// Appended by an augmentation transform.
    Augmented,
    /// Appended by a noising transform.
    Injected,
}

impl Origin {
    pub fn is_synthetic(self) -> bool {
        self != Origin::Original
    }
}

/// Dense numeric features with integer class labels.
///
/// Features are stored row-major. Every value is finite and every label lies
/// in `[0, class_count)` with `class_count >= 2`; [`Table::new`] enforces both.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    x: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
    y: Vec<u32>,
    class_count: usize,
    feature_names: Option<Vec<String>>,
    row_origin: Vec<Origin>,
    col_origin: Vec<Origin>,
}

impl Table {
    pub fn new(x: Vec<f64>, n_cols: usize, y: Vec<u32>, class_count: usize) -> Result<Self> {
        if n_cols == 0 {
            return Err(Error::InvalidTable("table needs at least one feature".into()));
        }
        if !x.len().is_multiple_of(n_cols) {
            return Err(Error::InvalidTable(format!(
                "{} values do not fill rows of width {n_cols}",
                x.len()
            )));
        }
        let n_rows = x.len() / n_cols;
        if n_rows != y.len() {
            return Err(Error::InvalidTable(format!(
                "{n_rows} feature rows but {} labels",
                y.len()
            )));
        }
        if class_count < 2 {
            return Err(Error::InvalidTable(format!("class_count {class_count} < 2")));
        }
        if let Some(bad) = y.iter().find(|&&l| l as usize >= class_count) {
            return Err(Error::InvalidTable(format!(
                "label {bad} outside [0, {class_count})"
            )));
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidTable(format!(
                "non-finite value at row {}, column {}",
                pos / n_cols,
                pos % n_cols
            )));
        }
        Ok(Table {
            x,
            n_rows,
            n_cols,
            y,
            class_count,
            feature_names: None,
            row_origin: vec![Origin::Original; n_rows],
            col_origin: vec![Origin::Original; n_cols],
        })
    }

    /// Builds a table from row vectors. Convenient for fixtures.
    pub fn from_rows(rows: &[Vec<f64>], y: Vec<u32>, class_count: usize) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::InvalidTable("ragged rows".into()));
        }
        Table::new(rows.concat(), n_cols, y, class_count)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_cols {
            return Err(Error::InvalidTable(format!(
                "{} feature names for {} columns",
                names.len(),
                self.n_cols
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub(crate) fn with_origins(mut self, rows: Vec<Origin>, cols: Vec<Origin>) -> Result<Self> {
        if rows.len() != self.n_rows || cols.len() != self.n_cols {
            return Err(Error::InvalidTable("origin length mismatch".into()));
        }
        self.row_origin = rows;
        self.col_origin = cols;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn labels(&self) -> &[u32] {
        &self.y
    }

    pub fn label(&self, row: usize) -> u32 {
        self.y[row]
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.x[row * self.n_cols + col]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Feature name for column `j`, synthesizing `f{j}` when names are absent.
    pub fn feature_name(&self, j: usize) -> String {
        match &self.feature_names {
            Some(names) => names[j].clone(),
            None => format!("f{j}"),
        }
    }

    pub fn row_origins(&self) -> &[Origin] {
        &self.row_origin
    }

    pub fn col_origins(&self) -> &[Origin] {
        &self.col_origin
    }

    /// Number of rows per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &l in &self.y {
            counts[l as usize] += 1;
        }
        counts
    }

    /// Restriction to the given rows and columns, in the given order.
    /// Origins and names follow the selected items.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Table {
        let mut x = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            let row = self.row(r);
            x.extend(cols.iter().map(|&c| row[c]));
        }
        Table {
            x,
            n_rows: rows.len(),
            n_cols: cols.len(),
            y: rows.iter().map(|&r| self.y[r]).collect(),
            class_count: self.class_count,
            feature_names: self
                .feature_names
                .as_ref()
                .map(|names| cols.iter().map(|&c| names[c].clone()).collect()),
            row_origin: rows.iter().map(|&r| self.row_origin[r]).collect(),
            col_origin: cols.iter().map(|&c| self.col_origin[c]).collect(),
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Table {
        let cols: Vec<usize> = (0..self.n_cols).collect();
        self.select(rows, &cols)
    }

    pub fn select_cols(&self, cols: &[usize]) -> Table {
        let rows: Vec<usize> = (0..self.n_rows).collect();
        self.select(&rows, cols)
    }

    /// Appends rows of synthetic data, tagging them with `origin`.
    pub(crate) fn append_rows(&self, rows: Vec<f64>, labels: Vec<u32>, origin: Origin) -> Result<Table> {
        let mut x = self.x.clone();
        x.extend(rows);
        let mut y = self.y.clone();
        y.extend(&labels);
        let mut row_origin = self.row_origin.clone();
        row_origin.extend(std::iter::repeat_n(origin, labels.len()));
        let t = Table::new(x, self.n_cols, y, self.class_count)?;
        let t = match &self.feature_names {
            Some(n) => t.with_feature_names(n.clone())?,
            None => t,
        };
        t.with_origins(row_origin, self.col_origin.clone())
    }

    /// Appends columns given column-major, tagging them with `origin`.
    pub(crate) fn append_columns(
        &self,
        columns: Vec<Vec<f64>>,
        origin: Origin,
        prefix: &str,
    ) -> Result<Table> {
        let new_cols = self.n_cols + columns.len();
        let mut x = Vec::with_capacity(self.n_rows * new_cols);
        for i in 0..self.n_rows {
            x.extend_from_slice(self.row(i));
            x.extend(columns.iter().map(|c| c[i]));
        }
        let mut names: Vec<String> = (0..self.n_cols).map(|j| self.feature_name(j)).collect();
        names.extend((0..columns.len()).map(|k| format!("{prefix}{}", self.n_cols + k)));
        let mut col_origin = self.col_origin.clone();
        col_origin.extend(std::iter::repeat_n(origin, columns.len()));
        Table::new(x, new_cols, self.y.clone(), self.class_count)?
            .with_feature_names(names)?
            .with_origins(self.row_origin.clone(), col_origin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_labels_and_non_finite() {
        assert!(Table::new(vec![1.0, 2.0], 1, vec![0, 2], 2).is_err());
        assert!(Table::new(vec![1.0, f64::NAN], 1, vec![0, 1], 2).is_err());
        assert!(Table::new(vec![1.0, 2.0], 1, vec![0, 1], 1).is_err());
        assert!(Table::new(vec![1.0, 2.0, 3.0], 2, vec![0], 2).is_err());
    }

    #[test]
    fn select_keeps_order_and_origins() {
        let t = Table::from_rows(
            &[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            vec![0, 1, 0],
            2,
        )
        .unwrap()
        .append_rows(vec![7.0, 8.0], vec![1], Origin::Injected)
        .unwrap();
        let s = t.select(&[3, 0], &[1]);
        assert_eq!(s.values(), &[8.0, 2.0]);
        assert_eq!(s.labels(), &[1, 0]);
        assert_eq!(s.row_origins(), &[Origin::Injected, Origin::Original]);
    }
}
