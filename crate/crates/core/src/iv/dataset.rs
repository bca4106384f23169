//! Tabular dataset ingestion.
//!
//! Rows missing more than a quarter of their features are dropped; the
//! remaining gaps are filled with the per-class median of the feature.

use std::io::{Read, Write};

use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Label;

/// Maximum fraction of missing features a row may have and still be kept.
pub const MAX_MISSING_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_dropped: usize,
    pub cells_imputed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Vec<Label>,
    pub feature_names: Vec<String>,
    /// `true` where the value was missing in the source and has been imputed.
    pub missing_mask: Array2<bool>,
    pub provenance: IngestReport,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Vec<Label>, feature_names: Vec<String>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                got: y.len(),
            });
        }
        if x.ncols() != feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: x.ncols(),
                got: feature_names.len(),
            });
        }
        let missing_mask = Array2::from_elem(x.dim(), false);
        let rows = x.nrows();
        Ok(Dataset {
            x,
            y,
            feature_names,
            missing_mask,
            provenance: IngestReport {
                rows_read: rows,
                ..Default::default()
            },
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.x.row(i)
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<Label> {
        let mut c = self.y.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for &l in &self.y {
            counts[(l as usize).min(1)] += 1;
        }
        counts
    }

    pub fn select(&self, rows: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select(Axis(0), rows),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            feature_names: self.feature_names.clone(),
            missing_mask: self.missing_mask.select(Axis(0), rows),
            provenance: self.provenance.clone(),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Returns the coordinates of the first non-finite entry, if any.
    pub fn check_finite(&self) -> Result<()> {
        for ((r, c), v) in self.x.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row: r, column: c });
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, writer: W, label_column: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.feature_names.clone();
        header.push(label_column.to_string());
        w.write_record(&header)?;
        for (row, label) in self.x.rows().into_iter().zip(&self.y) {
            let mut rec: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            rec.push(label.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Which columns hold features and which holds the binary label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    /// Feature columns, in order. `None` takes every non-label column.
    pub features: Option<Vec<String>>,
    pub label: String,
    pub delimiter: u8,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        ColumnSchema {
            features: None,
            label: "target".into(),
            delimiter: b',',
        }
    }
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "NA"
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

pub fn load_dataset<R: Read>(source: R, schema: &ColumnSchema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse {
                row: 0,
                column: name.to_string(),
                reason: "column not found in header".into(),
            })
    };
    let label_col = find(&schema.label)?;
    let feature_cols: Vec<usize> = match &schema.features {
        Some(names) => names.iter().map(|n| find(n)).collect::<Result<_>>()?,
        None => (0..headers.len()).filter(|&i| i != label_col).collect(),
    };
    if feature_cols.is_empty() {
        return Err(Error::Parse {
            row: 0,
            column: "<header>".into(),
            reason: "no feature columns".into(),
        });
    }
    let feature_names: Vec<String> = feature_cols
        .iter()
        .map(|&i| headers[i].to_string())
        .collect();
    let d = feature_cols.len();

    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    let mut labels: Vec<Label> = Vec::new();
    let mut report = IngestReport::default();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        report.rows_read += 1;
        let label_cell = &record[label_col];
        let label = match label_cell.parse::<f64>() {
            Ok(v) if v == 0.0 => 0,
            Ok(v) if v == 1.0 => 1,
            _ => {
                return Err(Error::Parse {
                    row,
                    column: schema.label.clone(),
                    reason: format!("label {label_cell:?} is not 0 or 1"),
                })
            }
        };
        let values = feature_cols
            .iter()
            .map(|&c| {
                let cell = &record[c];
                if is_missing(cell) {
                    return Ok(None);
                }
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(Some(v)),
                    Ok(_) => Err(Error::Parse {
                        row,
                        column: headers[c].to_string(),
                        reason: "non-finite value".into(),
                    }),
                    Err(e) => Err(Error::Parse {
                        row,
                        column: headers[c].to_string(),
                        reason: e.to_string(),
                    }),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let missing = values.iter().filter(|v| v.is_none()).count();
        if missing as f64 > MAX_MISSING_FRACTION * d as f64 {
            report.rows_dropped += 1;
            continue;
        }
        rows.push(values);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(Error::Empty(
            "dataset is empty after dropping incomplete rows".into(),
        ));
    }

    // per-feature, per-class medians over observed values, overall median as fallback
    let mut fill = vec![[0.0f64; 2]; d];
    for (j, slot) in fill.iter_mut().enumerate() {
        let mut all: Vec<f64> = rows.iter().filter_map(|r| r[j]).collect();
        let overall = median(&mut all);
        for class in 0..2u8 {
            let mut vals: Vec<f64> = rows
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == class)
                .filter_map(|(r, _)| r[j])
                .collect();
            slot[class as usize] = match median(&mut vals).or(overall) {
                Some(m) => m,
                None if rows.iter().all(|r| r[j].is_some()) => 0.0,
                None => {
                    return Err(Error::Empty(format!(
                        "feature {} has no observed values to impute from",
                        feature_names[j]
                    )))
                }
            };
        }
    }

    let n = rows.len();
    let mut x = Array2::zeros((n, d));
    let mut mask = Array2::from_elem((n, d), false);
    for (i, (r, &label)) in rows.iter().zip(&labels).enumerate() {
        for (j, v) in r.iter().enumerate() {
            x[[i, j]] = match v {
                Some(v) => *v,
                None => {
                    mask[[i, j]] = true;
                    report.cells_imputed += 1;
                    fill[j][label as usize]
                }
            };
        }
    }
    Ok(Dataset {
        x,
        y: labels,
        feature_names,
        missing_mask: mask,
        provenance: report,
    })
}
