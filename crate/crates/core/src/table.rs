//! Column-oriented datasets, CSV ingestion, standardization and holdout splits.
//!
//! A [`Table`] is immutable once built. Every column is either numeric or a
//! factor whose levels are kept in lexicographic order, so the first level is
//! always the reference level used by dummy coding.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Factor { codes: Vec<u32>, levels: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    name: String,
    data: ColumnData,
}

impl Column {
    pub fn numeric(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column {
            name: name.into(),
            data: ColumnData::Numeric(values),
        }
    }

    /// Builds a factor from raw labels; levels are the sorted distinct labels.
    pub fn factor<S: AsRef<str>>(name: impl Into<String>, labels: &[S]) -> Self {
        let levels: Vec<String> = labels
            .iter()
            .map(|s| s.as_ref().to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let lookup: HashMap<&str, u32> = levels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i as u32))
            .collect();
        let codes = labels.iter().map(|s| lookup[s.as_ref()]).collect();
        Column {
            name: name.into(),
            data: ColumnData::Factor { codes, levels },
        }
    }

    /// Builds a factor from codes and an explicit level list.
    pub fn factor_from_codes(
        name: impl Into<String>,
        codes: Vec<u32>,
        levels: Vec<String>,
    ) -> Result<Self> {
        let name = name.into();
        if let Some(bad) = codes.iter().find(|&&c| c as usize >= levels.len()) {
            return Err(Error::InvalidTable(format!(
                "factor `{name}` has code {bad} outside its {} levels",
                levels.len()
            )));
        }
        Ok(Column {
            name,
            data: ColumnData::Factor { codes, levels },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn data(&self) -> &ColumnData {
        &self.data
    }

    pub fn len(&self) -> usize {
        match &self.data {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Factor { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.data, ColumnData::Numeric(_))
    }

    pub fn as_numeric(&self) -> Result<&[f64]> {
        match &self.data {
            ColumnData::Numeric(v) => Ok(v),
            _ => Err(Error::NotNumeric(self.name.clone())),
        }
    }

    pub fn as_factor(&self) -> Result<(&[u32], &[String])> {
        match &self.data {
            ColumnData::Factor { codes, levels } => Ok((codes, levels)),
            _ => Err(Error::NotFactor(self.name.clone())),
        }
    }

    /// Levels that actually occur, in level order.
    pub fn observed_levels(&self) -> Vec<String> {
        match &self.data {
            ColumnData::Numeric(_) => Vec::new(),
            ColumnData::Factor { codes, levels } => {
                let mut seen = vec![false; levels.len()];
                for &c in codes {
                    seen[c as usize] = true;
                }
                levels
                    .iter()
                    .zip(seen)
                    .filter(|(_, s)| *s)
                    .map(|(l, _)| l.clone())
                    .collect()
            }
        }
    }

    /// Cell rendered as text, numbers in shortest round-trip form.
    pub fn cell_text(&self, row: usize) -> String {
        match &self.data {
            ColumnData::Numeric(v) => format!("{}", v[row]),
            ColumnData::Factor { codes, levels } => levels[codes[row] as usize].clone(),
        }
    }

    pub fn take(&self, rows: &[usize]) -> Column {
        let data = match &self.data {
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Factor { codes, levels } => ColumnData::Factor {
                codes: rows.iter().map(|&r| codes[r]).collect(),
                levels: levels.clone(),
            },
        };
        Column {
            name: self.name.clone(),
            data,
        }
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Column {
        self.name = name.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    name: String,
    columns: Vec<Column>,
    nrows: usize,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: Vec<Column>) -> Result<Self> {
        let nrows = columns.first().map(Column::len).unwrap_or(0);
        let mut names = BTreeSet::new();
        for col in &columns {
            if col.name.is_empty() {
                return Err(Error::InvalidTable("empty column name".into()));
            }
            if !names.insert(col.name.as_str()) {
                return Err(Error::InvalidTable(format!(
                    "duplicate column name `{}`",
                    col.name
                )));
            }
            if col.len() != nrows {
                return Err(Error::InvalidTable(format!(
                    "column `{}` has {} rows, expected {nrows}",
                    col.name,
                    col.len()
                )));
            }
        }
        Ok(Table {
            name: name.into(),
            columns,
            nrows,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        self.column(name)?.as_numeric()
    }

    pub fn factor(&self, name: &str) -> Result<(&[u32], &[String])> {
        self.column(name)?.as_factor()
    }

    /// New table holding the given rows, in the given order.
    pub fn take(&self, rows: &[usize]) -> Table {
        Table {
            name: self.name.clone(),
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            nrows: rows.len(),
        }
    }

    pub fn filter_rows(&self, keep: impl Fn(usize) -> bool) -> Table {
        let rows: Vec<usize> = (0..self.nrows).filter(|&r| keep(r)).collect();
        self.take(&rows)
    }

    pub fn select(&self, names: &[&str]) -> Result<Table> {
        let columns = names
            .iter()
            .map(|n| self.column(n).cloned())
            .collect::<Result<Vec<_>>>()?;
        Table::new(self.name.clone(), columns)
    }

    pub fn without(&self, name: &str) -> Table {
        Table {
            name: self.name.clone(),
            columns: self
                .columns
                .iter()
                .filter(|c| c.name != name)
                .cloned()
                .collect(),
            nrows: self.nrows,
        }
    }

    pub fn with_column(&self, column: Column) -> Result<Table> {
        let mut columns: Vec<Column> = self
            .columns
            .iter()
            .filter(|c| c.name != column.name)
            .cloned()
            .collect();
        columns.push(column);
        Table::new(self.name.clone(), columns)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for r in 0..self.nrows {
            w.write_record(self.columns.iter().map(|c| c.cell_text(r)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv writer emits utf-8"))
    }
}

/// Result of reading a CSV file.
#[derive(Debug, Clone)]
pub struct LoadedTable {
    pub table: Table,
    pub dropped_rows: usize,
}

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t == "NA"
}

/// Integer, decimal and scientific notation only; `inf`, `nan` and friends stay text.
fn parse_number(cell: &str) -> Option<f64> {
    let t = cell.trim();
    if t.is_empty()
        || !t
            .bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'+' | b'-' | b'.' | b'e' | b'E'))
        || !t.bytes().any(|b| b.is_ascii_digit())
    {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<LoadedTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(file, name)
}

/// Reads CSV text with a header row. Rows holding any missing cell (empty or
/// `NA`) are dropped and counted.
pub fn read_csv<R: Read>(reader: R, name: impl Into<String>) -> Result<LoadedTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header.is_empty() {
        return Err(Error::InvalidTable("empty header".into()));
    }

    let ncols = header.len();
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); ncols];
    let mut numeric = vec![true; ncols];
    let mut dropped = 0usize;
    for record in rdr.records() {
        let record = record?;
        let mut complete = true;
        for (j, cell) in record.iter().enumerate() {
            if is_missing(cell) {
                complete = false;
            } else if numeric[j] && parse_number(cell).is_none() {
                numeric[j] = false;
            }
        }
        if !complete {
            dropped += 1;
            continue;
        }
        for (j, cell) in record.iter().enumerate() {
            cells[j].push(cell.trim().to_string());
        }
    }
    if cells[0].is_empty() {
        return Err(Error::EmptyTable { dropped });
    }

    let columns = header
        .into_iter()
        .zip(cells)
        .zip(numeric)
        .map(|((name, raw), is_num)| {
            if is_num {
                let values = raw
                    .iter()
                    .map(|c| parse_number(c).expect("checked numeric"))
                    .collect();
                Column::numeric(name, values)
            } else {
                Column::factor(name, &raw)
            }
        })
        .collect();
    Ok(LoadedTable {
        table: Table::new(name, columns)?,
        dropped_rows: dropped,
    })
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn sample_sd(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() as f64 - 1.0)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub mean: f64,
    pub sd: f64,
}

impl Scaling {
    pub fn apply(&self, v: f64) -> f64 {
        (v - self.mean) / self.sd
    }
}

pub fn standardize(values: &[f64]) -> Result<(Vec<f64>, Scaling)> {
    if values.len() < 2 {
        return Err(Error::ConstantColumn(format!(
            "{} value(s) cannot be standardized",
            values.len()
        )));
    }
    let m = mean(values);
    let sd = sample_sd(values);
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::ConstantColumn("input".into()));
    }
    let scaling = Scaling { mean: m, sd };
    Ok((values.iter().map(|&v| scaling.apply(v)).collect(), scaling))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum HoldoutSize {
    /// floor(min(1000, 0.1 n))
    #[default]
    Default,
    Fraction(f64),
    Count(usize),
}

impl HoldoutSize {
    pub fn resolve(self, nrows: usize) -> usize {
        match self {
            HoldoutSize::Default => (0.1 * nrows as f64).min(1000.0).floor() as usize,
            HoldoutSize::Fraction(f) => (f * nrows as f64).floor() as usize,
            HoldoutSize::Count(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoldoutSplit {
    pub train: Vec<usize>,
    pub holdout: Vec<usize>,
    pub seed: u64,
}

pub fn make_holdout(nrows: usize, size: HoldoutSize, seed: u64) -> Result<HoldoutSplit> {
    if nrows < 10 {
        return Err(Error::InvalidHoldout(format!(
            "need at least 10 rows, have {nrows}"
        )));
    }
    let k = size.resolve(nrows);
    if k == 0 || k >= nrows {
        return Err(Error::InvalidHoldout(format!(
            "holdout size {k} invalid for {nrows} rows"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut holdout = rand::seq::index::sample(&mut rng, nrows, k).into_vec();
    holdout.sort_unstable();
    let mut in_holdout = vec![false; nrows];
    for &h in &holdout {
        in_holdout[h] = true;
    }
    let train = (0..nrows).filter(|&r| !in_holdout[r]).collect();
    Ok(HoldoutSplit {
        train,
        holdout,
        seed,
    })
}
