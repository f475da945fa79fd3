//! Model specifications and dummy-coded design matrices.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{Column, ColumnData, Table};

/// Roles of columns in an analysis: response `y`, optional sensitive `s`,
/// covariates `x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub y_name: String,
    pub s_name: Option<String>,
    pub x_names: Vec<String>,
}

impl ModelSpec {
    /// Every column other than `y` and `s` becomes a covariate, in table order.
    pub fn new(table: &Table, y_name: &str, s_name: Option<&str>) -> Result<Self> {
        let x_names = table
            .names()
            .into_iter()
            .filter(|n| *n != y_name && Some(*n) != s_name)
            .map(String::from)
            .collect();
        Self::with_covariates(table, y_name, s_name, x_names)
    }

    pub fn with_covariates(
        table: &Table,
        y_name: &str,
        s_name: Option<&str>,
        x_names: Vec<String>,
    ) -> Result<Self> {
        let spec = ModelSpec {
            y_name: y_name.to_string(),
            s_name: s_name.map(String::from),
            x_names,
        };
        spec.validate(table)?;
        Ok(spec)
    }

    pub fn validate(&self, table: &Table) -> Result<()> {
        table.column(&self.y_name)?;
        if let Some(s) = &self.s_name {
            table.column(s)?;
            if *s == self.y_name {
                return Err(Error::InvalidSpec("response and sensitive column coincide".into()));
            }
            if self.x_names.contains(s) {
                return Err(Error::InvalidSpec(format!("`{s}` is both sensitive and a covariate")));
            }
        }
        if self.x_names.contains(&self.y_name) {
            return Err(Error::InvalidSpec(format!(
                "`{}` is both response and a covariate",
                self.y_name
            )));
        }
        for x in &self.x_names {
            table.column(x)?;
        }
        Ok(())
    }

    pub fn s_name(&self) -> Result<&str> {
        self.s_name
            .as_deref()
            .ok_or_else(|| Error::InvalidSpec("a sensitive column is required".into()))
    }

    pub fn without_s(&self) -> ModelSpec {
        ModelSpec {
            y_name: self.y_name.clone(),
            s_name: None,
            x_names: self.x_names.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TermEncoding {
    Numeric { name: String },
    /// `levels[0]` is the reference level and gets no column.
    Factor { name: String, levels: Vec<String> },
}

impl TermEncoding {
    pub fn source(&self) -> &str {
        match self {
            TermEncoding::Numeric { name } | TermEncoding::Factor { name, .. } => name,
        }
    }

    fn width(&self) -> usize {
        match self {
            TermEncoding::Numeric { .. } => 1,
            TermEncoding::Factor { levels, .. } => levels.len() - 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub source: String,
    pub level: Option<String>,
    pub sensitive: bool,
}

/// Recipe for turning table rows into design rows. Captured at fit time so new
/// rows are coded exactly like the training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignEncoder {
    pub terms: Vec<TermEncoding>,
    pub intercept: bool,
    pub sensitive: Option<String>,
}

impl DesignEncoder {
    /// Factor levels are taken from the rows present in `table`, so a subset
    /// missing some level simply has fewer dummies.
    pub fn fit(
        table: &Table,
        columns: &[&str],
        intercept: bool,
        sensitive: Option<&str>,
    ) -> Result<Self> {
        let terms = columns
            .iter()
            .map(|&name| {
                let col = table.column(name)?;
                Ok(match col.data() {
                    ColumnData::Numeric(_) => TermEncoding::Numeric {
                        name: name.to_string(),
                    },
                    ColumnData::Factor { .. } => {
                        let levels = col.observed_levels();
                        if levels.len() < 2 {
                            return Err(Error::SingleLevelFactor(name.to_string()));
                        }
                        TermEncoding::Factor {
                            name: name.to_string(),
                            levels,
                        }
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DesignEncoder {
            terms,
            intercept,
            sensitive: sensitive.map(String::from),
        })
    }

    pub fn width(&self) -> usize {
        usize::from(self.intercept) + self.terms.iter().map(TermEncoding::width).sum::<usize>()
    }

    pub fn columns(&self) -> Vec<ColumnMeta> {
        let mut out = Vec::with_capacity(self.width());
        if self.intercept {
            out.push(ColumnMeta {
                name: "(Intercept)".into(),
                source: "(Intercept)".into(),
                level: None,
                sensitive: false,
            });
        }
        for term in &self.terms {
            let sensitive = self.sensitive.as_deref() == Some(term.source());
            match term {
                TermEncoding::Numeric { name } => out.push(ColumnMeta {
                    name: name.clone(),
                    source: name.clone(),
                    level: None,
                    sensitive,
                }),
                TermEncoding::Factor { name, levels } => {
                    for level in &levels[1..] {
                        out.push(ColumnMeta {
                            name: format!("{name}{level}"),
                            source: name.clone(),
                            level: Some(level.clone()),
                            sensitive,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn encode(&self, table: &Table) -> Result<DesignMatrix> {
        let n = table.nrows();
        let p = self.width();
        let mut m = DMatrix::<f64>::zeros(n, p);
        let mut j = 0;
        if self.intercept {
            m.column_mut(0).fill(1.0);
            j = 1;
        }
        for term in &self.terms {
            let col = table.column(term.source())?;
            match term {
                TermEncoding::Numeric { name } => {
                    let values = col.as_numeric().map_err(|_| Error::NotNumeric(name.clone()))?;
                    for (i, v) in values.iter().enumerate() {
                        m[(i, j)] = *v;
                    }
                    j += 1;
                }
                TermEncoding::Factor { name, levels } => {
                    let (codes, table_levels) =
                        col.as_factor().map_err(|_| Error::NotFactor(name.clone()))?;
                    let position: HashMap<&str, usize> =
                        levels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
                    for (i, &c) in codes.iter().enumerate() {
                        let label = &table_levels[c as usize];
                        match position.get(label.as_str()) {
                            Some(0) => {}
                            Some(&k) => m[(i, j + k - 1)] = 1.0,
                            None => {
                                return Err(Error::UnseenLevel {
                                    column: name.clone(),
                                    level: label.clone(),
                                })
                            }
                        }
                    }
                    j += levels.len() - 1;
                }
            }
        }
        Ok(DesignMatrix {
            matrix: m,
            columns: self.columns(),
            intercept: self.intercept,
            encoder: self.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub matrix: DMatrix<f64>,
    pub columns: Vec<ColumnMeta>,
    pub intercept: bool,
    pub encoder: DesignEncoder,
}

impl DesignMatrix {
    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn sensitive_columns(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.sensitive)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ResponseKind {
    Numeric,
    /// 2-level factor: `positive` is coded 1.
    Binary { negative: String, positive: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub values: Vec<f64>,
    pub kind: ResponseKind,
}

impl Response {
    /// True for 2-level factors and for numeric columns holding only 0 and 1.
    pub fn is_binary(&self) -> bool {
        match self.kind {
            ResponseKind::Binary { .. } => true,
            ResponseKind::Numeric => self.values.iter().all(|&v| v == 0.0 || v == 1.0),
        }
    }
}

pub fn response(table: &Table, y_name: &str) -> Result<Response> {
    let col = table.column(y_name)?;
    match col.data() {
        ColumnData::Numeric(v) => Ok(Response {
            values: v.clone(),
            kind: ResponseKind::Numeric,
        }),
        ColumnData::Factor { codes, levels } => {
            let observed = col.observed_levels();
            if observed.len() != 2 {
                return Err(Error::NonBinaryResponse {
                    column: y_name.to_string(),
                    levels: observed.len(),
                });
            }
            let values = codes
                .iter()
                .map(|&c| if levels[c as usize] == observed[1] { 1.0 } else { 0.0 })
                .collect();
            Ok(Response {
                values,
                kind: ResponseKind::Binary {
                    negative: observed[0].clone(),
                    positive: observed[1].clone(),
                },
            })
        }
    }
}

/// Intercept-led design over the spec's covariates (plus S dummies when
/// `include_s`), together with the numeric response.
pub fn build_design(
    table: &Table,
    spec: &ModelSpec,
    include_s: bool,
) -> Result<(DesignMatrix, Response)> {
    spec.validate(table)?;
    let s = spec.s_name.as_deref();
    let columns: Vec<&str> = table
        .names()
        .into_iter()
        .filter(|n| spec.x_names.iter().any(|x| x == n) || (include_s && Some(*n) == s))
        .collect();
    let encoder = DesignEncoder::fit(table, &columns, true, if include_s { s } else { None })?;
    let design = encoder.encode(table)?;
    Ok((design, response(table, &spec.y_name)?))
}

/// Indicator column: 1 where `column` equals `level`.
pub fn level_indicator(column: &Column, level: &str) -> Result<Vec<f64>> {
    let (codes, levels) = column.as_factor()?;
    let idx = levels.iter().position(|l| l == level).ok_or_else(|| Error::UnseenLevel {
        column: column.name().to_string(),
        level: level.to_string(),
    })?;
    Ok(codes.iter().map(|&c| f64::from(c as usize == idx)).collect())
}
