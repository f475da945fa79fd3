//! Ordinary least squares and sensitive-level comparisons.
//!
//! Without interactions one pooled model carries S as dummies and level
//! differences come straight from its coefficients. With interactions each S
//! level gets its own fit on its own rows, which is the same model as a full
//! S×X interaction design, and differences are evaluated at user-supplied
//! covariate points.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{build_design, response, DesignEncoder, DesignMatrix, ModelSpec};
use crate::error::{Error, Result};
use crate::linalg::qr_least_squares;
use crate::stats::{normal_two_sided, t_two_sided};
use crate::table::{ColumnData, Table};

#[derive(Debug, Clone)]
pub struct FitSummary {
    pub coefficient_names: Vec<String>,
    pub estimates: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub p_values: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub residual_variance: f64,
    pub df_residual: usize,
    pub sandwich_used: bool,
    pub residuals: Vec<f64>,
    pub encoder: DesignEncoder,
}

impl FitSummary {
    pub fn predict_design(&self, design: &DesignMatrix) -> Vec<f64> {
        let beta = DVector::from_column_slice(&self.estimates);
        (&design.matrix * beta).iter().copied().collect()
    }

    pub fn predict(&self, rows: &Table) -> Result<Vec<f64>> {
        Ok(self.predict_design(&self.encoder.encode(rows)?))
    }

    pub fn coefficient_rows(&self, level: Option<&str>) -> Vec<CoefficientRow> {
        (0..self.estimates.len())
            .map(|j| CoefficientRow {
                level: level.map(String::from),
                covariate: self.coefficient_names[j].clone(),
                estimate: self.estimates[j],
                standard_error: self.standard_errors[j],
                p_value: self.p_values[j],
            })
            .collect()
    }
}

/// OLS by QR. Classical covariance s²(XᵀX)⁻¹, or HC0 sandwich
/// (XᵀX)⁻¹Xᵀdiag(e²)X(XᵀX)⁻¹; coefficient p-values from t(n − p).
pub fn fit_ols(design: &DesignMatrix, y: &[f64], sandwich: bool) -> Result<FitSummary> {
    let x = &design.matrix;
    let (n, p) = x.shape();
    if n <= p {
        return Err(Error::TooFewRows { n, p });
    }
    let yv = DVector::from_column_slice(y);
    let names = design.names();
    let sol = qr_least_squares(x, &yv, &names)?;
    let resid = &yv - x * &sol.coef;
    let df = n - p;
    let rss = resid.norm_squared();
    let s2 = rss / df as f64;
    let bread = sol.xtx_inverse();
    let covariance = if sandwich {
        let mut xe = x.clone();
        for (i, mut row) in xe.row_iter_mut().enumerate() {
            row *= resid[i];
        }
        let meat = xe.transpose() * &xe;
        &bread * meat * &bread
    } else {
        bread * s2
    };
    let covariance = (&covariance + covariance.transpose()) * 0.5;
    let standard_errors: Vec<f64> = (0..p).map(|j| covariance[(j, j)].max(0.0).sqrt()).collect();
    let p_values = sol
        .coef
        .iter()
        .zip(&standard_errors)
        .map(|(b, se)| t_two_sided(b / se, df as f64))
        .collect();
    Ok(FitSummary {
        coefficient_names: names,
        estimates: sol.coef.iter().copied().collect(),
        standard_errors,
        p_values,
        covariance,
        residual_variance: s2,
        df_residual: df,
        sandwich_used: sandwich,
        residuals: resid.iter().copied().collect(),
        encoder: design.encoder.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    Response,
    LogOdds,
    Probability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonPoint {
    pub index: usize,
    pub values: BTreeMap<String, serde_json::Value>,
}

impl ComparisonPoint {
    pub fn from_row(table: &Table, row: usize) -> Self {
        let values = table
            .columns()
            .iter()
            .map(|c| {
                let v = match c.data() {
                    ColumnData::Numeric(v) => serde_json::json!(v[row]),
                    ColumnData::Factor { .. } => serde_json::json!(c.cell_text(row)),
                };
                (c.name().to_string(), v)
            })
            .collect();
        ComparisonPoint { index: row, values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonRow {
    pub factors_compared: String,
    pub level_a: String,
    pub level_b: String,
    pub comparison_point: Option<ComparisonPoint>,
    pub estimate: f64,
    pub standard_error: f64,
    pub p_value: f64,
}

impl ComparisonRow {
    pub(crate) fn new(
        a: &str,
        b: &str,
        point: Option<ComparisonPoint>,
        estimate: f64,
        standard_error: f64,
    ) -> Self {
        ComparisonRow {
            factors_compared: format!("{a} - {b}"),
            level_a: a.to_string(),
            level_b: b.to_string(),
            comparison_point: point,
            estimate,
            standard_error,
            p_value: normal_two_sided(estimate / standard_error),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SComparisonReport {
    pub scale: Scale,
    pub rows: Vec<ComparisonRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoefficientRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,
    pub covariate: String,
    pub estimate: f64,
    pub standard_error: f64,
    pub p_value: f64,
}

/// Serialized analysis report shared by the linear and logistic layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelReport {
    pub y_name: String,
    pub s_name: String,
    pub interactions: bool,
    pub sandwich: bool,
    pub scale: Scale,
    pub coefficients: Vec<CoefficientRow>,
    pub s_comparisons: Vec<ComparisonRow>,
}

#[derive(Debug, Clone)]
pub enum LinearFits {
    Pooled(FitSummary),
    PerLevel(Vec<FitSummary>),
}

#[derive(Debug, Clone)]
pub struct LinearSModel {
    pub spec: ModelSpec,
    pub interactions: bool,
    pub levels: Vec<String>,
    pub fits: LinearFits,
}

pub(crate) fn sensitive_levels(table: &Table, spec: &ModelSpec) -> Result<Vec<String>> {
    let s = spec.s_name()?;
    let col = table.column(s)?;
    col.as_factor()?;
    let levels = col.observed_levels();
    if levels.len() < 2 {
        return Err(Error::SingleLevelFactor(s.to_string()));
    }
    Ok(levels)
}

/// Rows of `table` whose sensitive value is `level`, as a sub-table.
pub(crate) fn level_subset(table: &Table, s: &str, level: &str) -> Result<Table> {
    let (codes, levels) = table.factor(s)?;
    let idx = levels.iter().position(|l| l == level);
    Ok(table.filter_rows(|r| Some(codes[r] as usize) == idx))
}

pub fn fit_linear_s(
    table: &Table,
    spec: &ModelSpec,
    interactions: bool,
    sandwich: bool,
) -> Result<LinearSModel> {
    spec.validate(table)?;
    let levels = sensitive_levels(table, spec)?;
    let fits = if interactions {
        let s = spec.s_name()?;
        let x: Vec<&str> = spec.x_names.iter().map(String::as_str).collect();
        let fits = levels
            .par_iter()
            .map(|level| {
                let sub = level_subset(table, s, level)?;
                let encoder = DesignEncoder::fit(&sub, &x, true, None)?;
                let design = encoder.encode(&sub)?;
                let y = response(&sub, &spec.y_name)?;
                fit_ols(&design, &y.values, sandwich)
            })
            .collect::<Result<Vec<_>>>()?;
        LinearFits::PerLevel(fits)
    } else {
        let (design, y) = build_design(table, spec, true)?;
        LinearFits::Pooled(fit_ols(&design, &y.values, sandwich)?)
    };
    Ok(LinearSModel {
        spec: spec.clone(),
        interactions,
        levels,
        fits,
    })
}

/// Position of the S dummy for `level` in a pooled fit; `None` for the reference.
pub(crate) fn s_coefficient(encoder: &DesignEncoder, level: &str) -> Option<usize> {
    encoder
        .columns()
        .iter()
        .position(|c| c.sensitive && c.level.as_deref() == Some(level))
}

/// β_a − β_b with Var(β_a) + Var(β_b) − 2Cov(β_a, β_b), the reference level's
/// coefficient taken as 0.
pub(crate) fn pooled_difference(
    estimates: &[f64],
    covariance: &DMatrix<f64>,
    encoder: &DesignEncoder,
    a: &str,
    b: &str,
) -> (f64, f64) {
    let ia = s_coefficient(encoder, a);
    let ib = s_coefficient(encoder, b);
    let coef = |i: Option<usize>| i.map_or(0.0, |i| estimates[i]);
    let cov = |i: Option<usize>, j: Option<usize>| match (i, j) {
        (Some(i), Some(j)) => covariance[(i, j)],
        _ => 0.0,
    };
    let est = coef(ia) - coef(ib);
    let var = cov(ia, ia) + cov(ib, ib) - 2.0 * cov(ia, ib);
    (est, var.max(0.0).sqrt())
}

fn quad_form(x: &DVector<f64>, m: &DMatrix<f64>) -> f64 {
    (x.transpose() * m * x)[(0, 0)]
}

impl LinearSModel {
    fn level_index(&self, level: &str) -> Result<usize> {
        self.levels
            .iter()
            .position(|l| l == level)
            .ok_or_else(|| Error::UnseenLevel {
                column: self.spec.s_name.clone().unwrap_or_default(),
                level: level.to_string(),
            })
    }

    /// Difference between two levels in the no-interaction model.
    pub fn level_difference(&self, a: &str, b: &str) -> Result<(f64, f64)> {
        self.level_index(a)?;
        self.level_index(b)?;
        match &self.fits {
            LinearFits::Pooled(fit) => Ok(pooled_difference(
                &fit.estimates,
                &fit.covariance,
                &fit.encoder,
                a,
                b,
            )),
            LinearFits::PerLevel(_) => Err(Error::InvalidArgument(
                "model has interactions; compare at points instead".into(),
            )),
        }
    }

    /// Difference in mean Y between two levels at one covariate row, using
    /// the independent per-level fits.
    pub fn level_difference_at(&self, a: &str, b: &str, point: &Table) -> Result<(f64, f64)> {
        let LinearFits::PerLevel(fits) = &self.fits else {
            return Err(Error::InvalidArgument("model has no interactions".into()));
        };
        let fa = &fits[self.level_index(a)?];
        let fb = &fits[self.level_index(b)?];
        let xa = fa.encoder.encode(point)?;
        let xb = fb.encoder.encode(point)?;
        let xa = xa.matrix.row(0).transpose();
        let xb = xb.matrix.row(0).transpose();
        let est = xa.dot(&DVector::from_column_slice(&fa.estimates))
            - xb.dot(&DVector::from_column_slice(&fb.estimates));
        let var = quad_form(&xa, &fa.covariance) + quad_form(&xb, &fb.covariance);
        Ok((est, var.max(0.0).sqrt()))
    }

    pub fn compare_levels(&self) -> Result<SComparisonReport> {
        let mut rows = Vec::new();
        for (i, a) in self.levels.iter().enumerate() {
            for b in &self.levels[i + 1..] {
                let (est, se) = self.level_difference(a, b)?;
                rows.push(ComparisonRow::new(a, b, None, est, se));
            }
        }
        Ok(SComparisonReport {
            scale: Scale::Response,
            rows,
        })
    }

    /// Every level pair at every row of `points`; S and Y columns in `points`
    /// are ignored.
    pub fn compare_levels_at(&self, points: &Table) -> Result<SComparisonReport> {
        let mut rows = Vec::new();
        for r in 0..points.nrows() {
            let point = points.take(&[r]);
            for (i, a) in self.levels.iter().enumerate() {
                for b in &self.levels[i + 1..] {
                    let (est, se) = self.level_difference_at(a, b, &point)?;
                    rows.push(ComparisonRow::new(
                        a,
                        b,
                        Some(ComparisonPoint::from_row(points, r)),
                        est,
                        se,
                    ));
                }
            }
        }
        Ok(SComparisonReport {
            scale: Scale::Response,
            rows,
        })
    }

    pub fn coefficient_rows(&self) -> Vec<CoefficientRow> {
        match &self.fits {
            LinearFits::Pooled(fit) => fit.coefficient_rows(None),
            LinearFits::PerLevel(fits) => fits
                .iter()
                .zip(&self.levels)
                .flat_map(|(f, l)| f.coefficient_rows(Some(l)))
                .collect(),
        }
    }

    pub fn report(&self, points: Option<&Table>, sandwich: bool) -> Result<ModelReport> {
        let comparisons = match (self.interactions, points) {
            (false, _) => self.compare_levels()?.rows,
            (true, Some(p)) => self.compare_levels_at(p)?.rows,
            (true, None) => Vec::new(),
        };
        Ok(ModelReport {
            y_name: self.spec.y_name.clone(),
            s_name: self.spec.s_name.clone().unwrap_or_default(),
            interactions: self.interactions,
            sandwich,
            scale: Scale::Response,
            coefficients: self.coefficient_rows(),
            s_comparisons: comparisons,
        })
    }
}
