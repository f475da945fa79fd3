//! Binary logistic regression by iteratively reweighted least squares, with
//! an optional ridge penalty per coefficient, and the probability-scale
//! sensitive-level comparison layer.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{build_design, response, DesignEncoder, DesignMatrix, ModelSpec};
use crate::error::{Error, Result};
use crate::linalg::ridge_least_squares;
use crate::linear::{
    level_subset, pooled_difference, sensitive_levels, CoefficientRow, ComparisonPoint,
    ComparisonRow, ModelReport, SComparisonReport, Scale,
};
use crate::stats::normal_two_sided;
use crate::table::{sample_sd, Table};

pub const MAX_ITERATIONS: usize = 50;
const DEVIANCE_TOL: f64 = 1e-9;
const SCORE_TOL: f64 = 1e-7;
/// Largest coefficient magnitude on the standardized scale before the fit is
/// declared separated.
pub const SEPARATION_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Convergence {
    pub iterations: usize,
    pub final_deviance_change: f64,
    /// Penalized deviance after each accepted step, starting from β = 0.
    pub deviance_trace: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LogitFit {
    pub coefficient_names: Vec<String>,
    pub estimates: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub p_values: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub deviance: f64,
    pub penalty: Vec<f64>,
    pub convergence: Convergence,
    pub encoder: DesignEncoder,
}

pub fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// Bernoulli log-likelihood written in terms of the linear predictor.
pub fn log_likelihood(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter()
        .zip(y)
        .map(|(&e, &yi)| {
            // log(1 + exp(e)) computed stably
            let softplus = if e > 0.0 { e + (-e).exp().ln_1p() } else { e.exp().ln_1p() };
            yi * e - softplus
        })
        .sum()
}

/// Xᵀ(y − p̂)
pub fn score(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>) -> DVector<f64> {
    let eta = x * beta;
    let r = DVector::from_iterator(y.len(), eta.iter().zip(y).map(|(&e, &yi)| yi - sigmoid(e)));
    x.transpose() * r
}

fn penalized_deviance(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>, penalty: &[f64]) -> f64 {
    let pen: f64 = beta.iter().zip(penalty).map(|(b, l)| l * b * b).sum();
    -2.0 * log_likelihood(x, y, beta) + pen
}

pub fn fit_logit(design: &DesignMatrix, y: &[f64]) -> Result<LogitFit> {
    fit_logit_penalized(design, y, &vec![0.0; design.ncols()])
}

/// Maximizes ℓ(β) − ½ Σ λ_j β_j². Each step is a (ridge) weighted
/// least-squares solve; steps that would raise the penalized deviance are
/// halved.
pub fn fit_logit_penalized(design: &DesignMatrix, y: &[f64], penalty: &[f64]) -> Result<LogitFit> {
    let x = &design.matrix;
    let (n, p) = x.shape();
    if n <= p {
        return Err(Error::TooFewRows { n, p });
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidArgument("logistic response must be 0/1".into()));
    }
    let ones = y.iter().filter(|&&v| v == 1.0).count();
    if ones == 0 || ones == n {
        return Err(Error::InvalidArgument("logistic response has a single class".into()));
    }
    let names = design.names();
    let col_sd: Vec<f64> = (0..p)
        .map(|j| {
            let c: Vec<f64> = x.column(j).iter().copied().collect();
            sample_sd(&c)
        })
        .collect();

    let mut beta = DVector::<f64>::zeros(p);
    let mut dev = penalized_deviance(x, y, &beta, penalty);
    let mut trace = vec![dev];
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let eta = x * &beta;
        let mut sx = x.clone();
        let mut sz = DVector::<f64>::zeros(n);
        for i in 0..n {
            let mu = sigmoid(eta[i]);
            let w = (mu * (1.0 - mu)).max(1e-300);
            let sw = w.sqrt();
            sx.row_mut(i).scale_mut(sw);
            sz[i] = sw * (eta[i] + (y[i] - mu) / w);
        }
        let target = match ridge_least_squares(&sx, &sz, penalty, &names) {
            Ok(sol) => sol.coef,
            Err(Error::RankDeficient { column }) if iterations > 1 => {
                return Err(Error::Separation { coefficient: column })
            }
            Err(e) => return Err(e),
        };
        let step = &target - &beta;
        let mut t = 1.0;
        let mut candidate = &beta + &step;
        let mut new_dev = penalized_deviance(x, y, &candidate, penalty);
        while !(new_dev <= dev + 1e-12 * dev.abs()) && t > 1e-10 {
            t *= 0.5;
            candidate = &beta + &step * t;
            new_dev = penalized_deviance(x, y, &candidate, penalty);
        }
        if !(new_dev <= dev + 1e-12 * dev.abs()) {
            // no descent possible along the Newton direction: at the optimum
            new_dev = dev;
            candidate = beta.clone();
        }
        change = (dev - new_dev).abs() / (new_dev.abs() + 0.1);
        beta = candidate;
        dev = new_dev;
        trace.push(dev);

        for j in 0..p {
            if names[j] != "(Intercept)" && (beta[j] * col_sd[j]).abs() > SEPARATION_LIMIT {
                return Err(Error::Separation {
                    coefficient: names[j].clone(),
                });
            }
        }
        let grad = score(x, y, &beta) - DVector::from_iterator(p, beta.iter().zip(penalty).map(|(b, l)| b * l));
        if change < DEVIANCE_TOL && grad.amax() < SCORE_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { iterations });
    }

    let eta = x * &beta;
    let mut sx = x.clone();
    for i in 0..n {
        let mu = sigmoid(eta[i]);
        sx.row_mut(i).scale_mut((mu * (1.0 - mu)).max(1e-300).sqrt());
    }
    let sol = ridge_least_squares(&sx, &DVector::zeros(n), penalty, &names)
        .map_err(|_| Error::Separation { coefficient: "(weights)".into() })?;
    let covariance = sol.xtx_inverse();
    let covariance = (&covariance + covariance.transpose()) * 0.5;
    let standard_errors: Vec<f64> = (0..p).map(|j| covariance[(j, j)].max(0.0).sqrt()).collect();
    let p_values = beta
        .iter()
        .zip(&standard_errors)
        .map(|(b, se)| normal_two_sided(b / se))
        .collect();
    Ok(LogitFit {
        coefficient_names: names,
        estimates: beta.iter().copied().collect(),
        standard_errors,
        p_values,
        covariance,
        deviance: -2.0 * log_likelihood(x, y, &beta),
        penalty: penalty.to_vec(),
        convergence: Convergence {
            iterations,
            final_deviance_change: change,
            deviance_trace: trace,
        },
        encoder: design.encoder.clone(),
    })
}

impl LogitFit {
    pub fn linear_predictor(&self, design: &DesignMatrix) -> Vec<f64> {
        let beta = DVector::from_column_slice(&self.estimates);
        (&design.matrix * beta).iter().copied().collect()
    }

    pub fn predict_design(&self, design: &DesignMatrix) -> Vec<f64> {
        self.linear_predictor(design).into_iter().map(sigmoid).collect()
    }

    /// p̂ = 1/(1 + exp(−x̃ᵀβ̂)) for each row.
    pub fn predict_prob(&self, rows: &Table) -> Result<Vec<f64>> {
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

#[derive(Debug, Clone)]
pub enum LogitFits {
    Pooled(LogitFit),
    PerLevel(Vec<LogitFit>),
}

#[derive(Debug, Clone)]
pub struct LogitSModel {
    pub spec: ModelSpec,
    pub interactions: bool,
    pub levels: Vec<String>,
    pub fits: LogitFits,
}

pub fn fit_logit_s(table: &Table, spec: &ModelSpec, interactions: bool) -> Result<LogitSModel> {
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
                fit_logit(&design, &y.values)
            })
            .collect::<Result<Vec<_>>>()?;
        LogitFits::PerLevel(fits)
    } else {
        let (design, y) = build_design(table, spec, true)?;
        LogitFits::Pooled(fit_logit(&design, &y.values)?)
    };
    Ok(LogitSModel {
        spec: spec.clone(),
        interactions,
        levels,
        fits,
    })
}

impl LogitSModel {
    fn level_index(&self, level: &str) -> Result<usize> {
        self.levels
            .iter()
            .position(|l| l == level)
            .ok_or_else(|| Error::UnseenLevel {
                column: self.spec.s_name.clone().unwrap_or_default(),
                level: level.to_string(),
            })
    }

    /// p̂_a(x) − p̂_b(x) with delta-method standard error
    /// sqrt(g_aᵀΣ_a g_a + g_bᵀΣ_b g_b), g = p̂(1 − p̂)x̃.
    pub fn level_difference_at(&self, a: &str, b: &str, point: &Table) -> Result<(f64, f64)> {
        let LogitFits::PerLevel(fits) = &self.fits else {
            return Err(Error::InvalidArgument("model has no interactions".into()));
        };
        let part = |fit: &LogitFit| -> Result<(f64, f64)> {
            let d = fit.encoder.encode(point)?;
            let x = d.matrix.row(0).transpose();
            let prob = sigmoid(x.dot(&DVector::from_column_slice(&fit.estimates)));
            let g = x * (prob * (1.0 - prob));
            Ok((prob, (g.transpose() * &fit.covariance * &g)[(0, 0)]))
        };
        let (pa, va) = part(&fits[self.level_index(a)?])?;
        let (pb, vb) = part(&fits[self.level_index(b)?])?;
        Ok((pa - pb, (va + vb).max(0.0).sqrt()))
    }

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
            scale: Scale::Probability,
            rows,
        })
    }

    /// Log-odds differences from the pooled fit.
    pub fn compare_levels(&self) -> Result<SComparisonReport> {
        let LogitFits::Pooled(fit) = &self.fits else {
            return Err(Error::InvalidArgument(
                "model has interactions; compare at points instead".into(),
            ));
        };
        let mut rows = Vec::new();
        for (i, a) in self.levels.iter().enumerate() {
            for b in &self.levels[i + 1..] {
                let (est, se) =
                    pooled_difference(&fit.estimates, &fit.covariance, &fit.encoder, a, b);
                rows.push(ComparisonRow::new(a, b, None, est, se));
            }
        }
        Ok(SComparisonReport {
            scale: Scale::LogOdds,
            rows,
        })
    }

    pub fn report(&self, points: Option<&Table>) -> Result<ModelReport> {
        let (scale, comparisons) = match (self.interactions, points) {
            (false, _) => (Scale::LogOdds, self.compare_levels()?.rows),
            (true, Some(p)) => (Scale::Probability, self.compare_levels_at(p)?.rows),
            (true, None) => (Scale::Probability, Vec::new()),
        };
        let coefficients = match &self.fits {
            LogitFits::Pooled(f) => f.coefficient_rows(None),
            LogitFits::PerLevel(fits) => fits
                .iter()
                .zip(&self.levels)
                .flat_map(|(f, l)| f.coefficient_rows(Some(l)))
                .collect(),
        };
        Ok(ModelReport {
            y_name: self.spec.y_name.clone(),
            s_name: self.spec.s_name.clone().unwrap_or_default(),
            interactions: self.interactions,
            sandwich: false,
            scale,
            coefficients,
            s_comparisons: comparisons,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{Column, Table};

    #[test]
    fn intercept_only_half() {
        let t = Table::new(
            "t",
            vec![Column::numeric("y", vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0])],
        )
        .unwrap();
        let spec = ModelSpec::new(&t, "y", None).unwrap();
        let (d, y) = build_design(&t, &spec, false).unwrap();
        let fit = fit_logit(&d, &y.values).unwrap();
        assert!(fit.estimates[0].abs() < 1e-10);
        let p = fit.predict_design(&d);
        assert!(p.iter().all(|&v| (v - 0.5).abs() < 1e-10));
    }

    #[test]
    fn separation_detected() {
        let t = Table::new(
            "t",
            vec![
                Column::numeric("x", vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
                Column::numeric("y", vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]),
            ],
        )
        .unwrap();
        let spec = ModelSpec::new(&t, "y", None).unwrap();
        let (d, y) = build_design(&t, &spec, false).unwrap();
        assert!(matches!(fit_logit(&d, &y.values), Err(Error::Separation { .. })));
    }

    #[test]
    fn duplicated_column_rank_error() {
        let x = vec![0.3, 1.2, -0.7, 2.2, 0.1, -1.5, 0.8, 1.9];
        let t = Table::new(
            "t",
            vec![
                Column::numeric("a", x.clone()),
                Column::numeric("b", x),
                Column::numeric("y", vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0]),
            ],
        )
        .unwrap();
        let spec = ModelSpec::new(&t, "y", None).unwrap();
        let (d, y) = build_design(&t, &spec, false).unwrap();
        assert!(matches!(fit_logit(&d, &y.values), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(800.0) <= 1.0 && sigmoid(-800.0) >= 0.0);
        assert!((sigmoid(1.0) - 0.7310585786300049).abs() < 1e-15);
    }
}
