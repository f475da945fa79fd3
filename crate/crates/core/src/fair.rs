//! Fair prediction: ridge fits under an unfairness budget, explicitly
//! deweighted features (EDF), and the fairness/utility evaluation harness.
//!
//! The fair ridge model is fitted in a parametrization where every non-S
//! design column is centered within S levels. The linear predictor then
//! splits into an S part and a part orthogonal to S on the training rows, so
//! the unfairness share var(S part) / var(total) always lies in [0, 1]. The
//! column space is the same as the ordinary design, so an unpenalized fit
//! reproduces the ordinary fit.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{response, ColumnMeta, DesignEncoder, DesignMatrix, ModelSpec};
use crate::error::{invalid, Error, Result};
use crate::forest::{fit_forest, ForestModel, ForestParams};
use crate::kendall::kendall_tau_b;
use crate::linalg::ridge_least_squares;
use crate::logistic::{fit_logit_penalized, sigmoid};
use crate::neighbors::{fit_knn, KnnModel, DEFAULT_K};
use crate::table::{make_holdout, mean, sample_sd, HoldoutSize, Scaling, Table};

pub const LAMBDA_MIN: f64 = 1e-8;
pub const LAMBDA_MAX: f64 = 1e8;
const LAMBDA_REL_WIDTH: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Linear,
    Logistic,
}

/// Anything that scores table rows.
pub trait Predictor: Send + Sync {
    fn predict(&self, rows: &Table) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FairRidgeModel {
    pub family: Family,
    pub unfairness: f64,
    pub lambda_s: f64,
    /// Unfairness share of the returned fit on the training rows.
    pub share: f64,
    pub coefficient_names: Vec<String>,
    pub coefficients: Vec<f64>,
    /// Every (lambda, share) pair evaluated by the search.
    pub trace: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub y_name: String,
    pub s_name: String,
    /// Observed S levels; `[0]` is the reference.
    pub s_levels: Vec<String>,
    pub x_encoder: DesignEncoder,
    /// Training means of each non-S design column within each S level.
    pub group_means: Vec<Vec<f64>>,
}

struct FairDesign {
    matrix: DMatrix<f64>,
    n_s: usize,
}

fn s_indices(table: &Table, s_name: &str, s_levels: &[String]) -> Result<Vec<usize>> {
    let (codes, levels) = table.factor(s_name)?;
    codes
        .iter()
        .map(|&c| {
            let label = &levels[c as usize];
            s_levels.iter().position(|l| l == label).ok_or_else(|| Error::UnseenLevel {
                column: s_name.to_string(),
                level: label.clone(),
            })
        })
        .collect()
}

fn fair_design(
    table: &Table,
    s_name: &str,
    s_levels: &[String],
    x_encoder: &DesignEncoder,
    group_means: &[Vec<f64>],
) -> Result<FairDesign> {
    let s_idx = s_indices(table, s_name, s_levels)?;
    let xd = x_encoder.encode(table)?.matrix;
    let n = table.nrows();
    let n_s = s_levels.len() - 1;
    let q = xd.ncols();
    let mut m = DMatrix::<f64>::zeros(n, 1 + n_s + q);
    for i in 0..n {
        m[(i, 0)] = 1.0;
        let g = s_idx[i];
        if g > 0 {
            m[(i, g)] = 1.0;
        }
        for j in 0..q {
            m[(i, 1 + n_s + j)] = xd[(i, j)] - group_means[g][j];
        }
    }
    Ok(FairDesign { matrix: m, n_s })
}

fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

/// var(S part) / var(linear predictor) over the design rows; 0 when the
/// linear predictor is constant.
fn share_of(x: &DMatrix<f64>, n_s: usize, beta: &[f64]) -> (f64, f64) {
    let n = x.nrows();
    let mut s_part = vec![0.0; n];
    let mut total = vec![0.0; n];
    for i in 0..n {
        let mut s = 0.0;
        for j in 1..=n_s {
            s += x[(i, j)] * beta[j];
        }
        let mut u = 0.0;
        for j in (1 + n_s)..beta.len() {
            u += x[(i, j)] * beta[j];
        }
        s_part[i] = s;
        total[i] = s + u;
    }
    let vs = variance(&s_part);
    let vt = variance(&total);
    (if vt > 0.0 { (vs / vt).min(1.0) } else { 0.0 }, vs)
}

fn penalized_fit(
    family: Family,
    design: &FairDesign,
    y: &[f64],
    lambda: f64,
    names: &[String],
    encoder: &DesignEncoder,
) -> Result<Vec<f64>> {
    let p = design.matrix.ncols();
    let penalty: Vec<f64> = (0..p)
        .map(|j| if j >= 1 && j <= design.n_s { lambda } else { 0.0 })
        .collect();
    match family {
        Family::Linear => {
            let sol = ridge_least_squares(
                &design.matrix,
                &DVector::from_column_slice(y),
                &penalty,
                names,
            )?;
            Ok(sol.coef.iter().copied().collect())
        }
        Family::Logistic => {
            let dm = DesignMatrix {
                matrix: design.matrix.clone(),
                columns: names
                    .iter()
                    .map(|n| ColumnMeta {
                        name: n.clone(),
                        source: n.clone(),
                        level: None,
                        sensitive: false,
                    })
                    .collect(),
                intercept: true,
                encoder: encoder.clone(),
            };
            Ok(fit_logit_penalized(&dm, y, &penalty)?.estimates)
        }
    }
}

/// Fits the least-penalized model whose unfairness share is within
/// `unfairness`. The penalty acts only on the S coefficients and is found by
/// bisection on log lambda.
pub fn fit_fair_ridge(
    table: &Table,
    spec: &ModelSpec,
    unfairness: f64,
    family: Family,
) -> Result<FairRidgeModel> {
    spec.validate(table)?;
    if !(unfairness > 0.0 && unfairness <= 1.0) {
        return Err(invalid(format!("unfairness must lie in (0, 1], got {unfairness}")));
    }
    let s_name = spec.s_name()?.to_string();
    let s_levels = table.column(&s_name)?.observed_levels();
    table.factor(&s_name)?;
    if s_levels.len() < 2 {
        return Err(Error::SingleLevelFactor(s_name));
    }
    let resp = response(table, &spec.y_name)?;
    if family == Family::Logistic && !resp.is_binary() {
        return Err(invalid("logistic family needs a binary response"));
    }
    let x_cols: Vec<&str> = table
        .names()
        .into_iter()
        .filter(|n| spec.x_names.iter().any(|x| x == n))
        .collect();
    let x_encoder = DesignEncoder::fit(table, &x_cols, false, None)?;
    let xd = x_encoder.encode(table)?;
    let s_idx = s_indices(table, &s_name, &s_levels)?;
    let q = xd.ncols();
    let mut group_means = vec![vec![0.0; q]; s_levels.len()];
    let mut counts = vec![0usize; s_levels.len()];
    for (i, &g) in s_idx.iter().enumerate() {
        counts[g] += 1;
        for j in 0..q {
            group_means[g][j] += xd.matrix[(i, j)];
        }
    }
    for (g, c) in counts.iter().enumerate() {
        for v in &mut group_means[g] {
            *v /= *c as f64;
        }
    }
    let design = fair_design(table, &s_name, &s_levels, &x_encoder, &group_means)?;
    let mut names = vec!["(Intercept)".to_string()];
    names.extend(s_levels[1..].iter().map(|l| format!("{s_name}{l}")));
    names.extend(xd.names().into_iter().map(|n| format!("{n}|{s_name}")));

    let y = &resp.values;
    let mut trace = Vec::new();
    let mut eval = |lambda: f64| -> Result<(Vec<f64>, f64, f64)> {
        let beta = penalized_fit(family, &design, y, lambda, &names, &x_encoder)?;
        let (share, vs) = share_of(&design.matrix, design.n_s, &beta);
        trace.push((lambda, share));
        Ok((beta, share, vs))
    };

    let (beta0, share0, vs0) = eval(0.0)?;
    let (lambda_s, coefficients, share, note) = if vs0 == 0.0 {
        (0.0, beta0, share0, Some("S contributes no variance; the budget cannot bind".to_string()))
    } else if share0 <= unfairness {
        (0.0, beta0, share0, None)
    } else {
        let (beta_hi, share_hi, _) = eval(LAMBDA_MAX)?;
        if share_hi > unfairness {
            (
                LAMBDA_MAX,
                beta_hi,
                share_hi,
                Some(format!("budget not reached at the largest penalty {LAMBDA_MAX:e}")),
            )
        } else {
            let (beta_lo, share_lo, _) = eval(LAMBDA_MIN)?;
            if share_lo <= unfairness {
                (LAMBDA_MIN, beta_lo, share_lo, None)
            } else {
                let (mut lo, mut hi) = (LAMBDA_MIN.ln(), LAMBDA_MAX.ln());
                let mut best = (beta_hi, share_hi);
                while (hi - lo).exp_m1() > LAMBDA_REL_WIDTH {
                    let mid = 0.5 * (lo + hi);
                    let (b, s, _) = eval(mid.exp())?;
                    if s <= unfairness {
                        hi = mid;
                        best = (b, s);
                    } else {
                        lo = mid;
                    }
                }
                (hi.exp(), best.0, best.1, None)
            }
        }
    };
    Ok(FairRidgeModel {
        family,
        unfairness,
        lambda_s,
        share,
        coefficient_names: names,
        coefficients,
        trace,
        note,
        y_name: spec.y_name.clone(),
        s_name,
        s_levels,
        x_encoder,
        group_means,
    })
}

impl FairRidgeModel {
    pub fn linear_predictor(&self, rows: &Table) -> Result<Vec<f64>> {
        let d = fair_design(rows, &self.s_name, &self.s_levels, &self.x_encoder, &self.group_means)?;
        let beta = DVector::from_column_slice(&self.coefficients);
        Ok((&d.matrix * beta).iter().copied().collect())
    }

    /// Unfairness share of this model's linear predictor on `rows`, using the
    /// stored training group means.
    pub fn share_on(&self, rows: &Table) -> Result<f64> {
        let d = fair_design(rows, &self.s_name, &self.s_levels, &self.x_encoder, &self.group_means)?;
        Ok(share_of(&d.matrix, d.n_s, &self.coefficients).0)
    }
}

impl Predictor for FairRidgeModel {
    /// Linear family: fitted mean. Logistic: probability of the positive class.
    fn predict(&self, rows: &Table) -> Result<Vec<f64>> {
        let eta = self.linear_predictor(rows)?;
        Ok(match self.family {
            Family::Linear => eta,
            Family::Logistic => eta.into_iter().map(sigmoid).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdfMethod {
    Knn,
    Linear,
    Forest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EdfHyper {
    pub k: usize,
    pub forest: ForestParams,
}

impl Default for EdfHyper {
    fn default() -> Self {
        EdfHyper {
            k: DEFAULT_K,
            forest: ForestParams::default(),
        }
    }
}

/// Ridge (or ridge logistic) fit on standardized features with a separate
/// penalty per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EdfLinear {
    pub encoder: DesignEncoder,
    pub scaling: Vec<Scaling>,
    /// Design columns kept in the fit (weight > 0).
    pub kept: Vec<usize>,
    pub coefficient_names: Vec<String>,
    /// Intercept first, then one per kept column.
    pub coefficients: Vec<f64>,
    pub penalties: Vec<f64>,
    pub logistic: bool,
}

impl EdfLinear {
    fn standardized(&self, rows: &Table) -> Result<DMatrix<f64>> {
        let d = self.encoder.encode(rows)?.matrix;
        let n = rows.nrows();
        let mut m = DMatrix::<f64>::zeros(n, 1 + self.kept.len());
        for i in 0..n {
            m[(i, 0)] = 1.0;
            for (c, &j) in self.kept.iter().enumerate() {
                m[(i, c + 1)] = self.scaling[j].apply(d[(i, j)]);
            }
        }
        Ok(m)
    }

    pub fn predict(&self, rows: &Table) -> Result<Vec<f64>> {
        let eta = self.standardized(rows)? * DVector::from_column_slice(&self.coefficients);
        Ok(eta
            .iter()
            .map(|&e| if self.logistic { sigmoid(e) } else { e })
            .collect())
    }
}

/// λ_f = n(1 − w)/max(w, 1e-6).
pub fn edf_penalty(n: usize, w: f64) -> f64 {
    n as f64 * (1.0 - w) / w.max(1e-6)
}

fn fit_edf_linear(table: &Table, spec: &ModelSpec, weights: &BTreeMap<String, f64>) -> Result<EdfLinear> {
    let x: Vec<&str> = spec.x_names.iter().map(String::as_str).collect();
    let encoder = DesignEncoder::fit(table, &x, false, None)?;
    let d = encoder.encode(table)?;
    let metas = encoder.columns();
    let n = table.nrows();
    let scaling: Vec<Scaling> = (0..d.ncols())
        .map(|j| {
            let col: Vec<f64> = d.matrix.column(j).iter().copied().collect();
            let sd = sample_sd(&col);
            Scaling {
                mean: mean(&col),
                sd: if sd > 0.0 && sd.is_finite() { sd } else { 1.0 },
            }
        })
        .collect();
    let w: Vec<f64> = metas
        .iter()
        .map(|m| weights.get(&m.source).copied().unwrap_or(1.0))
        .collect();
    let kept: Vec<usize> = (0..w.len()).filter(|&j| w[j] > 0.0).collect();
    let mut penalties = vec![0.0];
    penalties.extend(kept.iter().map(|&j| edf_penalty(n, w[j])));
    let mut names = vec!["(Intercept)".to_string()];
    names.extend(kept.iter().map(|&j| metas[j].name.clone()));
    let mut model = EdfLinear {
        encoder,
        scaling,
        kept,
        coefficient_names: names.clone(),
        coefficients: Vec::new(),
        penalties: penalties.clone(),
        logistic: false,
    };
    let xm = model.standardized(table)?;
    let y = response(table, &spec.y_name)?;
    if y.is_binary() {
        let dm = DesignMatrix {
            matrix: xm,
            columns: names
                .iter()
                .map(|n| ColumnMeta {
                    name: n.clone(),
                    source: n.clone(),
                    level: None,
                    sensitive: false,
                })
                .collect(),
            intercept: true,
            encoder: model.encoder.clone(),
        };
        model.coefficients = fit_logit_penalized(&dm, &y.values, &penalties)?.estimates;
        model.logistic = true;
    } else {
        let sol = ridge_least_squares(&xm, &DVector::from_column_slice(&y.values), &penalties, &names)?;
        model.coefficients = sol.coef.iter().copied().collect();
    }
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum EdfInner {
    Knn(KnnModel),
    Linear(EdfLinear),
    Forest(ForestModel),
}

/// A predictor that never sees S and uses deweighted proxies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EdfModel {
    pub method: EdfMethod,
    pub deweights: BTreeMap<String, f64>,
    pub s_name: String,
    pub model: EdfInner,
}

impl EdfModel {
    /// Source columns the underlying model uses.
    pub fn feature_sources(&self) -> Vec<String> {
        let enc = match &self.model {
            EdfInner::Knn(m) => &m.encoder,
            EdfInner::Linear(m) => &m.encoder,
            EdfInner::Forest(m) => &m.encoder,
        };
        enc.terms.iter().map(|t| t.source().to_string()).collect()
    }
}

impl Predictor for EdfModel {
    fn predict(&self, rows: &Table) -> Result<Vec<f64>> {
        match &self.model {
            EdfInner::Knn(m) => m.predict(rows),
            EdfInner::Linear(m) => m.predict(rows),
            EdfInner::Forest(m) => m.predict(rows),
        }
    }
}

pub fn fit_edf(
    table: &Table,
    spec: &ModelSpec,
    method: EdfMethod,
    deweights: &BTreeMap<String, f64>,
    hyper: &EdfHyper,
    seed: u64,
) -> Result<EdfModel> {
    spec.validate(table)?;
    let s_name = spec.s_name()?.to_string();
    for (name, &w) in deweights {
        if *name == s_name {
            return Err(invalid(format!(
                "cannot deweight the sensitive column `{name}`; it is already excluded"
            )));
        }
        if !spec.x_names.contains(name) {
            return Err(Error::UnknownColumn(name.clone()));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(invalid(format!("deweight for `{name}` must lie in [0, 1], got {w}")));
        }
    }
    let plain = spec.without_s();
    let model = match method {
        EdfMethod::Knn => EdfInner::Knn(fit_knn(table, &plain, hyper.k, deweights)?),
        EdfMethod::Linear => EdfInner::Linear(fit_edf_linear(table, &plain, deweights)?),
        EdfMethod::Forest => {
            let mut params = hyper.forest.clone();
            params.seed = seed;
            for (k, v) in deweights {
                params.split_weights.insert(k.clone(), *v);
            }
            EdfInner::Forest(fit_forest(table, &plain, &params)?)
        }
    };
    Ok(EdfModel {
        method,
        deweights: deweights.clone(),
        s_name,
        model,
    })
}

/// Fits a predictor on a training table; used once per replication.
pub trait ModelFactory: Sync {
    fn label(&self) -> String;
    fn fit(&self, train: &Table, spec: &ModelSpec, seed: u64) -> Result<Box<dyn Predictor>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct FairRidgeFactory {
    pub unfairness: f64,
    pub family: Family,
}

impl ModelFactory for FairRidgeFactory {
    fn label(&self) -> String {
        format!("fair-ridge(unfairness={})", self.unfairness)
    }

    fn fit(&self, train: &Table, spec: &ModelSpec, _seed: u64) -> Result<Box<dyn Predictor>> {
        Ok(Box::new(fit_fair_ridge(train, spec, self.unfairness, self.family)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdfFactory {
    pub method: EdfMethod,
    pub deweights: BTreeMap<String, f64>,
    pub hyper: EdfHyper,
}

impl ModelFactory for EdfFactory {
    fn label(&self) -> String {
        let w: Vec<String> = self.deweights.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("edf-{:?}({})", self.method, w.join(",")).to_lowercase()
    }

    fn fit(&self, train: &Table, spec: &ModelSpec, seed: u64) -> Result<Box<dyn Predictor>> {
        Ok(Box::new(fit_edf(train, spec, self.method, &self.deweights, &self.hyper, seed)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UtilityKind {
    /// Mean absolute prediction error.
    Mape,
    /// Share of holdout rows misclassified at threshold 0.5.
    Misclassification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Replication {
    pub seed: u64,
    pub utility: f64,
    /// Tau between predictions and each S-level indicator; `None` when undefined.
    pub taus: Vec<Option<f64>>,
    pub max_abs_tau: Option<f64>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FairnessUtilityReport {
    pub model: String,
    pub utility_kind: UtilityKind,
    pub s_levels: Vec<String>,
    pub seeds: Vec<u64>,
    pub replications: Vec<Replication>,
    pub mean_utility: f64,
    pub mean_taus: Vec<Option<f64>>,
    pub mean_max_abs_tau: Option<f64>,
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

impl FairnessUtilityReport {
    /// One row per replication.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> =
            ["model", "replication", "seed", "utility_kind", "utility", "max_abs_tau"]
                .map(String::from)
                .to_vec();
        header.extend(self.s_levels.iter().map(|l| format!("tau.{l}")));
        w.write_record(&header)?;
        let opt = |v: Option<f64>| v.map_or("NA".to_string(), |t| t.to_string());
        let kind = match self.utility_kind {
            UtilityKind::Mape => "mape",
            UtilityKind::Misclassification => "misclassification",
        };
        for (i, r) in self.replications.iter().enumerate() {
            let mut rec = vec![
                self.model.clone(),
                (i + 1).to_string(),
                r.seed.to_string(),
                kind.to_string(),
                r.utility.to_string(),
                opt(r.max_abs_tau),
            ];
            rec.extend(r.taus.iter().map(|t| opt(*t)));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
    }
}

/// Replication r uses seed `seed + r` for its holdout split and model.
pub fn evaluate_fairness(
    table: &Table,
    spec: &ModelSpec,
    factory: &dyn ModelFactory,
    replications: usize,
    holdout: HoldoutSize,
    seed: u64,
) -> Result<FairnessUtilityReport> {
    if replications == 0 {
        return Err(invalid("need at least one replication"));
    }
    spec.validate(table)?;
    let s_name = spec.s_name()?;
    let s_levels = table.column(s_name)?.observed_levels();
    let y_all = response(table, &spec.y_name)?;
    let kind = if y_all.is_binary() {
        UtilityKind::Misclassification
    } else {
        UtilityKind::Mape
    };
    let seeds: Vec<u64> = (0..replications as u64).map(|r| seed.wrapping_add(r)).collect();
    let reps: Vec<Replication> = seeds
        .par_iter()
        .map(|&rs| -> Result<Replication> {
            let split = make_holdout(table.nrows(), holdout, rs)?;
            let train = table.take(&split.train);
            let test = table.take(&split.holdout);
            let y: Vec<f64> = split.holdout.iter().map(|&i| y_all.values[i]).collect();
            if kind == UtilityKind::Misclassification
                && (y.iter().all(|&v| v == 1.0) || y.iter().all(|&v| v == 0.0))
            {
                return Err(Error::InvalidHoldout(format!(
                    "holdout for seed {rs} contains a single class"
                )));
            }
            let model = factory.fit(&train, spec, rs)?;
            let pred = model.predict(&test)?;
            let utility = match kind {
                UtilityKind::Mape => {
                    y.iter().zip(&pred).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64
                }
                UtilityKind::Misclassification => {
                    y.iter()
                        .zip(&pred)
                        .filter(|(a, b)| (**b >= 0.5) != (**a == 1.0))
                        .count() as f64
                        / y.len() as f64
                }
            };
            let (codes, levels) = test.factor(s_name)?;
            let mut flags = Vec::new();
            let taus: Vec<Option<f64>> = s_levels
                .iter()
                .map(|l| {
                    let ind: Vec<f64> =
                        codes.iter().map(|&c| f64::from(levels[c as usize] == *l)).collect();
                    match kendall_tau_b(&pred, &ind) {
                        Ok(t) => Some(t),
                        Err(e) => {
                            flags.push(format!("tau for `{l}` undefined: {e}"));
                            None
                        }
                    }
                })
                .collect();
            let max_abs_tau = taus.iter().flatten().map(|t| t.abs()).reduce(f64::max);
            Ok(Replication {
                seed: rs,
                utility,
                taus,
                max_abs_tau,
                flags,
            })
        })
        .collect::<Result<_>>()?;
    let mean_utility = reps.iter().map(|r| r.utility).sum::<f64>() / reps.len() as f64;
    let mean_taus = (0..s_levels.len())
        .map(|j| mean_defined(reps.iter().map(|r| r.taus[j])))
        .collect();
    let mean_max_abs_tau = mean_defined(reps.iter().map(|r| r.max_abs_tau));
    Ok(FairnessUtilityReport {
        model: factory.label(),
        utility_kind: kind,
        s_levels,
        seeds,
        replications: reps,
        mean_utility,
        mean_taus,
        mean_max_abs_tau,
    })
}
