//! Exact k-nearest-neighbor regression with per-feature distance weights.
//!
//! Features are dummy coded, standardized with training means and sample
//! standard deviations, then multiplied by their weights. Distances are
//! Euclidean in that space; ties go to the lower training row index.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{response, DesignEncoder, ModelSpec, ResponseKind};
use crate::error::{invalid, Error, Result};
use crate::table::{mean, sample_sd, Scaling, Table};

pub const DEFAULT_K: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub feature_names: Vec<String>,
    pub encoder: DesignEncoder,
    pub scaling: Vec<Scaling>,
    pub feature_weights: Vec<f64>,
    pub k: usize,
    pub response_kind: ResponseKind,
    train: Vec<f64>,
    train_y: Vec<f64>,
}

/// Expands per-column weights to per-design-column weights. Unlisted columns
/// get weight 1; a factor's weight applies to each of its dummies.
pub(crate) fn expand_weights(
    encoder: &DesignEncoder,
    weights: &BTreeMap<String, f64>,
) -> Result<Vec<f64>> {
    let cols = encoder.columns();
    for (name, &w) in weights {
        if !cols.iter().any(|c| &c.source == name) {
            return Err(Error::UnknownColumn(name.clone()));
        }
        if !(w >= 0.0 && w.is_finite()) {
            return Err(invalid(format!("weight for `{name}` must be nonnegative, got {w}")));
        }
    }
    Ok(cols
        .iter()
        .map(|c| weights.get(&c.source).copied().unwrap_or(1.0))
        .collect())
}

pub fn fit_knn(
    table: &Table,
    spec: &ModelSpec,
    k: usize,
    weights: &BTreeMap<String, f64>,
) -> Result<KnnModel> {
    spec.validate(table)?;
    let n = table.nrows();
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    if k > n {
        return Err(invalid(format!("k = {k} exceeds {n} training rows")));
    }
    let x: Vec<&str> = spec.x_names.iter().map(String::as_str).collect();
    let encoder = DesignEncoder::fit(table, &x, false, None)?;
    let feature_weights = expand_weights(&encoder, weights)?;
    if feature_weights.iter().all(|&w| w == 0.0) {
        return Err(invalid("all feature weights are zero"));
    }
    let design = encoder.encode(table)?;
    let d = design.ncols();
    let scaling: Vec<Scaling> = (0..d)
        .map(|j| {
            let col: Vec<f64> = design.matrix.column(j).iter().copied().collect();
            let sd = sample_sd(&col);
            Scaling {
                mean: mean(&col),
                sd: if sd > 0.0 && sd.is_finite() { sd } else { 1.0 },
            }
        })
        .collect();
    let mut train = Vec::with_capacity(n * d);
    for i in 0..n {
        for j in 0..d {
            train.push(scaling[j].apply(design.matrix[(i, j)]) * feature_weights[j]);
        }
    }
    let y = response(table, &spec.y_name)?;
    Ok(KnnModel {
        feature_names: design.names(),
        encoder,
        scaling,
        feature_weights,
        k,
        response_kind: y.kind,
        train,
        train_y: y.values,
    })
}

impl KnnModel {
    pub fn n_train(&self) -> usize {
        self.train_y.len()
    }

    fn dim(&self) -> usize {
        self.feature_weights.len()
    }

    /// Maps raw rows into the weighted standardized space.
    fn transform(&self, rows: &Table) -> Result<Vec<f64>> {
        let design = self.encoder.encode(rows)?;
        let d = self.dim();
        let mut out = Vec::with_capacity(rows.nrows() * d);
        for i in 0..rows.nrows() {
            for j in 0..d {
                out.push(self.scaling[j].apply(design.matrix[(i, j)]) * self.feature_weights[j]);
            }
        }
        Ok(out)
    }

    /// Indices of the k nearest training rows, nearest first.
    pub fn neighbors_of(&self, query: &[f64], k: usize) -> Vec<usize> {
        nearest(&self.train, self.dim(), query, k)
    }

    /// Mean neighbor response: a class-1 fraction for binary responses.
    pub fn predict(&self, rows: &Table) -> Result<Vec<f64>> {
        let q = self.transform(rows)?;
        let d = self.dim();
        Ok((0..rows.nrows())
            .into_par_iter()
            .map(|i| {
                let nb = self.neighbors_of(&q[i * d..(i + 1) * d], self.k);
                nb.iter().map(|&j| self.train_y[j]).sum::<f64>() / nb.len() as f64
            })
            .collect())
    }
}

/// Brute-force k nearest rows of a row-major matrix; ties broken by index.
pub fn nearest(points: &[f64], dim: usize, query: &[f64], k: usize) -> Vec<usize> {
    let n = if dim == 0 { 0 } else { points.len() / dim };
    let mut dist: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let row = &points[i * dim..(i + 1) * dim];
            let d2: f64 = row.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2, i)
        })
        .collect();
    let k = k.min(n);
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < n {
        dist.select_nth_unstable_by(k, cmp);
        dist.truncate(k);
    }
    dist.sort_by(cmp);
    dist.into_iter().map(|(_, i)| i).collect()
}
