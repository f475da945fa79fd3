//! Random forests (CART trees on bootstrap samples) and holdout permutation
//! importance.
//!
//! Each tree draws its randomness from its own ChaCha stream derived from the
//! forest seed and the tree index, so parallel and serial growth agree bit
//! for bit.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{DesignEncoder, DesignMatrix, ModelSpec};
use crate::error::{invalid, Error, Result};
use crate::neighbors::expand_weights;
use crate::table::{ColumnData, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Defaults to ⌈√p⌉ over design columns with nonzero split weight.
    pub mtry: Option<usize>,
    pub min_node_size: usize,
    /// Relative split-sampling weight per source column (default 1).
    pub split_weights: BTreeMap<String, f64>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            mtry: None,
            min_node_size: 5,
            split_weights: BTreeMap::new(),
            bootstrap: true,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Task {
    Regression,
    Classification { classes: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        /// Mean response, or class proportions.
        value: Vec<f64>,
        size: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    fn leaf(&self, row: &[f64]) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value, .. } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn split_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature),
            _ => None,
        })
    }

    pub fn leaf_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { size, .. } => Some(*size),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub encoder: DesignEncoder,
    pub feature_names: Vec<String>,
    pub task: Task,
    pub trees: Vec<Tree>,
    pub mtry: usize,
    pub min_node_size: usize,
    pub split_probabilities: Vec<f64>,
    pub seed: u64,
}

/// Response as class codes or numbers.
fn forest_response(table: &Table, y_name: &str) -> Result<(Vec<f64>, Task)> {
    let col = table.column(y_name)?;
    match col.data() {
        ColumnData::Numeric(v) => Ok((v.clone(), Task::Regression)),
        ColumnData::Factor { codes, levels } => {
            let observed = col.observed_levels();
            let y = codes
                .iter()
                .map(|&c| observed.iter().position(|l| *l == levels[c as usize]).unwrap() as f64)
                .collect();
            Ok((y, Task::Classification { classes: observed }))
        }
    }
}

struct Grower<'a> {
    columns: &'a [Vec<f64>],
    y: &'a [f64],
    n_classes: usize,
    mtry: usize,
    min_node: usize,
    probs: &'a [f64],
}

impl Grower<'_> {
    fn leaf_value(&self, rows: &[usize]) -> Vec<f64> {
        if self.n_classes == 0 {
            vec![rows.iter().map(|&r| self.y[r]).sum::<f64>() / rows.len() as f64]
        } else {
            let mut counts = vec![0.0; self.n_classes];
            for &r in rows {
                counts[self.y[r] as usize] += 1.0;
            }
            let n = rows.len() as f64;
            counts.iter_mut().for_each(|c| *c /= n);
            counts
        }
    }

    /// Weighted sampling of candidate features without replacement.
    fn candidates(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let mut w: Vec<f64> = self.probs.to_vec();
        let mut out = Vec::with_capacity(self.mtry);
        while out.len() < self.mtry {
            let total: f64 = w.iter().sum();
            if total <= 0.0 {
                break;
            }
            let mut u = rng.random::<f64>() * total;
            let mut pick = w.len() - 1;
            for (j, &wj) in w.iter().enumerate() {
                if wj <= 0.0 {
                    continue;
                }
                if u < wj {
                    pick = j;
                    break;
                }
                u -= wj;
                pick = j;
            }
            out.push(pick);
            w[pick] = 0.0;
        }
        out
    }

    /// Best (gain, feature, threshold) over the candidate features.
    fn best_split(&self, rows: &[usize], feats: &[usize]) -> Option<(f64, usize, f64)> {
        let n = rows.len();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = rows.to_vec();
        for &f in feats {
            let col = &self.columns[f];
            sorted.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
            let (gain_at, parent) = if self.n_classes == 0 {
                let total: f64 = sorted.iter().map(|&r| self.y[r]).sum();
                let parent = total * total / n as f64;
                let mut left = 0.0;
                let mut gains = Vec::with_capacity(n);
                for (i, &r) in sorted.iter().enumerate() {
                    left += self.y[r];
                    let nl = (i + 1) as f64;
                    let nr = (n - i - 1) as f64;
                    let right = total - left;
                    gains.push(if nr > 0.0 { left * left / nl + right * right / nr } else { f64::NAN });
                }
                (gains, parent)
            } else {
                let mut total = vec![0.0; self.n_classes];
                for &r in &sorted {
                    total[self.y[r] as usize] += 1.0;
                }
                let parent = total.iter().map(|c| c * c).sum::<f64>() / n as f64;
                let mut left = vec![0.0; self.n_classes];
                let mut sq_left = 0.0;
                let mut sq_right: f64 = total.iter().map(|c| c * c).sum();
                let mut gains = Vec::with_capacity(n);
                for (i, &r) in sorted.iter().enumerate() {
                    let c = self.y[r] as usize;
                    let rc = total[c] - left[c];
                    sq_right += (rc - 1.0) * (rc - 1.0) - rc * rc;
                    sq_left += (left[c] + 1.0) * (left[c] + 1.0) - left[c] * left[c];
                    left[c] += 1.0;
                    let nl = (i + 1) as f64;
                    let nr = (n - i - 1) as f64;
                    gains.push(if nr > 0.0 { sq_left / nl + sq_right / nr } else { f64::NAN });
                }
                (gains, parent)
            };
            for i in (self.min_node - 1)..n.saturating_sub(self.min_node) {
                let (a, b) = (col[sorted[i]], col[sorted[i + 1]]);
                if a == b {
                    continue;
                }
                let gain = gain_at[i] - parent;
                if gain > 1e-12 * parent.abs().max(1.0) && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, f, a + (b - a) / 2.0));
                }
            }
        }
        best
    }

    fn grow(&self, sample: Vec<usize>, rng: &mut ChaCha8Rng) -> Tree {
        let mut nodes = vec![Node::Leaf {
            value: Vec::new(),
            size: 0,
        }];
        let mut stack = vec![(0usize, sample)];
        while let Some((at, rows)) = stack.pop() {
            let split = if rows.len() >= 2 * self.min_node {
                let feats = self.candidates(rng);
                self.best_split(&rows, &feats)
            } else {
                None
            };
            match split {
                Some((_, feature, threshold)) => {
                    let (l, r): (Vec<usize>, Vec<usize>) =
                        rows.iter().partition(|&&i| self.columns[feature][i] <= threshold);
                    let left = nodes.len();
                    let right = left + 1;
                    nodes.push(Node::Leaf {
                        value: Vec::new(),
                        size: 0,
                    });
                    nodes.push(Node::Leaf {
                        value: Vec::new(),
                        size: 0,
                    });
                    nodes[at] = Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    };
                    stack.push((right, r));
                    stack.push((left, l));
                }
                None => {
                    nodes[at] = Node::Leaf {
                        value: self.leaf_value(&rows),
                        size: rows.len(),
                    };
                }
            }
        }
        Tree { nodes }
    }
}

pub(crate) fn tree_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn columns_of(design: &DesignMatrix) -> Vec<Vec<f64>> {
    (0..design.ncols())
        .map(|j| design.matrix.column(j).iter().copied().collect())
        .collect()
}

pub fn fit_forest(table: &Table, spec: &ModelSpec, params: &ForestParams) -> Result<ForestModel> {
    spec.validate(table)?;
    if params.n_trees == 0 {
        return Err(invalid("need at least one tree"));
    }
    if params.min_node_size == 0 {
        return Err(invalid("minimum node size must be positive"));
    }
    if table.nrows() == 0 {
        return Err(Error::EmptyTable { dropped: 0 });
    }
    let x: Vec<&str> = spec.x_names.iter().map(String::as_str).collect();
    let encoder = DesignEncoder::fit(table, &x, false, None)?;
    let design = encoder.encode(table)?;
    let split_probabilities = expand_weights(&encoder, &params.split_weights)?;
    if split_probabilities.iter().all(|&w| w == 0.0) {
        return Err(invalid("all split weights are zero"));
    }
    let usable = split_probabilities.iter().filter(|&&w| w > 0.0).count();
    let mtry = params
        .mtry
        .unwrap_or_else(|| (usable as f64).sqrt().ceil() as usize)
        .clamp(1, usable);
    let (y, task) = forest_response(table, &spec.y_name)?;
    let n_classes = match &task {
        Task::Regression => 0,
        Task::Classification { classes } => classes.len(),
    };
    let columns = columns_of(&design);
    let grower = Grower {
        columns: &columns,
        y: &y,
        n_classes,
        mtry,
        min_node: params.min_node_size,
        probs: &split_probabilities,
    };
    let n = table.nrows();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(params.seed, t as u64);
            let sample: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grower.grow(sample, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        encoder,
        feature_names: design.names(),
        task,
        trees,
        mtry,
        min_node_size: params.min_node_size,
        split_probabilities,
        seed: params.seed,
    })
}

impl ForestModel {
    fn rows_of(&self, design: &DesignMatrix) -> Vec<Vec<f64>> {
        (0..design.nrows())
            .map(|i| design.matrix.row(i).iter().copied().collect())
            .collect()
    }

    fn average_leaves(&self, row: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.trees[0].leaf(row).len()];
        for tree in &self.trees {
            for (a, v) in acc.iter_mut().zip(tree.leaf(row)) {
                *a += v;
            }
        }
        let k = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= k);
        acc
    }

    /// Majority vote of per-tree leaf classes; ties go to the lower class.
    fn vote(&self, row: &[f64], n_classes: usize) -> usize {
        let mut votes = vec![0usize; n_classes];
        for tree in &self.trees {
            votes[argmax(tree.leaf(row))] += 1;
        }
        argmax_usize(&votes)
    }

    /// Regression: mean over trees. Binary classification: probability of the
    /// second class. Multiclass: voted class index.
    pub fn predict_design(&self, design: &DesignMatrix) -> Vec<f64> {
        let rows = self.rows_of(design);
        rows.par_iter()
            .map(|row| match &self.task {
                Task::Regression => self.average_leaves(row)[0],
                Task::Classification { classes } if classes.len() == 2 => {
                    self.average_leaves(row)[1]
                }
                Task::Classification { classes } => self.vote(row, classes.len()) as f64,
            })
            .collect()
    }

    pub fn predict(&self, rows: &Table) -> Result<Vec<f64>> {
        Ok(self.predict_design(&self.encoder.encode(rows)?))
    }

    pub fn predict_class_design(&self, design: &DesignMatrix) -> Vec<usize> {
        let Task::Classification { classes } = &self.task else {
            return Vec::new();
        };
        self.rows_of(design)
            .par_iter()
            .map(|row| self.vote(row, classes.len()))
            .collect()
    }

    /// MSE for regression, misclassification rate for classification.
    fn loss(&self, design: &DesignMatrix, y: &[f64]) -> f64 {
        let n = y.len() as f64;
        match self.task {
            Task::Regression => {
                self.predict_design(design)
                    .iter()
                    .zip(y)
                    .map(|(p, t)| (p - t) * (p - t))
                    .sum::<f64>()
                    / n
            }
            Task::Classification { .. } => {
                self.predict_class_design(design)
                    .iter()
                    .zip(y)
                    .filter(|(p, t)| **p as f64 != **t)
                    .count() as f64
                    / n
            }
        }
    }

    /// Response of `rows` in the coding the forest was trained on.
    fn coded_response(&self, rows: &Table, y_name: &str) -> Result<Vec<f64>> {
        let col = rows.column(y_name)?;
        match (&self.task, col.data()) {
            (Task::Regression, ColumnData::Numeric(v)) => Ok(v.clone()),
            (Task::Classification { classes }, ColumnData::Factor { codes, levels }) => codes
                .iter()
                .map(|&c| {
                    let label = &levels[c as usize];
                    classes
                        .iter()
                        .position(|k| k == label)
                        .map(|p| p as f64)
                        .ok_or_else(|| Error::UnseenLevel {
                            column: y_name.to_string(),
                            level: label.clone(),
                        })
                })
                .collect(),
            _ => Err(Error::InvalidSpec(format!(
                "response `{y_name}` type differs from the fitted forest"
            ))),
        }
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn argmax_usize(v: &[usize]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ImportanceVector {
    pub features: Vec<String>,
    pub scores: Vec<f64>,
    /// Standard error of each score across permutation repeats.
    pub standard_errors: Vec<f64>,
    pub baseline_loss: f64,
}

impl ImportanceVector {
    /// Feature names ordered by decreasing score; ties keep input order.
    pub fn ranking(&self) -> Vec<String> {
        let mut idx: Vec<usize> = (0..self.scores.len()).collect();
        idx.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]).then(a.cmp(&b)));
        idx.into_iter().map(|i| self.features[i].clone()).collect()
    }

    pub fn sorted(&self) -> ImportanceVector {
        let mut idx: Vec<usize> = (0..self.scores.len()).collect();
        idx.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]).then(a.cmp(&b)));
        ImportanceVector {
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
            scores: idx.iter().map(|&i| self.scores[i]).collect(),
            standard_errors: idx.iter().map(|&i| self.standard_errors[i]).collect(),
            baseline_loss: self.baseline_loss,
        }
    }

    pub fn score_of(&self, feature: &str) -> Option<f64> {
        self.features.iter().position(|f| f == feature).map(|i| self.scores[i])
    }
}

/// Mean increase in holdout loss when one source column (all of its dummies
/// together) is permuted.
pub fn permutation_importance(
    model: &ForestModel,
    holdout: &Table,
    y_name: &str,
    n_repeats: usize,
    seed: u64,
) -> Result<ImportanceVector> {
    if holdout.nrows() == 0 {
        return Err(invalid("holdout is empty"));
    }
    let n_repeats = n_repeats.max(1);
    let design = model.encoder.encode(holdout)?;
    let y = model.coded_response(holdout, y_name)?;
    let baseline = model.loss(&design, &y);
    let sources: Vec<String> = model
        .encoder
        .terms
        .iter()
        .map(|t| t.source().to_string())
        .collect();
    let metas = model.encoder.columns();
    let n = holdout.nrows();
    let results: Vec<(f64, f64)> = sources
        .par_iter()
        .enumerate()
        .map(|(fi, source)| {
            let cols: Vec<usize> = metas
                .iter()
                .enumerate()
                .filter(|(_, m)| &m.source == source)
                .map(|(j, _)| j)
                .collect();
            let mut rng = tree_rng(seed, fi as u64);
            let deltas: Vec<f64> = (0..n_repeats)
                .map(|_| {
                    let mut perm: Vec<usize> = (0..n).collect();
                    perm.shuffle(&mut rng);
                    let mut permuted = design.clone();
                    for &j in &cols {
                        for (i, &src) in perm.iter().enumerate() {
                            permuted.matrix[(i, j)] = design.matrix[(src, j)];
                        }
                    }
                    model.loss(&permuted, &y) - baseline
                })
                .collect();
            let m = deltas.iter().sum::<f64>() / n_repeats as f64;
            let se = if n_repeats > 1 {
                let var = deltas.iter().map(|d| (d - m) * (d - m)).sum::<f64>()
                    / (n_repeats - 1) as f64;
                (var / n_repeats as f64).sqrt()
            } else {
                0.0
            };
            (m, se)
        })
        .collect();
    Ok(ImportanceVector {
        features: sources,
        scores: results.iter().map(|r| r.0).collect(),
        standard_errors: results.iter().map(|r| r.1).collect(),
        baseline_loss: baseline,
    })
}
