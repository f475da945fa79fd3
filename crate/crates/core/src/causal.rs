//! Matched-pairs treatment effects and IAMB structure discovery.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::design::{DesignEncoder, ModelSpec};
use crate::error::{invalid, Error, Result};
use crate::linalg::spd_inverse;
use crate::logistic::fit_logit;
use crate::neighbors::fit_knn;
use crate::stats::normal_two_sided;
use crate::table::{mean, sample_sd, Column, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Propensity {
    None,
    Logit,
    Knn { k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchResult {
    pub estimand: String,
    pub treat_level: String,
    pub propensity: Propensity,
    pub estimate: f64,
    pub standard_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub n_original: usize,
    pub n_treated: usize,
    /// Treated units matched (each to one control, or to a tie set).
    pub n_matched: usize,
    /// Treated-control pairs counting every member of a tie set.
    pub n_matched_unweighted: usize,
}

/// Matching metric: standardized covariates, or a one-dimensional score.
fn match_space(
    table: &Table,
    spec: &ModelSpec,
    treat: &[f64],
    propensity: Propensity,
) -> Result<(Vec<f64>, usize)> {
    let x: Vec<&str> = table
        .names()
        .into_iter()
        .filter(|n| spec.x_names.iter().any(|x| x == n))
        .collect();
    if x.is_empty() {
        return Err(invalid("matching needs at least one covariate"));
    }
    match propensity {
        Propensity::None => {
            let d = DesignEncoder::fit(table, &x, false, None)?.encode(table)?.matrix;
            let (n, p) = d.shape();
            let mut out = vec![0.0; n * p];
            for j in 0..p {
                let col: Vec<f64> = d.column(j).iter().copied().collect();
                let m = mean(&col);
                let sd = sample_sd(&col);
                let sd = if sd > 0.0 { sd } else { 1.0 };
                for i in 0..n {
                    out[i * p + j] = (col[i] - m) / sd;
                }
            }
            Ok((out, p))
        }
        Propensity::Logit => {
            let d = DesignEncoder::fit(table, &x, true, None)?.encode(table)?;
            let fit = fit_logit(&d, treat)?;
            Ok((fit.predict_design(&d), 1))
        }
        Propensity::Knn { k } => {
            let t = table.with_column(Column::numeric("\u{1}treated", treat.to_vec()))?;
            let kspec = ModelSpec::with_covariates(&t, "\u{1}treated", None, spec.x_names.clone())?;
            let model = fit_knn(&t, &kspec, k, &BTreeMap::new())?;
            Ok((model.predict(&t)?, 1))
        }
    }
}

/// ATT by one-nearest-control matching with replacement; equidistant
/// controls share the match equally. The variance adds a term for controls
/// reused across treated units, with each control's outcome variance
/// estimated from its nearest fellow control.
pub fn matched_ate(
    table: &Table,
    spec: &ModelSpec,
    treat_level: &str,
    propensity: Propensity,
) -> Result<MatchResult> {
    spec.validate(table)?;
    let s = spec.s_name()?;
    let col = table.column(s)?;
    let levels = col.observed_levels();
    if levels.len() != 2 {
        return Err(invalid(format!(
            "treatment column `{s}` must have exactly 2 levels, found {}",
            levels.len()
        )));
    }
    if !levels.iter().any(|l| l == treat_level) {
        return Err(Error::UnseenLevel {
            column: s.to_string(),
            level: treat_level.to_string(),
        });
    }
    let y = table.numeric(&spec.y_name)?;
    let (codes, labels) = col.as_factor()?;
    let treat: Vec<f64> = codes
        .iter()
        .map(|&c| f64::from(labels[c as usize] == treat_level))
        .collect();
    let treated: Vec<usize> = (0..treat.len()).filter(|&i| treat[i] == 1.0).collect();
    let controls: Vec<usize> = (0..treat.len()).filter(|&i| treat[i] == 0.0).collect();
    if controls.len() < 2 {
        return Err(invalid("matching needs at least 2 control units"));
    }
    let (space, dim) = match_space(table, spec, &treat, propensity)?;
    let dist2 = |a: usize, b: usize| -> f64 {
        space[a * dim..(a + 1) * dim]
            .iter()
            .zip(&space[b * dim..(b + 1) * dim])
            .map(|(u, v)| (u - v) * (u - v))
            .sum()
    };
    let nearest_set = |i: usize, pool: &[usize]| -> Vec<usize> {
        let mut best = f64::INFINITY;
        let mut set = Vec::new();
        for &j in pool {
            if j == i {
                continue;
            }
            let d = dist2(i, j);
            if d < best {
                best = d;
                set.clear();
                set.push(j);
            } else if d == best {
                set.push(j);
            }
        }
        set
    };

    use rayon::prelude::*;
    let matches: Vec<Vec<usize>> = treated.par_iter().map(|&i| nearest_set(i, &controls)).collect();
    let nt = treated.len() as f64;
    let mut k_sum: BTreeMap<usize, f64> = BTreeMap::new();
    let mut k_sq: BTreeMap<usize, f64> = BTreeMap::new();
    let mut diffs = Vec::with_capacity(treated.len());
    for (&i, set) in treated.iter().zip(&matches) {
        let w = 1.0 / set.len() as f64;
        let y0 = set.iter().map(|&j| y[j]).sum::<f64>() * w;
        diffs.push(y[i] - y0);
        for &j in set {
            *k_sum.entry(j).or_default() += w;
            *k_sq.entry(j).or_default() += w * w;
        }
    }
    let estimate = diffs.iter().sum::<f64>() / nt;
    let mut v: f64 = diffs.iter().map(|d| (d - estimate) * (d - estimate)).sum();
    let reused: Vec<usize> = k_sum
        .iter()
        .filter(|(j, k)| **k * **k - k_sq[*j] > 0.0)
        .map(|(j, _)| *j)
        .collect();
    let sigma2: Vec<f64> = reused
        .par_iter()
        .map(|&j| {
            let set = nearest_set(j, &controls);
            let ybar = set.iter().map(|&l| y[l]).sum::<f64>() / set.len() as f64;
            let m = set.len() as f64;
            m / (m + 1.0) * (y[j] - ybar) * (y[j] - ybar)
        })
        .collect();
    for (j, s2) in reused.iter().zip(sigma2) {
        v += (k_sum[j] * k_sum[j] - k_sq[j]) * s2;
    }
    let standard_error = (v / (nt * nt)).sqrt();
    let t_stat = estimate / standard_error;
    Ok(MatchResult {
        estimand: "ATT".into(),
        treat_level: treat_level.to_string(),
        propensity,
        estimate,
        standard_error,
        t_stat,
        p_value: normal_two_sided(t_stat),
        n_original: table.nrows(),
        n_treated: treated.len(),
        n_matched: treated.len(),
        n_matched_unweighted: matches.iter().map(Vec::len).sum(),
    })
}

/// Two-sided p-value of H0: partial correlation zero, via Fisher's z.
pub fn fisher_z_test(r: f64, n: usize, conditioning: usize) -> Result<f64> {
    if !(r.abs() < 1.0) {
        return Err(invalid(format!("correlation {r} must lie strictly inside (-1, 1)")));
    }
    let m = n as f64 - conditioning as f64 - 3.0;
    if m <= 0.0 {
        return Err(invalid(format!(
            "n = {n} too small for a conditioning set of {conditioning}"
        )));
    }
    Ok(normal_two_sided(m.sqrt() * r.atanh()))
}

/// Partial correlation of variables `a` and `b` given `given`, from the
/// inverse of the matching correlation submatrix.
pub fn partial_correlation(corr: &DMatrix<f64>, a: usize, b: usize, given: &[usize]) -> Result<f64> {
    let mut idx = vec![a, b];
    idx.extend_from_slice(given);
    let k = idx.len();
    let sub = DMatrix::from_fn(k, k, |i, j| corr[(idx[i], idx[j])]);
    let p = spd_inverse(&sub)
        .ok_or_else(|| Error::SingularCorrelation("conditioning set is collinear".into()))?;
    Ok((-p[(0, 1)] / (p[(0, 0)] * p[(1, 1)]).sqrt()).clamp(-1.0, 1.0))
}

pub fn correlation_matrix(columns: &[&[f64]]) -> DMatrix<f64> {
    let p = columns.len();
    let n = columns.first().map_or(0, |c| c.len());
    let centered: Vec<Vec<f64>> = columns
        .iter()
        .map(|c| {
            let m = mean(c);
            c.iter().map(|v| v - m).collect()
        })
        .collect();
    let norms: Vec<f64> = centered.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else {
            (0..n).map(|r| centered[i][r] * centered[j][r]).sum::<f64>() / (norms[i] * norms[j])
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CausalGraph {
    pub nodes: Vec<String>,
    pub directed_edges: Vec<(String, String)>,
    pub undirected_edges: Vec<(String, String)>,
    pub alpha: f64,
    pub blankets: BTreeMap<String, Vec<String>>,
}

fn dot_id(s: &str) -> String {
    let plain = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain {
        s.to_string()
    } else {
        format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

impl CausalGraph {
    /// Graphviz text; undirected edges carry `dir=none`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph iamb {\n");
        for n in &self.nodes {
            out.push_str(&format!("  {};\n", dot_id(n)));
        }
        for (a, b) in &self.directed_edges {
            out.push_str(&format!("  {} -> {};\n", dot_id(a), dot_id(b)));
        }
        for (a, b) in &self.undirected_edges {
            out.push_str(&format!("  {} -> {} [dir=none];\n", dot_id(a), dot_id(b)));
        }
        out.push_str("}\n");
        out
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        self.directed_edges
            .iter()
            .chain(&self.undirected_edges)
            .any(|(x, y)| (x == a && y == b) || (x == b && y == a))
    }

    pub fn has_directed(&self, from: &str, to: &str) -> bool {
        self.directed_edges.iter().any(|(x, y)| x == from && y == to)
    }
}

struct Ci<'a> {
    corr: &'a DMatrix<f64>,
    n: usize,
    alpha: f64,
}

impl Ci<'_> {
    fn p_value(&self, a: usize, b: usize, given: &[usize]) -> Result<f64> {
        let r = partial_correlation(self.corr, a, b, given)?;
        if r.abs() >= 1.0 {
            return Ok(0.0);
        }
        fisher_z_test(r, self.n, given.len())
    }

    fn independent(&self, a: usize, b: usize, given: &[usize]) -> Result<bool> {
        Ok(self.p_value(a, b, given)? >= self.alpha)
    }

    fn blanket(&self, t: usize, p: usize) -> Result<Vec<usize>> {
        let mut mb: Vec<usize> = Vec::new();
        loop {
            let mut best: Option<(f64, usize)> = None;
            for v in 0..p {
                if v == t || mb.contains(&v) {
                    continue;
                }
                let r = partial_correlation(self.corr, t, v, &mb)?.abs();
                if best.is_none_or(|(br, _)| r > br) {
                    best = Some((r, v));
                }
            }
            match best {
                Some((_, v)) if !self.independent(t, v, &mb)? => mb.push(v),
                _ => break,
            }
        }
        let mut i = 0;
        while i < mb.len() {
            let v = mb[i];
            let rest: Vec<usize> = mb.iter().copied().filter(|&x| x != v).collect();
            if self.independent(t, v, &rest)? {
                mb.remove(i);
            } else {
                i += 1;
            }
        }
        mb.sort_unstable();
        Ok(mb)
    }
}

fn subsets_up_to(items: &[usize], max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for size in 1..=max.min(items.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.iter().map(|&i| items[i]).collect());
            let mut k = size;
            while k > 0 && idx[k - 1] == items.len() - size + k - 1 {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            idx[k - 1] += 1;
            for m in k..size {
                idx[m] = idx[m - 1] + 1;
            }
        }
    }
    out
}

fn reaches(directed: &BTreeSet<(usize, usize)>, from: usize, to: usize) -> bool {
    let mut stack = vec![from];
    let mut seen = BTreeSet::new();
    while let Some(x) = stack.pop() {
        if x == to {
            return true;
        }
        if seen.insert(x) {
            stack.extend(directed.iter().filter(|(a, _)| *a == x).map(|(_, b)| *b));
        }
    }
    false
}

/// Grow-shrink Markov blankets with Fisher-z tests, AND-symmetrized. Edges
/// between blanket mates are kept unless some subset of the smaller blanket
/// separates them; unshielded colliders are then oriented and Meek's first
/// rule propagates orientations. Variables are processed in name order, so
/// the result does not depend on column order.
pub fn iamb(table: &Table, alpha: f64) -> Result<CausalGraph> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let mut names: Vec<String> = table.names().into_iter().map(String::from).collect();
    names.sort();
    let p = names.len();
    let n = table.nrows();
    if p < 2 {
        return Err(invalid("need at least two variables"));
    }
    if n <= p + 3 {
        return Err(Error::TooFewRows { n, p: p + 3 });
    }
    let cols: Vec<&[f64]> = names.iter().map(|c| table.numeric(c)).collect::<Result<_>>()?;
    for (c, name) in cols.iter().zip(&names) {
        if !(sample_sd(c) > 0.0) {
            return Err(Error::ConstantColumn(name.clone()));
        }
    }
    let corr = correlation_matrix(&cols);
    if corr.clone().cholesky().is_none() {
        return Err(Error::SingularCorrelation(format!(
            "columns {} are collinear",
            names.join(", ")
        )));
    }
    let ci = Ci { corr: &corr, n, alpha };

    use rayon::prelude::*;
    let raw: Vec<Vec<usize>> = (0..p).into_par_iter().map(|t| ci.blanket(t, p)).collect::<Result<_>>()?;
    let mb: Vec<Vec<usize>> = (0..p)
        .map(|t| raw[t].iter().copied().filter(|&v| raw[v].contains(&t)).collect())
        .collect();

    let mut adj = vec![vec![false; p]; p];
    let mut sepsets: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for a in 0..p {
        for &b in mb[a].iter().filter(|&&b| b > a) {
            let ba: Vec<usize> = mb[a].iter().copied().filter(|&x| x != b).collect();
            let bb: Vec<usize> = mb[b].iter().copied().filter(|&x| x != a).collect();
            let smaller = if bb.len() < ba.len() { bb } else { ba };
            let cap = if smaller.len() > 12 { 3 } else { smaller.len() };
            let mut sep = None;
            for s in subsets_up_to(&smaller, cap) {
                if ci.independent(a, b, &s)? {
                    sep = Some(s);
                    break;
                }
            }
            match sep {
                Some(s) => {
                    sepsets.insert((a, b), s);
                }
                None => {
                    adj[a][b] = true;
                    adj[b][a] = true;
                }
            }
        }
    }

    let mut proposals: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (&(a, b), sep) in &sepsets {
        for c in 0..p {
            if adj[a][c] && adj[b][c] && !sep.contains(&c) {
                proposals.insert((a, c));
                proposals.insert((b, c));
            }
        }
    }
    let mut directed: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(a, c) in &proposals {
        if !proposals.contains(&(c, a)) && !reaches(&directed, c, a) {
            directed.insert((a, c));
        }
    }
    loop {
        let mut added = None;
        'search: for &(a, b) in &directed {
            for c in 0..p {
                if c != a
                    && adj[b][c]
                    && !adj[a][c]
                    && !directed.contains(&(b, c))
                    && !directed.contains(&(c, b))
                    && !reaches(&directed, c, b)
                {
                    added = Some((b, c));
                    break 'search;
                }
            }
        }
        match added {
            Some(e) => {
                directed.insert(e);
            }
            None => break,
        }
    }
    let mut undirected = Vec::new();
    for a in 0..p {
        for b in (a + 1)..p {
            if adj[a][b] && !directed.contains(&(a, b)) && !directed.contains(&(b, a)) {
                undirected.push((names[a].clone(), names[b].clone()));
            }
        }
    }
    Ok(CausalGraph {
        directed_edges: directed
            .iter()
            .map(|&(a, b)| (names[a].clone(), names[b].clone()))
            .collect(),
        undirected_edges: undirected,
        alpha,
        blankets: (0..p)
            .map(|t| (names[t].clone(), mb[t].iter().map(|&v| names[v].clone()).collect()))
            .collect(),
        nodes: names,
    })
}
