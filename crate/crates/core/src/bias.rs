//! Confounder and proxy hunting.
//!
//! [`hunt_confounders`] ranks covariates by how much they matter for both Y
//! and S. [`hunt_proxies`] tabulates Kendall's tau between each S level and
//! every covariate, flagging entries where tau is undefined.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::ModelSpec;
use crate::error::{invalid, Error, Result};
use crate::forest::{fit_forest, permutation_importance, ForestParams, ImportanceVector};
use crate::kendall::kendall_tau_b;
use crate::table::{make_holdout, ColumnData, HoldoutSize, Table};
use crate::viz::{density_by_group, style_key, DensityByGroup, Layer, LayerKind, PlotDocument};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConfounderReport {
    pub imp_for_y: ImportanceVector,
    pub imp_for_s: ImportanceVector,
    /// `intersections[i]` holds features in the top i+1 of both rankings,
    /// in Y-ranking order.
    pub intersections: Vec<Vec<String>>,
}

fn top_intersections(for_y: &[String], for_s: &[String], depth: usize) -> Vec<Vec<String>> {
    (1..=depth)
        .map(|i| {
            let top_s = &for_s[..i];
            for_y[..i].iter().filter(|f| top_s.contains(f)).cloned().collect()
        })
        .collect()
}

/// Fits a forest for Y (without S) and one for S (without Y), scores both by
/// holdout permutation importance, and intersects the top rankings.
pub fn hunt_confounders(
    table: &Table,
    spec: &ModelSpec,
    intersect_depth: usize,
    params: &ForestParams,
    n_repeats: usize,
) -> Result<ConfounderReport> {
    spec.validate(table)?;
    let s = spec.s_name()?;
    let p = spec.x_names.len();
    if intersect_depth == 0 || intersect_depth > p {
        return Err(invalid(format!(
            "intersect depth {intersect_depth} must lie in 1..={p}"
        )));
    }
    let split = make_holdout(table.nrows(), HoldoutSize::Default, params.seed)?;
    let train = table.take(&split.train);
    let holdout = table.take(&split.holdout);
    let y_spec = ModelSpec::with_covariates(table, &spec.y_name, None, spec.x_names.clone())?;
    let s_spec = ModelSpec::with_covariates(table, s, None, spec.x_names.clone())?;
    let (imp_y, imp_s) = rayon::join(
        || -> Result<ImportanceVector> {
            let f = fit_forest(&train, &y_spec, params)?;
            permutation_importance(&f, &holdout, &spec.y_name, n_repeats, params.seed)
        },
        || -> Result<ImportanceVector> {
            let f = fit_forest(&train, &s_spec, params)?;
            permutation_importance(&f, &holdout, s, n_repeats, params.seed)
        },
    );
    let imp_for_y = imp_y?.sorted();
    let imp_for_s = imp_s?.sorted();
    let intersections =
        top_intersections(&imp_for_y.features, &imp_for_s.features, intersect_depth);
    Ok(ConfounderReport {
        imp_for_y,
        imp_for_s,
        intersections,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TauFlag {
    pub row: String,
    pub column: String,
    pub reason: String,
}

/// Kendall tau between S-level indicators (rows) and expanded covariates
/// (columns). Undefined entries are `None` with a matching flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TauMatrix {
    pub row_labels: Vec<String>,
    pub column_labels: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
    pub flags: Vec<TauFlag>,
}

impl TauMatrix {
    pub fn get(&self, row: &str, column: &str) -> Option<f64> {
        let r = self.row_labels.iter().position(|l| l == row)?;
        let c = self.column_labels.iter().position(|l| l == column)?;
        self.values[r][c]
    }

    /// CSV with a leading label column; undefined entries print as `NA`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![String::new()];
        header.extend(self.column_labels.iter().cloned());
        w.write_record(&header)?;
        for (label, row) in self.row_labels.iter().zip(&self.values) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|v| match v {
                Some(t) => t.to_string(),
                None => "NA".to_string(),
            }));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
    }
}

/// Numeric columns as-is; factors as one 0/1 column per observed level,
/// labelled `name.level`.
fn expand_for_tau(table: &Table, name: &str) -> Result<Vec<(String, Vec<f64>)>> {
    let col = table.column(name)?;
    Ok(match col.data() {
        ColumnData::Numeric(v) => vec![(name.to_string(), v.clone())],
        ColumnData::Factor { codes, levels } => col
            .observed_levels()
            .into_iter()
            .map(|l| {
                let idx = levels.iter().position(|x| *x == l).unwrap_or(usize::MAX);
                let ind = codes.iter().map(|&c| f64::from(c as usize == idx)).collect();
                (format!("{name}.{l}"), ind)
            })
            .collect(),
    })
}

pub fn hunt_proxies(table: &Table, spec: &ModelSpec) -> Result<TauMatrix> {
    spec.validate(table)?;
    let s = spec.s_name()?;
    table.factor(s)?;
    let rows = expand_for_tau(table, s)?;
    let mut cols = Vec::new();
    for x in &spec.x_names {
        cols.extend(expand_for_tau(table, x)?);
    }
    let cells: Vec<Vec<std::result::Result<f64, String>>> = rows
        .par_iter()
        .map(|(_, r)| {
            cols.iter()
                .map(|(_, c)| kendall_tau_b(r, c).map_err(|e| e.to_string()))
                .collect()
        })
        .collect();
    let mut flags = Vec::new();
    let values = cells
        .into_iter()
        .enumerate()
        .map(|(ri, row)| {
            row.into_iter()
                .enumerate()
                .map(|(ci, cell)| match cell {
                    Ok(t) => Some(t),
                    Err(reason) => {
                        flags.push(TauFlag {
                            row: rows[ri].0.clone(),
                            column: cols[ci].0.clone(),
                            reason,
                        });
                        None
                    }
                })
                .collect()
        })
        .collect();
    Ok(TauMatrix {
        row_labels: rows.into_iter().map(|r| r.0).collect(),
        column_labels: cols.into_iter().map(|c| c.0).collect(),
        values,
        flags,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FrequencyGroup {
    pub group: String,
    pub n: usize,
    pub counts: Vec<usize>,
    pub proportions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FrequencyByGroup {
    pub feature: String,
    pub levels: Vec<String>,
    pub groups: Vec<FrequencyGroup>,
}

impl FrequencyByGroup {
    pub fn to_plot(&self, title: &str) -> Result<PlotDocument> {
        let layers = self
            .groups
            .iter()
            .enumerate()
            .map(|(i, g)| Layer {
                kind: LayerKind::Curve,
                group_label: g.group.clone(),
                coordinates: g
                    .proportions
                    .iter()
                    .enumerate()
                    .map(|(j, &p)| [j as f64, p])
                    .collect(),
                style_key: style_key(i),
            })
            .collect();
        let mut doc = PlotDocument::from_layers(title, &self.feature, "proportion", layers)?;
        let x = &mut doc.axes[0];
        x.range = [-0.25, self.levels.len() as f64 - 0.75];
        x.tick_positions = (0..self.levels.len()).map(|j| j as f64).collect();
        x.tick_labels = Some(self.levels.clone());
        Ok(doc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ConfounderSummary {
    Density(DensityByGroup),
    Frequency(FrequencyByGroup),
}

impl ConfounderSummary {
    pub fn to_plot(&self, title: &str) -> Result<PlotDocument> {
        match self {
            ConfounderSummary::Density(d) => d.to_plot(title),
            ConfounderSummary::Frequency(f) => f.to_plot(title),
        }
    }
}

/// Per-S-level view of one covariate: kernel densities (bandwidth 1) for
/// numeric features, counts and within-level proportions for factors.
pub fn confounder_summary(table: &Table, spec: &ModelSpec, feature: &str) -> Result<ConfounderSummary> {
    let s = spec.s_name()?;
    if feature == spec.y_name || feature == s {
        return Err(invalid(format!("`{feature}` is the response or the sensitive column")));
    }
    let (s_codes, s_levels) = table.factor(s)?;
    match table.column(feature)?.data() {
        ColumnData::Numeric(_) => Ok(ConfounderSummary::Density(density_by_group(
            table,
            feature,
            Some(s),
            1.0,
        )?)),
        ColumnData::Factor { codes, levels } => {
            let mut groups = Vec::new();
            for (li, level) in s_levels.iter().enumerate() {
                let mut counts = vec![0usize; levels.len()];
                for (&sc, &fc) in s_codes.iter().zip(codes) {
                    if sc as usize == li {
                        counts[fc as usize] += 1;
                    }
                }
                let n: usize = counts.iter().sum();
                if n == 0 {
                    continue;
                }
                groups.push(FrequencyGroup {
                    group: level.clone(),
                    n,
                    proportions: counts.iter().map(|&c| c as f64 / n as f64).collect(),
                    counts,
                });
            }
            Ok(ConfounderSummary::Frequency(FrequencyByGroup {
                feature: feature.to_string(),
                levels: levels.clone(),
                groups,
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Column;

    fn small() -> Table {
        Table::new(
            "t",
            vec![
                Column::numeric("y", (0..10).map(|i| i as f64).collect()),
                Column::factor("s", &["a", "a", "b", "b", "a", "b", "a", "a", "b", "a"]),
                Column::factor("g", &["m", "f", "f", "m", "m", "f", "f", "m", "m", "m"]),
                Column::numeric("age", vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0]),
                Column::numeric("k", vec![1.0; 10]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn intersections_nest() {
        let y: Vec<String> = ["a", "b", "c", "d"].map(String::from).to_vec();
        let s: Vec<String> = ["c", "a", "d", "b"].map(String::from).to_vec();
        let ix = top_intersections(&y, &s, 4);
        assert_eq!(ix[0], Vec::<String>::new());
        assert_eq!(ix[1], vec!["a"]);
        assert_eq!(ix[2], vec!["a", "c"]);
        assert_eq!(ix[3].len(), 4);
    }

    #[test]
    fn two_level_dummies_negate() {
        let t = small();
        let spec = ModelSpec::new(&t, "y", Some("s")).unwrap();
        let m = hunt_proxies(&t, &spec).unwrap();
        assert_eq!(m.row_labels, vec!["s.a", "s.b"]);
        assert_eq!(m.column_labels, vec!["g.f", "g.m", "age", "k"]);
        for c in ["g.f", "g.m", "age"] {
            assert_eq!(m.get("s.a", c).unwrap(), -m.get("s.b", c).unwrap());
        }
        assert_eq!(m.get("s.a", "g.f").unwrap(), -m.get("s.a", "g.m").unwrap());
        assert_eq!(m.get("s.a", "k"), None);
        assert_eq!(m.flags.len(), 2);
        let csv = m.to_csv().unwrap();
        assert!(csv.starts_with(",g.f,g.m,age,k\n"));
        assert!(csv.contains(",NA\n"));
    }

    #[test]
    fn frequency_hand_tally() {
        let t = small();
        let spec = ModelSpec::new(&t, "y", Some("s")).unwrap();
        let ConfounderSummary::Frequency(f) = confounder_summary(&t, &spec, "g").unwrap() else {
            panic!("expected frequencies");
        };
        assert_eq!(f.levels, vec!["f", "m"]);
        // s = a rows: 0,1,4,6,7,9 with g m,f,m,f,m,m
        assert_eq!(f.groups[0].counts, vec![2, 4]);
        // s = b rows: 2,3,5,8 with g f,m,f,m
        assert_eq!(f.groups[1].counts, vec![2, 2]);
        for g in &f.groups {
            assert!((g.proportions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            confounder_summary(&t, &spec, "age").unwrap(),
            ConfounderSummary::Density(_)
        ));
        assert!(confounder_summary(&t, &spec, "y").is_err());
    }
}
