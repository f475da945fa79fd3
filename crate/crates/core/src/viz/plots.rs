use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{style_key, Layer, LayerKind, PlotDocument};
use crate::design::response;
use crate::error::{invalid, Error, Result};
use crate::neighbors::nearest;
use crate::table::{mean, sample_sd, ColumnData, Table};

pub const DISPARITY_GRID: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompareOp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

impl CompareOp {
    fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CompareOp::Lt => a < b,
            CompareOp::Le => a <= b,
            CompareOp::Gt => a > b,
            CompareOp::Ge => a >= b,
            CompareOp::Eq => a == b,
        }
    }
}

/// A row filter of the form `column op value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub column: String,
    pub op: CompareOp,
    pub value: String,
}

impl Condition {
    pub fn parse(text: &str) -> Result<Self> {
        const OPS: [(&str, CompareOp); 5] = [
            ("<=", CompareOp::Le),
            (">=", CompareOp::Ge),
            ("==", CompareOp::Eq),
            ("<", CompareOp::Lt),
            (">", CompareOp::Gt),
        ];
        for (sym, op) in OPS {
            if let Some(pos) = text.find(sym) {
                let column = text[..pos].trim();
                let value = text[pos + sym.len()..].trim().trim_matches(|c| c == '"' || c == '\'');
                if column.is_empty() || value.is_empty() {
                    break;
                }
                return Ok(Condition {
                    column: column.to_string(),
                    op,
                    value: value.to_string(),
                });
            }
        }
        Err(invalid(format!("cannot parse condition `{text}`; expected `column op value`")))
    }

    /// Row mask for this condition.
    pub fn mask(&self, table: &Table) -> Result<Vec<bool>> {
        let col = table.column(&self.column)?;
        match col.data() {
            ColumnData::Numeric(v) => {
                let b: f64 = self.value.parse().map_err(|_| {
                    invalid(format!("condition value `{}` is not a number", self.value))
                })?;
                Ok(v.iter().map(|&a| self.op.holds(a, b)).collect())
            }
            ColumnData::Factor { codes, levels } => {
                if self.op != CompareOp::Eq {
                    return Err(invalid(format!(
                        "factor column `{}` supports only ==",
                        self.column
                    )));
                }
                let target = levels.iter().position(|l| *l == self.value);
                Ok(codes.iter().map(|&c| Some(c as usize) == target).collect())
            }
        }
    }
}

pub(crate) fn apply_conditions(table: &Table, condits: &[Condition]) -> Result<Table> {
    let mut keep = vec![true; table.nrows()];
    for c in condits {
        for (k, m) in keep.iter_mut().zip(c.mask(table)?) {
            *k &= m;
        }
    }
    Ok(table.filter_rows(|i| keep[i]))
}

/// Row indices per observed level of a factor, in level order.
pub(crate) fn rows_by_level(table: &Table, s_name: &str) -> Result<Vec<(String, Vec<usize>)>> {
    let (codes, levels) = table.factor(s_name)?;
    let mut out: Vec<(String, Vec<usize>)> =
        levels.iter().map(|l| (l.clone(), Vec::new())).collect();
    for (i, &c) in codes.iter().enumerate() {
        out[c as usize].1.push(i);
    }
    out.retain(|(_, r)| !r.is_empty());
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DisparityCurve {
    pub group: String,
    pub n: usize,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DisparityCurves {
    pub y_name: String,
    pub x_name: String,
    pub s_name: String,
    pub k: usize,
    pub conditions: Vec<Condition>,
    pub curves: Vec<DisparityCurve>,
    pub warnings: Vec<String>,
}

impl DisparityCurves {
    pub fn to_plot(&self, title: &str) -> Result<PlotDocument> {
        let layers = self
            .curves
            .iter()
            .enumerate()
            .map(|(i, c)| Layer {
                kind: LayerKind::Curve,
                group_label: c.group.clone(),
                coordinates: c.grid.iter().zip(&c.values).map(|(&x, &y)| [x, y]).collect(),
                style_key: style_key(i),
            })
            .collect();
        PlotDocument::from_layers(title, &self.x_name, &self.y_name, layers)
    }
}

/// kNN mean of `y` at `at`, using the k values of `x` closest to it.
pub(crate) fn knn_smooth(x: &[f64], y: &[f64], k: usize, at: f64) -> f64 {
    let nb = nearest(x, 1, &[at], k);
    nb.iter().map(|&j| y[j]).sum::<f64>() / nb.len() as f64
}

/// Per-level kNN smooth of `y` against `x` after filtering rows by `condits`.
pub fn condit_disparity(
    table: &Table,
    y_name: &str,
    s_name: &str,
    x_name: &str,
    condits: &[Condition],
    k: usize,
) -> Result<DisparityCurves> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    let filtered = apply_conditions(table, condits)?;
    let x = filtered.numeric(x_name)?;
    let y = response(&filtered, y_name)?.values;
    let mut warnings = Vec::new();
    let mut usable = Vec::new();
    for (level, rows) in rows_by_level(&filtered, s_name)? {
        if rows.len() < k {
            warnings.push(format!(
                "level `{level}` skipped: {} rows after filtering, fewer than k = {k}",
                rows.len()
            ));
        } else {
            usable.push((level, rows));
        }
    }
    let curves = usable
        .par_iter()
        .map(|(level, rows)| {
            let xs: Vec<f64> = rows.iter().map(|&i| x[i]).collect();
            let ys: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let step = (hi - lo) / (DISPARITY_GRID - 1) as f64;
            let grid: Vec<f64> = (0..DISPARITY_GRID).map(|i| lo + step * i as f64).collect();
            let values = grid.iter().map(|&g| knn_smooth(&xs, &ys, k, g)).collect();
            DisparityCurve {
                group: level.clone(),
                n: rows.len(),
                grid,
                values,
            }
        })
        .collect();
    Ok(DisparityCurves {
        y_name: y_name.to_string(),
        x_name: x_name.to_string(),
        s_name: s_name.to_string(),
        k,
        conditions: condits.to_vec(),
        curves,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ParCoordResult {
    pub columns: Vec<String>,
    /// Selected original row indices per level, most typical first.
    pub selected: Vec<(String, Vec<usize>)>,
    pub warnings: Vec<String>,
    pub document: PlotDocument,
}

fn column_values(table: &Table, name: &str) -> Result<Vec<f64>> {
    Ok(match table.column(name)?.data() {
        ColumnData::Numeric(v) => v.clone(),
        ColumnData::Factor { codes, .. } => codes.iter().map(|&c| c as f64).collect(),
    })
}

/// Ranks rows by the distance to their k-th nearest other row, ascending,
/// ties by index. `points` is row-major with `dim` columns.
pub fn kth_neighbor_ranking(points: &[f64], dim: usize, k: usize) -> Vec<(usize, f64)> {
    let n = points.len() / dim;
    let mut scored: Vec<(usize, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let q = &points[i * dim..(i + 1) * dim];
            // the row itself sits at distance 0, so the (k+1)-th neighbor
            // overall is the k-th other row
            let nb = nearest(points, dim, q, k + 1);
            let j = nb[k];
            let d2: f64 = points[j * dim..(j + 1) * dim]
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (i, d2.sqrt())
        })
        .collect();
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    scored
}

/// Draws the `m` most typical rows of each level as polylines across
/// within-level standardized columns. Factor columns enter as level codes.
pub fn freq_par_coord(
    table: &Table,
    columns: Option<&[String]>,
    m: usize,
    s_name: &str,
    k: usize,
) -> Result<ParCoordResult> {
    if m == 0 || k == 0 {
        return Err(invalid("m and k must be positive"));
    }
    table.factor(s_name)?;
    let columns: Vec<String> = match columns {
        Some(c) => c.to_vec(),
        None => table
            .names()
            .into_iter()
            .filter(|n| *n != s_name)
            .map(str::to_string)
            .collect(),
    };
    if columns.iter().any(|c| c == s_name) {
        return Err(invalid("the grouping column cannot also be plotted"));
    }
    if columns.len() < 2 {
        return Err(invalid("parallel coordinates need at least 2 columns besides S"));
    }
    let values: Vec<Vec<f64>> =
        columns.iter().map(|c| column_values(table, c)).collect::<Result<_>>()?;
    let p = columns.len();
    let mut warnings = Vec::new();
    let mut work = Vec::new();
    for (level, rows) in rows_by_level(table, s_name)? {
        if rows.len() <= k {
            warnings.push(format!(
                "level `{level}` skipped: {} rows, need more than k = {k}",
                rows.len()
            ));
            continue;
        }
        if m > rows.len() {
            warnings.push(format!(
                "level `{level}`: m = {m} clamped to {} rows",
                rows.len()
            ));
        }
        work.push((level, rows));
    }
    let per_level: Vec<(String, Vec<usize>, Vec<Vec<f64>>)> = work
        .par_iter()
        .map(|(level, rows)| {
            let mut z = vec![0.0; rows.len() * p];
            for (j, col) in values.iter().enumerate() {
                let v: Vec<f64> = rows.iter().map(|&i| col[i]).collect();
                let mu = mean(&v);
                let sd = sample_sd(&v);
                let sd = if sd > 0.0 { sd } else { 1.0 };
                for (r, x) in v.iter().enumerate() {
                    z[r * p + j] = (x - mu) / sd;
                }
            }
            let ranked = kth_neighbor_ranking(&z, p, k);
            let take = m.min(rows.len());
            let chosen: Vec<usize> = ranked[..take].iter().map(|(r, _)| *r).collect();
            let lines = chosen.iter().map(|&r| z[r * p..(r + 1) * p].to_vec()).collect();
            (level.clone(), chosen.iter().map(|&r| rows[r]).collect(), lines)
        })
        .collect();
    let mut layers = Vec::new();
    for (li, (level, _, lines)) in per_level.iter().enumerate() {
        for line in lines {
            layers.push(Layer {
                kind: LayerKind::Polyline,
                group_label: level.clone(),
                coordinates: line.iter().enumerate().map(|(j, &v)| [j as f64, v]).collect(),
                style_key: style_key(li),
            });
        }
    }
    let mut document = PlotDocument::from_layers(
        format!("Typical patterns by {s_name}"),
        "variable",
        "standardized value",
        layers,
    )?;
    let x_axis = &mut document.axes[0];
    x_axis.range = [-0.25, p as f64 - 0.75];
    x_axis.tick_positions = (0..p).map(|j| j as f64).collect();
    x_axis.tick_labels = Some(columns.clone());
    x_axis.grid = true;
    Ok(ParCoordResult {
        columns,
        selected: per_level.into_iter().map(|(l, rows, _)| (l, rows)).collect(),
        warnings,
        document,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterTuple {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub level: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Scatter3d {
    pub names: [String; 3],
    pub s_name: String,
    pub tuples: Vec<ScatterTuple>,
    pub document: PlotDocument,
}

impl Scatter3d {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([&self.names[0], &self.names[1], &self.names[2], &self.s_name])?;
        for t in &self.tuples {
            w.write_record([
                t.x.to_string(),
                t.y.to_string(),
                t.z.to_string(),
                t.level.clone(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
    }
}

/// Orthographic view from azimuth 45°, elevation 30° of a point in the unit cube.
pub fn project_isometric(x: f64, y: f64, z: f64) -> [f64; 2] {
    let (sa, ca) = 45f64.to_radians().sin_cos();
    let (se, ce) = 30f64.to_radians().sin_cos();
    let u = ca * x - sa * y;
    let depth = sa * x + ca * y;
    [u, ce * z - se * depth]
}

fn unit_scale(v: &[f64]) -> Vec<f64> {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        v.iter().map(|x| (x - lo) / (hi - lo)).collect()
    } else {
        vec![0.5; v.len()]
    }
}

pub fn scatter_3d(
    table: &Table,
    names: [&str; 3],
    s_name: &str,
    point_size: f64,
) -> Result<Scatter3d> {
    if !(point_size > 0.0 && point_size.is_finite()) {
        return Err(invalid("point size must be positive"));
    }
    let raw: Vec<&[f64]> = names.iter().map(|n| table.numeric(n)).collect::<Result<_>>()?;
    let unit: Vec<Vec<f64>> = raw.iter().map(|v| unit_scale(v)).collect();
    let (codes, levels) = table.factor(s_name)?;
    let tuples = (0..table.nrows())
        .map(|i| ScatterTuple {
            x: raw[0][i],
            y: raw[1][i],
            z: raw[2][i],
            level: levels[codes[i] as usize].clone(),
        })
        .collect();
    let layers = rows_by_level(table, s_name)?
        .into_iter()
        .enumerate()
        .map(|(li, (level, rows))| Layer {
            kind: LayerKind::Points,
            group_label: level,
            coordinates: rows
                .iter()
                .map(|&i| project_isometric(unit[0][i], unit[1][i], unit[2][i]))
                .collect(),
            style_key: style_key(li),
        })
        .collect();
    let mut document = PlotDocument::from_layers(
        format!("{} / {} / {} by {s_name}", names[0], names[1], names[2]),
        format!("{} − {} (azimuth 45°)", names[0], names[1]),
        format!("{} (elevation 30°)", names[2]),
        layers,
    )?;
    document.point_size = Some(point_size);
    Ok(Scatter3d {
        names: names.map(str::to_string),
        s_name: s_name.to_string(),
        tuples,
        document,
    })
}
