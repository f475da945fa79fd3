use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{style_key, Layer, LayerKind, PlotDocument};
use crate::error::{invalid, Result};
use crate::table::Table;

pub const DENSITY_GRID: usize = 512;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Gaussian kernel density estimate at `x`.
pub fn kde_at(data: &[f64], h: f64, x: f64) -> f64 {
    let s: f64 = data
        .iter()
        .map(|&xi| {
            let u = (x - xi) / h;
            (-0.5 * u * u).exp()
        })
        .sum();
    s * INV_SQRT_2PI / (data.len() as f64 * h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DensityCurve {
    pub group: String,
    pub n: usize,
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DensityByGroup {
    pub variable: String,
    pub bandwidth: f64,
    pub grid: Vec<f64>,
    pub curves: Vec<DensityCurve>,
}

impl DensityByGroup {
    /// Trapezoidal integral of each curve over the grid.
    pub fn integrals(&self) -> Vec<f64> {
        self.curves
            .iter()
            .map(|c| {
                self.grid
                    .windows(2)
                    .zip(c.density.windows(2))
                    .map(|(g, d)| 0.5 * (g[1] - g[0]) * (d[0] + d[1]))
                    .sum()
            })
            .collect()
    }

    pub fn to_plot(&self, title: &str) -> Result<PlotDocument> {
        let layers = self
            .curves
            .iter()
            .enumerate()
            .map(|(i, c)| Layer {
                kind: LayerKind::Curve,
                group_label: c.group.clone(),
                coordinates: self.grid.iter().zip(&c.density).map(|(&x, &y)| [x, y]).collect(),
                style_key: style_key(i),
            })
            .collect();
        PlotDocument::from_layers(title, &self.variable, "density", layers)
    }
}

/// Per-level kernel density of a numeric column on a shared grid. With no
/// grouping column the whole column forms one group named `all`.
pub fn density_by_group(
    table: &Table,
    c_name: &str,
    s_name: Option<&str>,
    bandwidth: f64,
) -> Result<DensityByGroup> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(invalid(format!("bandwidth must be positive, got {bandwidth}")));
    }
    let x = table.numeric(c_name)?;
    let groups: Vec<(String, Vec<f64>)> = match s_name {
        None => vec![("all".to_string(), x.to_vec())],
        Some(s) => {
            let (codes, levels) = table.factor(s)?;
            levels
                .iter()
                .enumerate()
                .map(|(li, l)| {
                    let vals = codes
                        .iter()
                        .zip(x)
                        .filter(|(c, _)| **c as usize == li)
                        .map(|(_, v)| *v)
                        .collect();
                    (l.clone(), vals)
                })
                .filter(|(_, v): &(String, Vec<f64>)| !v.is_empty())
                .collect()
        }
    };
    if let Some((l, v)) = groups.iter().find(|(_, v)| v.len() < 2) {
        return Err(invalid(format!("level `{l}` has {} row(s); density needs at least 2", v.len())));
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * bandwidth;
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * bandwidth;
    let step = (hi - lo) / (DENSITY_GRID - 1) as f64;
    let grid: Vec<f64> = (0..DENSITY_GRID).map(|i| lo + step * i as f64).collect();
    let curves = groups
        .par_iter()
        .map(|(l, v)| DensityCurve {
            group: l.clone(),
            n: v.len(),
            density: grid.iter().map(|&g| kde_at(v, bandwidth, g)).collect(),
        })
        .collect();
    Ok(DensityByGroup {
        variable: c_name.to_string(),
        bandwidth,
        grid,
        curves,
    })
}
