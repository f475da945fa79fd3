//! Renderer-independent plot documents and the figure builders that fill them.

mod density;
mod plots;
mod svg;

pub use density::{density_by_group, kde_at, DensityByGroup, DensityCurve, DENSITY_GRID};
pub use plots::{
    condit_disparity, freq_par_coord, kth_neighbor_ranking, project_isometric, scatter_3d,
    CompareOp, Condition, DisparityCurve, DisparityCurves, ParCoordResult, Scatter3d,
    ScatterTuple, DISPARITY_GRID,
};
pub use svg::render_svg;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Axis {
    pub label: String,
    pub range: [f64; 2],
    pub tick_positions: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tick_labels: Option<Vec<String>>,
    /// Draw a guide line across the plot at each tick.
    pub grid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Curve,
    Points,
    Polyline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Layer {
    pub kind: LayerKind,
    pub group_label: String,
    pub coordinates: Vec<[f64; 2]>,
    pub style_key: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LegendEntry {
    pub group: String,
    pub style_key: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PlotDocument {
    pub title: String,
    /// `axes[0]` is horizontal, `axes[1]` vertical.
    pub axes: Vec<Axis>,
    pub layers: Vec<Layer>,
    pub legend: Vec<LegendEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point_size: Option<f64>,
}

/// Round tick positions spanning [lo, hi], roughly `target` of them.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    let scale = 10f64.powi((2 - step.log10().floor() as i32).max(0));
    (first..=last)
        .map(|i| (i as f64 * step * scale).round() / scale)
        .filter(|v| *v >= lo && *v <= hi)
        .collect()
}

fn padded(lo: f64, hi: f64) -> [f64; 2] {
    if hi > lo {
        let pad = 0.04 * (hi - lo);
        [lo - pad, hi + pad]
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        [lo - pad, hi + pad]
    }
}

impl PlotDocument {
    /// Builds a document whose axis ranges enclose every coordinate and whose
    /// legend lists each group once, in first-appearance order. Non-finite
    /// coordinates are rejected.
    pub fn from_layers(
        title: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
        layers: Vec<Layer>,
    ) -> Result<Self> {
        let mut xr = [f64::INFINITY, f64::NEG_INFINITY];
        let mut yr = [f64::INFINITY, f64::NEG_INFINITY];
        for layer in &layers {
            for &[x, y] in &layer.coordinates {
                if !x.is_finite() || !y.is_finite() {
                    return Err(invalid(format!(
                        "non-finite coordinate in layer `{}`",
                        layer.group_label
                    )));
                }
                xr = [xr[0].min(x), xr[1].max(x)];
                yr = [yr[0].min(y), yr[1].max(y)];
            }
        }
        if !xr[0].is_finite() {
            xr = [0.0, 1.0];
            yr = [0.0, 1.0];
        }
        let xr = padded(xr[0], xr[1]);
        let yr = padded(yr[0], yr[1]);
        let mut legend: Vec<LegendEntry> = Vec::new();
        for layer in &layers {
            if !legend.iter().any(|e| e.group == layer.group_label) {
                legend.push(LegendEntry {
                    group: layer.group_label.clone(),
                    style_key: layer.style_key.clone(),
                });
            }
        }
        Ok(PlotDocument {
            title: title.into(),
            axes: vec![
                Axis {
                    label: x_label.into(),
                    range: xr,
                    tick_positions: nice_ticks(xr[0], xr[1], 6),
                    tick_labels: None,
                    grid: false,
                },
                Axis {
                    label: y_label.into(),
                    range: yr,
                    tick_positions: nice_ticks(yr[0], yr[1], 5),
                    tick_labels: None,
                    grid: false,
                },
            ],
            layers,
            legend,
            point_size: None,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub(crate) fn style_key(i: usize) -> String {
    format!("s{i}")
}
