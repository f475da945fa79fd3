//! Command-line front end. Every subcommand reads one CSV, writes its results
//! into `--out-dir`, and records the invocation in `manifest.json`.
//!
//! Exit codes: 0 success, 1 data or model error, 2 usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::bias::{confounder_summary, hunt_confounders, hunt_proxies};
use crate::causal::{iamb, matched_ate, Propensity};
use crate::design::ModelSpec;
use crate::error::{invalid, Error, Result};
use crate::fair::{
    evaluate_fairness, fit_edf, fit_fair_ridge, EdfFactory, EdfHyper, EdfMethod, Family,
    FairRidgeFactory, ModelFactory,
};
use crate::forest::{fit_forest, permutation_importance, ForestParams};
use crate::linear::{fit_linear_s, ModelReport};
use crate::logistic::fit_logit_s;
use crate::model_io::SavedModel;
use crate::neighbors::{fit_knn, DEFAULT_K};
use crate::table::{load_csv, make_holdout, Column, ColumnData, HoldoutSize, LoadedTable, Table};
use crate::viz::{
    condit_disparity, density_by_group, freq_par_coord, render_svg, scatter_3d, Condition,
};

pub const SEED_ENV: &str = "FAIRSCOPE_SEED";
const DEFAULT_SEED: u64 = 1;
const SVG_WIDTH: u32 = 800;
const SVG_HEIGHT: u32 = 560;

#[derive(Parser, Debug)]
#[command(name = "fairscope", version, about = "Discrimination analysis and fair prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Input CSV file.
    #[arg(long, value_name = "CSV")]
    data: PathBuf,
    /// Directory for outputs (created if missing).
    #[arg(long, value_name = "DIR", default_value = "fairscope-out")]
    out_dir: PathBuf,
    /// Random seed; falls back to $FAIRSCOPE_SEED, then 1.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write tabular results as CSV.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum FamilyArg {
    Linear,
    Logistic,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum PropensityArg {
    None,
    Logit,
    Knn,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum EvalMethod {
    FairRidge,
    FairKnn,
    FairLin,
    FairForest,
}

fn parse_deweight(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, w) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=weight, got `{s}`"))?;
    let w: f64 = w.trim().parse().map_err(|_| format!("weight in `{s}` is not a number"))?;
    if name.trim().is_empty() {
        return Err(format!("missing column name in `{s}`"));
    }
    Ok((name.trim().to_string(), w))
}

fn parse_condition(s: &str) -> std::result::Result<Condition, String> {
    Condition::parse(s).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct YS {
    /// Response column.
    #[arg(long)]
    y: String,
    /// Sensitive column.
    #[arg(long)]
    s: String,
}

#[derive(Args, Debug)]
struct ForestArgs {
    #[arg(long, default_value_t = 100)]
    trees: usize,
    /// Features tried per split (default ⌈√p⌉).
    #[arg(long)]
    mtry: Option<usize>,
    #[arg(long, default_value_t = 5)]
    min_node: usize,
}

impl ForestArgs {
    fn params(&self, seed: u64) -> ForestParams {
        ForestParams {
            n_trees: self.trees,
            mtry: self.mtry,
            min_node_size: self.min_node,
            seed,
            ..Default::default()
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Linear model with sensitive-level comparisons.
    Lin {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ys: YS,
        /// Fit a separate model per S level.
        #[arg(long)]
        interactions: bool,
        /// CSV of covariate rows at which to compare levels.
        #[arg(long, value_name = "CSV")]
        compare_points: Option<PathBuf>,
        /// Heteroskedasticity-robust (HC0) standard errors.
        #[arg(long)]
        sandwich: bool,
    },
    /// Logistic model with sensitive-level comparisons.
    Logit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ys: YS,
        #[arg(long)]
        interactions: bool,
        #[arg(long, value_name = "CSV")]
        compare_points: Option<PathBuf>,
    },
    /// k-nearest-neighbor regression on all other columns.
    Knn {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long, value_name = "CSV")]
        predict: Option<PathBuf>,
    },
    /// Random forest on all other columns.
    Forest {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        y: String,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long, value_name = "CSV")]
        predict: Option<PathBuf>,
        /// Holdout permutation importance with this many repeats.
        #[arg(long)]
        importance: Option<usize>,
    },
    /// Confounder hunting: features important for both Y and S.
    Chunt {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ys: YS,
        /// Report top-i intersections for i = 1..depth (default min(10, p)).
        #[arg(long)]
        intersect_depth: Option<usize>,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
    /// Proxy hunting: Kendall tau of each S level against every feature.
    Ohunt {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ys: YS,
    },
    /// Per-level densities or frequencies of covariates.
    Confounders {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ys: YS,
        /// Only this covariate (default: all).
        #[arg(long)]
        feature: Option<String>,
    },
    /// Ridge fit with a bounded share of S in the linear predictor.
    FairRidge {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ys: YS,
        /// Budget in (0, 1]; 1 is unconstrained.
        #[arg(long)]
        unfairness: f64,
        /// Default: logistic for a binary response, else linear.
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        #[arg(long, value_name = "CSV")]
        predict: Option<PathBuf>,
    },
    /// kNN without S and with deweighted proxies.
    FairKnn {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ys: YS,
        /// Proxy weight in [0, 1], repeatable.
        #[arg(long, value_name = "NAME=W", value_parser = parse_deweight)]
        deweight: Vec<(String, f64)>,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long, value_name = "CSV")]
        predict: Option<PathBuf>,
    },
    /// Ridge without S and with per-proxy penalties.
    FairLin {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ys: YS,
        #[arg(long, value_name = "NAME=W", value_parser = parse_deweight)]
        deweight: Vec<(String, f64)>,
        #[arg(long, value_name = "CSV")]
        predict: Option<PathBuf>,
    },
    /// Random forest without S and with reduced proxy split probabilities.
    FairForest {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ys: YS,
        #[arg(long, value_name = "NAME=W", value_parser = parse_deweight)]
        deweight: Vec<(String, f64)>,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long, value_name = "CSV")]
        predict: Option<PathBuf>,
    },
    /// Fairness and utility of a fair method over repeated holdouts.
    Eval {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ys: YS,
        #[arg(long, value_enum)]
        method: EvalMethod,
        #[arg(long, default_value_t = 1.0)]
        unfairness: f64,
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        #[arg(long, value_name = "NAME=W", value_parser = parse_deweight)]
        deweight: Vec<(String, f64)>,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long, default_value_t = 5)]
        replications: usize,
    },
    /// Matched-pairs average treatment effect on the treated.
    Match {
        #[command(flatten)]
        common: Common,
        /// Outcome column.
        #[arg(long)]
        y: String,
        /// Two-level treatment column.
        #[arg(long)]
        s: String,
        /// Level of --s that counts as treated.
        #[arg(long)]
        treat: String,
        #[arg(long, value_enum, default_value_t = PropensityArg::None)]
        propensity: PropensityArg,
        /// Neighbors for --propensity knn.
        #[arg(long, default_value_t = 50)]
        k: usize,
    },
    /// IAMB structure discovery over all columns.
    Iamb {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Per-level kNN smooth of Y against one covariate.
    PlotDisparity {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ys: YS,
        /// Numeric covariate on the horizontal axis.
        #[arg(long)]
        x: String,
        /// Row filter `column op value`, repeatable.
        #[arg(long, value_parser = parse_condition)]
        condit: Vec<Condition>,
        #[arg(long, default_value_t = 50)]
        k: usize,
    },
    /// Kernel density of a numeric column per S level.
    PlotDensity {
        #[command(flatten)]
        common: Common,
        /// Numeric column.
        #[arg(long)]
        feature: String,
        #[arg(long)]
        s: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        bandwidth: f64,
    },
    /// Most typical rows per S level as parallel coordinates.
    PlotParcoord {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        s: String,
        /// Comma-separated columns (default: all but S).
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<String>>,
        #[arg(long, default_value_t = 75)]
        m: usize,
        #[arg(long, default_value_t = 50)]
        k: usize,
    },
    /// Three numeric columns per S level, isometric projection.
    PlotScatter3d {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        s: String,
        /// Exactly three comma-separated numeric columns.
        #[arg(long, value_delimiter = ',', num_args = 1, required = true)]
        coords: Vec<String>,
        #[arg(long, default_value_t = 4.0)]
        point_size: f64,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Lin { common, .. }
            | Command::Logit { common, .. }
            | Command::Knn { common, .. }
            | Command::Forest { common, .. }
            | Command::Chunt { common, .. }
            | Command::Ohunt { common, .. }
            | Command::Confounders { common, .. }
            | Command::FairRidge { common, .. }
            | Command::FairKnn { common, .. }
            | Command::FairLin { common, .. }
            | Command::FairForest { common, .. }
            | Command::Eval { common, .. }
            | Command::Match { common, .. }
            | Command::Iamb { common, .. }
            | Command::PlotDisparity { common, .. }
            | Command::PlotDensity { common, .. }
            | Command::PlotParcoord { common, .. }
            | Command::PlotScatter3d { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Lin { .. } => "lin",
            Command::Logit { .. } => "logit",
            Command::Knn { .. } => "knn",
            Command::Forest { .. } => "forest",
            Command::Chunt { .. } => "chunt",
            Command::Ohunt { .. } => "ohunt",
            Command::Confounders { .. } => "confounders",
            Command::FairRidge { .. } => "fair-ridge",
            Command::FairKnn { .. } => "fair-knn",
            Command::FairLin { .. } => "fair-lin",
            Command::FairForest { .. } => "fair-forest",
            Command::Eval { .. } => "eval",
            Command::Match { .. } => "match",
            Command::Iamb { .. } => "iamb",
            Command::PlotDisparity { .. } => "plot-disparity",
            Command::PlotDensity { .. } => "plot-density",
            Command::PlotParcoord { .. } => "plot-parcoord",
            Command::PlotScatter3d { .. } => "plot-scatter3d",
        }
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct InputRecord {
    role: String,
    path: String,
    sha256: String,
}

struct Session {
    dir: PathBuf,
    outputs: Vec<String>,
    inputs: Vec<InputRecord>,
    format: Format,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

impl Session {
    fn load(&mut self, role: &str, path: &Path) -> Result<LoadedTable> {
        self.inputs.push(InputRecord {
            role: role.to_string(),
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        load_csv(path)
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.write(name, &text)
    }

    fn csv(&self) -> bool {
        self.format == Format::Csv
    }
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn predictions_csv(values: &[f64]) -> Result<String> {
    let rows: Vec<Vec<String>> = values
        .iter()
        .enumerate()
        .map(|(i, v)| vec![(i + 1).to_string(), v.to_string()])
        .collect();
    csv_text(&strings(&["row", "prediction"]), &rows)
}

fn report_csvs(session: &mut Session, report: &ModelReport) -> Result<()> {
    let rows: Vec<Vec<String>> = report
        .coefficients
        .iter()
        .map(|c| {
            vec![
                c.level.clone().unwrap_or_default(),
                c.covariate.clone(),
                c.estimate.to_string(),
                c.standard_error.to_string(),
                c.p_value.to_string(),
            ]
        })
        .collect();
    let text = csv_text(&strings(&["level", "covariate", "estimate", "standard_error", "p_value"]), &rows)?;
    session.write("coefficients.csv", &text)?;
    let rows: Vec<Vec<String>> = report
        .s_comparisons
        .iter()
        .map(|c| {
            vec![
                c.factors_compared.clone(),
                c.comparison_point.as_ref().map_or(String::new(), |p| p.index.to_string()),
                c.estimate.to_string(),
                c.standard_error.to_string(),
                c.p_value.to_string(),
            ]
        })
        .collect();
    let text = csv_text(
        &strings(&["factors_compared", "comparison_point", "estimate", "standard_error", "p_value"]),
        &rows,
    )?;
    session.write("comparisons.csv", &text)
}

fn family_for(table: &Table, y: &str, arg: Option<FamilyArg>) -> Result<Family> {
    Ok(match arg {
        Some(FamilyArg::Linear) => Family::Linear,
        Some(FamilyArg::Logistic) => Family::Logistic,
        None => {
            if crate::design::response(table, y)?.is_binary() {
                Family::Logistic
            } else {
                Family::Linear
            }
        }
    })
}

fn deweight_map(pairs: &[(String, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().cloned().collect()
}

fn svg_name(stem: &str) -> String {
    let safe: String = stem
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{safe}.svg")
}

/// Numeric columns pass through; a 2-level factor becomes 0/1 under its own
/// name; a factor with more levels becomes one indicator per non-reference
/// level, named `column.level`.
pub fn coerce_numeric(table: &Table) -> Result<Table> {
    let mut cols = Vec::new();
    for c in table.columns() {
        match c.data() {
            ColumnData::Numeric(_) => cols.push(c.clone()),
            ColumnData::Factor { codes, levels } => {
                let observed = c.observed_levels();
                if observed.len() < 2 {
                    return Err(Error::SingleLevelFactor(c.name().to_string()));
                }
                let indicator = |level: &str| -> Vec<f64> {
                    codes.iter().map(|&k| f64::from(levels[k as usize] == level)).collect()
                };
                if observed.len() == 2 {
                    cols.push(Column::numeric(c.name(), indicator(&observed[1])));
                } else {
                    for l in &observed[1..] {
                        cols.push(Column::numeric(format!("{}.{l}", c.name()), indicator(l)));
                    }
                }
            }
        }
    }
    Table::new(table.name(), cols)
}

fn execute(cmd: &Command, session: &mut Session, seed: u64) -> Result<()> {
    let data = session.load("data", &cmd.common().data)?.table;
    match cmd {
        Command::Lin { ys, interactions, compare_points, sandwich, .. } => {
            let spec = ModelSpec::new(&data, &ys.y, Some(&ys.s))?;
            let points = match compare_points {
                Some(p) => Some(session.load("compare-points", p)?.table),
                None => None,
            };
            let model = fit_linear_s(&data, &spec, *interactions, *sandwich)?;
            let report = model.report(points.as_ref(), *sandwich)?;
            session.json("report.json", &report)?;
            if session.csv() {
                report_csvs(session, &report)?;
            }
        }
        Command::Logit { ys, interactions, compare_points, .. } => {
            let spec = ModelSpec::new(&data, &ys.y, Some(&ys.s))?;
            let points = match compare_points {
                Some(p) => Some(session.load("compare-points", p)?.table),
                None => None,
            };
            let report = fit_logit_s(&data, &spec, *interactions)?.report(points.as_ref())?;
            session.json("report.json", &report)?;
            if session.csv() {
                report_csvs(session, &report)?;
            }
        }
        Command::Knn { y, k, predict, .. } => {
            let spec = ModelSpec::new(&data, y, None)?;
            let model = SavedModel::Knn(fit_knn(&data, &spec, *k, &BTreeMap::new())?);
            finish_model(session, &model, predict.as_deref())?;
        }
        Command::Forest { y, forest, predict, importance, .. } => {
            let spec = ModelSpec::new(&data, y, None)?;
            let params = forest.params(seed);
            if let Some(repeats) = importance {
                let split = make_holdout(data.nrows(), HoldoutSize::Default, seed)?;
                let train = data.take(&split.train);
                let f = fit_forest(&train, &spec, &params)?;
                let imp = permutation_importance(&f, &data.take(&split.holdout), y, *repeats, seed)?;
                session.json("importance.json", &imp.sorted())?;
            }
            let model = SavedModel::Forest(fit_forest(&data, &spec, &params)?);
            finish_model(session, &model, predict.as_deref())?;
        }
        Command::Chunt { ys, intersect_depth, forest, repeats, .. } => {
            let spec = ModelSpec::new(&data, &ys.y, Some(&ys.s))?;
            let depth = intersect_depth.unwrap_or(spec.x_names.len().min(10));
            let report = hunt_confounders(&data, &spec, depth, &forest.params(seed), *repeats)?;
            session.json("confounders.json", &report)?;
            if session.csv() {
                let rows: Vec<Vec<String>> = report
                    .imp_for_y
                    .features
                    .iter()
                    .map(|f| {
                        let s = report.imp_for_s.score_of(f).unwrap_or(f64::NAN);
                        vec![f.clone(), report.imp_for_y.score_of(f).unwrap_or(f64::NAN).to_string(), s.to_string()]
                    })
                    .collect();
                let text = csv_text(&strings(&["feature", "imp_for_y", "imp_for_s"]), &rows)?;
                session.write("importance.csv", &text)?;
            }
        }
        Command::Ohunt { ys, .. } => {
            let spec = ModelSpec::new(&data, &ys.y, Some(&ys.s))?;
            let tau = hunt_proxies(&data, &spec)?;
            session.json("tau.json", &tau)?;
            session.write("tau.csv", &tau.to_csv()?)?;
        }
        Command::Confounders { ys, feature, .. } => {
            let spec = ModelSpec::new(&data, &ys.y, Some(&ys.s))?;
            let features = match feature {
                Some(f) => vec![f.clone()],
                None => spec.x_names.clone(),
            };
            let mut all = BTreeMap::new();
            for f in &features {
                let summary = confounder_summary(&data, &spec, f)?;
                let doc = summary.to_plot(&format!("{f} by {}", ys.s))?;
                session.write(&svg_name(&format!("confounder-{f}")), &render_svg(&doc, SVG_WIDTH, SVG_HEIGHT)?)?;
                all.insert(f.clone(), json!({ "summary": summary, "plot": doc }));
            }
            session.json("confounders.json", &all)?;
        }
        Command::FairRidge { ys, unfairness, family, predict, .. } => {
            let spec = ModelSpec::new(&data, &ys.y, Some(&ys.s))?;
            let fam = family_for(&data, &ys.y, *family)?;
            let model = SavedModel::FairRidge(fit_fair_ridge(&data, &spec, *unfairness, fam)?);
            finish_model(session, &model, predict.as_deref())?;
        }
        Command::FairKnn { ys, deweight, k, predict, .. } => {
            let spec = ModelSpec::new(&data, &ys.y, Some(&ys.s))?;
            let hyper = EdfHyper { k: *k, ..Default::default() };
            let m = fit_edf(&data, &spec, EdfMethod::Knn, &deweight_map(deweight), &hyper, seed)?;
            finish_model(session, &SavedModel::Edf(m), predict.as_deref())?;
        }
        Command::FairLin { ys, deweight, predict, .. } => {
            let spec = ModelSpec::new(&data, &ys.y, Some(&ys.s))?;
            let m = fit_edf(&data, &spec, EdfMethod::Linear, &deweight_map(deweight), &EdfHyper::default(), seed)?;
            finish_model(session, &SavedModel::Edf(m), predict.as_deref())?;
        }
        Command::FairForest { ys, deweight, forest, predict, .. } => {
            let spec = ModelSpec::new(&data, &ys.y, Some(&ys.s))?;
            let hyper = EdfHyper { forest: forest.params(seed), ..Default::default() };
            let m = fit_edf(&data, &spec, EdfMethod::Forest, &deweight_map(deweight), &hyper, seed)?;
            finish_model(session, &SavedModel::Edf(m), predict.as_deref())?;
        }
        Command::Eval { ys, method, unfairness, family, deweight, k, replications, .. } => {
            let spec = ModelSpec::new(&data, &ys.y, Some(&ys.s))?;
            let hyper = EdfHyper { k: *k, ..Default::default() };
            let edf = |m| -> Box<dyn ModelFactory> {
                Box::new(EdfFactory { method: m, deweights: deweight_map(deweight), hyper: hyper.clone() })
            };
            let factory: Box<dyn ModelFactory> = match method {
                EvalMethod::FairRidge => Box::new(FairRidgeFactory {
                    unfairness: *unfairness,
                    family: family_for(&data, &ys.y, *family)?,
                }),
                EvalMethod::FairKnn => edf(EdfMethod::Knn),
                EvalMethod::FairLin => edf(EdfMethod::Linear),
                EvalMethod::FairForest => edf(EdfMethod::Forest),
            };
            let report = evaluate_fairness(&data, &spec, factory.as_ref(), *replications, HoldoutSize::Default, seed)?;
            session.json("eval.json", &report)?;
            session.write("eval.csv", &report.to_csv()?)?;
        }
        Command::Match { y, s, treat, propensity, k, .. } => {
            let spec = ModelSpec::new(&data, y, Some(s))?;
            let p = match propensity {
                PropensityArg::None => Propensity::None,
                PropensityArg::Logit => Propensity::Logit,
                PropensityArg::Knn => Propensity::Knn { k: *k },
            };
            let r = matched_ate(&data, &spec, treat, p)?;
            session.json("match.json", &r)?;
            if session.csv() {
                let row = vec![
                    r.estimate.to_string(),
                    r.standard_error.to_string(),
                    r.t_stat.to_string(),
                    r.p_value.to_string(),
                    r.n_original.to_string(),
                    r.n_treated.to_string(),
                    r.n_matched.to_string(),
                ];
                let header = strings(&["estimate", "standard_error", "t_stat", "p_value", "n_original", "n_treated", "n_matched"]);
                session.write("match.csv", &csv_text(&header, &[row])?)?;
            }
        }
        Command::Iamb { alpha, .. } => {
            let graph = iamb(&coerce_numeric(&data)?, *alpha)?;
            session.json("graph.json", &graph)?;
            session.write("graph.dot", &graph.to_dot())?;
        }
        Command::PlotDisparity { ys, x, condit, k, .. } => {
            let curves = condit_disparity(&data, &ys.y, &ys.s, x, condit, *k)?;
            for w in &curves.warnings {
                eprintln!("warning: {w}");
            }
            let doc = curves.to_plot(&format!("{} vs {} by {}", ys.y, x, ys.s))?;
            session.json("disparity.json", &json!({ "curves": curves, "plot": doc }))?;
            session.write("disparity.svg", &render_svg(&doc, SVG_WIDTH, SVG_HEIGHT)?)?;
        }
        Command::PlotDensity { feature, s, bandwidth, .. } => {
            let d = density_by_group(&data, feature, s.as_deref(), *bandwidth)?;
            let title = match s {
                Some(s) => format!("Density of {feature} by {s}"),
                None => format!("Density of {feature}"),
            };
            let doc = d.to_plot(&title)?;
            session.json("density.json", &json!({ "density": d, "plot": doc }))?;
            session.write("density.svg", &render_svg(&doc, SVG_WIDTH, SVG_HEIGHT)?)?;
        }
        Command::PlotParcoord { s, columns, m, k, .. } => {
            let r = freq_par_coord(&data, columns.as_deref(), *m, s, *k)?;
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            session.write("parcoord.svg", &render_svg(&r.document, SVG_WIDTH, SVG_HEIGHT)?)?;
            session.json("parcoord.json", &r)?;
        }
        Command::PlotScatter3d { s, coords, point_size, .. } => {
            let names: [&str; 3] = match coords.as_slice() {
                [a, b, c] => [a, b, c],
                _ => return Err(invalid(format!("--coords needs exactly 3 columns, got {}", coords.len()))),
            };
            let sc = scatter_3d(&data, names, s, *point_size)?;
            session.json("scatter3d.json", &sc)?;
            session.write("scatter3d.csv", &sc.to_csv()?)?;
            session.write("scatter3d.svg", &render_svg(&sc.document, SVG_WIDTH, SVG_HEIGHT)?)?;
        }
    }
    Ok(())
}

fn finish_model(session: &mut Session, model: &SavedModel, predict: Option<&Path>) -> Result<()> {
    session.write("model.json", &model.to_json()?)?;
    if let Some(p) = predict {
        let rows = session.load("predict", p)?.table;
        let preds = model.predict(&rows)?;
        session.write("predictions.csv", &predictions_csv(&preds)?)?;
    }
    Ok(())
}

fn resolve_seed(flag: Option<u64>) -> std::result::Result<u64, String> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("{SEED_ENV}=`{v}` is not an unsigned integer")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let seed = match resolve_seed(cli.command.common().seed) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let common = cli.command.common();
    if !common.data.is_file() {
        eprintln!("error: data file `{}` not found", common.data.display());
        return 1;
    }
    if let Err(e) = std::fs::create_dir_all(&common.out_dir) {
        eprintln!("error: cannot create `{}`: {e}", common.out_dir.display());
        return 1;
    }
    let mut session = Session {
        dir: common.out_dir.clone(),
        outputs: Vec::new(),
        inputs: Vec::new(),
        format: common.format,
    };
    let outcome = execute(&cli.command, &mut session, seed);
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = json!({
        "tool": "fairscope",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": cli.command.name(),
        "argv": argv.iter().map(|a| a.to_string_lossy().into_owned()).collect::<Vec<_>>(),
        "seed": seed,
        "inputs": session.inputs,
        "outputs": session.outputs,
        "status": if outcome.is_ok() { "ok" } else { "error" },
        "timestampUnix": timestamp,
    });
    let manifest_written = serde_json::to_string_pretty(&manifest)
        .map_err(Error::from)
        .and_then(|t| Ok(std::fs::write(session.dir.join("manifest.json"), t + "\n")?));
    match (outcome, manifest_written) {
        (Ok(()), Ok(())) => 0,
        (Err(e), _) | (Ok(()), Err(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deweight_parsing() {
        assert_eq!(parse_deweight("age=0.5"), Ok(("age".to_string(), 0.5)));
        assert!(parse_deweight("age").is_err());
        assert!(parse_deweight("=0.5").is_err());
        assert!(parse_deweight("age=x").is_err());
    }

    #[test]
    fn coercion_names() {
        let t = Table::new(
            "t",
            vec![
                Column::numeric("a", vec![1.0, 2.0, 3.0]),
                Column::factor("g", &["f", "m", "m"]),
                Column::factor("o", &["x", "y", "z"]),
            ],
        )
        .unwrap();
        let c = coerce_numeric(&t).unwrap();
        assert_eq!(c.names(), vec!["a", "g", "o.y", "o.z"]);
        assert_eq!(c.numeric("g").unwrap(), &[0.0, 1.0, 1.0]);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["fairscope", "lin", "--data", "x.csv", "--s", "r"]), 2);
        assert_eq!(run(["fairscope", "bogus"]), 2);
        assert_eq!(run(["fairscope", "lin", "--help"]), 0);
    }
}
