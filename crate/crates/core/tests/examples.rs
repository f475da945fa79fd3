//! Every example under examples/ runs as a test.

#[allow(dead_code)]
mod cli_session {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/cli_session.rs"));
}

#[test]
fn cli_session_runs() {
    cli_session::run_example().expect("cli_session example should run");
}

#[allow(dead_code)]
mod confounder_hunting {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/confounder_hunting.rs"));
}

#[test]
fn confounder_hunting_runs() {
    confounder_hunting::run_example().expect("confounder_hunting example should run");
}

#[allow(dead_code)]
mod density_plot {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/density_plot.rs"));
}

#[test]
fn density_plot_runs() {
    density_plot::run_example().expect("density_plot example should run");
}

#[allow(dead_code)]
mod disparity_plot {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/disparity_plot.rs"));
}

#[test]
fn disparity_plot_runs() {
    disparity_plot::run_example().expect("disparity_plot example should run");
}

#[allow(dead_code)]
mod explicit_deweighting {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/explicit_deweighting.rs"));
}

#[test]
fn explicit_deweighting_runs() {
    explicit_deweighting::run_example().expect("explicit_deweighting example should run");
}

#[allow(dead_code)]
mod export_synthetic {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/export_synthetic.rs"));
}

#[test]
fn export_synthetic_runs() {
    export_synthetic::run_example().expect("export_synthetic example should run");
}

#[allow(dead_code)]
mod fair_ridge {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/fair_ridge.rs"));
}

#[test]
fn fair_ridge_runs() {
    fair_ridge::run_example().expect("fair_ridge example should run");
}

#[allow(dead_code)]
mod fairness_utility {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/fairness_utility.rs"));
}

#[test]
fn fairness_utility_runs() {
    fairness_utility::run_example().expect("fairness_utility example should run");
}

#[allow(dead_code)]
mod forest_importance {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/forest_importance.rs"));
}

#[test]
fn forest_importance_runs() {
    forest_importance::run_example().expect("forest_importance example should run");
}

#[allow(dead_code)]
mod iamb_graph {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/iamb_graph.rs"));
}

#[test]
fn iamb_graph_runs() {
    iamb_graph::run_example().expect("iamb_graph example should run");
}

#[allow(dead_code)]
mod kendall_tau {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/kendall_tau.rs"));
}

#[test]
fn kendall_tau_runs() {
    kendall_tau::run_example().expect("kendall_tau example should run");
}

#[allow(dead_code)]
mod knn_regression {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/knn_regression.rs"));
}

#[test]
fn knn_regression_runs() {
    knn_regression::run_example().expect("knn_regression example should run");
}

#[allow(dead_code)]
mod linear_comparisons {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/linear_comparisons.rs"));
}

#[test]
fn linear_comparisons_runs() {
    linear_comparisons::run_example().expect("linear_comparisons example should run");
}

#[allow(dead_code)]
mod load_and_split {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/load_and_split.rs"));
}

#[test]
fn load_and_split_runs() {
    load_and_split::run_example().expect("load_and_split example should run");
}

#[allow(dead_code)]
mod logistic_comparisons {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/logistic_comparisons.rs"));
}

#[test]
fn logistic_comparisons_runs() {
    logistic_comparisons::run_example().expect("logistic_comparisons example should run");
}

#[allow(dead_code)]
mod matched_att {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/matched_att.rs"));
}

#[test]
fn matched_att_runs() {
    matched_att::run_example().expect("matched_att example should run");
}

#[allow(dead_code)]
mod model_persistence {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/model_persistence.rs"));
}

#[test]
fn model_persistence_runs() {
    model_persistence::run_example().expect("model_persistence example should run");
}

#[allow(dead_code)]
mod parcoord_plot {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/parcoord_plot.rs"));
}

#[test]
fn parcoord_plot_runs() {
    parcoord_plot::run_example().expect("parcoord_plot example should run");
}

#[allow(dead_code)]
mod proxy_hunting {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/proxy_hunting.rs"));
}

#[test]
fn proxy_hunting_runs() {
    proxy_hunting::run_example().expect("proxy_hunting example should run");
}

#[allow(dead_code)]
mod scatter3d_plot {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scatter3d_plot.rs"));
}

#[test]
fn scatter3d_plot_runs() {
    scatter3d_plot::run_example().expect("scatter3d_plot example should run");
}
