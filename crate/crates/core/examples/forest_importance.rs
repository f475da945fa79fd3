// Random forest with holdout permutation importance.

use fairscope::design::ModelSpec;
use fairscope::forest::{fit_forest, permutation_importance, ForestParams};
use fairscope::synth::law_school;
use fairscope::table::{make_holdout, HoldoutSize};

pub fn run_example() -> fairscope::Result<()> {
    let data = law_school(1500, 4).without("race1");
    let spec = ModelSpec::new(&data, "bar", None)?;
    let split = make_holdout(data.nrows(), HoldoutSize::Default, 9)?;
    let params = ForestParams { n_trees: 60, seed: 9, ..Default::default() };
    let forest = fit_forest(&data.take(&split.train), &spec, &params)?;
    let imp = permutation_importance(&forest, &data.take(&split.holdout), "bar", 3, 9)?.sorted();
    println!("baseline misclassification {:.3}", imp.baseline_loss);
    for (f, (s, se)) in imp.features.iter().zip(imp.scores.iter().zip(&imp.standard_errors)) {
        println!("{f:>10} {s:+.4} ± {se:.4}");
    }
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
