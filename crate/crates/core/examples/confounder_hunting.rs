// Features that matter for both bar passage and race.

use fairscope::bias::hunt_confounders;
use fairscope::design::ModelSpec;
use fairscope::forest::ForestParams;
use fairscope::synth::law_school;

pub fn run_example() -> fairscope::Result<()> {
    let data = law_school(1500, 6);
    let spec = ModelSpec::new(&data, "bar", Some("race1"))?;
    let params = ForestParams { n_trees: 40, seed: 6, ..Default::default() };
    let report = hunt_confounders(&data, &spec, 4, &params, 2)?;
    println!("for Y: {:?}", report.imp_for_y.features);
    println!("for S: {:?}", report.imp_for_s.features);
    for (i, set) in report.intersections.iter().enumerate() {
        println!("top {}: {set:?}", i + 1);
    }
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
