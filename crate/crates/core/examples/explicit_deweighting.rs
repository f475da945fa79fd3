// The three deweighting methods on one task: S removed, proxies attenuated.

use std::collections::BTreeMap;

use fairscope::design::ModelSpec;
use fairscope::fair::{fit_edf, EdfHyper, EdfMethod, Predictor};
use fairscope::forest::ForestParams;
use fairscope::synth::recidivism;

pub fn run_example() -> fairscope::Result<()> {
    let data = recidivism(1500, 11);
    let spec = ModelSpec::new(&data, "two_year_recid", Some("race"))?;
    let deweights = BTreeMap::from([("age".to_string(), 0.5), ("priors_count".to_string(), 0.1)]);
    let hyper = EdfHyper { forest: ForestParams { n_trees: 40, ..Default::default() }, ..Default::default() };
    let rows = data.take(&[0, 1, 2, 3]);
    for method in [EdfMethod::Knn, EdfMethod::Linear, EdfMethod::Forest] {
        let m = fit_edf(&data, &spec, method, &deweights, &hyper, 11)?;
        println!("{method:?}: uses {:?} -> {:.3?}", m.feature_sources(), m.predict(&rows)?);
    }
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
