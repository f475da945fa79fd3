// kNN recidivism probability, with one feature downweighted.

use std::collections::BTreeMap;

use fairscope::design::ModelSpec;
use fairscope::neighbors::fit_knn;
use fairscope::synth::recidivism;

pub fn run_example() -> fairscope::Result<()> {
    let data = recidivism(1500, 3);
    let spec = ModelSpec::new(&data, "two_year_recid", None)?;
    let rows = data.take(&[0, 1, 2]);

    let plain = fit_knn(&data, &spec, 25, &BTreeMap::new())?;
    let weights = BTreeMap::from([("age".to_string(), 0.2)]);
    let damped = fit_knn(&data, &spec, 25, &weights)?;
    println!("features: {:?}", plain.feature_names);
    println!("plain:        {:.3?}", plain.predict(&rows)?);
    println!("age weight .2 {:.3?}", damped.predict(&rows)?);
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
