// Saving a fitted fair model and predicting from the reloaded copy.

use fairscope::design::ModelSpec;
use fairscope::fair::{fit_fair_ridge, Family};
use fairscope::model_io::SavedModel;
use fairscope::synth::recidivism;

pub fn run_example() -> fairscope::Result<()> {
    let data = recidivism(800, 19);
    let spec = ModelSpec::new(&data, "two_year_recid", Some("race"))?;
    let model = SavedModel::FairRidge(fit_fair_ridge(&data, &spec, 0.2, Family::Logistic)?);

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("model.json");
    model.save(&path)?;
    let back = SavedModel::load(&path)?;
    let rows = data.take(&[0, 1]);
    assert_eq!(model.predict(&rows)?, back.predict(&rows)?);
    println!("round trip ok: {:.4?}", back.predict(&rows)?);
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
