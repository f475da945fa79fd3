// Tightening the unfairness budget: how the S share and a prediction move.

use fairscope::design::ModelSpec;
use fairscope::fair::{fit_fair_ridge, Family, Predictor};
use fairscope::synth::recidivism;

pub fn run_example() -> fairscope::Result<()> {
    let data = recidivism(2000, 10);
    let spec = ModelSpec::new(&data, "two_year_recid", Some("race"))?;
    let row = data.take(&[187]);
    for budget in [1.0, 0.5, 0.1, 0.01] {
        let m = fit_fair_ridge(&data, &spec, budget, Family::Logistic)?;
        println!(
            "budget {budget:<5} lambda {:>10.3e} share {:.4} p(row 188) {:.4}{}",
            m.lambda_s,
            m.share,
            m.predict(&row)?[0],
            m.note.as_deref().map(|n| format!("  [{n}]")).unwrap_or_default()
        );
    }
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
