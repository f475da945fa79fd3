// Repeated-holdout tradeoff: utility against Kendall tau between
// predictions and each S level, for a few deweighting strengths.

use std::collections::BTreeMap;

use fairscope::design::ModelSpec;
use fairscope::fair::{evaluate_fairness, EdfFactory, EdfHyper, EdfMethod};
use fairscope::synth::recidivism;
use fairscope::table::HoldoutSize;

pub fn run_example() -> fairscope::Result<()> {
    let data = recidivism(1500, 12);
    let spec = ModelSpec::new(&data, "two_year_recid", Some("race"))?;
    for w in [1.0, 0.3, 0.0] {
        let factory = EdfFactory {
            method: EdfMethod::Knn,
            deweights: BTreeMap::from([("priors_count".to_string(), w)]),
            hyper: EdfHyper::default(),
        };
        let r = evaluate_fairness(&data, &spec, &factory, 3, HoldoutSize::Default, 12)?;
        println!(
            "priors weight {w}: {:?} {:.3}, mean max |tau| {:.3}",
            r.utility_kind,
            r.mean_utility,
            r.mean_max_abs_tau.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
