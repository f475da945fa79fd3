// Gender wage gap on the treated under three matching metrics.

use fairscope::causal::{matched_ate, Propensity};
use fairscope::design::ModelSpec;
use fairscope::synth::census_wages;

pub fn run_example() -> fairscope::Result<()> {
    let data = census_wages(1500, 9000.0, 13);
    let spec = ModelSpec::new(&data, "wageinc", Some("gender"))?;
    for p in [Propensity::None, Propensity::Logit, Propensity::Knn { k: 50 }] {
        let r = matched_ate(&data, &spec, "male", p)?;
        println!(
            "{:<28} ATT {:>8.1}  SE {:>6.1}  p {:.2e}  treated {}",
            format!("{:?}", r.propensity),
            r.estimate,
            r.standard_error,
            r.p_value,
            r.n_treated
        );
    }
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
