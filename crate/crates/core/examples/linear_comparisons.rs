// Linear model of wage on covariates and gender, with and without
// per-level interactions.

use fairscope::design::ModelSpec;
use fairscope::linear::fit_linear_s;
use fairscope::synth::census_wages;

pub fn run_example() -> fairscope::Result<()> {
    let data = census_wages(2000, 9000.0, 5);
    let spec = ModelSpec::new(&data, "wageinc", Some("gender"))?;

    let pooled = fit_linear_s(&data, &spec, false, false)?;
    let (diff, se) = pooled.level_difference("male", "female")?;
    println!("male - female: {diff:.0} (SE {se:.0})");

    // Per-level fits compared at two covariate rows, robust SEs.
    let points = data.take(&[0, 1]).without("gender").without("wageinc");
    let split = fit_linear_s(&data, &spec, true, true)?;
    let report = split.report(Some(&points), true)?;
    for row in &report.s_comparisons {
        println!("{} at point {:?}: {:.0} (SE {:.0})", row.factors_compared,
            row.comparison_point.as_ref().map(|p| p.index), row.estimate, row.standard_error);
    }
    println!("{}", serde_json::to_string_pretty(&report.coefficients[..3])?);
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
