use fairscope::design::ModelSpec;
use fairscope::logistic::fit_logit_s;
use fairscope::synth::law_school;

/// Bar passage by race as pooled log-odds differences, then by gender as
/// probability differences at chosen applicants.
pub fn run_example() -> fairscope::Result<()> {
    let data = law_school(3000, 8);
    let spec = ModelSpec::new(&data, "bar", Some("race1"))?;

    let pooled = fit_logit_s(&data, &spec, false)?;
    for row in pooled.compare_levels()?.rows.iter().take(4) {
        println!("{:>14}  {:+.3}  p={:.3}", row.factors_compared, row.estimate, row.p_value);
    }

    let by_gender = ModelSpec::new(&data, "bar", Some("gender"))?;
    let applicants = data.take(&[10, 20]).without("gender").without("bar");
    let split = fit_logit_s(&data, &by_gender, true)?;
    let report = split.compare_levels_at(&applicants)?;
    println!("{} probability comparisons on {:?} scale", report.rows.len(), report.scale);
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
