// Kendall tau of each race indicator against every candidate proxy.

use fairscope::bias::hunt_proxies;
use fairscope::design::ModelSpec;
use fairscope::synth::recidivism;

pub fn run_example() -> fairscope::Result<()> {
    let data = recidivism(2000, 7);
    let spec = ModelSpec::new(&data, "two_year_recid", Some("race"))?;
    let tau = hunt_proxies(&data, &spec)?;
    print!("{}", tau.to_csv()?);
    println!(
        "tau(African-American, priors_count) = {:.3}",
        tau.get("race.African-American", "priors_count").unwrap_or(f64::NAN)
    );
    for flag in &tau.flags {
        println!("undefined: {} x {} ({})", flag.row, flag.column, flag.reason);
    }
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
