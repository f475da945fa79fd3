// Most typical defendants per race, by k-th neighbor distance.

use fairscope::synth::recidivism;
use fairscope::viz::freq_par_coord;

pub fn run_example() -> fairscope::Result<()> {
    let data = recidivism(1200, 17);
    let cols = ["age".to_string(), "priors_count".to_string(), "juv_fel_count".to_string()];
    let r = freq_par_coord(&data, Some(&cols), 5, "race", 10)?;
    for (level, rows) in &r.selected {
        println!("{level:>17}: rows {rows:?}");
    }
    for w in &r.warnings {
        println!("warning: {w}");
    }
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
