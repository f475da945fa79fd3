// Smoothed bar-passage rate against LSAT per gender, among higher GPAs.

use fairscope::synth::law_school;
use fairscope::viz::{condit_disparity, Condition};

pub fn run_example() -> fairscope::Result<()> {
    let data = law_school(2000, 16);
    let condits = [Condition::parse("ugpa >= 3.0")?];
    let curves = condit_disparity(&data, "bar", "gender", "lsat", &condits, 50)?;
    for c in &curves.curves {
        let mid = c.values.len() / 2;
        println!("{:>6} n={} rate at lsat {:.1}: {:.3}", c.group, c.n, c.grid[mid], c.values[mid]);
    }
    for w in &curves.warnings {
        println!("warning: {w}");
    }
    println!("{} layers", curves.to_plot("bar vs lsat")?.layers.len());
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
