// LSAT densities by race, as a plot document and SVG.

use fairscope::synth::law_school;
use fairscope::viz::{density_by_group, render_svg};

pub fn run_example() -> fairscope::Result<()> {
    let data = law_school(2000, 15);
    let d = density_by_group(&data, "lsat", Some("race1"), 1.5)?;
    for (c, area) in d.curves.iter().zip(d.integrals()) {
        println!("{:>6} n={:<5} area {area:.3}", c.group, c.n);
    }
    let svg = render_svg(&d.to_plot("LSAT by race")?, 800, 560)?;
    println!("svg: {} bytes", svg.len());
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
