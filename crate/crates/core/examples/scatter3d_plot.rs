// Three numeric columns per group, projected for a flat SVG.

use fairscope::synth::law_school;
use fairscope::viz::{render_svg, scatter_3d};

pub fn run_example() -> fairscope::Result<()> {
    let data = law_school(500, 18);
    let sc = scatter_3d(&data, ["lsat", "ugpa", "fam_inc"], "gender", 3.0)?;
    print!("{}", sc.to_csv()?.lines().take(4).collect::<Vec<_>>().join("\n"));
    println!();
    let svg = render_svg(&sc.document, 600, 600)?;
    println!("{} points, svg {} bytes", sc.tuples.len(), svg.len());
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
