// Markov-blanket structure discovery over census columns, emitted as DOT.

use fairscope::causal::iamb;
use fairscope::cli::coerce_numeric;
use fairscope::synth::census_wages;

pub fn run_example() -> fairscope::Result<()> {
    let data = coerce_numeric(&census_wages(3000, 9000.0, 14))?;
    let g = iamb(&data, 0.05)?;
    print!("{}", g.to_dot());
    println!("gender -> wageinc compelled: {}", g.has_directed("gender", "wageinc"));
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
