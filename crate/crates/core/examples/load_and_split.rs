// Reading a CSV with missing cells and drawing a seeded holdout split.

use fairscope::table::{make_holdout, read_csv, HoldoutSize};

const CSV: &str = "\
age,income,group
31,52000,a
45,,b
28,41000,b
52,67000,a
39,58000,NA
33,47000,a
41,61000,b
29,39000,b
48,70000,a
36,50000,b
44,63000,a
50,72000,b
27,38000,a
";

pub fn run_example() -> fairscope::Result<()> {
    let loaded = read_csv(CSV.as_bytes(), "people")?;
    let t = &loaded.table;
    println!("kept {} rows, dropped {}", t.nrows(), loaded.dropped_rows);
    println!("group levels: {:?}", t.column("group")?.observed_levels());

    let split = make_holdout(t.nrows(), HoldoutSize::Fraction(0.2), 42)?;
    println!("train rows {:?}", split.train);
    println!("holdout rows {:?}", split.holdout);
    assert_eq!(split.train.len() + split.holdout.len(), t.nrows());
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
