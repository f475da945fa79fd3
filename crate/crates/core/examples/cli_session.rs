// Driving the command-line interface in-process.

use fairscope::synth::recidivism;

pub fn run_example() -> fairscope::Result<()> {
    let dir = tempfile::tempdir()?;
    let csv = dir.path().join("compas.csv");
    std::fs::write(&csv, recidivism(600, 20).to_csv_string()?)?;
    let out = dir.path().join("out");
    let code = fairscope::cli::run([
        "fairscope", "ohunt",
        "--data", csv.to_str().unwrap(),
        "--y", "two_year_recid",
        "--s", "race",
        "--out-dir", out.to_str().unwrap(),
        "--seed", "3",
    ]);
    println!("exit code {code}");
    let manifest = std::fs::read_to_string(out.join("manifest.json"))?;
    println!("{manifest}");
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
