// Writes the three synthetic tables as CSV, ready for the CLI.
//
// `cargo run --example export_synthetic -- <dir> [rows]`

use std::path::{Path, PathBuf};

use fairscope::synth::{census_wages, law_school, recidivism};

pub fn export(dir: &Path, rows: usize) -> fairscope::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let tables = [
        ("lsa.csv", law_school(rows, 1)),
        ("compas1.csv", recidivism(rows, 2)),
        ("svcensus.csv", census_wages(rows, 8000.0, 3)),
    ];
    let mut paths = Vec::new();
    for (name, t) in tables {
        let p = dir.join(name);
        std::fs::write(&p, t.to_csv_string()?)?;
        paths.push(p);
    }
    Ok(paths)
}

pub fn run_example() -> fairscope::Result<()> {
    let dir = tempfile::tempdir()?;
    for p in export(dir.path(), 200)? {
        let loaded = fairscope::table::load_csv(&p)?;
        println!("{}: {} rows x {} columns", p.display(), loaded.table.nrows(), loaded.table.ncols());
    }
    Ok(())
}

fn main() -> fairscope::Result<()> {
    let mut args = std::env::args().skip(1);
    match args.next() {
        Some(dir) => {
            let rows = args.next().and_then(|r| r.parse().ok()).unwrap_or(2000);
            for p in export(Path::new(&dir), rows)? {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        None => run_example(),
    }
}
