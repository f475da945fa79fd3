//! Synthetic CSV inputs and one invocation per CLI subcommand.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fairscope::synth::{census_wages, law_school, recidivism};
use fairscope::table::Table;

pub fn write_table(dir: &Path, name: &str, t: &Table) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, t.to_csv_string().unwrap()).unwrap();
    p
}

pub struct Fixtures {
    _dir: tempfile::TempDir,
    pub law: PathBuf,
    pub recid: PathBuf,
    pub recid_new: PathBuf,
    pub census: PathBuf,
    pub law_points: PathBuf,
}

pub fn fixtures() -> Fixtures {
    let dir = tempfile::tempdir().unwrap();
    let law = law_school(500, 11);
    let recid = recidivism(500, 12);
    let census = census_wages(500, 6000.0, 13);
    let law_points = law.take(&[0, 1]).without("gender").without("lsat");
    Fixtures {
        law: write_table(dir.path(), "law.csv", &law),
        recid: write_table(dir.path(), "recid.csv", &recid),
        recid_new: write_table(dir.path(), "recid_new.csv", &recid.take(&[3, 5, 8])),
        census: write_table(dir.path(), "census.csv", &census),
        law_points: write_table(dir.path(), "points.csv", &law_points),
        _dir: dir,
    }
}

pub fn invocations(f: &Fixtures) -> Vec<(&'static str, Vec<String>)> {
    let p = |x: &PathBuf| x.display().to_string();
    let (law, recid, recid_new, census, points) =
        (p(&f.law), p(&f.recid), p(&f.recid_new), p(&f.census), p(&f.law_points));
    let v = |items: &[&str]| items.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    vec![
        ("lin", v(&["lin", "--data", &law, "--y", "lsat", "--s", "race1", "--format", "csv"])),
        ("lin-int", v(&["lin", "--data", &law, "--y", "lsat", "--s", "gender", "--interactions", "--compare-points", &points, "--sandwich"])),
        ("logit", v(&["logit", "--data", &law, "--y", "bar", "--s", "gender"])),
        ("knn", v(&["knn", "--data", &recid, "--y", "two_year_recid", "--k", "10", "--predict", &recid_new])),
        ("forest", v(&["forest", "--data", &recid, "--y", "two_year_recid", "--trees", "20", "--importance", "2", "--predict", &recid_new])),
        ("chunt", v(&["chunt", "--data", &law, "--y", "bar", "--s", "race1", "--trees", "20", "--repeats", "2", "--intersect-depth", "3", "--format", "csv"])),
        ("ohunt", v(&["ohunt", "--data", &recid, "--y", "two_year_recid", "--s", "race"])),
        ("confounders", v(&["confounders", "--data", &recid, "--y", "two_year_recid", "--s", "sex"])),
        ("fair-ridge", v(&["fair-ridge", "--data", &recid, "--y", "two_year_recid", "--s", "race", "--unfairness", "0.1", "--predict", &recid_new])),
        ("fair-knn", v(&["fair-knn", "--data", &recid, "--y", "two_year_recid", "--s", "race", "--deweight", "age=0.5", "--deweight", "priors_count=0.1", "--predict", &recid_new])),
        ("fair-lin", v(&["fair-lin", "--data", &census, "--y", "wageinc", "--s", "gender", "--deweight", "occ=0.2"])),
        ("fair-forest", v(&["fair-forest", "--data", &census, "--y", "wageinc", "--s", "gender", "--deweight", "occ=0.2", "--trees", "20"])),
        ("eval", v(&["eval", "--data", &recid, "--y", "two_year_recid", "--s", "race", "--method", "fair-knn", "--deweight", "age=0.5", "--replications", "2"])),
        ("match", v(&["match", "--data", &census, "--y", "wageinc", "--s", "gender", "--treat", "male", "--propensity", "knn", "--k", "20", "--format", "csv"])),
        ("iamb", v(&["iamb", "--data", &census, "--alpha", "0.05"])),
        ("plot-disparity", v(&["plot-disparity", "--data", &law, "--y", "bar", "--s", "gender", "--x", "lsat", "--condit", "ugpa >= 2.5", "--k", "20"])),
        ("plot-density", v(&["plot-density", "--data", &law, "--feature", "lsat", "--s", "race1", "--bandwidth", "1.5"])),
        ("plot-parcoord", v(&["plot-parcoord", "--data", &recid, "--s", "race", "--m", "5", "--k", "5", "--columns", "age,priors_count,juv_fel_count"])),
        ("plot-scatter3d", v(&["plot-scatter3d", "--data", &law, "--s", "gender", "--coords", "lsat,ugpa,fam_inc"])),
    ]
}

pub fn run_into(args: &[String], out: &Path) -> i32 {
    let mut argv = vec!["fairscope".to_string()];
    argv.extend(args.iter().cloned());
    argv.extend(["--out-dir".to_string(), out.display().to_string(), "--seed".to_string(), "7".to_string()]);
    fairscope::cli::run(argv)
}

pub fn analysis_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}
