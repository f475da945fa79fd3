//! Acceptance runner. Prints one PASS/FAIL/SKIP line per criterion and exits
//! nonzero if any criterion fails. Dataset criteria look for `lsa.csv`,
//! `compas1.csv` and `svcensus.csv` in `$FAIRSCOPE_FIXTURES`, falling back to
//! `tests/fixtures/`, and skip when the file is missing.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use fairscope::bias::{hunt_confounders, hunt_proxies};
use fairscope::causal::{iamb, matched_ate, Propensity};
use fairscope::cli::coerce_numeric;
use fairscope::design::ModelSpec;
use fairscope::fair::{fit_edf, fit_fair_ridge, EdfHyper, EdfMethod, Family, Predictor};
use fairscope::forest::ForestParams;
use fairscope::linear::{fit_linear_s, LinearFits};
use fairscope::table::{load_csv, make_holdout, HoldoutSize, Table};

const C1_COEF: f64 = -4.74826307;
const C1_COEF_SE: f64 = 0.198088318;
const C1_DIFF: f64 = -5.995351;
const C1_DIFF_SE: f64 = 0.1409991;
const C1_TOL: f64 = 1e-3;
const C2_RANGE: (f64, f64) = (0.552, 0.592);
const C3_RANGE: (f64, f64) = (0.46, 0.58);
const C3_DEWEIGHTS: [(&str, f64); 2] = [("age", 0.5), ("priors_count", 0.1)];
const C4_TREATED: usize = 15182;
const C4_EST: [f64; 3] = [9634.5, 10332.0, 9877.8];
const C4_SE: [f64; 3] = [380.03, 408.39, 439.73];
const C4_EST_REL: f64 = 0.05;
const C4_SE_REL: f64 = 0.20;
const C5_TAU_AGE: f64 = -0.156;
const C5_TAU_PRIORS: f64 = 0.175;
const C5_TOL: f64 = 0.005;
const C6_EXPECTED: [&str; 3] = ["cluster", "decile3", "lsat"];
const C6_RUNS: u64 = 5;
const C6_MIN_HITS: usize = 4;
const C7_MC_REPS: usize = 1000;
const COMPAS_ROW: usize = 188;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Run = std::result::Result<Outcome, String>;

fn fixture_dir() -> PathBuf {
    std::env::var_os("FAIRSCOPE_FIXTURES")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures")))
}

fn fixture(name: &str) -> std::result::Result<Table, Outcome> {
    let path = fixture_dir().join(format!("{name}.csv"));
    if !path.is_file() {
        return Err(Outcome::Skip(format!("fixture `{name}.csv` not found in {}", fixture_dir().display())));
    }
    load_csv(&path)
        .map(|l| l.table)
        .map_err(|e| Outcome::Fail(format!("cannot load {}: {e}", path.display())))
}

macro_rules! need {
    ($name:expr) => {
        match fixture($name) {
            Ok(t) => t,
            Err(o) => return Ok(o),
        }
    };
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn compas_row(t: &Table) -> std::result::Result<Table, String> {
    if t.nrows() < COMPAS_ROW {
        return Err(format!("compas1 has only {} rows", t.nrows()));
    }
    Ok(t.take(&[COMPAS_ROW - 1]))
}

fn c1() -> Run {
    let lsa = need!("lsa");
    let spec = ModelSpec::new(&lsa, "lsat", Some("race1")).map_err(e)?;
    let m = fit_linear_s(&lsa, &spec, false, false).map_err(e)?;
    let LinearFits::Pooled(fit) = &m.fits else { return Err("expected pooled fit".into()) };
    let j = fit
        .coefficient_names
        .iter()
        .position(|n| n == "race1black")
        .ok_or("no race1black coefficient")?;
    let (coef, se) = (fit.estimates[j], fit.standard_errors[j]);
    let (diff, dse) = m.level_difference("black", "white").map_err(e)?;
    let ok = (coef - C1_COEF).abs() <= C1_TOL
        && (se - C1_COEF_SE).abs() <= C1_TOL
        && (diff - C1_DIFF).abs() <= C1_TOL
        && (dse - C1_DIFF_SE).abs() <= C1_TOL;
    Ok(verdict(ok, format!("race1black {coef:.6} (SE {se:.6}); black - white {diff:.6} (SE {dse:.6})")))
}

fn c2() -> Run {
    let compas = need!("compas1");
    let spec = ModelSpec::new(&compas, "two_year_recid", Some("race")).map_err(e)?;
    let row = compas_row(&compas)?;
    let full = fit_fair_ridge(&compas, &spec, 1.0, Family::Logistic).map_err(e)?;
    let fair = fit_fair_ridge(&compas, &spec, 0.1, Family::Logistic).map_err(e)?;
    let p1 = full.predict(&row).map_err(e)?[0];
    let p01 = fair.predict(&row).map_err(e)?[0];
    let ok = (C2_RANGE.0..=C2_RANGE.1).contains(&p1) && p01 < p1;
    Ok(verdict(ok, format!("unfairness 1.0: {p1:.6}; unfairness 0.1: {p01:.6}")))
}

fn c3() -> Run {
    let compas = need!("compas1");
    let spec = ModelSpec::new(&compas, "two_year_recid", Some("race")).map_err(e)?;
    let row = compas_row(&compas)?;
    let deweights: BTreeMap<String, f64> = C3_DEWEIGHTS.iter().map(|&(k, v)| (k.to_string(), v)).collect();
    let mut preds = Vec::new();
    for seed in 1..=5u64 {
        let split = make_holdout(compas.nrows(), HoldoutSize::Default, seed).map_err(e)?;
        let train = compas.take(&split.train);
        let m = fit_edf(&train, &spec, EdfMethod::Knn, &deweights, &EdfHyper::default(), seed).map_err(e)?;
        preds.push(m.predict(&row).map_err(e)?[0]);
    }
    let ok = preds.iter().all(|p| (C3_RANGE.0..=C3_RANGE.1).contains(p));
    Ok(verdict(ok, format!("predictions over seeds 1..5: {preds:.4?}")))
}

fn c4() -> Run {
    let census = need!("svcensus");
    let spec = ModelSpec::new(&census, "wageinc", Some("gender")).map_err(e)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (label, p)) in [("direct", Propensity::None), ("logit", Propensity::Logit), ("knn", Propensity::Knn { k: 50 })]
        .into_iter()
        .enumerate()
    {
        let r = matched_ate(&census, &spec, "male", p).map_err(e)?;
        ok &= (r.estimate - C4_EST[i]).abs() <= C4_EST_REL * C4_EST[i];
        ok &= (r.standard_error - C4_SE[i]).abs() <= C4_SE_REL * C4_SE[i];
        if i == 0 {
            ok &= r.n_treated == C4_TREATED;
        }
        parts.push(format!("{label} {:.1} (SE {:.2}, treated {})", r.estimate, r.standard_error, r.n_treated));
    }
    Ok(verdict(ok, parts.join("; ")))
}

fn c5() -> Run {
    let compas = need!("compas1");
    let spec = ModelSpec::new(&compas, "two_year_recid", Some("race")).map_err(e)?;
    let tau = hunt_proxies(&compas, &spec).map_err(e)?;
    let age = tau.get("race.African-American", "age").ok_or("tau(African-American, age) undefined")?;
    let priors = tau
        .get("race.African-American", "priors_count")
        .ok_or("tau(African-American, priors_count) undefined")?;
    let by_sex = hunt_proxies(&compas, &ModelSpec::new(&compas, "two_year_recid", Some("sex")).map_err(e)?).map_err(e)?;
    let f = by_sex.row_labels.iter().position(|l| l == "sex.Female").ok_or("no sex.Female row")?;
    let m = by_sex.row_labels.iter().position(|l| l == "sex.Male").ok_or("no sex.Male row")?;
    let negated = by_sex.values[f]
        .iter()
        .zip(&by_sex.values[m])
        .all(|(a, b)| a.map(|x| -x) == *b);
    let ok = (age - C5_TAU_AGE).abs() <= C5_TOL && (priors - C5_TAU_PRIORS).abs() <= C5_TOL && negated;
    Ok(verdict(ok, format!("age {age:.4}, priors_count {priors:.4}, sex rows negated: {negated}")))
}

fn c6() -> Run {
    let lsa = need!("lsa");
    let spec = ModelSpec::new(&lsa, "bar", Some("race1")).map_err(e)?;
    let expected: BTreeSet<String> = C6_EXPECTED.iter().map(|s| s.to_string()).collect();
    let mut hits = 0;
    let mut seen = Vec::new();
    for seed in 1..=C6_RUNS {
        let params = ForestParams { seed, ..Default::default() };
        let r = hunt_confounders(&lsa, &spec, 3, &params, 3).map_err(e)?;
        let top3: BTreeSet<String> = r.intersections[2].iter().cloned().collect();
        hits += usize::from(top3 == expected);
        seen.push(format!("{top3:?}"));
    }
    Ok(verdict(hits >= C6_MIN_HITS, format!("{hits}/{C6_RUNS} runs match; {}", seen.join(" "))))
}

fn c7() -> Run {
    let checks: Vec<(&str, common::Check)> = vec![
        ("ols", common::ols_normal_equations(100, 1)),
        ("kendall", common::kendall_oracle(200, 2)),
        ("knn", common::knn_brute_force(30, 3)),
        ("logit", common::logit_gradient(20, 4)),
        ("kde", common::kde_direct_sum(5)),
        ("iamb", common::iamb_chain(6)),
        ("coverage", common::interaction_ci_coverage(C7_MC_REPS, 7).map(|(m, _)| m)),
        ("fair-ridge", common::fair_ridge_budget(8)),
    ];
    let failed: Vec<String> = checks
        .iter()
        .filter_map(|(n, r)| r.as_ref().err().map(|m| format!("{n}: {m}")))
        .collect();
    if failed.is_empty() {
        Ok(Outcome::Pass(format!("{} checks", checks.len())))
    } else {
        Ok(Outcome::Fail(failed.join("; ")))
    }
}

fn c8() -> Run {
    use common::cli_cases::{analysis_files, fixtures, invocations, run_into};
    let f = fixtures();
    let outs = tempfile::tempdir().map_err(e)?;
    let mut subcommands = BTreeSet::new();
    for (label, args) in invocations(&f) {
        let a = outs.path().join(format!("{label}-a"));
        let b = outs.path().join(format!("{label}-b"));
        if run_into(&args, &a) != 0 || run_into(&args, &b) != 0 {
            return Ok(Outcome::Fail(format!("`{label}` exited nonzero")));
        }
        if analysis_files(&a) != analysis_files(&b) {
            return Ok(Outcome::Fail(format!("`{label}` outputs differ")));
        }
        subcommands.insert(args[0].clone());
    }
    Ok(verdict(subcommands.len() == 18, format!("{} subcommands byte-identical across reruns", subcommands.len())))
}

fn c9() -> Run {
    let census = need!("svcensus");
    let g = iamb(&coerce_numeric(&census).map_err(e)?, 0.05).map_err(e)?;
    let bad = g.has_directed("gender", "wageinc");
    Ok(verdict(
        !bad,
        format!(
            "gender -> wageinc directed: {bad}; {} directed, {} undirected edges",
            g.directed_edges.len(),
            g.undirected_edges.len()
        ),
    ))
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Run); 9] = [
        (1, "lsa linear fit reproduces coefficients and comparison", Duration::from_secs(10), c1),
        (2, "compas fair-ridge prediction at row 188", Duration::from_secs(10), c2),
        (3, "compas EDF-kNN prediction at row 188", Duration::from_secs(10), c3),
        (4, "svcensus matched ATT", Duration::from_secs(60), c4),
        (5, "compas proxy taus", Duration::from_secs(10), c5),
        (6, "lsa confounder top-3 intersection", Duration::from_secs(120), c6),
        (7, "dataset-free property suite", Duration::from_secs(300), c7),
        (8, "CLI determinism", Duration::from_secs(300), c8),
        (9, "svcensus IAMB has no gender -> wageinc", Duration::from_secs(60), c9),
    ];
    let mut failures = 0;
    for (id, title, budget, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let (tag, detail) = match outcome {
            Ok(Outcome::Pass(d)) if took <= budget => ("PASS", d),
            Ok(Outcome::Pass(d)) => ("FAIL", format!("{d}; took {took:.1?}, budget {budget:?}")),
            Ok(Outcome::Fail(d)) => ("FAIL", d),
            Ok(Outcome::Skip(d)) => ("SKIP", d),
            Err(d) => ("FAIL", format!("error: {d}")),
        };
        failures += usize::from(tag == "FAIL");
        println!("criterion {id} [{tag}] {title}: {detail} ({took:.2?})");
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
