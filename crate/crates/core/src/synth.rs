//! Seeded synthetic tables shaped like the law-school, recidivism and census
//! data the toolkit is usually applied to. Effects are planted on purpose so
//! examples and tests have known structure to recover.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::table::{Column, Table};

fn pick<'a>(rng: &mut ChaCha8Rng, labels: &[&'a str], probs: &[f64]) -> &'a str {
    let mut u = rng.random::<f64>();
    for (l, p) in labels.iter().zip(probs) {
        if u < *p {
            return l;
        }
        u -= p;
    }
    labels[labels.len() - 1]
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Bar-passage style data: `race1` shifts `cluster` and `fam_inc`, which
/// drive `lsat`; `bar` depends on `lsat`, `ugpa` and `decile3`. `age` is
/// unrelated to everything.
pub fn law_school(n: usize, seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::<f64>::new(0.0, 1.0).expect("valid normal");
    let races = ["asian", "black", "hisp", "other", "white"];
    let probs = [0.05, 0.07, 0.06, 0.04, 0.78];
    let mut race = Vec::with_capacity(n);
    let mut gender = Vec::with_capacity(n);
    let mut cols: [Vec<f64>; 7] = Default::default();
    let mut bar = Vec::with_capacity(n);
    for _ in 0..n {
        let r = pick(&mut rng, &races, &probs);
        let shift = match r {
            "white" => 0.0,
            "asian" => -0.2,
            "hisp" => -0.8,
            "black" => -1.4,
            _ => -0.5,
        };
        let cluster = (3.5 + 1.2 * shift + 1.2 * noise.sample(&mut rng)).round().clamp(1.0, 6.0);
        let fam_inc = (3.3 + 0.6 * shift + 0.9 * noise.sample(&mut rng)).round().clamp(1.0, 5.0);
        let lsat = (36.5 + 1.2 * fam_inc + 0.9 * cluster + 2.5 * shift + 3.5 * noise.sample(&mut rng))
            .round()
            .clamp(11.0, 48.0);
        let ugpa = ((3.2 + 0.12 * shift + 0.4 * noise.sample(&mut rng)) * 10.0).round() / 10.0;
        let ugpa = ugpa.clamp(1.5, 3.9);
        let decile1 = (5.5 + 0.5 * shift + 2.5 * noise.sample(&mut rng)).round().clamp(1.0, 10.0);
        let decile3 =
            (0.6 * decile1 + 2.2 + 0.4 * shift + 1.5 * noise.sample(&mut rng)).round().clamp(1.0, 10.0);
        let age = (25.0 + 3.0 * noise.sample(&mut rng)).round().clamp(18.0, 60.0);
        let eta = -7.5 + 0.19 * lsat + 0.8 * ugpa + 0.15 * decile3;
        let pass = rng.random::<f64>() < logistic(eta);
        race.push(r);
        gender.push(if rng.random::<f64>() < 0.44 { "female" } else { "male" });
        for (c, v) in cols.iter_mut().zip([age, decile1, decile3, lsat, ugpa, fam_inc, cluster]) {
            c.push(v);
        }
        bar.push(if pass { "TRUE" } else { "FALSE" });
    }
    let [age, decile1, decile3, lsat, ugpa, fam_inc, cluster] = cols;
    Table::new(
        "law_school",
        vec![
            Column::numeric("age", age),
            Column::numeric("decile1", decile1),
            Column::numeric("decile3", decile3),
            Column::numeric("fam_inc", fam_inc),
            Column::numeric("lsat", lsat),
            Column::numeric("ugpa", ugpa),
            Column::factor("gender", &gender),
            Column::factor("race1", &race),
            Column::numeric("cluster", cluster),
            Column::factor("bar", &bar),
        ],
    )
    .expect("generated columns have equal length")
}

/// Recidivism style data: `race` correlates with `age` (negatively for
/// African-American) and `priors_count`; `two_year_recid` depends on age,
/// priors and sex only.
pub fn recidivism(n: usize, seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::<f64>::new(0.0, 1.0).expect("valid normal");
    let races = ["African-American", "Caucasian", "Hispanic", "Other"];
    let probs = [0.51, 0.34, 0.09, 0.06];
    let mut race = Vec::with_capacity(n);
    let mut sex = Vec::with_capacity(n);
    let mut age = Vec::with_capacity(n);
    let mut priors = Vec::with_capacity(n);
    let mut juv = Vec::with_capacity(n);
    let mut recid = Vec::with_capacity(n);
    for _ in 0..n {
        let r = pick(&mut rng, &races, &probs);
        let aa = r == "African-American";
        let s = if rng.random::<f64>() < 0.19 { "Female" } else { "Male" };
        let a = (if aa { 32.0 } else { 37.0 } + 10.0 * noise.sample(&mut rng).abs())
            .round()
            .clamp(18.0, 80.0);
        let lam = if aa { 4.2 } else { 2.4 } * (1.0 + (35.0 - a).max(-15.0) / 60.0);
        let pc = Poisson::new(lam.max(0.1)).expect("positive rate").sample(&mut rng);
        let jf = if rng.random::<f64>() < if aa { 0.09 } else { 0.04 } { 1.0 } else { 0.0 };
        let eta = 0.9 - 0.045 * a + 0.17 * pc + 0.3 * jf + if s == "Male" { 0.3 } else { 0.0 };
        race.push(r);
        sex.push(s);
        age.push(a);
        priors.push(pc);
        juv.push(jf);
        recid.push(if rng.random::<f64>() < logistic(eta) { "Yes" } else { "No" });
    }
    Table::new(
        "recidivism",
        vec![
            Column::numeric("age", age),
            Column::numeric("juv_fel_count", juv),
            Column::numeric("priors_count", priors),
            Column::factor("sex", &sex),
            Column::factor("race", &race),
            Column::factor("two_year_recid", &recid),
        ],
    )
    .expect("generated columns have equal length")
}

/// Census wage style data with a planted gender gap of `gap` dollars that
/// operates partly through occupation and weeks worked.
pub fn census_wages(n: usize, gap: f64, seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::<f64>::new(0.0, 1.0).expect("valid normal");
    let occs = ["100", "101", "102", "106", "140", "141"];
    let educs = ["14", "16", "zzzOther"];
    let mut age = Vec::with_capacity(n);
    let mut educ = Vec::with_capacity(n);
    let mut occ = Vec::with_capacity(n);
    let mut wks = Vec::with_capacity(n);
    let mut gender = Vec::with_capacity(n);
    let mut wage = Vec::with_capacity(n);
    for _ in 0..n {
        let male = rng.random::<f64>() < 0.76;
        let occ_probs: [f64; 6] = if male {
            [0.25, 0.2, 0.25, 0.05, 0.15, 0.1]
        } else {
            [0.3, 0.25, 0.1, 0.15, 0.1, 0.1]
        };
        let o = pick(&mut rng, &occs, &occ_probs);
        let e = pick(&mut rng, &educs, &[0.2, 0.3, 0.5]);
        let a = (40.0 + 9.0 * noise.sample(&mut rng)).round().clamp(20.0, 75.0);
        let w = (48.0 + 6.0 * noise.sample(&mut rng) + if male { 1.5 } else { 0.0 }).round().clamp(1.0, 52.0);
        let occ_eff = match o {
            "102" => 15000.0,
            "106" => -8000.0,
            "140" => 6000.0,
            "141" => 9000.0,
            "101" => 3000.0,
            _ => 0.0,
        };
        let edu_eff = match e {
            "14" => 9000.0,
            "16" => 14000.0,
            _ => 0.0,
        };
        let y = 15000.0 + 600.0 * a - 6.0 * a * a + 900.0 * w + occ_eff + edu_eff
            + if male { gap } else { 0.0 }
            + 22000.0 * noise.sample(&mut rng);
        age.push(a);
        educ.push(e);
        occ.push(o);
        wks.push(w);
        gender.push(if male { "male" } else { "female" });
        wage.push(y.max(0.0).round());
    }
    Table::new(
        "census_wages",
        vec![
            Column::numeric("age", age),
            Column::factor("educ", &educ),
            Column::factor("occ", &occ),
            Column::numeric("wkswrkd", wks),
            Column::factor("gender", &gender),
            Column::numeric("wageinc", wage),
        ],
    )
    .expect("generated columns have equal length")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_determinism() {
        let a = law_school(300, 1);
        assert_eq!(a.nrows(), 300);
        assert_eq!(a, law_school(300, 1));
        assert_eq!(a.column("race1").unwrap().observed_levels().len(), 5);
        let r = recidivism(200, 2);
        assert_eq!(r.column("two_year_recid").unwrap().observed_levels(), vec!["No", "Yes"]);
        let c = census_wages(200, 5000.0, 3);
        assert_eq!(c.column("gender").unwrap().observed_levels(), vec!["female", "male"]);
    }
}
