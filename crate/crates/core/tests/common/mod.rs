//! Independent reference implementations shared by the property suite and
//! the acceptance runner. Each check returns the worst discrepancy found or
//! a description of the first failure.

#![allow(dead_code)]

pub mod cli_cases;

use std::collections::BTreeMap;

use fairscope::causal::iamb;
use fairscope::design::{DesignEncoder, ModelSpec};
use fairscope::fair::{fit_fair_ridge, Family};
use fairscope::kendall::kendall_tau_b;
use fairscope::linear::{fit_linear_s, fit_ols};
use fairscope::logistic::{fit_logit, log_likelihood, score};
use fairscope::neighbors::fit_knn;
use fairscope::table::{Column, Table};
use fairscope::viz::{density_by_group, kde_at};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub type Check = std::result::Result<String, String>;

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    Normal::new(0.0, 1.0).unwrap().sample(rng)
}

/// Gauss-Jordan with partial pivoting; returns A⁻¹.
pub fn naive_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| f64::from(i == j)));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, p);
        let d = m[c][c];
        for v in m[c].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    for k in 0..2 * n {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

fn numeric_table(cols: &[(String, Vec<f64>)]) -> Table {
    Table::new("t", cols.iter().map(|(n, v)| Column::numeric(n.clone(), v.clone())).collect()).unwrap()
}

/// OLS estimates and classical SEs against (XᵀX)⁻¹Xᵀy computed by hand.
pub fn ols_normal_equations(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for inst in 0..instances {
        let n = rng.random_range(20..80);
        let p = rng.random_range(1..6);
        let mut cols: Vec<(String, Vec<f64>)> = (0..p)
            .map(|j| (format!("x{j}"), (0..n).map(|_| gaussian(&mut rng) * (j + 1) as f64).collect()))
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 1.0 + cols.iter().map(|(_, v)| 0.7 * v[i]).sum::<f64>() + gaussian(&mut rng))
            .collect();
        cols.push(("y".into(), y.clone()));
        let t = numeric_table(&cols);
        let names: Vec<&str> = (0..p).map(|j| cols[j].0.as_str()).collect();
        let design = DesignEncoder::fit(&t, &names, true, None).unwrap().encode(&t).unwrap();
        let fit = fit_ols(&design, &y, false).map_err(|e| e.to_string())?;

        let x: Vec<Vec<f64>> = (0..n)
            .map(|i| std::iter::once(1.0).chain((0..p).map(|j| cols[j].1[i])).collect())
            .collect();
        let q = p + 1;
        let xtx: Vec<Vec<f64>> = (0..q)
            .map(|a| (0..q).map(|b| (0..n).map(|i| x[i][a] * x[i][b]).sum()).collect())
            .collect();
        let xty: Vec<f64> = (0..q).map(|a| (0..n).map(|i| x[i][a] * y[i]).sum()).collect();
        let inv = naive_inverse(&xtx);
        let beta: Vec<f64> = (0..q).map(|a| (0..q).map(|b| inv[a][b] * xty[b]).sum()).collect();
        let rss: f64 = (0..n)
            .map(|i| {
                let r = y[i] - (0..q).map(|a| x[i][a] * beta[a]).sum::<f64>();
                r * r
            })
            .sum();
        let s2 = rss / (n - q) as f64;
        for a in 0..q {
            let de = (fit.estimates[a] - beta[a]).abs();
            let ds = (fit.standard_errors[a] - (s2 * inv[a][a]).sqrt()).abs();
            worst = worst.max(de).max(ds);
            if de > 1e-8 || ds > 1e-8 {
                return Err(format!("instance {inst}: coefficient {a} differs by {de:e} (SE {ds:e})"));
            }
        }
    }
    Ok(format!("{instances} instances, max |Δ| = {worst:.2e}"))
}

pub fn kendall_quadratic(u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    let (mut c, mut d, mut tu, mut tv) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let a = (u[i] - u[j]).signum() * f64::from(u[i] != u[j]);
            let b = (v[i] - v[j]).signum() * f64::from(v[i] != v[j]);
            if a == 0.0 {
                tu += 1;
            }
            if b == 0.0 {
                tv += 1;
            }
            if a * b > 0.0 {
                c += 1;
            } else if a * b < 0.0 {
                d += 1;
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    (c - d) as f64 / (((n0 - tu) as f64) * ((n0 - tv) as f64)).sqrt()
}

pub fn kendall_oracle(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for inst in 0..instances {
        let n = rng.random_range(2..120);
        let levels = rng.random_range(2..12);
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
        let v: Vec<f64> = (0..n).map(|i| u[i] * 0.5 + rng.random_range(0..levels) as f64).collect();
        let Ok(fast) = kendall_tau_b(&u, &v) else { continue };
        let slow = kendall_quadratic(&u, &v);
        let d = (fast - slow).abs();
        worst = worst.max(d);
        if d > 1e-12 {
            return Err(format!("instance {inst}: tau {fast} vs oracle {slow}"));
        }
    }
    Ok(format!("{instances} tied instances, max |Δ| = {worst:.2e}"))
}

/// kNN predictions against a full sort of standardized distances.
pub fn knn_brute_force(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for inst in 0..instances {
        let n = rng.random_range(10..60);
        let k = rng.random_range(1..=n.min(12));
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64).collect();
        let x1: Vec<f64> = (0..n).map(|_| gaussian(&mut rng) * 10.0).collect();
        let y: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
        let w0 = rng.random_range(0.1..2.0);
        let t = numeric_table(&[("a".into(), x0.clone()), ("b".into(), x1.clone()), ("y".into(), y.clone())]);
        let spec = ModelSpec::new(&t, "y", None).unwrap();
        let model = fit_knn(&t, &spec, k, &BTreeMap::from([("a".to_string(), w0)])).map_err(|e| e.to_string())?;
        let got = model.predict(&t).map_err(|e| e.to_string())?;
        let sd = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
        };
        let (s0, s1) = (sd(&x0), sd(&x1));
        for q in 0..n {
            let mut d: Vec<(f64, usize)> = (0..n)
                .map(|i| {
                    let a = w0 * (x0[i] - x0[q]) / s0;
                    let b = (x1[i] - x1[q]) / s1;
                    (a * a + b * b, i)
                })
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let expect = d[..k].iter().map(|&(_, i)| y[i]).sum::<f64>() / k as f64;
            if (expect - got[q]).abs() > 1e-12 {
                return Err(format!("instance {inst}, query {q}: {} vs {expect}", got[q]));
            }
        }
    }
    Ok(format!("{instances} instances agree"))
}

/// Score at the IRLS optimum, and the analytic score against central
/// differences of the log-likelihood at random points.
pub fn logit_gradient(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_score, mut worst_fd) = (0.0f64, 0.0f64);
    for inst in 0..instances {
        let n = rng.random_range(80..300);
        let x0: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
        let x1: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let p = 1.0 / (1.0 + (-(0.3 + x0[i] - 0.5 * x1[i])).exp());
                f64::from(rng.random::<f64>() < p)
            })
            .collect();
        let t = numeric_table(&[("a".into(), x0), ("b".into(), x1)]);
        let design = DesignEncoder::fit(&t, &["a", "b"], true, None).unwrap().encode(&t).unwrap();
        let fit = fit_logit(&design, &y).map_err(|e| e.to_string())?;
        let beta = DVector::from_column_slice(&fit.estimates);
        let g = score(&design.matrix, &y, &beta);
        let gmax = g.amax();
        worst_score = worst_score.max(gmax);
        if gmax > 1e-6 {
            return Err(format!("instance {inst}: score max-norm {gmax:e}"));
        }
        let b = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        let g = score(&design.matrix, &y, &b);
        let h = 1e-5;
        for j in 0..3 {
            let mut up = b.clone();
            let mut dn = b.clone();
            up[j] += h;
            dn[j] -= h;
            let fd = (log_likelihood(&design.matrix, &y, &up) - log_likelihood(&design.matrix, &y, &dn)) / (2.0 * h);
            let rel = (fd - g[j]).abs() / g[j].abs().max(1.0);
            worst_fd = worst_fd.max(rel);
            if rel > 1e-5 {
                return Err(format!("instance {inst}: gradient {j} analytic {} vs FD {fd}", g[j]));
            }
        }
    }
    Ok(format!("max score {worst_score:.1e}, max FD rel {worst_fd:.1e}"))
}

pub fn kde_direct_sum(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..300).map(|_| 50.0 + 8.0 * gaussian(&mut rng)).collect();
    let mut worst = 0.0f64;
    for &h in &[0.5, 1.0, 3.0] {
        for i in 0..50 {
            let x = 20.0 + i as f64 * 1.2;
            let direct: f64 = data
                .iter()
                .map(|&d| (-0.5 * ((x - d) / h).powi(2)).exp() / (h * (2.0 * std::f64::consts::PI).sqrt()))
                .sum::<f64>()
                / data.len() as f64;
            let d = (kde_at(&data, h, x) - direct).abs();
            worst = worst.max(d);
            if d > 1e-12 {
                return Err(format!("h={h}, x={x}: differs by {d:e}"));
            }
        }
    }
    let g: Vec<&str> = (0..300).map(|i| if i % 3 == 0 { "a" } else { "b" }).collect();
    let t = Table::new("t", vec![Column::numeric("v", data), Column::factor("g", &g)]).unwrap();
    let dens = density_by_group(&t, "v", Some("g"), 1.0).map_err(|e| e.to_string())?;
    for (c, area) in dens.curves.iter().zip(dens.integrals()) {
        if (area - 1.0).abs() > 0.02 {
            return Err(format!("group {} integrates to {area}", c.group));
        }
    }
    Ok(format!("max |Δ| = {worst:.1e}, integrals {:?}", dens.integrals().iter().map(|a| format!("{a:.4}")).collect::<Vec<_>>()))
}

pub fn iamb_chain(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2000;
    let x: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
    let y: Vec<f64> = x.iter().map(|&v| 0.8 * v + gaussian(&mut rng)).collect();
    let z: Vec<f64> = y.iter().map(|&v| 0.8 * v + gaussian(&mut rng)).collect();
    let t = numeric_table(&[("X".into(), x), ("Y".into(), y), ("Z".into(), z)]);
    let g = iamb(&t, 0.05).map_err(|e| e.to_string())?;
    if g.has_edge("X", "Y") && g.has_edge("Y", "Z") && !g.has_edge("X", "Z") {
        Ok("X-Y and Y-Z present, X-Z absent".into())
    } else {
        Err(format!("directed {:?}, undirected {:?}", g.directed_edges, g.undirected_edges))
    }
}

/// Nominal 95% intervals for level differences at a covariate point, under
/// a correctly specified interaction model.
pub fn interaction_ci_coverage(reps: usize, seed: u64) -> std::result::Result<(String, f64), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a0, a1, b0, b1, x0) = (2.0, 1.0, 0.5, 2.0, 1.0);
    let point = Table::new("p", vec![Column::numeric("x", vec![x0])]).unwrap();
    let truth = (a0 + a1 * x0) - (b0 + b1 * x0);
    let mut covered = 0;
    for _ in 0..reps {
        let n = 120;
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        let mut gs = Vec::with_capacity(n);
        for i in 0..n {
            let a = i % 2 == 0;
            let x = rng.random_range(0.0..3.0);
            let y = if a { a0 + a1 * x } else { b0 + b1 * x } + gaussian(&mut rng);
            xs.push(x);
            ys.push(y);
            gs.push(if a { "a" } else { "b" });
        }
        let t = Table::new(
            "t",
            vec![Column::numeric("x", xs), Column::numeric("y", ys), Column::factor("g", &gs)],
        )
        .unwrap();
        let spec = ModelSpec::new(&t, "y", Some("g")).unwrap();
        let m = fit_linear_s(&t, &spec, true, false).map_err(|e| e.to_string())?;
        let (est, se) = m.level_difference_at("a", "b", &point).map_err(|e| e.to_string())?;
        if (est - truth).abs() <= 1.959964 * se {
            covered += 1;
        }
    }
    let rate = covered as f64 / reps as f64;
    let msg = format!("coverage {rate:.3} over {reps} replications");
    if (rate - 0.95).abs() <= 0.03 {
        Ok((msg, rate))
    } else {
        Err(msg)
    }
}

pub fn fair_ridge_budget(seed: u64) -> Check {
    let t = fairscope::synth::census_wages(800, 9000.0, seed);
    let spec = ModelSpec::new(&t, "wageinc", Some("gender")).unwrap();
    let full = fit_fair_ridge(&t, &spec, 1.0, Family::Linear).map_err(|e| e.to_string())?;
    let mut report = vec![format!("unconstrained share {:.4}", full.share)];
    for &u in &[0.5, 0.1, 0.01, 0.001] {
        let m = fit_fair_ridge(&t, &spec, u, Family::Linear).map_err(|e| e.to_string())?;
        if m.share > u + 1e-4 {
            return Err(format!("budget {u}: share {}", m.share));
        }
        let mut tr = m.trace.clone();
        tr.sort_by(|a, b| a.0.total_cmp(&b.0));
        if tr.windows(2).any(|w| w[1].1 > w[0].1 + 1e-12) {
            return Err(format!("budget {u}: share not monotone in lambda"));
        }
        report.push(format!("u={u}: {:.2e}", m.share));
    }
    Ok(report.join(", "))
}
