//! Kendall's tau-b with tie correction, by merge-sort inversion counting.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TauError {
    #[error("inputs have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two observations")]
    TooShort,
    #[error("first input is constant")]
    ConstantFirst,
    #[error("second input is constant")]
    ConstantSecond,
    #[error("input contains NaN")]
    NotANumber,
}

fn tie_pairs(sorted: &[f64]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts `v` ascending and returns the number of strict inversions removed.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], &mut buf[..mid]);
    swaps += merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// tau-b = (C − D) / sqrt((n₀ − n₁)(n₀ − n₂)) in O(n log n).
pub fn kendall_tau_b(u: &[f64], v: &[f64]) -> Result<f64, TauError> {
    if u.len() != v.len() {
        return Err(TauError::LengthMismatch(u.len(), v.len()));
    }
    let n = u.len();
    if n < 2 {
        return Err(TauError::TooShort);
    }
    if u.iter().chain(v).any(|x| x.is_nan()) {
        return Err(TauError::NotANumber);
    }
    let mut pairs: Vec<(f64, f64)> = u.iter().copied().zip(v.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let n1 = tie_pairs(&xs);
    let mut joint = 0u64;
    let mut run = 1u64;
    for w in pairs.windows(2) {
        if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
            run += 1;
        } else {
            joint += run * (run - 1) / 2;
            run = 1;
        }
    }
    joint += run * (run - 1) / 2;

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);
    let n2 = tie_pairs(&ys);

    if n1 == n0 {
        return Err(TauError::ConstantFirst);
    }
    if n2 == n0 {
        return Err(TauError::ConstantSecond);
    }
    let numer = n0 as i128 - n1 as i128 - n2 as i128 + joint as i128 - 2 * swaps as i128;
    let denom = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    Ok((numer as f64 / denom).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_orderings() {
        assert_eq!(kendall_tau_b(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0]), Ok(1.0));
        assert_eq!(kendall_tau_b(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Ok(-1.0));
    }

    #[test]
    fn constant_flagged() {
        assert_eq!(kendall_tau_b(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(TauError::ConstantFirst));
        assert_eq!(kendall_tau_b(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]), Err(TauError::ConstantSecond));
        assert_eq!(kendall_tau_b(&[1.0], &[1.0]), Err(TauError::TooShort));
        assert!(matches!(kendall_tau_b(&[1.0, 2.0], &[1.0]), Err(TauError::LengthMismatch(2, 1))));
    }

    #[test]
    fn hand_counted_ties() {
        // C = 4, D = 0, one pair tied only in u, one tied only in v
        let u = [1.0, 1.0, 2.0, 3.0];
        let v = [1.0, 2.0, 2.0, 3.0];
        let expected = 4.0 / 5.0;
        assert!((kendall_tau_b(&u, &v).unwrap() - expected).abs() < 1e-15);
    }
}
