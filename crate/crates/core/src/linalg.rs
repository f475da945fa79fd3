//! Least-squares solves on top of nalgebra's Householder QR.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative size below which an R diagonal marks a column as dependent.
const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct QrSolution {
    pub coef: DVector<f64>,
    /// Inverse of the triangular factor; (XᵀX)⁻¹ = R⁻¹R⁻ᵀ.
    pub r_inv: DMatrix<f64>,
}

impl QrSolution {
    pub fn xtx_inverse(&self) -> DMatrix<f64> {
        &self.r_inv * self.r_inv.transpose()
    }
}

/// Solves min ‖y − Xβ‖² by QR. A column whose QR diagonal is negligible
/// relative to its own norm is reported by name.
pub fn qr_least_squares(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<QrSolution> {
    let (n, p) = x.shape();
    if n < p || p == 0 {
        return Err(Error::TooFewRows { n, p });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..p {
        let norm = x.column(j).norm();
        if norm == 0.0 || r[(j, j)].abs() <= RANK_TOL * norm {
            return Err(Error::RankDeficient {
                column: names.get(j).cloned().unwrap_or_else(|| format!("#{j}")),
            });
        }
    }
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let qty = qty.rows(0, p).into_owned();
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .expect("nonzero diagonal checked above");
    let coef = &r_inv * qty;
    Ok(QrSolution { coef, r_inv })
}

/// Ridge solve min ‖y − Xβ‖² + Σ penalty_j β_j², via the augmented system
/// [X; diag(√penalty)].
pub fn ridge_least_squares(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    penalty: &[f64],
    names: &[String],
) -> Result<QrSolution> {
    let (n, p) = x.shape();
    debug_assert_eq!(penalty.len(), p);
    if penalty.iter().all(|&l| l == 0.0) {
        return qr_least_squares(x, y, names);
    }
    let mut aug = DMatrix::<f64>::zeros(n + p, p);
    aug.rows_mut(0, n).copy_from(x);
    for (j, &l) in penalty.iter().enumerate() {
        aug[(n + j, j)] = l.max(0.0).sqrt();
    }
    let mut yaug = DVector::<f64>::zeros(n + p);
    yaug.rows_mut(0, n).copy_from(y);
    qr_least_squares(&aug, &yaug, names)
}

/// Inverse of a symmetric positive definite matrix, `None` when not SPD.
pub fn spd_inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    a.clone().cholesky().map(|c| c.inverse())
}
