use nalgebra::DMatrix;

use super::TrainConfig;
use crate::corpus::PpmiMatrix;
use crate::error::{Error, Result};
use crate::sparse::SymCsr;

fn check_dims(y: &[PpmiMatrix], u: &[DMatrix<f64>]) -> Result<()> {
    if y.len() != u.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} PPMI slices vs {} factor slices",
            y.len(),
            u.len()
        )));
    }
    for (t, (yt, ut)) in y.iter().zip(u).enumerate() {
        if yt.n() != ut.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "slice {t}: PPMI is {0}x{0} but factor has {1} rows",
                yt.n(),
                ut.nrows()
            )));
        }
    }
    Ok(())
}

/// `‖Y − A Bᵀ‖²_F` without forming the dense residual.
pub(crate) fn residual_sq(y: &SymCsr, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let gram = (a.transpose() * a)
        .component_mul(&(b.transpose() * b))
        .sum();
    y.frobenius_sq() - 2.0 * y.inner_with_product(a, b) + gram
}

/// Value of the joint objective
/// `½Σ‖Y(t) − U(t)U(t)ᵀ‖² + λ/2 Σ‖U(t)‖² + τ/2 Σ_{t≥2}‖U(t−1) − U(t)‖²`.
pub fn objective_value(y: &[PpmiMatrix], u: &[DMatrix<f64>], cfg: &TrainConfig) -> Result<f64> {
    check_dims(y, u)?;
    let fit: f64 = y
        .iter()
        .zip(u)
        .map(|(yt, ut)| residual_sq(&yt.values, ut, ut))
        .sum();
    let ridge: f64 = u.iter().map(|ut| ut.norm_squared()).sum();
    let smooth: f64 = u.windows(2).map(|w| (&w[0] - &w[1]).norm_squared()).sum();
    Ok(0.5 * fit + 0.5 * cfg.lambda * ridge + 0.5 * cfg.tau * smooth)
}

/// Objective of the split problem with `U ≈ W`, which the solver decreases
/// monotonically.
pub fn splitting_objective(
    y: &[PpmiMatrix],
    u: &[DMatrix<f64>],
    w: &[DMatrix<f64>],
    cfg: &TrainConfig,
) -> Result<f64> {
    check_dims(y, u)?;
    check_dims(y, w)?;
    let mut total = 0.0;
    for t in 0..y.len() {
        total += 0.5 * residual_sq(&y[t].values, &u[t], &w[t]);
        total += 0.5 * cfg.gamma * (&u[t] - &w[t]).norm_squared();
        total += 0.5 * cfg.lambda * (u[t].norm_squared() + w[t].norm_squared());
    }
    for pair in [u, w] {
        total += 0.5
            * cfg.tau
            * pair
                .windows(2)
                .map(|s| (&s[0] - &s[1]).norm_squared())
                .sum::<f64>();
    }
    Ok(total)
}
