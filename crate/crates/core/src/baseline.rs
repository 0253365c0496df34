//! Chi-square (Q-statistic) baseline: flag a tick when the Mahalanobis norm
//! of the centered observation exceeds the `1 - α` quantile of `χ²_p`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{dot, sorted_symmetric_eigen};
use crate::subspace::sample_covariance;

pub use crate::stats::chi2_quantile;

/// Largest condition number accepted for the regularized covariance.
pub const MAX_CONDITION: f64 = 1e12;

const RIDGE_LADDER: [f64; 11] = [0.0, 1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4, 1e6, 1e8, 1e10];

#[derive(Debug, Clone, PartialEq)]
pub struct QDetector {
    pub precision: DMatrix<f64>,
    pub mean: DVector<f64>,
    pub dof: usize,
    pub alpha: f64,
    pub ridge: f64,
    /// `χ²_{dof, 1-α}`.
    pub threshold: f64,
}

impl QDetector {
    /// Same fit, new level.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(QDetector {
            alpha,
            threshold: chi2_quantile(self.dof, 1.0 - alpha)?,
            ..self.clone()
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::param("alpha", format!("{alpha} outside (0,1)")))
    }
}

/// Fits mean and regularized precision on the warm-up window.
pub fn fit_q_detector(x_warmup: &DMatrix<f64>, alpha: f64) -> Result<QDetector> {
    check_alpha(alpha)?;
    let p = x_warmup.nrows();
    if p == 0 {
        return Err(Error::Dimension("no streams".into()));
    }
    let cov = sample_covariance(x_warmup, true)?;
    let (vals, vecs) = sorted_symmetric_eigen(&cov.matrix);
    let top = vals[0].max(0.0);
    let bottom = vals[p - 1].max(0.0);
    if top == 0.0 {
        return Err(Error::Degenerate("warm-up covariance is zero".into()));
    }
    let ridge = RIDGE_LADDER
        .iter()
        .copied()
        .find(|&r| bottom + r > 0.0 && (top + r) / (bottom + r) < MAX_CONDITION)
        .ok_or(Error::IllConditioned {
            ridge: RIDGE_LADDER[RIDGE_LADDER.len() - 1],
        })?;
    let inv = DVector::from_iterator(p, vals.iter().map(|&v| 1.0 / (v.max(0.0) + ridge)));
    let precision = &vecs * DMatrix::from_diagonal(&inv) * vecs.transpose();
    let precision = (&precision + precision.transpose()) * 0.5;
    Ok(QDetector {
        precision,
        mean: x_warmup.column_mean(),
        dof: p,
        alpha,
        ridge,
        threshold: chi2_quantile(p, 1.0 - alpha)?,
    })
}

/// `xᵀ Σ⁻¹ x` for an already centered `x`.
pub fn q_statistic(q: &QDetector, x_centered: &[f64]) -> Result<f64> {
    if x_centered.len() != q.dof {
        return Err(Error::Dimension(format!(
            "vector of length {} for a {}-dimensional detector",
            x_centered.len(),
            q.dof
        )));
    }
    let p = q.dof;
    let prec = q.precision.as_slice();
    let v: f64 = (0..p)
        .map(|j| x_centered[j] * dot(&prec[j * p..(j + 1) * p], x_centered))
        .sum();
    Ok(v.max(0.0))
}

/// Q for every tick after the warm-up, centered by the warm-up mean.
pub fn q_scores(x: &DMatrix<f64>, q: &QDetector, warmup_len: usize) -> Result<Vec<f64>> {
    if x.nrows() != q.dof {
        return Err(Error::Dimension(format!("{} streams for a {}-dimensional detector", x.nrows(), q.dof)));
    }
    if warmup_len > x.ncols() {
        return Err(Error::EmptyWindow);
    }
    let mut y = vec![0.0; q.dof];
    (warmup_len..x.ncols())
        .map(|t| {
            for (j, v) in y.iter_mut().enumerate() {
                *v = x[(j, t)] - q.mean[j];
            }
            q_statistic(q, &y)
        })
        .collect()
}

/// `Q_t > χ²_{p,1-α}` for every tick after the warm-up.
pub fn q_detect_stream(x: &DMatrix<f64>, q: &QDetector, warmup_len: usize) -> Result<Vec<bool>> {
    Ok(q_scores(x, q, warmup_len)?
        .into_iter()
        .map(|v| v > q.threshold)
        .collect())
}
