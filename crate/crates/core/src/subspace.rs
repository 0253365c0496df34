//! Factor-subspace estimation and diagnostics.
//!
//! A batch PCA on the warm-up window fixes the subspace dimension `k`; after
//! that the basis is tracked with a constant-step Oja update and
//! re-orthonormalized every tick. Residuals are projections onto the
//! orthogonal complement of the current basis.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    self, axpy, column_space, dot, orthonormalize, singular_values, sorted_symmetric_eigen,
};
use crate::rng;
use crate::synthgen::{SyntheticPreset, TICKS_PER_WEEK};

const ORTHONORMAL_TOL: f64 = 1e-10;

/// Orthonormal p x k basis of the estimated factor subspace with the
/// eigenvalues that selected it.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceEstimate {
    basis: DMatrix<f64>,
    eigenvalues: Vec<f64>,
}

impl SubspaceEstimate {
    pub fn new(basis: DMatrix<f64>, eigenvalues: Vec<f64>) -> Result<Self> {
        let k = basis.ncols();
        if eigenvalues.len() != k {
            return Err(Error::Dimension(format!(
                "{} eigenvalues for a rank-{k} basis",
                eigenvalues.len()
            )));
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) || eigenvalues.iter().any(|&l| l < 0.0) {
            return Err(Error::param("eigenvalues", "must be non-negative and non-increasing"));
        }
        let gram = basis.transpose() * &basis;
        if (gram - DMatrix::identity(k, k)).amax() > ORTHONORMAL_TOL {
            return Err(Error::param("basis", "columns are not orthonormal"));
        }
        Ok(SubspaceEstimate { basis, eigenvalues })
    }

    /// The zero-dimensional subspace of R^p: projection is the identity.
    pub fn trivial(p: usize) -> Self {
        SubspaceEstimate {
            basis: DMatrix::zeros(p, 0),
            eigenvalues: Vec::new(),
        }
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Writes `Bᵀy` into `coeffs` and `y - B Bᵀ y` into `out`.
    #[inline]
    pub(crate) fn project_into(&self, y: &[f64], coeffs: &mut [f64], out: &mut [f64]) {
        let p = self.ambient_dim();
        let data = self.basis.as_slice();
        out.copy_from_slice(y);
        for (j, c) in coeffs.iter_mut().enumerate() {
            let q = &data[j * p..(j + 1) * p];
            *c = dot(q, y);
            axpy(-*c, q, out);
        }
    }

    /// One Oja step `B ← orth(B + η y (yᵀB))` given `coeffs = Bᵀy`.
    #[inline]
    pub(crate) fn oja_step(&mut self, y: &[f64], coeffs: &[f64], eta: f64) {
        if eta == 0.0 || coeffs.iter().all(|&c| c == 0.0) {
            return;
        }
        let p = self.ambient_dim();
        let data = self.basis.as_mut_slice();
        for (j, &c) in coeffs.iter().enumerate() {
            axpy(eta * c, y, &mut data[j * p..(j + 1) * p]);
        }
        orthonormalize(&mut self.basis);
    }

    pub(crate) fn from_parts_unchecked(basis: DMatrix<f64>, eigenvalues: Vec<f64>) -> Self {
        SubspaceEstimate { basis, eigenvalues }
    }
}

/// Symmetric p x p covariance estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub matrix: DMatrix<f64>,
    pub n_samples: usize,
}

impl CovarianceEstimate {
    pub fn new(matrix: DMatrix<f64>, n_samples: usize) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension("covariance must be square".into()));
        }
        if (&matrix - matrix.transpose()).amax() > 1e-10 * matrix.amax().max(1.0) {
            return Err(Error::param("matrix", "not symmetric"));
        }
        Ok(CovarianceEstimate { matrix, n_samples })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `(1/n) Σ x_t x_tᵀ`, optionally after subtracting the column mean.
pub fn sample_covariance(x: &DMatrix<f64>, center: bool) -> Result<CovarianceEstimate> {
    let n = x.ncols();
    if n < 2 {
        return Err(Error::param("X", "need at least two samples"));
    }
    let mut cov = if center {
        let mean = linalg::column_mean(x);
        let mut centered = x.clone();
        for mut col in centered.column_iter_mut() {
            col -= &mean;
        }
        &centered * centered.transpose()
    } else {
        x * x.transpose()
    };
    cov /= n as f64;
    // exact symmetry for downstream eigen solvers
    let cov = (&cov + cov.transpose()) * 0.5;
    Ok(CovarianceEstimate {
        matrix: cov,
        n_samples: n,
    })
}

/// Top eigenpairs of the centered warm-up covariance, keeping the smallest
/// `k` whose cumulative explained-variance share reaches `var_fraction`.
pub fn batch_pca(x_warmup: &DMatrix<f64>, var_fraction: f64) -> Result<SubspaceEstimate> {
    if !(var_fraction > 0.0 && var_fraction <= 1.0) {
        return Err(Error::param("var_fraction", format!("{var_fraction} outside (0,1]")));
    }
    let cov = sample_covariance(x_warmup, true)?;
    let (vals, vecs) = sorted_symmetric_eigen(&cov.matrix);
    let vals: Vec<f64> = vals.into_iter().map(|v| v.max(0.0)).collect();
    let total: f64 = vals.iter().sum();
    if total <= f64::EPSILON * cov.matrix.amax().max(1.0) || total == 0.0 {
        return Err(Error::Degenerate("warm-up data has no variance".into()));
    }
    let mut k = vals.len();
    let mut acc = 0.0;
    for (i, v) in vals.iter().enumerate() {
        acc += v;
        // relative slack so that var_fraction = 1 stops at the last nonzero
        // eigenvalue instead of wandering into round-off
        if acc >= var_fraction * total * (1.0 - 1e-12) {
            k = i + 1;
            break;
        }
    }
    Ok(leading(vecs, vals, k))
}

/// Batch PCA with a fixed subspace dimension.
pub fn batch_pca_rank(x: &DMatrix<f64>, k: usize, center: bool) -> Result<SubspaceEstimate> {
    let cov = sample_covariance(x, center)?;
    if k == 0 || k > cov.dim() {
        return Err(Error::param("k", format!("{k} outside 1..={}", cov.dim())));
    }
    let (vals, vecs) = sorted_symmetric_eigen(&cov.matrix);
    let vals = vals.into_iter().map(|v| v.max(0.0)).collect();
    Ok(leading(vecs, vals, k))
}

fn leading(vecs: DMatrix<f64>, vals: Vec<f64>, k: usize) -> SubspaceEstimate {
    let mut basis = vecs.columns(0, k).clone_owned();
    // eigenvectors from the solver are orthonormal up to round-off; tighten
    orthonormalize(&mut basis);
    SubspaceEstimate::from_parts_unchecked(basis, vals[..k].to_vec())
}

/// One incremental-PCA step on the centered sample `x - mean` with step `eta`.
/// The eigenvalue record from initialization is carried along unchanged.
pub fn ipca_update(
    est: &SubspaceEstimate,
    x: &DVector<f64>,
    mean: &DVector<f64>,
    eta: f64,
) -> Result<SubspaceEstimate> {
    check_len(est, x.len())?;
    check_len(est, mean.len())?;
    if !(eta >= 0.0) {
        return Err(Error::param("eta", "must be non-negative"));
    }
    let y: Vec<f64> = x.iter().zip(mean.iter()).map(|(a, b)| a - b).collect();
    let coeffs: Vec<f64> = est.basis.column_iter().map(|q| dot(q.as_slice(), &y)).collect();
    let mut next = est.clone();
    next.oja_step(&y, &coeffs, eta);
    Ok(next)
}

/// `(I - B̂B̂ᵀ)(x - mean)` for the orthonormal basis `B̂`.
pub fn project_residual(
    x: &DVector<f64>,
    mean: &DVector<f64>,
    est: &SubspaceEstimate,
) -> Result<DVector<f64>> {
    check_len(est, x.len())?;
    check_len(est, mean.len())?;
    let y: Vec<f64> = x.iter().zip(mean.iter()).map(|(a, b)| a - b).collect();
    let mut coeffs = vec![0.0; est.dim()];
    let mut out = vec![0.0; y.len()];
    est.project_into(&y, &mut coeffs, &mut out);
    Ok(DVector::from_vec(out))
}

fn check_len(est: &SubspaceEstimate, len: usize) -> Result<()> {
    if len != est.ambient_dim() {
        return Err(Error::Dimension(format!(
            "vector of length {len} for a subspace of R^{}",
            est.ambient_dim()
        )));
    }
    Ok(())
}

fn check_pair(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension("subspaces live in different ambient spaces".into()));
    }
    let qa = column_space(a);
    let qb = column_space(b);
    if qa.ncols() == 0 || qb.ncols() == 0 {
        return Err(Error::param("basis", "zero-dimensional subspace"));
    }
    // the smaller span goes second so its residual carries one sine per angle
    Ok(if qb.ncols() > qa.ncols() { (qb, qa) } else { (qa, qb) })
}

/// Principal angles in increasing order. Cosines resolve large angles and
/// sines of `(I - QaQaᵀ)Qb` resolve small ones, where `acos` near 1 would
/// lose half the digits.
fn angles(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (qa, qb) = check_pair(a, b)?;
    let cos = singular_values(&(qa.transpose() * &qb));
    let off = &qb - &qa * (qa.transpose() * &qb);
    let mut sin = singular_values(&off);
    sin.reverse();
    Ok(cos
        .iter()
        .zip(sin.iter())
        .map(|(&c, &s)| {
            let c = c.clamp(0.0, 1.0);
            if c * c < 0.5 {
                c.acos()
            } else {
                s.clamp(0.0, 1.0).asin()
            }
        })
        .collect())
}

/// Largest principal angle, `acos(σ_min(ŴᵀW))`, in `[0, π/2]`.
pub fn largest_principal_angle(w_hat: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<f64> {
    Ok(angles(w_hat, w)?.last().copied().unwrap_or(0.0))
}

/// Smallest principal angle, `acos(σ_max(ŴᵀW))`.
pub fn smallest_principal_angle(w_hat: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<f64> {
    Ok(angles(w_hat, w)?.first().copied().unwrap_or(0.0))
}

/// All principal angles in increasing order.
pub fn principal_angles(w_hat: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<Vec<f64>> {
    angles(w_hat, w)
}

/// Operator-norm distance between the orthogonal projectors onto two spans.
pub fn projector_distance(b0_hat: &DMatrix<f64>, b0: &DMatrix<f64>) -> Result<f64> {
    if b0_hat.nrows() != b0.nrows() {
        return Err(Error::Dimension("subspaces live in different ambient spaces".into()));
    }
    let qa = column_space(b0_hat);
    let qb = column_space(b0);
    match (qa.ncols(), qb.ncols()) {
        (0, 0) => Ok(0.0),
        (a, b) if a != b => Ok(1.0),
        _ => Ok(largest_principal_angle(&qa, &qb)?.sin()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DavisKahanCheck {
    pub bound: f64,
    pub empirical: f64,
    pub holds: bool,
}

/// Compares the projector distance between the top-k eigenspaces of `Σ̂`
/// and `Σ` with `2√k ‖Σ̂ - Σ‖ / (λ_k - λ_{k+1})`.
pub fn davis_kahan_bound(
    sigma_hat: &CovarianceEstimate,
    sigma: &CovarianceEstimate,
    k: usize,
) -> Result<DavisKahanCheck> {
    let p = sigma.dim();
    if sigma_hat.dim() != p {
        return Err(Error::Dimension("covariances differ in size".into()));
    }
    if k == 0 || k > p {
        return Err(Error::param("k", format!("{k} outside 1..={p}")));
    }
    let (vals, vecs) = sorted_symmetric_eigen(&sigma.matrix);
    let gap = if k < p { vals[k - 1] - vals[k] } else { f64::INFINITY };
    if !(gap > 0.0) {
        return Err(Error::NoEigengap { gap });
    }
    let (_, vecs_hat) = sorted_symmetric_eigen(&sigma_hat.matrix);
    let diff = linalg::symmetric_op_norm(&(&sigma_hat.matrix - &sigma.matrix));
    let bound = 2.0 * (k as f64).sqrt() * diff / gap;
    let empirical = projector_distance(
        &vecs_hat.columns(0, k).clone_owned(),
        &vecs.columns(0, k).clone_owned(),
    )?;
    Ok(DavisKahanCheck {
        bound,
        empirical,
        holds: empirical <= bound + 1e-9,
    })
}

/// How the incremental estimate is started in the memory sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepStart {
    /// Uniformly random orthonormal basis.
    Random,
    /// Batch PCA on the first `n` ticks.
    Warmup(usize),
}

#[derive(Debug, Clone)]
pub struct AngleSweepConfig {
    pub preset: SyntheticPreset,
    pub etas: Vec<f64>,
    pub replications: usize,
    pub seed: u64,
    pub start: SweepStart,
}

impl Default for AngleSweepConfig {
    /// Ten weeks of anomaly-free traffic, η on a half-decade grid from 1e-7
    /// to 1e-2, ten replications, started like the detector from a
    /// two-week batch fit.
    fn default() -> Self {
        AngleSweepConfig {
            preset: SyntheticPreset {
                ticks: 10 * TICKS_PER_WEEK,
                snr: 0.0,
                ..SyntheticPreset::default()
            },
            etas: log_grid(1e-7, 1e-2, 11),
            replications: 10,
            seed: 2023,
            start: SweepStart::Warmup(2 * TICKS_PER_WEEK),
        }
    }
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSweepRow {
    pub eta: f64,
    pub mean_angle: f64,
    pub batch_angle: f64,
}

/// Largest principal angle between the true trend subspace and (a) the
/// incremental estimate after one pass over the data for each η, (b) a batch
/// PCA of the whole series; both averaged over replications.
pub fn angle_sweep(cfg: &AngleSweepConfig) -> Result<Vec<AngleSweepRow>> {
    if cfg.replications == 0 || cfg.etas.is_empty() {
        return Err(Error::param("replications", "need at least one replication and one eta"));
    }
    let per_rep: Vec<(Vec<f64>, f64)> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| sweep_replication(cfg, rng::derive_seed(cfg.seed, rep as u64)))
        .collect::<Result<_>>()?;

    let reps = cfg.replications as f64;
    let batch = per_rep.iter().map(|(_, b)| b).sum::<f64>() / reps;
    Ok(cfg
        .etas
        .iter()
        .enumerate()
        .map(|(i, &eta)| AngleSweepRow {
            eta,
            mean_angle: per_rep.iter().map(|(a, _)| a[i]).sum::<f64>() / reps,
            batch_angle: batch,
        })
        .collect())
}

fn sweep_replication(cfg: &AngleSweepConfig, seed: u64) -> Result<(Vec<f64>, f64)> {
    let ds = cfg.preset.generate(seed)?;
    let x = ds.data.values();
    let (p, n) = x.shape();
    let truth = &ds.model.loadings;
    let k = truth.ncols();

    let batch = batch_pca_rank(x, k, true)?;
    let batch_angle = largest_principal_angle(batch.basis(), truth)?;

    let (init, first) = match cfg.start {
        SweepStart::Random => {
            let mut rng = rng::stream(seed, rng::MONTE_CARLO);
            let mut b = DMatrix::from_fn(p, k, |_, _| StandardNormal.sample(&mut rng));
            orthonormalize(&mut b);
            (SubspaceEstimate::from_parts_unchecked(b, vec![0.0; k]), 0)
        }
        SweepStart::Warmup(len) => (batch_pca_rank(&x.columns(0, len).clone_owned(), k, true)?, len),
    };

    let angles = cfg
        .etas
        .iter()
        .map(|&eta| {
            let mut est = init.clone();
            // running mean over the ticks seen so far
            let mut mean = vec![0.0; p];
            for t in 0..first {
                axpy(1.0 / first as f64, x.column(t).as_slice(), &mut mean);
            }
            let mut seen = first;
            let mut y = vec![0.0; p];
            let mut coeffs = vec![0.0; k];
            for t in first..n {
                let col = x.column(t);
                seen += 1;
                let w = 1.0 / seen as f64;
                for i in 0..p {
                    mean[i] += w * (col[i] - mean[i]);
                    y[i] = col[i] - mean[i];
                }
                for (j, c) in coeffs.iter_mut().enumerate() {
                    *c = dot(est.basis.column(j).as_slice(), &y);
                }
                est.oja_step(&y, &coeffs, eta);
            }
            largest_principal_angle(est.basis(), truth)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((angles, batch_angle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn col(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn covariance_examples() {
        let zero = DMatrix::zeros(3, 5);
        assert_eq!(sample_covariance(&zero, false).unwrap().matrix, DMatrix::zeros(3, 3));

        let c = [1.0, 2.0, -1.0];
        let rep = DMatrix::from_fn(3, 4, |i, _| c[i]);
        let cov = sample_covariance(&rep, false).unwrap().matrix;
        let outer = col(&c) * col(&c).transpose();
        assert_abs_diff_eq!(cov, outer, epsilon = 1e-12);

        let x = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, -1.0]);
        let cov = sample_covariance(&x, false).unwrap().matrix;
        assert_abs_diff_eq!(cov, DMatrix::from_element(2, 2, 1.0), epsilon = 1e-12);
        assert!(sample_covariance(&DMatrix::zeros(2, 1), false).is_err());
    }

    #[test]
    fn batch_pca_rank_one() {
        let dir = [1.0, 2.0, 2.0];
        let x = DMatrix::from_fn(3, 50, |i, t| dir[i] * ((t as f64) * 0.3).sin());
        let est = batch_pca(&x, 0.9).unwrap();
        assert_eq!(est.dim(), 1);
        let est = batch_pca(&x, 1.0).unwrap();
        assert_eq!(est.dim(), 1);
    }

    #[test]
    fn batch_pca_full_fraction_counts_nonzero_eigenvalues() {
        let x = DMatrix::from_fn(4, 40, |i, t| match i {
            0 => (t as f64 * 0.7).sin(),
            1 => (t as f64 * 1.3).cos(),
            2 => 0.5 * (t as f64 * 0.7).sin(),
            _ => 0.0,
        });
        assert_eq!(batch_pca(&x, 1.0).unwrap().dim(), 2);
    }

    #[test]
    fn constant_warmup_is_degenerate() {
        let x = DMatrix::from_element(3, 10, 4.0);
        assert!(matches!(batch_pca(&x, 0.9), Err(Error::Degenerate(_))));
    }

    #[test]
    fn batch_pca_on_synthetic_warmup_picks_few_components() {
        let preset = SyntheticPreset::default();
        for seed in 0..3 {
            let ds = preset.generate(seed).unwrap();
            let warm = ds.data.window(0, preset.warmup_len);
            let k = batch_pca(&warm, 0.9).unwrap().dim();
            assert!((1..=5).contains(&k), "seed {seed}: k={k}");
        }
    }

    fn e1_basis() -> SubspaceEstimate {
        SubspaceEstimate::new(col(&[1.0, 0.0]), vec![1.0]).unwrap()
    }

    #[test]
    fn ipca_fixed_points() {
        let est = e1_basis();
        let zero = DVector::zeros(2);
        let x = DVector::from_vec(vec![3.0, -2.0]);
        assert_eq!(ipca_update(&est, &x, &zero, 0.0).unwrap(), est);
        assert_eq!(ipca_update(&est, &x, &x, 0.3).unwrap(), est);
        let orth = DVector::from_vec(vec![0.0, 1.0]);
        assert_eq!(ipca_update(&est, &orth, &zero, 0.3).unwrap(), est);
    }

    #[test]
    fn ipca_moves_towards_sample_direction() {
        let est = SubspaceEstimate::new(col(&[1.0, 0.0]), vec![1.0]).unwrap();
        let x = DVector::from_vec(vec![1.0, 1.0]);
        let next = ipca_update(&est, &x, &DVector::zeros(2), 0.5).unwrap();
        assert!(next.basis()[(1, 0)] > 0.0);
        let g = next.basis().transpose() * next.basis();
        assert_abs_diff_eq!(g[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn projection_examples() {
        let zero = DVector::zeros(2);
        let r = project_residual(&DVector::from_vec(vec![3.0, 5.0]), &zero, &e1_basis()).unwrap();
        assert_eq!(r.as_slice(), &[0.0, 5.0]);

        let x = DVector::from_vec(vec![4.0, 1.0]);
        assert_eq!(project_residual(&x, &x, &e1_basis()).unwrap(), DVector::zeros(2));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let diag = SubspaceEstimate::new(col(&[s, s]), vec![1.0]).unwrap();
        let r = project_residual(&DVector::from_vec(vec![1.0, 0.0]), &zero, &diag).unwrap();
        assert_abs_diff_eq!(r[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r[1], -0.5, epsilon = 1e-12);
    }

    #[test]
    fn angle_examples() {
        let e1 = col(&[1.0, 0.0]);
        let e2 = col(&[0.0, 1.0]);
        let d = col(&[1.0, 1.0]);
        assert_abs_diff_eq!(largest_principal_angle(&e1, &e1).unwrap(), 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(largest_principal_angle(&e1, &e2).unwrap(), FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(largest_principal_angle(&e1, &d).unwrap(), FRAC_PI_4, epsilon = 1e-12);
        assert!(largest_principal_angle(&DMatrix::zeros(2, 0), &e1).is_err());

        assert_abs_diff_eq!(projector_distance(&e1, &e1).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(projector_distance(&e1, &e2).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            projector_distance(&e1, &d).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn smallest_and_largest_angles_differ_for_partial_overlap() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_abs_diff_eq!(smallest_principal_angle(&a, &b).unwrap(), 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(largest_principal_angle(&a, &b).unwrap(), FRAC_PI_2, epsilon = 1e-7);
    }

    #[test]
    fn davis_kahan_examples() {
        let sigma = CovarianceEstimate::new(DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0])), 1).unwrap();
        let check = davis_kahan_bound(&sigma, &sigma, 1).unwrap();
        assert_eq!(check.bound, 0.0);
        assert_abs_diff_eq!(check.empirical, 0.0, epsilon = 1e-12);
        assert!(check.holds);

        let flat = CovarianceEstimate::new(DMatrix::identity(3, 3), 1).unwrap();
        assert!(matches!(davis_kahan_bound(&flat, &flat, 1), Err(Error::NoEigengap { .. })));
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-7, 1e-2, 6);
        assert_eq!(g.len(), 6);
        assert_abs_diff_eq!(g[0], 1e-7, epsilon = 1e-20);
        assert!((g[5] - 1e-2).abs() < 1e-15);
        assert!((g[2] - 1e-5).abs() < 1e-18);
    }
}
