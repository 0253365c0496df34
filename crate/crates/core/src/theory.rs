//! Monte Carlo checks of the theoretical results: the exact support recovery
//! phase transition for thresholding, consistency of the EWMA variance
//! estimator, and how faithfully PCA residuals carry sparse anomalies.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::symmetric_op_norm;
use crate::rng;
use crate::stats::normal_upper_quantile;
use crate::subspace::batch_pca_rank;
use crate::synthgen::{
    build_factor_matrix, default_trends, generate_trends, incoherence_check, FgnSampler, NoiseSpec,
    DEFAULT_NOISE_VARIANCE, DEFAULT_TREND_AMPLITUDE, TICKS_PER_HOUR,
};

/// Amplitude boundary `g(β) = (1 + √(1-β))²` separating recoverable from
/// unrecoverable supports.
pub fn recovery_boundary(beta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::param("beta", format!("{beta} outside [0,1]")));
    }
    Ok((1.0 + (1.0 - beta).sqrt()).powi(2))
}

/// How the false-inclusion level `α(p)` of the thresholding estimator shrinks
/// with the dimension.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub enum AlphaRule {
    /// `1 / ln p`
    InverseLog,
    /// `1 / ln² p`
    #[default]
    InverseLogSquared,
    /// The same α for every p.
    Fixed(f64),
}

impl AlphaRule {
    pub fn alpha(&self, p: usize) -> f64 {
        let l = (p as f64).ln();
        match *self {
            AlphaRule::InverseLog => 1.0 / l,
            AlphaRule::InverseLogSquared => 1.0 / (l * l),
            AlphaRule::Fixed(a) => a,
        }
    }
}

/// Threshold `t_p` with `P[N(0,1) > t_p] = α/p`.
pub fn threshold_tp(p: usize, alpha: f64) -> Result<f64> {
    let q = alpha / p as f64;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::param("alpha", format!("α/p = {q} outside (0,1)")));
    }
    normal_upper_quantile(q)
}

/// Indices strictly above the threshold.
pub fn support_estimator(x: &[f64], t_p: f64) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, &v)| v > t_p)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SparseSignalSpec {
    pub p: usize,
    pub beta: f64,
    /// Amplitude exponent.
    pub r: f64,
}

impl SparseSignalSpec {
    pub fn new(p: usize, beta: f64, r: f64) -> Result<Self> {
        if p < 2 {
            return Err(Error::param("p", "need at least two coordinates"));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::param("beta", format!("{beta} outside (0,1]")));
        }
        if !(r > 0.0) {
            return Err(Error::param("r", format!("{r} must be positive")));
        }
        Ok(SparseSignalSpec { p, beta, r })
    }

    /// `⌊p^{1-β}⌋`, at least one.
    pub fn support_size(&self) -> usize {
        (((self.p as f64).powf(1.0 - self.beta) + 1e-9).floor() as usize).max(1)
    }

    /// `√(2 r ln p)`
    pub fn amplitude(&self) -> f64 {
        (2.0 * self.r * (self.p as f64).ln()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseCell {
    pub p: usize,
    pub beta: f64,
    pub r: f64,
    pub n_trials: usize,
    pub successes: usize,
    pub exact_recovery_rate: f64,
}

impl PhaseCell {
    /// Binomial standard error of the rate.
    pub fn std_error(&self) -> f64 {
        let q = self.exact_recovery_rate;
        (q * (1.0 - q) / self.n_trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    pub p_list: Vec<usize>,
    pub beta: f64,
    pub r_list: Vec<f64>,
    pub n_trials: usize,
    pub seed: u64,
    pub alpha_rule: AlphaRule,
}

impl Default for PhaseConfig {
    /// p = 5000, β = 3/4, r from a quarter to four times the boundary.
    fn default() -> Self {
        let g = 2.25;
        PhaseConfig {
            p_list: vec![5000],
            beta: 0.75,
            r_list: [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0].iter().map(|m| m * g).collect(),
            n_trials: 200,
            seed: 2023,
            alpha_rule: AlphaRule::default(),
        }
    }
}

/// Whether thresholding `u + ε` at `t_p` recovers the support exactly.
fn recovery_trial<R: Rng>(spec: &SparseSignalSpec, t_p: f64, rng: &mut R) -> bool {
    let s = spec.support_size();
    let mut on = vec![false; spec.p];
    for i in index::sample(rng, spec.p, s) {
        on[i] = true;
    }
    let a = spec.amplitude();
    on.iter().all(|&hit| {
        let e: f64 = StandardNormal.sample(rng);
        let x = if hit { a + e } else { e };
        (x > t_p) == hit
    })
}

/// Exact-recovery rate of the thresholding estimator on every (p, r) cell.
pub fn phase_transition_experiment(cfg: &PhaseConfig) -> Result<Vec<PhaseCell>> {
    if cfg.n_trials == 0 {
        return Err(Error::param("n_trials", "must be positive"));
    }
    let cells: Vec<(usize, f64)> = cfg
        .p_list
        .iter()
        .flat_map(|&p| cfg.r_list.iter().map(move |&r| (p, r)))
        .collect();
    cells
        .par_iter()
        .enumerate()
        .map(|(c, &(p, r))| {
            let spec = SparseSignalSpec::new(p, cfg.beta, r)?;
            let t_p = threshold_tp(p, cfg.alpha_rule.alpha(p))?;
            let cell_seed = rng::derive_seed(cfg.seed, c as u64);
            let successes = (0..cfg.n_trials)
                .filter(|&i| {
                    let mut g = rng::stream(rng::derive_seed(cell_seed, i as u64), rng::MONTE_CARLO);
                    recovery_trial(&spec, t_p, &mut g)
                })
                .count();
            Ok(PhaseCell {
                p,
                beta: cfg.beta,
                r,
                n_trials: cfg.n_trials,
                successes,
                exact_recovery_rate: successes as f64 / cfg.n_trials as f64,
            })
        })
        .collect()
}

/// Correlation structure of a zero-mean unit-variance Gaussian series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CorrelationSpec {
    Iid,
    Ar1 { phi: f64 },
    Fgn { hurst: f64 },
}

impl CorrelationSpec {
    /// Errors unless `Σ ρ_t²` is finite.
    pub fn check_square_summable(&self) -> Result<()> {
        match *self {
            CorrelationSpec::Iid => Ok(()),
            CorrelationSpec::Ar1 { phi } if phi.abs() < 1.0 => Ok(()),
            CorrelationSpec::Ar1 { phi } => Err(Error::NotSquareSummable(format!(
                "AR(1) with |φ| = {} is not stationary",
                phi.abs()
            ))),
            CorrelationSpec::Fgn { hurst } if hurst > 0.0 && hurst < 0.75 => Ok(()),
            CorrelationSpec::Fgn { hurst } => Err(Error::NotSquareSummable(format!(
                "fGn with H = {hurst}: ρ_t ~ t^(2H-2) is square-summable only for H < 3/4"
            ))),
        }
    }

    fn simulate<R: Rng>(&self, n: usize, fgn: Option<&FgnSampler>, rng: &mut R) -> Vec<f64> {
        match *self {
            CorrelationSpec::Iid => (0..n).map(|_| StandardNormal.sample(rng)).collect(),
            CorrelationSpec::Ar1 { phi } => {
                let s = (1.0 - phi * phi).sqrt();
                let mut x: f64 = StandardNormal.sample(rng);
                (0..n)
                    .map(|_| {
                        let out = x;
                        let z: f64 = StandardNormal.sample(rng);
                        x = phi * x + s * z;
                        out
                    })
                    .collect()
            }
            CorrelationSpec::Fgn { .. } => fgn.expect("sampler built for fGn").sample_pair(rng).0,
        }
    }
}

/// Runs `σ̂² ← (1-λ) σ̂² + λ r²` over the series and returns the final value.
pub fn ewma_variance(series: &[f64], lambda: f64, initial: f64) -> f64 {
    series
        .iter()
        .fold(initial, |s, &r| (1.0 - lambda) * s + lambda * r * r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyConfig {
    pub correlation: CorrelationSpec,
    pub lambdas: Vec<f64>,
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    /// Starting value `σ̂²₀`.
    pub initial: f64,
}

impl Default for ConsistencyConfig {
    fn default() -> Self {
        ConsistencyConfig {
            correlation: CorrelationSpec::Iid,
            lambdas: vec![1e-3, 1e-4, 1e-5],
            n: 100_000,
            replications: 100,
            seed: 2023,
            initial: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub lambda: f64,
    /// Mean terminal estimate minus the true variance 1.
    pub bias: f64,
    /// Variance of the terminal estimate across replications.
    pub variance: f64,
}

/// Terminal EWMA variance estimates on simulated series, summarized per λ.
/// Every λ sees the same replications.
pub fn ewma_variance_consistency_experiment(cfg: &ConsistencyConfig) -> Result<Vec<ConsistencyRow>> {
    cfg.correlation.check_square_summable()?;
    if cfg.replications < 2 || cfg.n == 0 {
        return Err(Error::param("replications", "need n > 0 and at least two replications"));
    }
    for &l in &cfg.lambdas {
        if !(l > 0.0 && l < 1.0) {
            return Err(Error::param("lambda", format!("{l} outside (0,1)")));
        }
    }
    let sampler = match cfg.correlation {
        CorrelationSpec::Fgn { hurst } => Some(FgnSampler::new(&NoiseSpec::new(hurst, 1.0)?, cfg.n)?),
        _ => None,
    };
    let finals: Vec<Vec<f64>> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let mut g = rng::stream(rng::derive_seed(cfg.seed, rep as u64), rng::MONTE_CARLO);
            let x = cfg.correlation.simulate(cfg.n, sampler.as_ref(), &mut g);
            cfg.lambdas
                .iter()
                .map(|&l| ewma_variance(&x, l, cfg.initial))
                .collect()
        })
        .collect();
    let reps = cfg.replications as f64;
    Ok(cfg
        .lambdas
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let mean = finals.iter().map(|f| f[i]).sum::<f64>() / reps;
            let variance = finals.iter().map(|f| (f[i] - mean).powi(2)).sum::<f64>() / (reps - 1.0);
            ConsistencyRow {
                lambda,
                bias: mean - 1.0,
                variance,
            }
        })
        .collect())
}

/// Mean of `(r_t(i) - s_t(i))²` over the columns of `x` and the coordinates
/// `coords`, where `r_t = (I - B̂B̂ᵀ) x_t` and `s_t` is the anomaly plus noise.
pub fn residual_gap(basis: &DMatrix<f64>, x: &DMatrix<f64>, signal: &DMatrix<f64>, coords: &[usize]) -> Result<f64> {
    if x.shape() != signal.shape() || basis.nrows() != x.nrows() {
        return Err(Error::Dimension("basis, observations and signal must share p and n".into()));
    }
    if coords.is_empty() || x.ncols() == 0 {
        return Err(Error::EmptyWindow);
    }
    let r = x - basis * (basis.transpose() * x);
    let d = r - signal;
    let total: f64 = coords.iter().map(|&i| d.row(i).iter().map(|v| v * v).sum::<f64>()).sum();
    Ok(total / (coords.len() * x.ncols()) as f64)
}

/// Plug-in constants of the resilience bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResilienceInputs {
    pub p: usize,
    pub k: usize,
    /// `‖Σ̂ - Σ‖` in operator norm.
    pub sigma_error: f64,
    /// `λ_min(BᵀB)` with loadings in unit-variance factor scale.
    pub phi: f64,
    /// Largest absolute loading.
    pub c: f64,
    /// `max_t ‖f_t‖ / √k`.
    pub c_f: f64,
    pub trace_u: f64,
    pub norm_u: f64,
}

/// Per-coordinate bound on `E(r_t(i) - ε_t(i) - u_t(i))²`.
pub fn resilience_bound(v: &ResilienceInputs) -> f64 {
    let (k, p) = (v.k as f64, v.p as f64);
    let first = v.sigma_error * 2.0 * (k * p).sqrt() / v.phi * (v.c_f * v.c * k + 1.0 + (v.trace_u / p).sqrt());
    let second = k.sqrt() * v.c / v.phi * (1.0 + (k * p).sqrt() * v.c * v.norm_u.sqrt());
    (first + second).powi(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityConfig {
    pub p_list: Vec<usize>,
    pub k: usize,
    /// Anomaly-free ticks used to fit the subspace.
    pub n: usize,
    pub snr: f64,
    pub seed: u64,
    pub hurst: f64,
    /// Trend amplitude in noise standard deviations; the noise has unit variance.
    pub trend_ratio: f64,
    pub anomalous: Vec<usize>,
    pub test_len: usize,
}

impl Default for FidelityConfig {
    /// Matches the synthetic preset: five trends, two weeks of fit data,
    /// a six-hour snr-7 shift on three ports.
    fn default() -> Self {
        FidelityConfig {
            p_list: vec![100],
            k: 5,
            n: 10080,
            snr: 7.0,
            seed: 2023,
            hurst: 0.9,
            trend_ratio: DEFAULT_TREND_AMPLITUDE / DEFAULT_NOISE_VARIANCE.sqrt(),
            anomalous: vec![0, 1, 2],
            test_len: 6 * TICKS_PER_HOUR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityRow {
    pub p: usize,
    pub gap: f64,
    pub bound: f64,
    pub amplitude_sq: f64,
    pub inputs: ResilienceInputs,
}

/// Fits the top-k subspace (uncentered second moments) on `n` anomaly-free
/// ticks, then measures how far the residuals of the anomalous ticks are from
/// anomaly plus noise on the anomalous ports.
pub fn residual_fidelity_experiment(cfg: &FidelityConfig) -> Result<Vec<FidelityRow>> {
    cfg.p_list
        .iter()
        .enumerate()
        .map(|(i, &p)| fidelity_instance(cfg, p, rng::derive_seed(cfg.seed, i as u64)))
        .collect()
}

fn fidelity_instance(cfg: &FidelityConfig, p: usize, seed: u64) -> Result<FidelityRow> {
    let (k, n, m) = (cfg.k, cfg.n, cfg.test_len);
    if n < 2 || m == 0 {
        return Err(Error::param("n", "need at least two fit ticks and one test tick"));
    }
    if cfg.anomalous.iter().any(|&i| i >= p) || cfg.anomalous.is_empty() {
        return Err(Error::param("anomalous", format!("ports must be non-empty and below {p}")));
    }
    let b = build_factor_matrix(p, k, seed)?;
    let mut trend_specs = default_trends(cfg.trend_ratio, seed);
    trend_specs.truncate(k);
    if trend_specs.len() < k {
        return Err(Error::param("k", format!("at most {} trends available", trend_specs.len())));
    }
    let total = n + m;
    let f = generate_trends(&trend_specs, total);
    let sampler = FgnSampler::new(&NoiseSpec::new(cfg.hurst, 1.0)?, total)?;
    let mut g = rng::stream(seed, rng::NOISE);
    let paths = sampler.sample_many(p, &mut g);
    let eps = DMatrix::from_fn(p, total, |i, t| paths[i][t]);
    let mut x = &b * &f + &eps;

    let fit = x.columns(0, n).clone_owned();
    let mut u = DVector::zeros(p);
    // population sd of the anomaly-free port, so the shift does not depend on n
    for &i in &cfg.anomalous {
        let loaded: f64 = b.row(i).iter().map(|v| v * v).sum();
        u[i] = cfg.snr * (loaded * cfg.trend_ratio.powi(2) / 2.0 + 1.0).sqrt();
    }
    for t in n..total {
        let mut col = x.column_mut(t);
        col += &u;
    }

    let est = batch_pca_rank(&fit, k, false)?;
    let test = x.columns(n, m).clone_owned();
    let mut signal = eps.columns(n, m).clone_owned();
    for mut col in signal.column_iter_mut() {
        col += &u;
    }
    let gap = residual_gap(est.basis(), &test, &signal, &cfg.anomalous)?;

    // factors rescaled to unit variance: f = (A/√2) f̃
    let s = cfg.trend_ratio / std::f64::consts::SQRT_2;
    let bt = &b * s;
    let sigma = &bt * bt.transpose();
    let sigma_hat = &fit * fit.transpose() / n as f64;
    let (lambda_min, max_abs) = incoherence_check(&bt);
    let c_f = f
        .column_iter()
        .map(|c| c.norm() / s)
        .fold(0.0_f64, f64::max)
        / (k as f64).sqrt();
    let inputs = ResilienceInputs {
        p,
        k,
        sigma_error: symmetric_op_norm(&(sigma_hat - sigma)),
        phi: lambda_min,
        c: max_abs,
        c_f,
        trace_u: u.norm_squared(),
        norm_u: u.norm_squared(),
    };
    let amplitude_sq = cfg.anomalous.iter().map(|&i| u[i] * u[i]).sum::<f64>() / cfg.anomalous.len() as f64;
    Ok(FidelityRow {
        p,
        gap,
        bound: resilience_bound(&inputs),
        amplitude_sq,
        inputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn boundary_examples() {
        assert_eq!(recovery_boundary(0.0).unwrap(), 4.0);
        assert_eq!(recovery_boundary(1.0).unwrap(), 1.0);
        assert_eq!(recovery_boundary(0.75).unwrap(), 2.25);
        assert!(recovery_boundary(1.5).is_err());
        let mut prev = 4.0;
        for i in 1..=100 {
            let g = recovery_boundary(i as f64 / 100.0).unwrap();
            assert!(g < prev && (1.0..=4.0).contains(&g));
            prev = g;
        }
    }

    #[test]
    fn threshold_examples() {
        // oracle: Φ⁻¹(1 - 0.0021715) by bisection on erfc
        let a = 1.0 / 100f64.ln();
        let q = a / 100.0;
        let (mut lo, mut hi) = (0.0_f64, 10.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 0.5 * statrs::function::erf::erfc(mid / std::f64::consts::SQRT_2) > q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = threshold_tp(100, a).unwrap();
        assert_abs_diff_eq!(t, lo, epsilon = 1e-9);
        assert_abs_diff_eq!(t, 2.85211, epsilon = 1e-5);
        assert_abs_diff_eq!(threshold_tp(2, 1.0).unwrap(), 0.0, epsilon = 1e-12);
        let rule = AlphaRule::InverseLog;
        let mut prev = 0.0;
        for p in [10, 100, 1000, 10000] {
            let t = threshold_tp(p, rule.alpha(p)).unwrap();
            assert!(t > prev);
            prev = t;
        }
        assert!(threshold_tp(10, 20.0).is_err());
    }

    #[test]
    fn support_is_strict() {
        assert!(support_estimator(&[0.1, 0.2], 1.0).is_empty());
        assert_eq!(support_estimator(&[1.0, 1.5, 0.0], 1.0), vec![1]);
        let mut x = vec![0.0; 50];
        x[3] = 10.0;
        x[17] = 10.0;
        assert_eq!(support_estimator(&x, 3.0), vec![3, 17]);
    }

    #[test]
    fn signal_spec_sizes() {
        let s = SparseSignalSpec::new(5000, 0.75, 9.0).unwrap();
        assert_eq!(s.support_size(), 8);
        assert_eq!(SparseSignalSpec::new(100, 0.75, 1.0).unwrap().support_size(), 3);
        assert_abs_diff_eq!(s.amplitude(), (18.0 * 5000f64.ln()).sqrt(), epsilon = 1e-12);
        assert!(SparseSignalSpec::new(100, 0.0, 1.0).is_err());
    }

    #[test]
    fn phase_cells_are_deterministic() {
        let cfg = PhaseConfig {
            p_list: vec![200],
            r_list: vec![0.5, 9.0],
            n_trials: 50,
            ..PhaseConfig::default()
        };
        let a = phase_transition_experiment(&cfg).unwrap();
        assert_eq!(a, phase_transition_experiment(&cfg).unwrap());
        assert_eq!(a.len(), 2);
        assert!(a[1].exact_recovery_rate > a[0].exact_recovery_rate);
        assert_eq!(a[0].exact_recovery_rate, a[0].successes as f64 / 50.0);
    }

    #[test]
    fn ewma_on_zeros_decays_geometrically() {
        let x = vec![0.0; 1000];
        let v = ewma_variance(&x, 1e-3, 2.0);
        assert_abs_diff_eq!(v, 2.0 * (1.0 - 1e-3f64).powi(1000), epsilon = 1e-12);
    }

    #[test]
    fn long_memory_is_refused() {
        let cfg = ConsistencyConfig {
            correlation: CorrelationSpec::Fgn { hurst: 0.9 },
            ..ConsistencyConfig::default()
        };
        assert!(matches!(
            ewma_variance_consistency_experiment(&cfg),
            Err(Error::NotSquareSummable(_))
        ));
        assert!(CorrelationSpec::Ar1 { phi: 1.0 }.check_square_summable().is_err());
        assert!(CorrelationSpec::Fgn { hurst: 0.6 }.check_square_summable().is_ok());
    }

    #[test]
    fn short_memory_fgn_runs() {
        let cfg = ConsistencyConfig {
            correlation: CorrelationSpec::Fgn { hurst: 0.6 },
            lambdas: vec![1e-2],
            n: 5000,
            replications: 20,
            ..ConsistencyConfig::default()
        };
        let rows = ewma_variance_consistency_experiment(&cfg).unwrap();
        assert!(rows[0].bias.abs() < 0.1, "{rows:?}");
    }

    #[test]
    fn exact_projector_leaves_orthogonal_signal_untouched() {
        let p = 6;
        let basis = DMatrix::from_fn(p, 2, |i, j| if i == j { 1.0 } else { 0.0 });
        let signal = DMatrix::from_fn(p, 4, |i, t| if i >= 2 { (i * t) as f64 + 0.5 } else { 0.0 });
        let trend = DMatrix::from_fn(p, 4, |i, t| if i < 2 { 3.0 + t as f64 } else { 0.0 });
        let x = &trend + &signal;
        let gap = residual_gap(&basis, &x, &signal, &[2, 3, 4, 5]).unwrap();
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn bound_formula_by_hand() {
        let v = ResilienceInputs {
            p: 4,
            k: 1,
            sigma_error: 0.5,
            phi: 2.0,
            c: 1.0,
            c_f: 1.0,
            trace_u: 4.0,
            norm_u: 4.0,
        };
        // first = 0.5·2·2/2·(1+1+1) = 3; second = 1/2·(1+2·1·2) = 2.5
        assert_abs_diff_eq!(resilience_bound(&v), 5.5f64.powi(2), epsilon = 1e-12);
    }
}
