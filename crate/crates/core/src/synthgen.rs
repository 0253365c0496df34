//! Labeled synthetic telescope traffic.
//!
//! Background traffic follows a linear factor model `x_t = B f_t + ε_t`:
//! binary loadings `B` decide which ports carry which periodic trend, the
//! trends `f_t` are phase-shifted sinusoids, and `ε_t` is independent
//! fractional Gaussian noise per port. A sparse mean shift `u_t` is then
//! added on a few ports for a contiguous window of ticks.

use std::f64::consts::PI;
use std::sync::Arc;

use log::warn;
use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::linalg::sorted_symmetric_eigen;
use crate::rng;
use crate::series::{AnomalyMask, SeriesMatrix};

/// Ticks per hour at the 2-minute sampling of the synthetic protocol.
pub const TICKS_PER_HOUR: usize = 30;
pub const TICKS_PER_DAY: usize = 24 * TICKS_PER_HOUR;
pub const TICKS_PER_WEEK: usize = 7 * TICKS_PER_DAY;

/// Trend periods of the default preset: two daily, one weekly, 6 h, 4.8 h.
pub const DEFAULT_TREND_PERIODS: [usize; 5] = [
    TICKS_PER_DAY,
    TICKS_PER_DAY,
    TICKS_PER_WEEK,
    6 * TICKS_PER_HOUR,
    144, // 4.8 h
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    hurst: f64,
    variance: f64,
}

impl NoiseSpec {
    pub fn new(hurst: f64, variance: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::param("hurst", format!("{hurst} outside (0,1)")));
        }
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::param("variance", format!("{variance} must be positive")));
        }
        Ok(NoiseSpec { hurst, variance })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendSpec {
    pub period: usize,
    pub amplitude: f64,
    pub phase_offset: f64,
}

impl TrendSpec {
    pub fn new(period: usize, amplitude: f64, phase_offset: f64) -> Result<Self> {
        if period < 2 {
            return Err(Error::param("period", "must be at least 2 ticks"));
        }
        Ok(TrendSpec {
            period,
            amplitude,
            phase_offset: phase_offset.rem_euclid(2.0 * PI),
        })
    }

    #[inline]
    pub fn value(&self, t: usize) -> f64 {
        self.amplitude * (2.0 * PI * t as f64 / self.period as f64 + self.phase_offset).sin()
    }
}

/// Default trend set with uniformly random phase offsets.
pub fn default_trends(amplitude: f64, seed: u64) -> Vec<TrendSpec> {
    let mut rng = rng::stream(seed, rng::TREND_PHASES);
    DEFAULT_TREND_PERIODS
        .iter()
        .map(|&period| TrendSpec {
            period,
            amplitude,
            phase_offset: rng.random_range(0.0..2.0 * PI),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    pub loadings: DMatrix<f64>,
    pub trends: Vec<TrendSpec>,
    pub noise: NoiseSpec,
}

impl FactorModel {
    pub fn new(loadings: DMatrix<f64>, trends: Vec<TrendSpec>, noise: NoiseSpec) -> Result<Self> {
        if loadings.ncols() != trends.len() {
            return Err(Error::Dimension(format!(
                "{} loading columns for {} trends",
                loadings.ncols(),
                trends.len()
            )));
        }
        Ok(FactorModel {
            loadings,
            trends,
            noise,
        })
    }

    pub fn streams(&self) -> usize {
        self.loadings.nrows()
    }

    pub fn factors(&self) -> usize {
        self.loadings.ncols()
    }
}

/// What the anomaly amplitude `snr` is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplitudeScale {
    /// Empirical standard deviation of the port's noise component.
    Noise,
    /// Empirical standard deviation of the port's full anomaly-free series,
    /// trends included.
    #[default]
    Series,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnomalySpec {
    /// Shift size in multiples of the per-stream empirical standard deviation.
    pub snr: f64,
    pub duration_ticks: usize,
    pub start_tick: usize,
    pub streams: Vec<usize>,
    /// The standard deviation is measured over ticks `[0, scale_window)`.
    pub scale_window: usize,
    pub scale: AmplitudeScale,
}

impl AnomalySpec {
    pub fn validate(&self, p: usize, ticks: usize) -> Result<()> {
        if !(self.snr >= 0.0 && self.snr.is_finite()) {
            return Err(Error::param("snr", "must be finite and non-negative"));
        }
        if self.duration_ticks == 0 {
            return Err(Error::param("duration_ticks", "must be positive"));
        }
        if self.start_tick + self.duration_ticks > ticks {
            return Err(Error::param(
                "start_tick",
                format!(
                    "window {}..{} exceeds {ticks} ticks",
                    self.start_tick,
                    self.start_tick + self.duration_ticks
                ),
            ));
        }
        let mut seen = vec![false; p];
        for &s in &self.streams {
            if s >= p {
                return Err(Error::param("streams", format!("stream {s} out of range for p={p}")));
            }
            if std::mem::replace(&mut seen[s], true) {
                return Err(Error::param("streams", format!("stream {s} listed twice")));
            }
        }
        if self.scale_window < 2 || self.scale_window > ticks {
            return Err(Error::param("scale_window", "needs 2..=T ticks"));
        }
        Ok(())
    }

    pub fn window(&self) -> std::ops::Range<usize> {
        self.start_tick..self.start_tick + self.duration_ticks
    }
}

#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub data: SeriesMatrix,
    pub mask: AnomalyMask,
    pub model: FactorModel,
    pub spec: AnomalySpec,
    /// Injected mean shift per anomalous stream, aligned with `spec.streams`.
    pub shifts: Vec<f64>,
}

/// Autocovariance of fractional Gaussian noise at `lag`:
/// `σ²/2 (|h+1|^{2H} - 2|h|^{2H} + |h-1|^{2H})`.
pub fn fgn_autocovariance(noise: &NoiseSpec, lag: usize) -> f64 {
    let h2 = 2.0 * noise.hurst;
    let k = lag as f64;
    0.5 * noise.variance * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// Exact fGn sampler by circulant embedding (Davies-Harte).
///
/// The embedding spectrum is computed once; each FFT of a complex Gaussian
/// vector then yields two independent samples (real and imaginary parts).
pub struct FgnSampler {
    n: usize,
    sqrt_eigs: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl FgnSampler {
    pub fn new(noise: &NoiseSpec, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "must be positive"));
        }
        let m = 2 * n;
        let mut row: Vec<Complex<f64>> = (0..m)
            .map(|j| {
                let lag = if j <= n { j } else { m - j };
                Complex::new(fgn_autocovariance(noise, lag), 0.0)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut row);

        let max = row.iter().fold(0.0_f64, |a, c| a.max(c.re));
        let min = row.iter().fold(f64::INFINITY, |a, c| a.min(c.re));
        if min < -1e-10 * max {
            warn!(
                "circulant embedding has negative eigenvalue {min:e} (H={}, n={n}); clipping at zero",
                noise.hurst
            );
        }
        let sqrt_eigs = row
            .iter()
            .map(|c| (c.re.max(0.0) / m as f64).sqrt())
            .collect();
        Ok(FgnSampler { n, sqrt_eigs, fft })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Two independent fGn paths of length `n`.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let mut w: Vec<Complex<f64>> = self
            .sqrt_eigs
            .iter()
            .map(|&s| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut w);
        let a = w[..self.n].iter().map(|c| c.re).collect();
        let b = w[..self.n].iter().map(|c| c.im).collect();
        (a, b)
    }

    /// Fills `count` independent paths, two per FFT.
    pub fn sample_many<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(count + 1);
        while out.len() < count {
            let (a, b) = self.sample_pair(rng);
            out.push(a);
            out.push(b);
        }
        out.truncate(count);
        out
    }
}

/// One stationary fGn path of length `n`, deterministic in `seed`.
pub fn generate_fgn(noise: &NoiseSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    let sampler = FgnSampler::new(noise, n)?;
    let mut rng = rng::stream(seed, rng::NOISE);
    Ok(sampler.sample_pair(&mut rng).0)
}

const MAX_PLACEMENT_ATTEMPTS: usize = 100;

/// Binary p x k loadings: the first column is all ones and column `j`
/// (1-based, j ≥ 2) has `⌊(1 - (j-1)/k) p⌋` ones at random rows.
pub fn build_factor_matrix(p: usize, k: usize, seed: u64) -> Result<DMatrix<f64>> {
    if k == 0 || p == 0 {
        return Err(Error::param("k", "p and k must be positive"));
    }
    if k > p {
        return Err(Error::param("k", format!("k={k} exceeds p={p}")));
    }
    let mut rng = rng::stream(seed, rng::LOADINGS);
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let mut b = DMatrix::zeros(p, k);
        b.column_mut(0).fill(1.0);
        for j in 1..k {
            // column index j here is the 1-based j+1, so (j-1)/k becomes j/k
            let ones = (k - j) * p / k;
            for row in index::sample(&mut rng, p, ones) {
                b[(row, j)] = 1.0;
            }
        }
        let (lambda_min, _) = incoherence_check(&b);
        if lambda_min > 1e-9 {
            return Ok(b);
        }
    }
    Err(Error::RankDeficient {
        attempts: MAX_PLACEMENT_ATTEMPTS,
    })
}

/// Smallest eigenvalue of `BᵀB` and the largest absolute loading.
pub fn incoherence_check(b: &DMatrix<f64>) -> (f64, f64) {
    let gram = b.transpose() * b;
    let (vals, _) = sorted_symmetric_eigen(&gram);
    let lambda_min = vals.last().copied().unwrap_or(0.0).max(0.0);
    let max_abs = b.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    (lambda_min, max_abs)
}

/// k x T matrix of trend values.
pub fn generate_trends(trends: &[TrendSpec], ticks: usize) -> DMatrix<f64> {
    DMatrix::from_fn(trends.len(), ticks, |j, t| trends[j].value(t))
}

fn sample_sd(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let (n, sum) = xs.clone().fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    let mean = sum / n as f64;
    let ss: f64 = xs.map(|x| (x - mean).powi(2)).sum();
    (ss / (n as f64 - 1.0)).sqrt()
}

/// Draws `x_t = B f_t + u_t + ε_t` for `t < ticks` and the matching mask.
pub fn synthesize_dataset(
    model: &FactorModel,
    spec: &AnomalySpec,
    ticks: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    let p = model.streams();
    spec.validate(p, ticks)?;

    let sampler = FgnSampler::new(&model.noise, ticks)?;
    let mut noise_rng = rng::stream(seed, rng::NOISE);
    let noise = sampler.sample_many(p, &mut noise_rng);

    let trends = generate_trends(&model.trends, ticks);
    let mut values = &model.loadings * &trends;
    for (i, path) in noise.iter().enumerate() {
        for (t, e) in path.iter().enumerate() {
            values[(i, t)] += e;
        }
    }

    let w = spec.scale_window;
    let shifts: Vec<f64> = spec
        .streams
        .iter()
        .map(|&i| {
            let sd = match spec.scale {
                AmplitudeScale::Noise => sample_sd(noise[i][..w].iter().copied()),
                AmplitudeScale::Series => sample_sd((0..w).map(|t| values[(i, t)])),
            };
            spec.snr * sd
        })
        .collect();

    let mut mask = AnomalyMask::empty(p, ticks);
    for (&i, &shift) in spec.streams.iter().zip(&shifts) {
        for t in spec.window() {
            values[(i, t)] += shift;
            mask.set(i, t, true);
        }
    }

    Ok(LabeledDataset {
        data: SeriesMatrix::new(values),
        mask,
        model: model.clone(),
        spec: spec.clone(),
        shifts,
    })
}

/// The synthetic protocol's configuration with every knob exposed.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPreset {
    pub streams: usize,
    pub ticks: usize,
    pub factors: usize,
    pub hurst: f64,
    pub noise_variance: f64,
    pub trend_amplitude: f64,
    pub warmup_len: usize,
    pub snr: f64,
    pub duration_ticks: usize,
    pub start_tick: usize,
    pub anomalous_streams: Vec<usize>,
    pub scale: AmplitudeScale,
}

impl Default for SyntheticPreset {
    /// Five weeks at 2-minute ticks, 100 ports, two-week warm-up, a 6-hour
    /// snr-7 anomaly on ports 0..3 starting with the fourth week.
    fn default() -> Self {
        SyntheticPreset {
            streams: 100,
            ticks: 5 * TICKS_PER_WEEK,
            factors: 5,
            hurst: 0.9,
            noise_variance: DEFAULT_NOISE_VARIANCE,
            trend_amplitude: DEFAULT_TREND_AMPLITUDE,
            warmup_len: 2 * TICKS_PER_WEEK,
            snr: 7.0,
            duration_ticks: 6 * TICKS_PER_HOUR,
            start_tick: 3 * TICKS_PER_WEEK,
            anomalous_streams: vec![0, 1, 2],
            scale: AmplitudeScale::Series,
        }
    }
}

/// Default trend amplitude, about 3.6 noise standard deviations. Strong
/// enough that the 90% variance rule keeps a handful of components.
pub const DEFAULT_TREND_AMPLITUDE: f64 = 1.6;
pub const DEFAULT_NOISE_VARIANCE: f64 = 0.2;

impl SyntheticPreset {
    /// Anomalies on the first `⌊p^{1-β}⌋` streams.
    pub fn with_sparsity(mut self, beta: f64) -> Self {
        let s = ((self.streams as f64).powf(1.0 - beta) + 1e-9).floor() as usize;
        self.anomalous_streams = (0..s.max(1)).collect();
        self
    }

    pub fn model(&self, seed: u64) -> Result<FactorModel> {
        let loadings = build_factor_matrix(self.streams, self.factors, seed)?;
        let mut trends = default_trends(self.trend_amplitude, seed);
        trends.truncate(self.factors);
        while trends.len() < self.factors {
            // extra factors beyond the default five reuse the period list
            let j = trends.len();
            let mut rng = rng::stream(seed, rng::TREND_PHASES + 1 + j as u64);
            trends.push(TrendSpec {
                period: DEFAULT_TREND_PERIODS[j % DEFAULT_TREND_PERIODS.len()],
                amplitude: self.trend_amplitude,
                phase_offset: rng.random_range(0.0..2.0 * PI),
            });
        }
        FactorModel::new(loadings, trends, NoiseSpec::new(self.hurst, self.noise_variance)?)
    }

    pub fn anomaly(&self) -> AnomalySpec {
        AnomalySpec {
            snr: self.snr,
            duration_ticks: self.duration_ticks,
            start_tick: self.start_tick,
            streams: self.anomalous_streams.clone(),
            scale_window: self.warmup_len,
            scale: self.scale,
        }
    }

    pub fn generate(&self, seed: u64) -> Result<LabeledDataset> {
        synthesize_dataset(&self.model(seed)?, &self.anomaly(), self.ticks, seed)
    }
}
