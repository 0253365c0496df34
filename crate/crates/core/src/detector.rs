//! The streaming detector.
//!
//! Each tick the detector updates its running data mean, projects the
//! centered observation off the tracked factor subspace, nudges the
//! subspace, updates robust residual statistics and flags every stream whose
//! centered residual exceeds `L` residual standard deviations.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use log::{debug, warn};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::AnomalyMask;
use crate::subspace::{batch_pca, SubspaceEstimate};
use crate::synthgen::TICKS_PER_WEEK;

/// Lower bound on residual variances, in squared data units.
pub const VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Memory of the data mean.
    pub lambda: f64,
    /// Memory of the residual mean.
    pub lambda_mu: f64,
    /// Memory of the residual variance.
    pub lambda_sigma: f64,
    /// Incremental PCA step size.
    pub eta: f64,
    /// Alert threshold `L` in residual standard deviations.
    pub control_limit: f64,
    /// Robustness guard `R`: larger deviations do not update residual statistics.
    pub reg_guard: f64,
    /// Share of warm-up variance the factor subspace must explain.
    pub var_fraction: f64,
    pub warmup_len: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            lambda: 1e-4,
            lambda_mu: 1e-2,
            lambda_sigma: 1e-4,
            eta: 1e-5,
            control_limit: 5.0,
            reg_guard: 3.0,
            var_fraction: 0.9,
            warmup_len: 2 * TICKS_PER_WEEK,
        }
    }
}

fn open_unit(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("{v} outside (0,1)")))
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        open_unit("lambda", self.lambda)?;
        open_unit("lambda_mu", self.lambda_mu)?;
        open_unit("lambda_sigma", self.lambda_sigma)?;
        open_unit("eta", self.eta)?;
        if !(self.control_limit >= 0.0) {
            return Err(Error::param("control_limit", "must be >= 0"));
        }
        if !(self.reg_guard > 0.0) {
            return Err(Error::param("reg_guard", "must be > 0"));
        }
        if !(self.var_fraction > 0.0 && self.var_fraction <= 1.0) {
            return Err(Error::param("var_fraction", "must lie in (0,1]"));
        }
        if self.warmup_len < 2 {
            return Err(Error::param("warmup_len", "need at least two warm-up ticks"));
        }
        if self.reg_guard <= self.control_limit {
            debug!(
                "reg_guard {} <= control_limit {}: residual statistics freeze before alerts fire",
                self.reg_guard, self.control_limit
            );
        }
        Ok(())
    }
}

/// `(1 - memory) old + memory obs`.
#[inline]
pub fn ewma(old: f64, obs: f64, memory: f64) -> f64 {
    (1.0 - memory) * old + memory * obs
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorState {
    pub nu_x: Vec<f64>,
    pub nu_r: Vec<f64>,
    pub sigma2_r: Vec<f64>,
    pub subspace: SubspaceEstimate,
    pub last_alerts: BTreeSet<usize>,
    pub tick: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlertRecord {
    pub tick: usize,
    pub stream: usize,
    pub residual: f64,
    pub centered_abs: f64,
    pub threshold: f64,
}

/// Alerts raised over ticks `[start_tick, ticks)` of a `streams`-wide series.
#[derive(Debug, Clone, PartialEq)]
pub struct AlertMatrix {
    pub records: Vec<AlertRecord>,
    pub streams: usize,
    pub ticks: usize,
    pub start_tick: usize,
}

impl AlertMatrix {
    pub fn new(streams: usize, ticks: usize, start_tick: usize) -> Self {
        AlertMatrix {
            records: Vec::new(),
            streams,
            ticks,
            start_tick,
        }
    }

    /// Builds a matrix from records, checking bounds and uniqueness.
    pub fn from_records(
        records: Vec<AlertRecord>,
        streams: usize,
        ticks: usize,
        start_tick: usize,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for r in &records {
            if r.tick >= ticks || r.stream >= streams {
                return Err(Error::Dimension(format!(
                    "alert at tick {} stream {} outside {streams}x{ticks}",
                    r.tick, r.stream
                )));
            }
            if !seen.insert((r.tick, r.stream)) {
                return Err(Error::param("records", format!("duplicate alert ({}, {})", r.tick, r.stream)));
            }
        }
        Ok(AlertMatrix {
            records,
            streams,
            ticks,
            start_tick,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Dense stream x tick view of the alerts.
    pub fn to_mask(&self) -> AnomalyMask {
        let mut m = AnomalyMask::empty(self.streams, self.ticks);
        for r in &self.records {
            m.set(r.stream, r.tick, true);
        }
        m
    }
}

/// Per-tick outcome of [`Detector::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub residual: Vec<f64>,
    pub alerts: Vec<AlertRecord>,
}

/// Warm-up initialization with the subspace chosen by batch PCA.
pub fn init_from_warmup(x_warmup: &DMatrix<f64>, config: &DetectorConfig) -> Result<DetectorState> {
    config.validate()?;
    if x_warmup.ncols() != config.warmup_len {
        return Err(Error::Dimension(format!(
            "warm-up has {} ticks, config expects {}",
            x_warmup.ncols(),
            config.warmup_len
        )));
    }
    check_finite(x_warmup)?;
    let subspace = batch_pca(x_warmup, config.var_fraction)?;
    init_with_subspace(x_warmup, subspace)
}

/// Warm-up initialization with a caller-supplied subspace (possibly of dimension 0).
pub fn init_with_subspace(x_warmup: &DMatrix<f64>, subspace: SubspaceEstimate) -> Result<DetectorState> {
    let (p, n) = x_warmup.shape();
    if subspace.ambient_dim() != p {
        return Err(Error::Dimension(format!(
            "subspace in R^{} for {p} streams",
            subspace.ambient_dim()
        )));
    }
    if n < 2 {
        return Err(Error::param("warmup_len", "need at least two warm-up ticks"));
    }
    check_finite(x_warmup)?;
    let nu_x: Vec<f64> = x_warmup.column_mean().iter().copied().collect();

    let mut sum = vec![0.0; p];
    let mut sum_sq = vec![0.0; p];
    let mut y = vec![0.0; p];
    let mut r = vec![0.0; p];
    let mut coeffs = vec![0.0; subspace.dim()];
    for col in x_warmup.column_iter() {
        for i in 0..p {
            y[i] = col[i] - nu_x[i];
        }
        subspace.project_into(&y, &mut coeffs, &mut r);
        for i in 0..p {
            sum[i] += r[i];
            sum_sq[i] += r[i] * r[i];
        }
    }
    let nf = n as f64;
    let nu_r: Vec<f64> = sum.iter().map(|s| s / nf).collect();
    let sigma2_r = (0..p)
        .map(|i| {
            let v = sum_sq[i] / nf - nu_r[i] * nu_r[i];
            if v <= VARIANCE_FLOOR {
                warn!("stream {i}: warm-up residual variance {v:e} floored");
                VARIANCE_FLOOR
            } else {
                v
            }
        })
        .collect();

    Ok(DetectorState {
        nu_x,
        nu_r,
        sigma2_r,
        subspace,
        last_alerts: BTreeSet::new(),
        tick: n,
    })
}

fn check_finite(x: &DMatrix<f64>) -> Result<()> {
    for (t, col) in x.column_iter().enumerate() {
        if let Some(j) = col.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { tick: t, stream: j });
        }
    }
    Ok(())
}

/// A detector state with its configuration and scratch buffers.
#[derive(Debug, Clone)]
pub struct Detector {
    config: DetectorConfig,
    state: DetectorState,
    y: Vec<f64>,
    coeffs: Vec<f64>,
    alert_flags: Vec<bool>,
}

impl Detector {
    pub fn new(state: DetectorState, config: DetectorConfig) -> Result<Self> {
        config.validate()?;
        let p = state.nu_x.len();
        if state.nu_r.len() != p || state.sigma2_r.len() != p || state.subspace.ambient_dim() != p {
            return Err(Error::Dimension("state vectors disagree in length".into()));
        }
        if state.sigma2_r.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::param("sigma2_r", "variances must be positive"));
        }
        if state.last_alerts.iter().any(|&j| j >= p) {
            return Err(Error::Dimension("last_alerts index out of range".into()));
        }
        let mut alert_flags = vec![false; p];
        for &j in &state.last_alerts {
            alert_flags[j] = true;
        }
        let k = state.subspace.dim();
        Ok(Detector {
            config,
            state,
            y: vec![0.0; p],
            coeffs: vec![0.0; k],
            alert_flags,
        })
    }

    pub fn from_warmup(x_warmup: &DMatrix<f64>, config: DetectorConfig) -> Result<Self> {
        Detector::new(init_from_warmup(x_warmup, &config)?, config)
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn state(&self) -> &DetectorState {
        &self.state
    }

    pub fn into_state(self) -> DetectorState {
        self.state
    }

    pub fn streams(&self) -> usize {
        self.state.nu_x.len()
    }

    /// Processes one observation. A tick containing NaN or infinite values is
    /// rejected with an error and leaves the state untouched.
    pub fn step(&mut self, x: &[f64]) -> Result<StepOutput> {
        let mut residual = vec![0.0; self.streams()];
        let mut alerts = Vec::new();
        self.step_into(x, &mut residual, |a| alerts.push(a))?;
        Ok(StepOutput { residual, alerts })
    }

    /// [`Detector::step`] writing the residual into `residual` and handing each
    /// alert to `on_alert`.
    pub fn step_into<F: FnMut(AlertRecord)>(
        &mut self,
        x: &[f64],
        residual: &mut [f64],
        mut on_alert: F,
    ) -> Result<()> {
        let p = self.streams();
        if x.len() != p || residual.len() != p {
            return Err(Error::Dimension(format!("observation of length {} for {p} streams", x.len())));
        }
        if let Some(j) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                tick: self.state.tick,
                stream: j,
            });
        }
        let cfg = &self.config;
        let st = &mut self.state;

        for j in 0..p {
            if !self.alert_flags[j] {
                st.nu_x[j] = ewma(st.nu_x[j], x[j], cfg.lambda);
            }
            self.y[j] = x[j] - st.nu_x[j];
        }
        st.subspace.project_into(&self.y, &mut self.coeffs, residual);
        st.subspace.oja_step(&self.y, &self.coeffs, cfg.eta);

        st.last_alerts.clear();
        for j in 0..p {
            let r = residual[j];
            let sd = st.sigma2_r[j].sqrt();
            if r.abs() < cfg.reg_guard * sd {
                st.nu_r[j] = ewma(st.nu_r[j], r, cfg.lambda_mu);
            }
            let c = r - st.nu_r[j];
            if c.abs() < cfg.reg_guard * sd {
                st.sigma2_r[j] = ewma(st.sigma2_r[j], c * c, cfg.lambda_sigma).max(VARIANCE_FLOOR);
            }
            let threshold = cfg.control_limit * st.sigma2_r[j].sqrt();
            let fired = c.abs() > threshold;
            self.alert_flags[j] = fired;
            if fired {
                st.last_alerts.insert(j);
                on_alert(AlertRecord {
                    tick: st.tick,
                    stream: j,
                    residual: r,
                    centered_abs: c.abs(),
                    threshold,
                });
            }
        }
        st.tick += 1;
        Ok(())
    }
}

/// Pure form of one detector step: returns the next state, the residual and
/// the alerting streams.
pub fn step(
    state: &DetectorState,
    x: &[f64],
    config: &DetectorConfig,
) -> Result<(DetectorState, Vec<f64>, BTreeSet<usize>)> {
    let mut det = Detector::new(state.clone(), *config)?;
    let out = det.step(x)?;
    let alerts = out.alerts.iter().map(|a| a.stream).collect();
    Ok((det.into_state(), out.residual, alerts))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamOutput {
    pub alerts: AlertMatrix,
    /// p x (T - n₀) residuals; columns of rejected ticks are NaN.
    pub residuals: Option<DMatrix<f64>>,
    /// Ticks refused because of non-finite values.
    pub rejected: Vec<usize>,
    /// Subspace dimension chosen at warm-up.
    pub k: usize,
    /// Detector state after the last tick.
    pub state: DetectorState,
}

/// Warm-up on the first `warmup_len` columns, then one step per remaining column.
pub fn run_stream(x: &DMatrix<f64>, config: &DetectorConfig) -> Result<StreamOutput> {
    run_stream_with(x, config, true)
}

pub fn run_stream_with(x: &DMatrix<f64>, config: &DetectorConfig, keep_residuals: bool) -> Result<StreamOutput> {
    let n0 = config.warmup_len;
    if x.ncols() <= n0 {
        return Err(Error::param(
            "X",
            format!("{} ticks leave nothing after a {n0}-tick warm-up", x.ncols()),
        ));
    }
    let state = init_from_warmup(&x.columns(0, n0).clone_owned(), config)?;
    run_from_state(x, state, config, keep_residuals)
}

/// Continues a detector from `state` over columns `state.tick..` of `x`.
pub fn run_from_state(
    x: &DMatrix<f64>,
    state: DetectorState,
    config: &DetectorConfig,
    keep_residuals: bool,
) -> Result<StreamOutput> {
    let (p, t_total) = x.shape();
    let start = state.tick;
    if start > t_total {
        return Err(Error::Dimension(format!("state at tick {start} beyond series of {t_total}")));
    }
    let k = state.subspace.dim();
    let mut det = Detector::new(state, *config)?;
    let mut alerts = AlertMatrix::new(p, t_total, start);
    let mut residuals = keep_residuals.then(|| DMatrix::zeros(p, t_total - start));
    let mut scratch = vec![0.0; p];
    let mut rejected = Vec::new();
    for t in start..t_total {
        let col = x.column(t);
        let out: &mut [f64] = match residuals.as_mut() {
            Some(m) => &mut m.as_mut_slice()[(t - start) * p..(t - start + 1) * p],
            None => &mut scratch,
        };
        match det.step_into(col.as_slice(), out, |a| alerts.records.push(a)) {
            Ok(()) => {}
            Err(Error::NonFinite { stream, .. }) => {
                warn!("tick {t}: non-finite value on stream {stream}, tick skipped");
                out.fill(f64::NAN);
                rejected.push(t);
                // the detector clock still advances past the gap
                det.state.tick += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(StreamOutput {
        alerts,
        residuals,
        rejected,
        k,
        state: det.into_state(),
    })
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    let mut s = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v:?}");
    }
    s
}

fn parse_line(line: Option<&str>, expect: usize, what: &str) -> Result<Vec<f64>> {
    let line = line.ok_or_else(|| Error::Degenerate(format!("checkpoint truncated before {what}")))?;
    let vals: Vec<f64> = if line.trim().is_empty() {
        Vec::new()
    } else {
        line.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Degenerate(format!("checkpoint {what}: {e}")))
            })
            .collect::<Result<_>>()?
    };
    if vals.len() != expect {
        return Err(Error::Degenerate(format!(
            "checkpoint {what}: expected {expect} values, found {}",
            vals.len()
        )));
    }
    Ok(vals)
}

impl DetectorState {
    /// Text checkpoint, one comma-separated line each:
    /// `p,k`; `ν̂_x`; `ν̂_r`; `σ̂²_r`; basis column-major; `tick`;
    /// last alerts; subspace eigenvalues. Floats round-trip exactly.
    pub fn to_checkpoint(&self) -> String {
        let p = self.nu_x.len();
        let k = self.subspace.dim();
        let mut s = format!("{p},{k}\n");
        for v in [&self.nu_x, &self.nu_r, &self.sigma2_r] {
            s.push_str(&join(v.iter().copied()));
            s.push('\n');
        }
        s.push_str(&join(self.subspace.basis().iter().copied()));
        s.push('\n');
        let _ = writeln!(s, "{}", self.tick);
        let alerts: Vec<String> = self.last_alerts.iter().map(|j| j.to_string()).collect();
        s.push_str(&alerts.join(","));
        s.push('\n');
        s.push_str(&join(self.subspace.eigenvalues().iter().copied()));
        s.push('\n');
        s
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Degenerate("empty checkpoint".into()))?;
        let dims: Vec<usize> = header
            .split(',')
            .map(|v| v.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Degenerate(format!("checkpoint header: {e}")))?;
        let [p, k] = dims[..] else {
            return Err(Error::Degenerate("checkpoint header must be `p,k`".into()));
        };
        let nu_x = parse_line(lines.next(), p, "nu_x")?;
        let nu_r = parse_line(lines.next(), p, "nu_r")?;
        let sigma2_r = parse_line(lines.next(), p, "sigma2_r")?;
        let basis = parse_line(lines.next(), p * k, "basis")?;
        let tick = lines
            .next()
            .and_then(|l| l.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::Degenerate("checkpoint tick missing".into()))?;
        let last_alerts = match lines.next() {
            Some(l) if !l.trim().is_empty() => l
                .split(',')
                .map(|v| v.trim().parse::<usize>())
                .collect::<std::result::Result<BTreeSet<_>, _>>()
                .map_err(|e| Error::Degenerate(format!("checkpoint alerts: {e}")))?,
            _ => BTreeSet::new(),
        };
        let eigenvalues = match lines.next() {
            Some(l) => parse_line(Some(l), k, "eigenvalues")?,
            None => vec![0.0; k],
        };
        if sigma2_r.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::Degenerate("checkpoint variances must be positive".into()));
        }
        let subspace = SubspaceEstimate::new(DMatrix::from_vec(p, k, basis), eigenvalues)?;
        Ok(DetectorState {
            nu_x,
            nu_r,
            sigma2_r,
            subspace,
            last_alerts,
            tick,
        })
    }
}

/// Column means of the residual matrix, ignoring rejected (NaN) ticks.
pub fn residual_means(residuals: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(
        residuals.nrows(),
        residuals.row_iter().map(|row| {
            let (s, n) = row
                .iter()
                .filter(|v| v.is_finite())
                .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            if n == 0 {
                f64::NAN
            } else {
                s / n as f64
            }
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn two_stream_state() -> DetectorState {
        DetectorState {
            nu_x: vec![0.0, 0.0],
            nu_r: vec![0.0, 0.0],
            sigma2_r: vec![1.0, 1.0],
            subspace: SubspaceEstimate::trivial(2),
            last_alerts: BTreeSet::new(),
            tick: 0,
        }
    }

    fn cfg(l: f64, r: f64) -> DetectorConfig {
        DetectorConfig {
            // no mean drift so that x - ν̂_x is the input itself
            lambda: 1e-300,
            control_limit: l,
            reg_guard: r,
            ..DetectorConfig::default()
        }
    }

    #[test]
    fn ewma_examples() {
        assert_eq!(ewma(0.0, 1.0, 0.1), 0.1);
        assert_eq!(ewma(3.5, 3.5, 0.37), 3.5);
        assert_eq!(ewma(2.0, 0.0, 0.25), 1.5);
    }

    #[test]
    fn alert_fires_above_limit() {
        let (_, r, alerts) = step(&two_stream_state(), &[6.0, 0.0], &cfg(5.0, 10.0)).unwrap();
        assert_abs_diff_eq!(r[0], 6.0, epsilon = 1e-12);
        assert_eq!(alerts.into_iter().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn guard_freezes_variance() {
        let (next, _, _) = step(&two_stream_state(), &[6.0, 0.0], &cfg(5.0, 4.0)).unwrap();
        assert_eq!(next.sigma2_r[0], 1.0);
        assert_ne!(next.sigma2_r[1], 1.0);
    }

    #[test]
    fn zero_limit_flags_every_nonzero_residual() {
        let (_, _, alerts) = step(&two_stream_state(), &[0.5, -0.25], &cfg(0.0, 3.0)).unwrap();
        assert_eq!(alerts.len(), 2);
    }

    #[test]
    fn frozen_mean_for_alerting_streams() {
        let mut st = two_stream_state();
        st.last_alerts.insert(0);
        let c = DetectorConfig {
            lambda: 0.5,
            ..cfg(5.0, 3.0)
        };
        let (next, _, _) = step(&st, &[4.0, 4.0], &c).unwrap();
        assert_eq!(next.nu_x[0], 0.0);
        assert_eq!(next.nu_x[1], 2.0);
    }

    #[test]
    fn non_finite_tick_is_rejected_without_side_effects() {
        let st = two_stream_state();
        let mut det = Detector::new(st.clone(), cfg(5.0, 3.0)).unwrap();
        assert!(matches!(det.step(&[f64::NAN, 0.0]), Err(Error::NonFinite { stream: 0, .. })));
        assert_eq!(det.state(), &st);
    }

    #[test]
    fn pure_rank_one_warmup_has_floored_variance() {
        let dir = [1.0, -2.0, 0.5];
        let x = DMatrix::from_fn(3, 200, |i, t| dir[i] * (t as f64 * 0.37).sin());
        let c = DetectorConfig {
            warmup_len: 200,
            ..DetectorConfig::default()
        };
        let st = init_from_warmup(&x, &c).unwrap();
        assert_eq!(st.subspace.dim(), 1);
        for &v in &st.sigma2_r {
            assert!(v <= 1e-10, "{v}");
        }
        assert_eq!(st.tick, 200);
    }

    #[test]
    fn iid_warmup_without_subspace_recovers_unit_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = DMatrix::from_fn(4, 10080, |_, _| StandardNormal.sample(&mut rng));
        let st = init_with_subspace(&x, SubspaceEstimate::trivial(4)).unwrap();
        for &v in &st.sigma2_r {
            assert!((v - 1.0).abs() < 0.05, "{v}");
        }
    }

    #[test]
    fn one_tick_after_warmup() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = DMatrix::from_fn(3, 51, |_, _| StandardNormal.sample(&mut rng));
        let c = DetectorConfig {
            warmup_len: 50,
            ..DetectorConfig::default()
        };
        let out = run_stream(&x, &c).unwrap();
        assert_eq!(out.residuals.unwrap().ncols(), 1);
        assert!(run_stream(&x.columns(0, 50).clone_owned(), &c).is_err());
    }

    #[test]
    fn stream_skips_gaps_and_continues() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut x = DMatrix::from_fn(3, 80, |_, _| StandardNormal.sample(&mut rng));
        x[(1, 60)] = f64::NAN;
        let c = DetectorConfig {
            warmup_len: 50,
            ..DetectorConfig::default()
        };
        let out = run_stream(&x, &c).unwrap();
        assert_eq!(out.rejected, vec![60]);
        let res = out.residuals.unwrap();
        assert!(res[(0, 10)].is_nan());
        assert!(res[(0, 11)].is_finite());
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = DMatrix::from_fn(5, 300, |i, t| {
            let z: f64 = StandardNormal.sample(&mut rng);
            (t as f64 * 0.1 * (i + 1) as f64).sin() + 0.1 * z
        });
        let c = DetectorConfig {
            warmup_len: 200,
            control_limit: 1.0,
            ..DetectorConfig::default()
        };
        let mut det = Detector::from_warmup(&x.columns(0, 200).clone_owned(), c).unwrap();
        for t in 200..300 {
            det.step(x.column(t).as_slice()).unwrap();
        }
        let st = det.state().clone();
        let back = DetectorState::from_checkpoint(&st.to_checkpoint()).unwrap();
        assert_eq!(back, st);
    }

    #[test]
    fn config_validation() {
        assert!(DetectorConfig::default().validate().is_ok());
        let bad = DetectorConfig {
            lambda: 1.0,
            ..DetectorConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = DetectorConfig {
            reg_guard: 0.0,
            ..DetectorConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn alert_matrix_rejects_duplicates() {
        let a = AlertRecord {
            tick: 1,
            stream: 0,
            residual: 2.0,
            centered_abs: 2.0,
            threshold: 1.0,
        };
        assert!(AlertMatrix::from_records(vec![a, a], 2, 3, 0).is_err());
        assert!(AlertMatrix::from_records(vec![a], 1, 1, 0).is_err());
        assert!(AlertMatrix::from_records(vec![a], 2, 3, 0).is_ok());
    }
}
