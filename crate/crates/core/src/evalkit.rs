//! Detection metrics, ROC curves and the hyper-parameter grid search.
//!
//! Two levels of scoring are used throughout: *rows* treats each tick as one
//! observation (positive when any stream is anomalous), *indiv* treats every
//! (stream, tick) cell of the test window separately.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::baseline::{fit_q_detector, q_scores};
use crate::detector::{init_from_warmup, AlertMatrix, Detector, DetectorConfig, DetectorState};
use crate::error::{Error, Result};
use crate::series::AnomalyMask;
use crate::synthgen::{LabeledDataset, SyntheticPreset, TICKS_PER_HOUR};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Counts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// `TP / (TP + FN)`, NaN without positives.
    pub fn tpr(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// `FP / (FP + TN)`, NaN without negatives.
    pub fn fpr(&self) -> f64 {
        ratio(self.fp, self.fp + self.tn)
    }

    /// `2TP / (2TP + FP + FN)`; zero when there is nothing to find or flag.
    pub fn f1(&self) -> f64 {
        let den = 2 * self.tp + self.fp + self.fn_;
        if den == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / den as f64
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        f64::NAN
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub tpr_rows: f64,
    pub fpr_rows: f64,
    pub tpr_indiv: f64,
    pub fpr_indiv: f64,
    pub f1: f64,
    pub rows: Counts,
    pub indiv: Counts,
    /// Set when the test window holds no anomalous cell, making the TPRs NaN.
    pub tpr_undefined: bool,
}

impl EvalReport {
    pub fn from_counts(rows: Counts, indiv: Counts) -> Self {
        EvalReport {
            tpr_rows: rows.tpr(),
            fpr_rows: rows.fpr(),
            tpr_indiv: indiv.tpr(),
            fpr_indiv: indiv.fpr(),
            f1: indiv.f1(),
            rows,
            indiv,
            tpr_undefined: indiv.tp + indiv.fn_ == 0,
        }
    }

    pub fn f1_rows(&self) -> f64 {
        self.rows.f1()
    }
}

/// Ground truth over a test window, pre-summarized so that many alert sets
/// can be scored quickly.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    mask: &'a AnomalyMask,
    start: usize,
    positives_at: Vec<usize>,
    positive_ticks: usize,
    positive_cells: usize,
}

impl<'a> Evaluator<'a> {
    /// Scores ticks `[start, mask.ticks())`.
    pub fn new(mask: &'a AnomalyMask, start: usize) -> Result<Self> {
        if start >= mask.ticks() {
            return Err(Error::EmptyWindow);
        }
        let p = mask.streams();
        let positives_at: Vec<usize> = (start..mask.ticks())
            .map(|t| (0..p).filter(|&j| mask.get(j, t)).count())
            .collect();
        Ok(Evaluator {
            mask,
            start,
            positive_ticks: positives_at.iter().filter(|&&c| c > 0).count(),
            positive_cells: positives_at.iter().sum(),
            positives_at,
        })
    }

    pub fn window_len(&self) -> usize {
        self.positives_at.len()
    }

    pub fn tally(&self) -> Tally<'_, 'a> {
        Tally {
            eval: self,
            last_tick: None,
            alert_ticks: 0,
            hit_ticks: 0,
            alert_cells: 0,
            hit_cells: 0,
        }
    }

    pub fn score(&self, alerts: &AlertMatrix) -> Result<EvalReport> {
        if alerts.streams != self.mask.streams() || alerts.ticks != self.mask.ticks() {
            return Err(Error::Dimension(format!(
                "alerts cover {}x{}, mask {}x{}",
                alerts.streams,
                alerts.ticks,
                self.mask.streams(),
                self.mask.ticks()
            )));
        }
        let mut recs: Vec<(usize, usize)> = alerts
            .records
            .iter()
            .filter(|r| r.tick >= self.start)
            .map(|r| (r.tick, r.stream))
            .collect();
        recs.sort_unstable();
        recs.dedup();
        let mut tally = self.tally();
        for (t, j) in recs {
            tally.push(t, j);
        }
        Ok(tally.finish())
    }
}

/// Streaming confusion counter. Alerts must arrive in non-decreasing tick
/// order without repeated cells.
#[derive(Debug, Clone)]
pub struct Tally<'e, 'a> {
    eval: &'e Evaluator<'a>,
    last_tick: Option<usize>,
    alert_ticks: usize,
    hit_ticks: usize,
    alert_cells: usize,
    hit_cells: usize,
}

impl Tally<'_, '_> {
    #[inline]
    pub fn push(&mut self, tick: usize, stream: usize) {
        if tick < self.eval.start {
            return;
        }
        let positive_tick = self.eval.positives_at[tick - self.eval.start] > 0;
        if self.last_tick != Some(tick) {
            self.last_tick = Some(tick);
            self.alert_ticks += 1;
            if positive_tick {
                self.hit_ticks += 1;
            }
        }
        self.alert_cells += 1;
        if positive_tick && self.eval.mask.get(stream, tick) {
            self.hit_cells += 1;
        }
    }

    pub fn finish(&self) -> EvalReport {
        let e = self.eval;
        let n_ticks = e.window_len();
        let rows = Counts {
            tp: self.hit_ticks,
            fp: self.alert_ticks - self.hit_ticks,
            fn_: e.positive_ticks - self.hit_ticks,
            tn: n_ticks - e.positive_ticks - (self.alert_ticks - self.hit_ticks),
        };
        let n_cells = n_ticks * e.mask.streams();
        let indiv = Counts {
            tp: self.hit_cells,
            fp: self.alert_cells - self.hit_cells,
            fn_: e.positive_cells - self.hit_cells,
            tn: n_cells - e.positive_cells - (self.alert_cells - self.hit_cells),
        };
        EvalReport::from_counts(rows, indiv)
    }
}

/// Tick-level confusion over the alert matrix's test window.
pub fn confusion_rows(alerts: &AlertMatrix, mask: &AnomalyMask) -> Result<(f64, f64, Counts)> {
    let r = Evaluator::new(mask, alerts.start_tick)?.score(alerts)?;
    Ok((r.tpr_rows, r.fpr_rows, r.rows))
}

/// Cell-level confusion over the alert matrix's test window.
pub fn confusion_indiv(alerts: &AlertMatrix, mask: &AnomalyMask) -> Result<(f64, f64, f64, Counts)> {
    let r = Evaluator::new(mask, alerts.start_tick)?.score(alerts)?;
    Ok((r.tpr_indiv, r.fpr_indiv, r.f1, r.indiv))
}

pub fn evaluate(alerts: &AlertMatrix, mask: &AnomalyMask) -> Result<EvalReport> {
    Evaluator::new(mask, alerts.start_tick)?.score(alerts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub param: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    /// Sorted by fpr, one point per fpr, anchored at (0,0) and (1,1).
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl RocCurve {
    pub fn from_points(points: &[RocPoint]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("points", "need at least one ROC point"));
        }
        for q in points {
            if !(0.0..=1.0).contains(&q.fpr) || !(0.0..=1.0).contains(&q.tpr) {
                return Err(Error::param("points", format!("({}, {}) outside the unit square", q.fpr, q.tpr)));
            }
        }
        let mut all: Vec<RocPoint> = points.to_vec();
        all.push(RocPoint { param: f64::NAN, fpr: 0.0, tpr: 0.0 });
        all.push(RocPoint { param: f64::NAN, fpr: 1.0, tpr: 1.0 });
        // ascending fpr, larger tpr first within a tie
        all.sort_by(|a, b| a.fpr.total_cmp(&b.fpr).then(b.tpr.total_cmp(&a.tpr)));
        all.dedup_by(|later, kept| later.fpr == kept.fpr);
        let auc = all
            .windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
            .sum();
        Ok(RocCurve { points: all, auc })
    }
}

/// ROC curve and trapezoidal AUC of bare `(fpr, tpr)` points.
pub fn roc_auc(points: &[(f64, f64)]) -> Result<RocCurve> {
    let pts: Vec<RocPoint> = points
        .iter()
        .map(|&(fpr, tpr)| RocPoint { param: f64::NAN, fpr, tpr })
        .collect();
    RocCurve::from_points(&pts)
}

/// Search grids for the tuner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grids {
    pub lambda: Vec<f64>,
    pub lambda_mu: Vec<f64>,
    pub lambda_sigma: Vec<f64>,
    pub control_limit: Vec<f64>,
    pub reg_guard: Vec<f64>,
}

pub const TUNING_CONTROL_LIMITS: [f64; 14] =
    [0.0, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 20.0];

impl Default for Grids {
    fn default() -> Self {
        Grids {
            lambda: vec![1e-2, 1e-3, 1e-4],
            lambda_mu: vec![1e-2, 1e-3, 1e-4],
            lambda_sigma: vec![1e-4, 1e-5, 1e-6],
            control_limit: TUNING_CONTROL_LIMITS.to_vec(),
            reg_guard: vec![3.0, 4.0, 5.0],
        }
    }
}

impl Grids {
    /// Every non-L combination, as configs derived from `base`.
    pub fn combos(&self, base: &DetectorConfig) -> Vec<DetectorConfig> {
        let mut out = Vec::new();
        for &lambda in &self.lambda {
            for &lambda_mu in &self.lambda_mu {
                for &lambda_sigma in &self.lambda_sigma {
                    for &reg_guard in &self.reg_guard {
                        out.push(DetectorConfig {
                            lambda,
                            lambda_mu,
                            lambda_sigma,
                            reg_guard,
                            ..*base
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TuningRecommendation {
    pub snr: f64,
    pub duration_hours: f64,
    pub control_limit: f64,
    pub reg_guard: f64,
    pub lambda: f64,
    pub lambda_mu: f64,
    pub lambda_sigma: f64,
    pub auc: f64,
    pub f1: f64,
}

impl TuningRecommendation {
    pub fn config(&self, base: &DetectorConfig) -> DetectorConfig {
        DetectorConfig {
            lambda: self.lambda,
            lambda_mu: self.lambda_mu,
            lambda_sigma: self.lambda_sigma,
            reg_guard: self.reg_guard,
            control_limit: self.control_limit,
            ..*base
        }
    }
}

/// Replication-averaged scores of one non-L combination across the L grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComboScore {
    pub config: DetectorConfig,
    /// One averaged report per L, in grid order.
    pub per_limit: Vec<AveragedReport>,
    pub roc: RocCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AveragedReport {
    pub control_limit: f64,
    pub tpr_rows: f64,
    pub fpr_rows: f64,
    pub tpr_indiv: f64,
    pub fpr_indiv: f64,
    pub f1: f64,
}

impl AveragedReport {
    pub fn mean(control_limit: f64, reports: &[EvalReport]) -> Self {
        let n = reports.len() as f64;
        let avg = |f: fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        AveragedReport {
            control_limit,
            tpr_rows: avg(|r| r.tpr_rows),
            fpr_rows: avg(|r| r.fpr_rows),
            tpr_indiv: avg(|r| r.tpr_indiv),
            fpr_indiv: avg(|r| r.fpr_indiv),
            f1: avg(|r| r.f1),
        }
    }
}

/// A dataset prepared for repeated detector runs: the warm-up state is
/// computed once and shared by every configuration.
#[derive(Debug, Clone)]
pub struct PreparedReplication<'a> {
    pub data: &'a DMatrix<f64>,
    pub mask: &'a AnomalyMask,
    pub state: DetectorState,
}

impl<'a> PreparedReplication<'a> {
    pub fn new(ds: &'a LabeledDataset, base: &DetectorConfig) -> Result<Self> {
        let x = ds.data.values();
        if x.ncols() <= base.warmup_len {
            return Err(Error::EmptyWindow);
        }
        let state = init_from_warmup(&x.columns(0, base.warmup_len).clone_owned(), base)?;
        Ok(PreparedReplication {
            data: x,
            mask: &ds.mask,
            state,
        })
    }

    /// Runs the detector from the shared warm-up state and scores it without
    /// materializing alert records.
    pub fn score(&self, config: &DetectorConfig) -> Result<EvalReport> {
        let eval = Evaluator::new(self.mask, self.state.tick)?;
        let mut tally = eval.tally();
        let mut det = Detector::new(self.state.clone(), *config)?;
        let p = self.data.nrows();
        let mut r = vec![0.0; p];
        for t in self.state.tick..self.data.ncols() {
            match det.step_into(self.data.column(t).as_slice(), &mut r, |a| tally.push(a.tick, a.stream)) {
                Ok(()) | Err(Error::NonFinite { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(tally.finish())
    }
}

/// Averaged reports over replications for each L.
pub fn sweep_limits(
    reps: &[PreparedReplication<'_>],
    config: &DetectorConfig,
    limits: &[f64],
) -> Result<Vec<AveragedReport>> {
    limits
        .par_iter()
        .map(|&l| {
            let cfg = DetectorConfig {
                control_limit: l,
                ..*config
            };
            let reports = reps.iter().map(|r| r.score(&cfg)).collect::<Result<Vec<_>>>()?;
            Ok(AveragedReport::mean(l, &reports))
        })
        .collect()
}

fn roc_of(per_limit: &[AveragedReport]) -> Result<RocCurve> {
    let pts: Vec<RocPoint> = per_limit
        .iter()
        .map(|a| RocPoint {
            param: a.control_limit,
            fpr: a.fpr_indiv,
            tpr: a.tpr_indiv,
        })
        .collect();
    RocCurve::from_points(&pts)
}

/// Tunes one (snr, duration) cell: best-AUC combination, then best-F1 L.
/// Returns the recommendation and the scores of every combination.
pub fn tune_cell(
    datasets: &[&LabeledDataset],
    grids: &Grids,
    base: &DetectorConfig,
) -> Result<(TuningRecommendation, Vec<ComboScore>)> {
    let first = datasets.first().ok_or(Error::EmptyWindow)?;
    if grids.control_limit.is_empty() {
        return Err(Error::param("control_limit", "empty L grid"));
    }
    let reps = datasets
        .iter()
        .map(|d| PreparedReplication::new(d, base))
        .collect::<Result<Vec<_>>>()?;
    let combos = grids.combos(base);
    if combos.is_empty() {
        return Err(Error::param("grids", "empty parameter grid"));
    }

    // one job per (combo, L, replication)
    let nl = grids.control_limit.len();
    let nr = reps.len();
    let jobs: Vec<(usize, usize, usize)> = (0..combos.len())
        .flat_map(|c| (0..nl).flat_map(move |l| (0..nr).map(move |r| (c, l, r))))
        .collect();
    let reports = jobs
        .par_iter()
        .map(|&(c, l, r)| {
            let cfg = DetectorConfig {
                control_limit: grids.control_limit[l],
                ..combos[c]
            };
            reps[r].score(&cfg)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut scores = Vec::with_capacity(combos.len());
    for (c, cfg) in combos.iter().enumerate() {
        let per_limit: Vec<AveragedReport> = (0..nl)
            .map(|l| {
                let off = (c * nl + l) * nr;
                AveragedReport::mean(grids.control_limit[l], &reports[off..off + nr])
            })
            .collect();
        let roc = roc_of(&per_limit)?;
        scores.push(ComboScore {
            config: *cfg,
            per_limit,
            roc,
        });
    }

    let best = select_best(&scores);
    let combo = &scores[best];
    let (limit, f1) = combo
        .per_limit
        .iter()
        .map(|a| (a.control_limit, a.f1))
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, (l, f)| {
            if f > acc.1 || (f == acc.1 && l < acc.0) {
                (l, f)
            } else {
                acc
            }
        });

    let rec = TuningRecommendation {
        snr: first.spec.snr,
        duration_hours: first.spec.duration_ticks as f64 / TICKS_PER_HOUR as f64,
        control_limit: limit,
        reg_guard: combo.config.reg_guard,
        lambda: combo.config.lambda,
        lambda_mu: combo.config.lambda_mu,
        lambda_sigma: combo.config.lambda_sigma,
        auc: combo.roc.auc,
        f1,
    };
    Ok((rec, scores))
}

/// Index of the best-AUC combination; ties go to the smaller λ, then the
/// earlier grid position.
fn select_best(scores: &[ComboScore]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        let b = &scores[best];
        if s.roc.auc > b.roc.auc || (s.roc.auc == b.roc.auc && s.config.lambda < b.config.lambda) {
            best = i;
        }
    }
    best
}

/// Groups replications by (snr, duration) and tunes each cell.
pub fn grid_search_tune(
    replications: &[LabeledDataset],
    grids: &Grids,
    base: &DetectorConfig,
) -> Result<Vec<TuningRecommendation>> {
    let mut cells: BTreeMap<(u64, usize), Vec<&LabeledDataset>> = BTreeMap::new();
    for ds in replications {
        cells
            .entry((ds.spec.snr.to_bits(), ds.spec.duration_ticks))
            .or_default()
            .push(ds);
    }
    let mut keys: Vec<_> = cells.keys().copied().collect();
    keys.sort_by(|a, b| f64::from_bits(a.0).total_cmp(&f64::from_bits(b.0)).then(a.1.cmp(&b.1)));
    keys.iter()
        .map(|k| tune_cell(&cells[k], grids, base).map(|(rec, _)| rec))
        .collect()
}

/// Exact ROC of a scalar score against binary labels: one point per distinct
/// score, alerting when the score is at least that value. Its AUC equals the
/// Mann-Whitney statistic with ties counted one half.
pub fn score_roc(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    let pos = labels.iter().filter(|&&b| b).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::param("labels", "need both positive and negative ticks"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut pts = Vec::new();
    for (i, &j) in order.iter().enumerate() {
        if labels[j] {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_tie = order.get(i + 1).is_none_or(|&n| scores[n] != scores[j]);
        if last_of_tie {
            pts.push(RocPoint {
                param: scores[j],
                fpr: fp as f64 / neg as f64,
                tpr: tp as f64 / pos as f64,
            });
        }
    }
    // The staircase is already monotone in both coordinates. Merging equal
    // fpr values as `from_points` does would lift the preceding trapezoid.
    let mut points = vec![RocPoint { param: f64::INFINITY, fpr: 0.0, tpr: 0.0 }];
    points.extend(pts);
    let auc = points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
        .sum();
    Ok(RocCurve { points, auc })
}

/// Rows-level ROC of the detector over an L sweep on one replication.
pub fn detector_rows_roc(rep: &PreparedReplication<'_>, config: &DetectorConfig, limits: &[f64]) -> Result<RocCurve> {
    let pts = limits
        .par_iter()
        .map(|&l| {
            let r = rep.score(&DetectorConfig {
                control_limit: l,
                ..*config
            })?;
            Ok(RocPoint {
                param: l,
                fpr: r.fpr_rows,
                tpr: r.tpr_rows,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RocCurve::from_points(&pts)
}

/// Rows-level ROC of the Q statistic fitted on the warm-up, over every
/// threshold (the α sweep in the limit).
pub fn q_rows_roc(ds: &LabeledDataset, warmup_len: usize) -> Result<RocCurve> {
    let x = ds.data.values();
    if warmup_len >= x.ncols() {
        return Err(Error::EmptyWindow);
    }
    let q = fit_q_detector(&x.columns(0, warmup_len).clone_owned(), 0.05)?;
    let scores = q_scores(x, &q, warmup_len)?;
    let labels: Vec<bool> = (warmup_len..x.ncols()).map(|t| ds.mask.any_at(t)).collect();
    score_roc(&scores, &labels)
}

/// L values for rows-level ROC curves: the tuning grid plus a finer grid
/// over the range where the rows false-positive rate moves.
pub fn fine_control_limits() -> Vec<f64> {
    let mut v: Vec<f64> = TUNING_CONTROL_LIMITS.to_vec();
    v.extend((8..=40).map(|i| i as f64 * 0.25));
    v.extend((6..=20).map(|i| i as f64 * 2.0));
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

#[derive(Debug, Clone)]
pub struct QComparisonConfig {
    pub preset: SyntheticPreset,
    pub detector: DetectorConfig,
    pub limits: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl Default for QComparisonConfig {
    /// snr 2, six hours, β = 3/4 support, detector at the (2, 6h) tuning.
    fn default() -> Self {
        QComparisonConfig {
            preset: SyntheticPreset {
                snr: 2.0,
                ..SyntheticPreset::default()
            }
            .with_sparsity(0.75),
            detector: DetectorConfig {
                lambda: 1e-4,
                lambda_mu: 1e-3,
                lambda_sigma: 1e-4,
                reg_guard: 3.0,
                ..DetectorConfig::default()
            },
            limits: fine_control_limits(),
            seeds: (0..5).collect(),
        }
    }
}

impl QComparisonConfig {
    /// Same protocol on `p` streams, support re-derived from β = 3/4. The
    /// leading eigenvalue grows linearly in `p`, so η is scaled by `100/p`
    /// to keep the subspace step comparable.
    pub fn with_streams(mut self, p: usize) -> Self {
        self.preset.streams = p;
        self.preset = self.preset.with_sparsity(0.75);
        self.detector.eta = 1e-5 * 100.0 / p as f64;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QComparison {
    pub streams: usize,
    pub seed: u64,
    pub auc_detector: f64,
    pub auc_q: f64,
}

impl QComparison {
    pub fn gap(&self) -> f64 {
        self.auc_detector - self.auc_q
    }
}

/// Rows-level AUC of the detector and of the Q statistic, per seed.
pub fn compare_with_q(cfg: &QComparisonConfig) -> Result<Vec<QComparison>> {
    cfg.seeds
        .iter()
        .map(|&seed| {
            let ds = cfg.preset.generate(seed)?;
            let rep = PreparedReplication::new(&ds, &cfg.detector)?;
            let det = detector_rows_roc(&rep, &cfg.detector, &cfg.limits)?;
            let q = q_rows_roc(&ds, cfg.detector.warmup_len)?;
            Ok(QComparison {
                streams: cfg.preset.streams,
                seed,
                auc_detector: det.auc,
                auc_q: q.auc,
            })
        })
        .collect()
}
