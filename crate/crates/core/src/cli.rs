//! Command-line front end. Every subcommand writes its CSV outputs plus a
//! `manifest.json` in the directory of its main output.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 on a data error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::json;

use crate::baseline::{fit_q_detector, q_scores};
use crate::detector::{run_from_state, run_stream_with, DetectorConfig, DetectorState};
use crate::error::{Error, Result};
use crate::evalkit::{evaluate, grid_search_tune, Grids, RocCurve, RocPoint, TUNING_CONTROL_LIMITS};
use crate::io::{self, IngestOptions, RunManifest};
use crate::subspace::{angle_sweep, log_grid, AngleSweepConfig, SweepStart};
use crate::synthgen::{AmplitudeScale, SyntheticPreset, TICKS_PER_HOUR, TICKS_PER_WEEK};
use crate::theory::{
    ewma_variance_consistency_experiment, phase_transition_experiment, residual_fidelity_experiment, AlphaRule,
    ConsistencyConfig, CorrelationSpec, FidelityConfig, PhaseConfig,
};

/// Directory for outputs whose path is not given explicitly.
pub const OUT_DIR_ENV: &str = "SPARSE_TELESCOPE_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "sparse-telescope", version, about = "Sparse anomaly detection in many parallel streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a labeled synthetic dataset.
    Generate(GenerateArgs),
    /// Run the streaming detector over a data CSV.
    Detect(DetectArgs),
    /// Grid-search the detector's tuning parameters on synthetic data.
    Tune(TuneArgs),
    /// Score an alerts CSV against a mask CSV.
    Evaluate(EvaluateArgs),
    /// Chi-square (Q statistic) baseline detector.
    #[command(name = "baseline-q")]
    BaselineQ(BaselineArgs),
    /// Subspace error of incremental PCA across step sizes.
    #[command(name = "angle-sweep")]
    AngleSweep(AngleSweepArgs),
    /// Exact support recovery rates of thresholding.
    Phase(PhaseArgs),
    /// Bias and spread of the EWMA variance estimator.
    Consistency(ConsistencyArgs),
    /// Residual fidelity against the resilience bound.
    Fidelity(FidelityArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScaleArg {
    Series,
    Noise,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long = "streams", short = 'p', default_value_t = 100)]
    streams: usize,
    #[arg(long, short = 'T', default_value_t = 5 * TICKS_PER_WEEK)]
    ticks: usize,
    #[arg(long, short = 'k', default_value_t = 5)]
    factors: usize,
    #[arg(long, default_value_t = 0.9)]
    hurst: f64,
    #[arg(long, default_value_t = crate::synthgen::DEFAULT_NOISE_VARIANCE)]
    noise_variance: f64,
    #[arg(long, default_value_t = crate::synthgen::DEFAULT_TREND_AMPLITUDE)]
    trend_amplitude: f64,
    #[arg(long, default_value_t = 7.0)]
    snr: f64,
    /// Anomaly length in ticks.
    #[arg(long, default_value_t = 6 * TICKS_PER_HOUR)]
    duration: usize,
    #[arg(long, default_value_t = 3 * TICKS_PER_WEEK)]
    start: usize,
    /// Window used to measure each port's standard deviation.
    #[arg(long, default_value_t = 2 * TICKS_PER_WEEK)]
    warmup: usize,
    /// Anomalous ports, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0usize, 1, 2])]
    anomalous: Vec<usize>,
    /// Use the first ⌊p^(1-β)⌋ ports instead of --anomalous.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_enum, default_value_t = ScaleArg::Series)]
    scale: ScaleArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    /// Defaults to `mask.csv` beside the output.
    #[arg(long)]
    mask_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long, short = 'i')]
    input: PathBuf,
    /// Apply ln(1+x) to every cell.
    #[arg(long)]
    log_transform: bool,
    /// Keep only these columns.
    #[arg(long, value_delimiter = ',')]
    select: Option<Vec<String>>,
    /// Keep the k columns with the largest totals.
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long, default_value = "t")]
    tick_column: String,
}

impl IngestArgs {
    fn options(&self) -> IngestOptions {
        IngestOptions {
            log_transform: self.log_transform,
            stream_selection: self.select.clone(),
            tick_column: self.tick_column.clone(),
            top_k: self.top_k,
        }
    }
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[command(flatten)]
    ingest: IngestArgs,
    /// Flat `key = value` detector configuration.
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
    #[arg(long)]
    alerts_out: Option<PathBuf>,
    #[arg(long)]
    residuals_out: Option<PathBuf>,
    /// Write the final detector state here.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Continue from a saved state instead of warming up. The input is either
    /// the full series (processing starts at the saved tick) or a file whose
    /// first tick label equals the saved tick.
    #[arg(long)]
    resume: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [2.0, 5.0, 7.0])]
    snr: Vec<f64>,
    /// Anomaly durations in hours.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 6.0])]
    durations: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    replications: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5 * TICKS_PER_WEEK)]
    ticks: usize,
    /// Anomaly start; defaults to week three, moved earlier if the longest
    /// anomaly would overrun `--ticks`.
    #[arg(long)]
    start: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    lambda_mu: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    lambda_sigma: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    limits: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    reg_guard: Option<Vec<f64>>,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    alerts: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    /// First scored tick.
    #[arg(long, default_value_t = 2 * TICKS_PER_WEEK)]
    warmup: usize,
    /// Control limit the alerts were produced with; larger limits on the
    /// ROC are obtained by re-thresholding the recorded deviations.
    #[arg(long, default_value_t = 5.0)]
    control_limit: f64,
    #[arg(long)]
    report_out: Option<PathBuf>,
    #[arg(long)]
    roc_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[command(flatten)]
    ingest: IngestArgs,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 2 * TICKS_PER_WEEK)]
    warmup: usize,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StartArg {
    Warmup,
    Random,
}

#[derive(Debug, Args)]
struct AngleSweepArgs {
    /// Explicit η grid; overrides the log grid flags.
    #[arg(long, value_delimiter = ',')]
    etas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-7)]
    eta_min: f64,
    #[arg(long, default_value_t = 1e-2)]
    eta_max: f64,
    #[arg(long, default_value_t = 11)]
    eta_count: usize,
    #[arg(long, default_value_t = 10)]
    replications: usize,
    #[arg(long, default_value_t = 10)]
    weeks: usize,
    #[arg(long, value_enum, default_value_t = StartArg::Warmup)]
    start: StartArg,
    #[arg(long, default_value_t = 2023)]
    seed: u64,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PhaseArgs {
    #[arg(long = "p", value_delimiter = ',', default_values_t = [5000usize])]
    p: Vec<usize>,
    #[arg(long, default_value_t = 0.75)]
    beta: f64,
    /// Amplitude exponents; defaults to multiples of the boundary g(β).
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<f64>>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// `inverse-log`, `inverse-log-squared` or a fixed number.
    #[arg(long, default_value = "inverse-log-squared")]
    alpha_rule: String,
    #[arg(long, default_value_t = 2023)]
    seed: u64,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConsistencyArgs {
    /// `iid`, `ar1:<phi>` or `fgn:<H>`.
    #[arg(long, default_value = "iid")]
    correlation: String,
    #[arg(long, value_delimiter = ',', default_values_t = [1e-3, 1e-4, 1e-5])]
    lambdas: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    replications: usize,
    #[arg(long, default_value_t = 2023)]
    seed: u64,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FidelityArgs {
    #[arg(long = "p", value_delimiter = ',', default_values_t = [100usize, 200, 400])]
    p: Vec<usize>,
    #[arg(long, short = 'k', default_value_t = 5)]
    k: usize,
    /// Anomaly-free ticks used for the subspace fit.
    #[arg(long, default_value_t = 2 * TICKS_PER_WEEK)]
    n: usize,
    #[arg(long, default_value_t = 7.0)]
    snr: f64,
    #[arg(long, default_value_t = 2023)]
    seed: u64,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidParameter { .. } => 1,
                _ => 2,
            }
        }
    }
}

fn out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

fn or_default(p: &Option<PathBuf>, name: &str) -> PathBuf {
    p.clone().unwrap_or_else(|| out_dir().join(name))
}

fn dir_of(p: &Path) -> PathBuf {
    match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn finish(mut manifest: RunManifest, inputs: Vec<PathBuf>, outputs: Vec<PathBuf>) -> Result<()> {
    let dir = dir_of(&outputs[0]);
    manifest.inputs = inputs;
    manifest.outputs = outputs;
    let path = manifest.write(&dir)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Generate(a) => generate(a),
        Command::Detect(a) => detect(a),
        Command::Tune(a) => tune(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::BaselineQ(a) => baseline(a),
        Command::AngleSweep(a) => sweep(a),
        Command::Phase(a) => phase(a),
        Command::Consistency(a) => consistency(a),
        Command::Fidelity(a) => fidelity(a),
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let mut preset = SyntheticPreset {
        streams: a.streams,
        ticks: a.ticks,
        factors: a.factors,
        hurst: a.hurst,
        noise_variance: a.noise_variance,
        trend_amplitude: a.trend_amplitude,
        warmup_len: a.warmup,
        snr: a.snr,
        duration_ticks: a.duration,
        start_tick: a.start,
        anomalous_streams: a.anomalous.clone(),
        scale: match a.scale {
            ScaleArg::Series => AmplitudeScale::Series,
            ScaleArg::Noise => AmplitudeScale::Noise,
        },
    };
    if let Some(beta) = a.beta {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: format!("{beta} outside (0,1]"),
            });
        }
        preset = preset.with_sparsity(beta);
    }
    let ds = preset.generate(a.seed)?;
    let data = or_default(&a.output, "data.csv");
    let mask = a.mask_out.clone().unwrap_or_else(|| dir_of(&data).join("mask.csv"));
    io::write_timeseries_csv(&data, &ds.data, 0)?;
    io::write_mask_csv(&mask, &ds.mask)?;
    let manifest = RunManifest::new(
        "generate",
        json!({
            "streams": preset.streams, "ticks": preset.ticks, "factors": preset.factors,
            "hurst": preset.hurst, "noise_variance": preset.noise_variance,
            "trend_amplitude": preset.trend_amplitude, "snr": preset.snr,
            "duration": preset.duration_ticks, "start": preset.start_tick,
            "warmup": preset.warmup_len, "anomalous": preset.anomalous_streams,
            "scale": format!("{:?}", preset.scale), "shifts": ds.shifts,
        }),
        Some(a.seed),
    );
    finish(manifest, vec![], vec![data, mask])
}

fn detect(a: DetectArgs) -> Result<()> {
    let config = match &a.config {
        Some(p) => io::read_config(p)?,
        None => DetectorConfig::default(),
    };
    let series = io::load_timeseries_csv(&a.ingest.input, &a.ingest.options())?;
    let x = series.values();
    let keep = a.residuals_out.is_some();
    let out = match &a.resume {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Parse {
                path: p.clone(),
                line: 0,
                reason: e.to_string(),
            })?;
            let mut state = DetectorState::from_checkpoint(&text)?;
            if state.nu_x.len() != x.nrows() {
                return Err(Error::Dimension(format!(
                    "checkpoint has {} streams, input has {}",
                    state.nu_x.len(),
                    x.nrows()
                )));
            }
            // a file that begins at the saved tick is a continuation
            let offset = match io::first_tick(&a.ingest.input, &a.ingest.tick_column)? {
                Some(t0) if t0 > 0 && t0 == state.tick => t0,
                _ => 0,
            };
            state.tick -= offset;
            let mut out = run_from_state(x, state, &config, keep)?;
            if offset > 0 {
                for r in &mut out.alerts.records {
                    r.tick += offset;
                }
                out.alerts.ticks += offset;
                out.alerts.start_tick += offset;
                out.rejected.iter_mut().for_each(|t| *t += offset);
                out.state.tick += offset;
            }
            out
        }
        None => run_stream_with(x, &config, keep)?,
    };
    info!(
        "k = {}, {} alerts, {} rejected ticks",
        out.k,
        out.alerts.len(),
        out.rejected.len()
    );
    let alerts = or_default(&a.alerts_out, "alerts.csv");
    io::write_alerts_csv(&alerts, &out.alerts)?;
    let mut outputs = vec![alerts];
    if let (Some(p), Some(r)) = (&a.residuals_out, &out.residuals) {
        io::write_matrix_csv(p, series.names(), r, out.alerts.start_tick)?;
        outputs.push(p.clone());
    }
    if let Some(p) = &a.checkpoint {
        std::fs::write(p, out.state.to_checkpoint())?;
        outputs.push(p.clone());
    }
    let mut inputs = vec![a.ingest.input.clone()];
    inputs.extend(a.config.clone());
    inputs.extend(a.resume.clone());
    let manifest = RunManifest::new(
        "detect",
        json!({
            "detector": config, "k": out.k, "log_transform": a.ingest.log_transform,
            "top_k": a.ingest.top_k, "select": a.ingest.select, "rejected_ticks": out.rejected,
        }),
        None,
    );
    finish(manifest, inputs, outputs)
}

fn tune(a: TuneArgs) -> Result<()> {
    let d = Grids::default();
    let grids = Grids {
        lambda: a.lambda.clone().unwrap_or(d.lambda),
        lambda_mu: a.lambda_mu.clone().unwrap_or(d.lambda_mu),
        lambda_sigma: a.lambda_sigma.clone().unwrap_or(d.lambda_sigma),
        control_limit: a.limits.clone().unwrap_or(d.control_limit),
        reg_guard: a.reg_guard.clone().unwrap_or(d.reg_guard),
    };
    let base = DetectorConfig::default();
    let hours_to_ticks = |h: f64| (h * TICKS_PER_HOUR as f64).round() as usize;
    let longest = a.durations.iter().copied().map(hours_to_ticks).max().unwrap_or(0);
    let start = a
        .start
        .unwrap_or_else(|| (3 * TICKS_PER_WEEK).min(a.ticks.saturating_sub(longest)));
    let mut recs = Vec::new();
    // one cell at a time keeps only five datasets in memory
    for &snr in &a.snr {
        for &hours in &a.durations {
            let preset = SyntheticPreset {
                snr,
                ticks: a.ticks,
                start_tick: start,
                duration_ticks: hours_to_ticks(hours),
                ..SyntheticPreset::default()
            };
            let data = (0..a.replications)
                .map(|r| preset.generate(crate::rng::derive_seed(a.seed, r as u64)))
                .collect::<Result<Vec<_>>>()?;
            info!("tuning snr {snr}, {hours} h");
            recs.extend(grid_search_tune(&data, &grids, &base)?);
        }
    }
    let out = or_default(&a.out, "table.csv");
    io::write_rows(
        &out,
        &["snr", "duration", "L", "REG", "ewma_data", "ewma_mean", "ewma_var"],
        recs.iter().map(|r| {
            vec![
                fmt(r.snr),
                fmt(r.duration_hours),
                fmt(r.control_limit),
                fmt(r.reg_guard),
                fmt(r.lambda),
                fmt(r.lambda_mu),
                fmt(r.lambda_sigma),
            ]
        }),
    )?;
    let manifest = RunManifest::new(
        "tune",
        json!({"grids": grids, "replications": a.replications, "ticks": a.ticks, "start": start,
               "recommendations": recs}),
        Some(a.seed),
    );
    finish(manifest, vec![], vec![out])
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<()> {
    let mask = io::read_mask_csv(&a.mask)?;
    let alerts = io::read_alerts_csv(&a.alerts, mask.streams(), mask.ticks(), a.warmup)?;
    let report = evaluate(&alerts, &mask)?;

    // re-threshold at each larger limit: deviation/σ̂ = centered_abs · L / threshold
    let mut limits: Vec<f64> = TUNING_CONTROL_LIMITS
        .iter()
        .copied()
        .filter(|&l| l > a.control_limit)
        .collect();
    limits.insert(0, a.control_limit);
    let mut pts = Vec::new();
    for &l in &limits {
        let mut sub = alerts.clone();
        sub.records
            .retain(|r| r.threshold > 0.0 && r.centered_abs * a.control_limit / r.threshold > l);
        let rep = evaluate(&sub, &mask)?;
        pts.push(RocPoint {
            param: l,
            fpr: rep.fpr_indiv,
            tpr: rep.tpr_indiv,
        });
    }
    let roc = RocCurve::from_points(&pts)?;

    let report_path = or_default(&a.report_out, "report.csv");
    let (r, i) = (report.rows, report.indiv);
    io::write_rows(
        &report_path,
        &[
            "tpr_rows", "fpr_rows", "tpr_indiv", "fpr_indiv", "f1", "tp_rows", "fp_rows", "tn_rows", "fn_rows",
            "tp_indiv", "fp_indiv", "tn_indiv", "fn_indiv", "auc",
        ],
        [vec![
            fmt(report.tpr_rows),
            fmt(report.fpr_rows),
            fmt(report.tpr_indiv),
            fmt(report.fpr_indiv),
            fmt(report.f1),
            r.tp.to_string(),
            r.fp.to_string(),
            r.tn.to_string(),
            r.fn_.to_string(),
            i.tp.to_string(),
            i.fp.to_string(),
            i.tn.to_string(),
            i.fn_.to_string(),
            fmt(roc.auc),
        ]],
    )?;
    let roc_path = a.roc_out.clone().unwrap_or_else(|| dir_of(&report_path).join("roc.csv"));
    io::write_rows(
        &roc_path,
        &["param", "fpr", "tpr"],
        roc.points
            .iter()
            .map(|p| vec![fmt(p.param), fmt(p.fpr), fmt(p.tpr)]),
    )?;
    let manifest = RunManifest::new(
        "evaluate",
        json!({"warmup": a.warmup, "control_limit": a.control_limit, "report": report, "auc": roc.auc}),
        None,
    );
    finish(manifest, vec![a.alerts, a.mask], vec![report_path, roc_path])
}

fn baseline(a: BaselineArgs) -> Result<()> {
    let series = io::load_timeseries_csv(&a.ingest.input, &a.ingest.options())?;
    let x = series.values();
    if a.warmup < 2 || a.warmup >= x.ncols() {
        return Err(Error::InvalidParameter {
            name: "warmup",
            reason: format!("{} must lie in 2..{}", a.warmup, x.ncols()),
        });
    }
    let q = fit_q_detector(&x.columns(0, a.warmup).clone_owned(), a.alpha)?;
    let scores = q_scores(x, &q, a.warmup)?;
    let out = or_default(&a.out, "qalerts.csv");
    io::write_rows(
        &out,
        &["tick", "q_value", "reject"],
        scores.iter().enumerate().map(|(i, &s)| {
            vec![
                (a.warmup + i).to_string(),
                fmt(s),
                u8::from(s > q.threshold).to_string(),
            ]
        }),
    )?;
    let manifest = RunManifest::new(
        "baseline-q",
        json!({"alpha": a.alpha, "warmup": a.warmup, "threshold": q.threshold, "ridge": q.ridge}),
        None,
    );
    finish(manifest, vec![a.ingest.input.clone()], vec![out])
}

fn sweep(a: AngleSweepArgs) -> Result<()> {
    let mut cfg = AngleSweepConfig::default();
    cfg.preset.ticks = a.weeks * TICKS_PER_WEEK;
    // the sweep data carry no anomaly; keep the unused window inside the series
    cfg.preset.start_tick = cfg.preset.warmup_len;
    cfg.preset.duration_ticks = 1;
    cfg.etas = a
        .etas
        .clone()
        .unwrap_or_else(|| log_grid(a.eta_min, a.eta_max, a.eta_count));
    cfg.replications = a.replications;
    cfg.seed = a.seed;
    cfg.start = match a.start {
        StartArg::Warmup => SweepStart::Warmup(cfg.preset.warmup_len),
        StartArg::Random => SweepStart::Random,
    };
    if cfg.preset.ticks <= cfg.preset.warmup_len {
        return Err(Error::InvalidParameter {
            name: "weeks",
            reason: "must exceed the two-week warm-up".into(),
        });
    }
    let rows = angle_sweep(&cfg)?;
    let out = or_default(&a.out, "angles.csv");
    io::write_rows(
        &out,
        &["eta", "mean_angle_rad", "batch_angle_rad"],
        rows.iter()
            .map(|r| vec![fmt(r.eta), fmt(r.mean_angle), fmt(r.batch_angle)]),
    )?;
    let manifest = RunManifest::new(
        "angle-sweep",
        json!({"etas": cfg.etas, "replications": cfg.replications, "weeks": a.weeks,
               "start": format!("{:?}", cfg.start)}),
        Some(a.seed),
    );
    finish(manifest, vec![], vec![out])
}

fn parse_alpha_rule(s: &str) -> Result<AlphaRule> {
    match s {
        "inverse-log" => Ok(AlphaRule::InverseLog),
        "inverse-log-squared" => Ok(AlphaRule::InverseLogSquared),
        other => other
            .parse::<f64>()
            .map(AlphaRule::Fixed)
            .map_err(|_| Error::InvalidParameter {
                name: "alpha-rule",
                reason: format!("`{other}` is not inverse-log, inverse-log-squared or a number"),
            }),
    }
}

fn phase(a: PhaseArgs) -> Result<()> {
    let mut cfg = PhaseConfig {
        p_list: a.p.clone(),
        beta: a.beta,
        n_trials: a.trials,
        seed: a.seed,
        alpha_rule: parse_alpha_rule(&a.alpha_rule)?,
        ..PhaseConfig::default()
    };
    cfg.r_list = match &a.r {
        Some(r) => r.clone(),
        None => {
            let g = crate::theory::recovery_boundary(a.beta)?;
            [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0].iter().map(|m| m * g).collect()
        }
    };
    let cells = phase_transition_experiment(&cfg)?;
    let out = or_default(&a.out, "phase.csv");
    io::write_rows(
        &out,
        &["p", "beta", "r", "rate"],
        cells.iter().map(|c| {
            vec![
                c.p.to_string(),
                fmt(c.beta),
                fmt(c.r),
                fmt(c.exact_recovery_rate),
            ]
        }),
    )?;
    let manifest = RunManifest::new(
        "phase",
        json!({"p": cfg.p_list, "beta": cfg.beta, "r": cfg.r_list, "trials": cfg.n_trials,
               "alpha_rule": cfg.alpha_rule}),
        Some(a.seed),
    );
    finish(manifest, vec![], vec![out])
}

fn parse_correlation(s: &str) -> Result<CorrelationSpec> {
    let bad = || Error::InvalidParameter {
        name: "correlation",
        reason: format!("`{s}` is not iid, ar1:<phi> or fgn:<H>"),
    };
    match s.split_once(':') {
        None if s == "iid" => Ok(CorrelationSpec::Iid),
        Some(("ar1", v)) => Ok(CorrelationSpec::Ar1 {
            phi: v.parse().map_err(|_| bad())?,
        }),
        Some(("fgn", v)) => Ok(CorrelationSpec::Fgn {
            hurst: v.parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

fn consistency(a: ConsistencyArgs) -> Result<()> {
    let cfg = ConsistencyConfig {
        correlation: parse_correlation(&a.correlation)?,
        lambdas: a.lambdas.clone(),
        n: a.n,
        replications: a.replications,
        seed: a.seed,
        ..ConsistencyConfig::default()
    };
    let rows = ewma_variance_consistency_experiment(&cfg)?;
    let out = or_default(&a.out, "consistency.csv");
    io::write_rows(
        &out,
        &["lambda", "bias", "variance"],
        rows.iter()
            .map(|r| vec![fmt(r.lambda), fmt(r.bias), fmt(r.variance)]),
    )?;
    let manifest = RunManifest::new(
        "consistency",
        json!({"correlation": cfg.correlation, "lambdas": cfg.lambdas, "n": cfg.n,
               "replications": cfg.replications, "initial": cfg.initial}),
        Some(a.seed),
    );
    finish(manifest, vec![], vec![out])
}

fn fidelity(a: FidelityArgs) -> Result<()> {
    let cfg = FidelityConfig {
        p_list: a.p.clone(),
        k: a.k,
        n: a.n,
        snr: a.snr,
        seed: a.seed,
        ..FidelityConfig::default()
    };
    let rows = residual_fidelity_experiment(&cfg)?;
    let out = or_default(&a.out, "fidelity.csv");
    io::write_rows(
        &out,
        &["p", "gap", "bound"],
        rows.iter()
            .map(|r| vec![r.p.to_string(), fmt(r.gap), fmt(r.bound)]),
    )?;
    let manifest = RunManifest::new(
        "fidelity",
        json!({"p": cfg.p_list, "k": cfg.k, "n": cfg.n, "snr": cfg.snr, "rows": rows}),
        Some(a.seed),
    );
    finish(manifest, vec![], vec![out])
}
