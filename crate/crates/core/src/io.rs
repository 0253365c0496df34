//! CSV and config file formats.
//!
//! Matrices are stored one row per tick with a leading `t` column. Floats are
//! written in Rust's shortest round-trip notation, so a write/read cycle is
//! bit-exact; `NaN` marks a missing cell and an empty cell reads as `NaN`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::detector::{AlertMatrix, AlertRecord, DetectorConfig};
use crate::error::{Error, Result};
use crate::series::{AnomalyMask, SeriesMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    /// Apply `x → ln(1 + x)` after selection.
    pub log_transform: bool,
    /// Keep only these columns, in this order.
    pub stream_selection: Option<Vec<String>>,
    pub tick_column: String,
    /// Keep the `k` streams with the largest raw totals.
    pub top_k: Option<usize>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            log_transform: false,
            stream_selection: None,
            tick_column: "t".into(),
            top_k: None,
        }
    }
}

fn parse_err(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| parse_err(path, 0, e.to_string()))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn parse_cell(path: &Path, line: usize, cell: &str) -> Result<f64> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(f64::NAN);
    }
    cell.parse::<f64>()
        .map_err(|_| parse_err(path, line, format!("non-numeric cell `{cell}`")))
}

/// Reads a `t,<name>,...` CSV into a p x T matrix.
/// Integer label of the first data row's tick column, if it has one.
pub fn first_tick(path: &Path, tick_column: &str) -> Result<Option<usize>> {
    let mut rdr = reader(path)?;
    let Some(c) = rdr.headers()?.iter().position(|h| h == tick_column) else {
        return Ok(None);
    };
    match rdr.records().next() {
        Some(rec) => {
            let rec = rec.map_err(|e| parse_err(path, 2, e.to_string()))?;
            Ok(rec.get(c).and_then(|v| v.trim().parse().ok()))
        }
        None => Ok(None),
    }
}

pub fn load_timeseries_csv(path: &Path, options: &IngestOptions) -> Result<SeriesMatrix> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let tick_col = header
        .iter()
        .position(|h| *h == options.tick_column)
        .ok_or_else(|| parse_err(path, 1, format!("no tick column `{}`", options.tick_column)))?;
    let value_cols: Vec<usize> = (0..header.len()).filter(|&c| c != tick_col).collect();
    if value_cols.is_empty() {
        return Err(parse_err(path, 1, "no stream columns"));
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err(path, line, e.to_string()))?;
        if rec.len() != header.len() {
            return Err(parse_err(
                path,
                line,
                format!("{} fields, header has {}", rec.len(), header.len()),
            ));
        }
        rows.push(
            value_cols
                .iter()
                .map(|&c| parse_cell(path, line, &rec[c]))
                .collect::<Result<_>>()?,
        );
    }
    let names: Vec<String> = value_cols.iter().map(|&c| header[c].clone()).collect();
    let values = DMatrix::from_fn(names.len(), rows.len(), |i, t| rows[t][i]);
    let mut series = SeriesMatrix::with_names(values, names)?;

    if let Some(sel) = &options.stream_selection {
        let idx = sel
            .iter()
            .map(|name| {
                series
                    .names()
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| parse_err(path, 1, format!("selected column `{name}` not in header")))
            })
            .collect::<Result<Vec<_>>>()?;
        series = series.select_streams(&idx);
    }
    if let Some(k) = options.top_k {
        series = top_k_streams(&series, k)?;
    }
    if options.log_transform {
        log_transform(&mut series);
    }
    Ok(series)
}

/// `x → ln(1 + x)` in place.
pub fn log_transform(series: &mut SeriesMatrix) {
    series.values_mut().apply(|v| *v = v.ln_1p());
}

/// The `k` streams with the largest totals (missing cells ignored), by
/// descending total with ties in original order.
pub fn top_k_streams(series: &SeriesMatrix, k: usize) -> Result<SeriesMatrix> {
    let p = series.streams();
    if k > p {
        return Err(Error::param("k", format!("{k} exceeds the {p} streams")));
    }
    let totals: Vec<f64> = (0..p)
        .map(|i| series.values().row(i).iter().filter(|v| !v.is_nan()).sum())
        .collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| totals[b].total_cmp(&totals[a]).then(a.cmp(&b)));
    order.truncate(k);
    Ok(series.select_streams(&order))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes `t,<names>` with ticks numbered from `first_tick`.
pub fn write_timeseries_csv(path: &Path, series: &SeriesMatrix, first_tick: usize) -> Result<()> {
    write_matrix_csv(path, series.names(), series.values(), first_tick)
}

/// Writes a p x T matrix, one row per tick.
pub fn write_matrix_csv(path: &Path, names: &[String], m: &DMatrix<f64>, first_tick: usize) -> Result<()> {
    let mut w = create(path)?;
    write!(w, "t")?;
    for n in names {
        write!(w, ",{n}")?;
    }
    writeln!(w)?;
    for (t, col) in m.column_iter().enumerate() {
        write!(w, "{}", first_tick + t)?;
        for v in col.iter() {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the mask as 0/1 with the data CSV's layout.
pub fn write_mask_csv(path: &Path, mask: &AnomalyMask) -> Result<()> {
    let mut w = create(path)?;
    write!(w, "t")?;
    for i in 0..mask.streams() {
        write!(w, ",port_{i}")?;
    }
    writeln!(w)?;
    for t in 0..mask.ticks() {
        write!(w, "{t}")?;
        for i in 0..mask.streams() {
            write!(w, ",{}", u8::from(mask.get(i, t)))?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_mask_csv(path: &Path) -> Result<AnomalyMask> {
    let m = load_timeseries_csv(path, &IngestOptions::default())?;
    let mut mask = AnomalyMask::empty(m.streams(), m.ticks());
    for t in 0..m.ticks() {
        for i in 0..m.streams() {
            match m.values()[(i, t)] {
                0.0 => {}
                1.0 => mask.set(i, t, true),
                v => return Err(parse_err(path, t + 2, format!("mask cell {v} is not 0 or 1"))),
            }
        }
    }
    Ok(mask)
}

pub fn write_alerts_csv(path: &Path, alerts: &AlertMatrix) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "tick,stream,residual,centered_abs,threshold")?;
    for a in &alerts.records {
        writeln!(w, "{},{},{},{},{}", a.tick, a.stream, a.residual, a.centered_abs, a.threshold)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads alert records; the shape is supplied by the caller since the file
/// only lists the alerts.
pub fn read_alerts_csv(path: &Path, streams: usize, ticks: usize, start_tick: usize) -> Result<AlertMatrix> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != ["tick", "stream", "residual", "centered_abs", "threshold"] {
        return Err(parse_err(path, 1, format!("unexpected alerts header {header:?}")));
    }
    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err(path, line, e.to_string()))?;
        let int = |c: usize| {
            rec[c]
                .trim()
                .parse::<usize>()
                .map_err(|_| parse_err(path, line, format!("bad index `{}`", &rec[c])))
        };
        records.push(AlertRecord {
            tick: int(0)?,
            stream: int(1)?,
            residual: parse_cell(path, line, &rec[2])?,
            centered_abs: parse_cell(path, line, &rec[3])?,
            threshold: parse_cell(path, line, &rec[4])?,
        });
    }
    AlertMatrix::from_records(records, streams, ticks, start_tick)
}

/// Writes rows under a fixed header.
pub fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = create(path)?;
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.into_iter().collect();
        if cells.len() != header.len() {
            return Err(Error::Dimension(format!(
                "row of {} cells under a {}-column header",
                cells.len(),
                header.len()
            )));
        }
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

const CONFIG_KEYS: [&str; 8] = [
    "lambda",
    "lambda_mu",
    "lambda_sigma",
    "eta",
    "control_limit",
    "reg_guard",
    "var_fraction",
    "warmup_len",
];

/// Parses flat `key = value` lines over the defaults. `#` starts a comment;
/// unknown and repeated keys are errors.
pub fn parse_config(text: &str, origin: &Path) -> Result<DetectorConfig> {
    let mut cfg = DetectorConfig::default();
    let mut seen = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| parse_err(origin, line, format!("expected `key = value`, got `{body}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !CONFIG_KEYS.contains(&key) {
            return Err(parse_err(
                origin,
                line,
                format!("unknown key `{key}` (known: {})", CONFIG_KEYS.join(", ")),
            ));
        }
        if seen.contains(&key) {
            return Err(parse_err(origin, line, format!("`{key}` given twice")));
        }
        seen.push(key);
        if key == "warmup_len" {
            cfg.warmup_len = value
                .parse()
                .map_err(|_| parse_err(origin, line, format!("`{value}` is not a tick count")))?;
            continue;
        }
        let v: f64 = value
            .parse()
            .map_err(|_| parse_err(origin, line, format!("`{value}` is not a number")))?;
        match key {
            "lambda" => cfg.lambda = v,
            "lambda_mu" => cfg.lambda_mu = v,
            "lambda_sigma" => cfg.lambda_sigma = v,
            "eta" => cfg.eta = v,
            "control_limit" => cfg.control_limit = v,
            "reg_guard" => cfg.reg_guard = v,
            "var_fraction" => cfg.var_fraction = v,
            _ => unreachable!(),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<DetectorConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| parse_err(path, 0, e.to_string()))?;
    parse_config(&text, path)
}

/// The config as `key = value` lines, readable by [`parse_config`].
pub fn format_config(cfg: &DetectorConfig) -> String {
    format!(
        "lambda = {}\nlambda_mu = {}\nlambda_sigma = {}\neta = {}\ncontrol_limit = {}\nreg_guard = {}\nvar_fraction = {}\nwarmup_len = {}\n",
        cfg.lambda,
        cfg.lambda_mu,
        cfg.lambda_sigma,
        cfg.eta,
        cfg.control_limit,
        cfg.reg_guard,
        cfg.var_fraction,
        cfg.warmup_len
    )
}

/// Reproducibility record written next to every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub version: String,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl RunManifest {
    pub fn new(subcommand: &str, config: serde_json::Value, seed: Option<u64>) -> Self {
        RunManifest {
            subcommand: subcommand.into(),
            config,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    /// Writes `manifest.json` into `dir`, replacing any previous one.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Degenerate(e.to_string()))?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}
