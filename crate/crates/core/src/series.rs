//! Multi-stream observation matrices and ground-truth masks.

use nalgebra::{DMatrix, DVectorView};

use crate::error::{Error, Result};

/// A p x T matrix of per-stream observations. Column `t` holds the p-vector
/// observed at tick `t`, so each tick is contiguous in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMatrix {
    values: DMatrix<f64>,
    names: Vec<String>,
}

impl SeriesMatrix {
    /// Wraps a p x T matrix with default stream names `port_0..port_{p-1}`.
    pub fn new(values: DMatrix<f64>) -> Self {
        let names = (0..values.nrows()).map(|i| format!("port_{i}")).collect();
        SeriesMatrix { values, names }
    }

    pub fn with_names(values: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        if names.len() != values.nrows() {
            return Err(Error::Dimension(format!(
                "{} stream names for {} streams",
                names.len(),
                values.nrows()
            )));
        }
        Ok(SeriesMatrix { values, names })
    }

    pub fn streams(&self) -> usize {
        self.values.nrows()
    }

    pub fn ticks(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tick(&self, t: usize) -> DVectorView<'_, f64> {
        self.values.column(t)
    }

    /// Columns `[start, end)` as a new matrix.
    pub fn window(&self, start: usize, end: usize) -> DMatrix<f64> {
        self.values.columns(start, end - start).clone_owned()
    }

    /// Keeps only the listed streams, in the given order.
    pub fn select_streams(&self, streams: &[usize]) -> SeriesMatrix {
        let values = self.values.select_rows(streams.iter());
        let names = streams.iter().map(|&i| self.names[i].clone()).collect();
        SeriesMatrix { values, names }
    }
}

/// Boolean p x T ground truth of injected anomalies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnomalyMask {
    streams: usize,
    ticks: usize,
    cells: Vec<bool>,
}

impl AnomalyMask {
    pub fn empty(streams: usize, ticks: usize) -> Self {
        AnomalyMask {
            streams,
            ticks,
            cells: vec![false; streams * ticks],
        }
    }

    pub fn streams(&self) -> usize {
        self.streams
    }

    pub fn ticks(&self) -> usize {
        self.ticks
    }

    #[inline]
    pub fn get(&self, stream: usize, tick: usize) -> bool {
        self.cells[tick * self.streams + stream]
    }

    pub fn set(&mut self, stream: usize, tick: usize, value: bool) {
        self.cells[tick * self.streams + stream] = value;
    }

    /// True when any stream is anomalous at `tick`.
    pub fn any_at(&self, tick: usize) -> bool {
        self.cells[tick * self.streams..(tick + 1) * self.streams]
            .iter()
            .any(|&c| c)
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }
}
