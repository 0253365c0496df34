pub mod baseline;
pub mod cli;
pub mod detector;
pub mod error;
pub mod evalkit;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod series;
pub mod stats;
pub mod subspace;
pub mod synthgen;
pub mod theory;

pub use error::{Error, Result};
pub use series::{AnomalyMask, SeriesMatrix};
