//! Invariants shared by the property suite and the acceptance run.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use sparse_telescope::detector::{run_stream, Detector, DetectorConfig, VARIANCE_FLOOR};
use sparse_telescope::evalkit::roc_auc;
use sparse_telescope::io::{self, IngestOptions};
use sparse_telescope::linalg::orthonormalize;
use sparse_telescope::subspace::{project_residual, SubspaceEstimate};
use sparse_telescope::SeriesMatrix;

pub fn gaussian(p: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(p, n, |_, _| StandardNormal.sample(&mut rng))
}

pub fn random_basis(p: usize, k: usize, seed: u64) -> DMatrix<f64> {
    let mut b = gaussian(p, k, seed);
    orthonormalize(&mut b);
    b
}

pub fn estimate(p: usize, k: usize, seed: u64) -> SubspaceEstimate {
    SubspaceEstimate::new(random_basis(p, k, seed), vec![1.0; k]).unwrap()
}

pub fn small_config(warmup: usize) -> DetectorConfig {
    DetectorConfig {
        warmup_len: warmup,
        eta: 1e-3,
        lambda: 1e-2,
        lambda_mu: 1e-2,
        lambda_sigma: 1e-2,
        ..DetectorConfig::default()
    }
}

/// `(p, k, seed)` with `1 <= k < p`.
pub fn subspace_inputs() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..12).prop_flat_map(|p| (Just(p), 1..p.min(4), any::<u64>()))
}

pub fn projection_case(p: usize, k: usize, seed: u64) -> Result<(), TestCaseError> {
    let est = estimate(p, k, seed);
    let x = DVector::from_column_slice(gaussian(p, 1, seed ^ 1).as_slice());
    let mean = DVector::from_column_slice(gaussian(p, 1, seed ^ 2).as_slice());
    let r = project_residual(&x, &mean, &est).unwrap();
    let along = est.basis().transpose() * &r;
    prop_assert!(along.amax() < 1e-10 * (1.0 + x.amax() + mean.amax()));
    let rr = project_residual(&r, &DVector::zeros(p), &est).unwrap();
    prop_assert!((&rr - &r).amax() < 1e-10 * (1.0 + r.amax()));
    prop_assert!(r.norm() <= (&x - &mean).norm() * (1.0 + 1e-12) + 1e-12);
    Ok(())
}

pub fn variance_inputs() -> impl Strategy<Value = (usize, u64, f64, bool)> {
    (2usize..8, any::<u64>(), 1e-3f64..100.0, any::<bool>())
}

pub fn variance_positive_case(p: usize, seed: u64, scale: f64, constant: bool) -> Result<(), TestCaseError> {
    let mut x = gaussian(p, 60, seed) * scale;
    if constant {
        x.row_mut(0).fill(3.0);
    }
    let mut det = Detector::from_warmup(&x.columns(0, 20).clone_owned(), small_config(20)).unwrap();
    for t in 20..60 {
        det.step(x.column(t).as_slice()).unwrap();
        prop_assert!(det
            .state()
            .sigma2_r
            .iter()
            .all(|&v| v >= VARIANCE_FLOOR && v.is_finite()));
    }
    Ok(())
}

pub fn determinism_inputs() -> impl Strategy<Value = (usize, u64)> {
    (2usize..8, any::<u64>())
}

pub fn determinism_case(p: usize, seed: u64) -> Result<(), TestCaseError> {
    let x = gaussian(p, 80, seed);
    let cfg = small_config(30);
    let a = run_stream(&x, &cfg).unwrap();
    let b = run_stream(&x, &cfg).unwrap();
    prop_assert_eq!(a.alerts, b.alerts);
    prop_assert_eq!(a.state, b.state);
    Ok(())
}

pub fn csv_inputs() -> impl Strategy<Value = (Vec<f64>, usize)> {
    (
        prop::collection::vec(
            prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
            1..60,
        ),
        1usize..5,
    )
}

pub fn csv_round_trip_case(values: &[f64], p: usize) -> Result<(), TestCaseError> {
    let n = values.len() / p;
    if n == 0 {
        return Ok(());
    }
    let m = DMatrix::from_column_slice(p, n, &values[..p * n]);
    let series = SeriesMatrix::new(m.clone());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    io::write_timeseries_csv(&path, &series, 0).unwrap();
    let back = io::load_timeseries_csv(&path, &IngestOptions::default()).unwrap();
    prop_assert_eq!(back.names(), series.names());
    for (a, b) in back.values().iter().zip(m.iter()) {
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }
    Ok(())
}

pub fn roc_inputs() -> impl Strategy<Value = (Vec<(f64, f64)>, u64)> {
    (prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..20), any::<u64>())
}

pub fn auc_permutation_case(pts: &[(f64, f64)], seed: u64) -> Result<(), TestCaseError> {
    let a = roc_auc(pts).unwrap();
    let mut shuffled = pts.to_vec();
    shuffled.extend_from_slice(pts);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut rng);
    let b = roc_auc(&shuffled).unwrap();
    prop_assert_eq!(a.auc, b.auc);
    prop_assert!((0.0..=1.0).contains(&a.auc));
    prop_assert!(a.points.windows(2).all(|w| w[0].fpr < w[1].fpr));
    Ok(())
}
