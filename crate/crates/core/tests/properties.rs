mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use sparse_telescope::detector::{ewma, run_stream, AlertMatrix, AlertRecord, DetectorState};
use sparse_telescope::evalkit::score_roc;
use sparse_telescope::io;
use sparse_telescope::stats::{chi2_cdf, chi2_quantile};
use sparse_telescope::subspace::{ipca_update, largest_principal_angle, principal_angles, projector_distance};
use sparse_telescope::AnomalyMask;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn residual_is_orthogonal_and_projection_idempotent((p, k, seed) in subspace_inputs()) {
        projection_case(p, k, seed)?;
    }

    #[test]
    fn ipca_keeps_basis_orthonormal((p, k, seed) in subspace_inputs(), eta in 0.0f64..1.0) {
        let mut est = estimate(p, k, seed);
        let xs = gaussian(p, 20, seed ^ 3) * 10.0;
        let mean = DVector::zeros(p);
        for t in 0..xs.ncols() {
            est = ipca_update(&est, &xs.column(t).into_owned(), &mean, eta).unwrap();
        }
        let b = est.basis();
        let gram = b.transpose() * b;
        prop_assert!((gram - DMatrix::identity(k, k)).amax() < 1e-9);
    }

    #[test]
    fn projector_distance_is_sine_of_largest_angle(p in 2usize..10, k in 1usize..4, s1 in any::<u64>(), s2 in any::<u64>()) {
        prop_assume!(k <= p);
        let a = random_basis(p, k, s1);
        let b = random_basis(p, k, s2);
        let theta = largest_principal_angle(&a, &b).unwrap();
        prop_assert!((0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&theta));
        let d = projector_distance(&a, &b).unwrap();
        prop_assert!((d - theta.sin()).abs() < 1e-9, "{} vs {}", d, theta.sin());
        let sym = largest_principal_angle(&b, &a).unwrap();
        prop_assert!((theta - sym).abs() < 1e-9);
        let angles = principal_angles(&a, &b).unwrap();
        prop_assert!(angles.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        prop_assert!(largest_principal_angle(&a, &a).unwrap() < 1e-6);
    }

    #[test]
    fn ewma_stays_between_old_and_new(old in -1e6f64..1e6, obs in -1e6f64..1e6, lambda in 0.0f64..=1.0) {
        let v = ewma(old, obs, lambda);
        prop_assert!(v >= old.min(obs) - 1e-9 && v <= old.max(obs) + 1e-9);
    }

    #[test]
    fn roc_auc_ignores_order_and_duplicates((pts, seed) in roc_inputs()) {
        auc_permutation_case(&pts, seed)?;
    }

    #[test]
    fn score_roc_is_rank_based(scores in prop::collection::vec(-100.0f64..100.0, 2..60), labels_seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(labels_seed);
        let mut labels: Vec<bool> = scores.iter().map(|_| rand::Rng::random_bool(&mut rng, 0.5)).collect();
        labels[0] = true;
        labels[1] = false;
        let a = score_roc(&scores, &labels).unwrap();
        let squashed: Vec<f64> = scores.iter().map(|s| (s / 10.0).tanh() * 3.0 + 7.0).collect();
        let b = score_roc(&squashed, &labels).unwrap();
        prop_assert!((a.auc - b.auc).abs() < 1e-12);
        let flipped: Vec<f64> = scores.iter().map(|s| -s).collect();
        let c = score_roc(&flipped, &labels).unwrap();
        // ties contribute one half either way
        prop_assert!((a.auc + c.auc - 1.0).abs() < 1e-9);
    }

    #[test]
    fn chi2_quantile_inverts_cdf(dof in 1usize..200, prob in 0.001f64..0.999) {
        let q = chi2_quantile(dof, prob).unwrap();
        prop_assert!((chi2_cdf(dof, q) - prob).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn residual_variance_stays_positive((p, seed, scale, constant) in variance_inputs()) {
        variance_positive_case(p, seed, scale, constant)?;
    }

    #[test]
    fn detector_runs_are_deterministic((p, seed) in determinism_inputs()) {
        determinism_case(p, seed)?;
    }

    #[test]
    fn checkpoint_round_trip_is_exact(p in 2usize..8, seed in any::<u64>()) {
        let x = gaussian(p, 50, seed);
        let out = run_stream(&x, &small_config(30)).unwrap();
        let back = DetectorState::from_checkpoint(&out.state.to_checkpoint()).unwrap();
        prop_assert_eq!(back, out.state);
    }

    #[test]
    fn timeseries_csv_round_trip_is_bit_exact((values, p) in csv_inputs()) {
        csv_round_trip_case(&values, p)?;
    }

    #[test]
    fn alerts_and_mask_csv_round_trip(cells in prop::collection::btree_set((0usize..6, 0usize..40), 0..50), start in 0usize..20) {
        let (p, t) = (6, 60);
        let records: Vec<AlertRecord> = cells
            .iter()
            .map(|&(s, k)| AlertRecord {
                tick: start + k,
                stream: s,
                residual: (s as f64 - 2.5) / 3.0,
                centered_abs: k as f64 / 7.0,
                threshold: 0.1 + s as f64,
            })
            .collect();
        let mut records = records;
        records.sort_by_key(|r| (r.tick, r.stream));
        let alerts = AlertMatrix::from_records(records, p, t, start).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        io::write_alerts_csv(&path, &alerts).unwrap();
        let back = io::read_alerts_csv(&path, p, t, start).unwrap();
        prop_assert_eq!(&back, &alerts);

        let mut mask = AnomalyMask::empty(p, t);
        for &(s, k) in &cells {
            mask.set(s, start + k, true);
        }
        let mpath = dir.path().join("m.csv");
        io::write_mask_csv(&mpath, &mask).unwrap();
        prop_assert_eq!(io::read_mask_csv(&mpath).unwrap(), mask);
    }
}
