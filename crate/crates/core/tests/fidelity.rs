use sparse_telescope::theory::{residual_fidelity_experiment, FidelityConfig, FidelityRow};

fn rows(n: usize) -> Vec<FidelityRow> {
    (0..10)
        .map(|seed| {
            residual_fidelity_experiment(&FidelityConfig {
                n,
                seed,
                ..FidelityConfig::default()
            })
            .unwrap()
            .remove(0)
        })
        .collect()
}

fn mean_gap(r: &[FidelityRow]) -> f64 {
    r.iter().map(|x| x.gap).sum::<f64>() / r.len() as f64
}

#[test]
fn residual_gap_shrinks_with_fit_length() {
    let short = rows(360);
    let long = rows(10_080);
    let (a, b) = (mean_gap(&short), mean_gap(&long));
    assert!(b < a, "gap {a} at n=360, {b} at n=10080");
}

#[test]
fn residual_gap_is_small_against_the_shift_and_under_the_bound() {
    for r in rows(10_080) {
        assert!(r.gap <= r.bound, "{} > {}", r.gap, r.bound);
        assert!(r.gap / r.amplitude_sq < 0.05, "{} vs {}", r.gap, r.amplitude_sq);
    }
}
