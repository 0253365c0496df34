//! Exact support recovery by thresholding, across amplitudes around the
//! recovery boundary.

use sparse_telescope::theory::{phase_transition_experiment, recovery_boundary, PhaseConfig};

fn main() -> sparse_telescope::Result<()> {
    let cfg = PhaseConfig {
        p_list: vec![1000, 5000],
        ..PhaseConfig::default()
    };
    println!("boundary g(beta = {}) = {}", cfg.beta, recovery_boundary(cfg.beta)?);
    for c in phase_transition_experiment(&cfg)? {
        println!(
            "p {:>5}  r {:>7.4}  rate {:.3} +/- {:.3}",
            c.p,
            c.r,
            c.exact_recovery_rate,
            c.std_error()
        );
    }
    Ok(())
}
