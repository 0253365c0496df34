//! Distance between the residual of the estimated subspace and that of the
//! true one on anomalous ticks, next to the resilience bound.

use sparse_telescope::theory::{residual_fidelity_experiment, FidelityConfig};

fn main() -> sparse_telescope::Result<()> {
    for n in [360, 1440, 10_080] {
        let cfg = FidelityConfig {
            p_list: vec![100, 200],
            n,
            ..FidelityConfig::default()
        };
        for r in residual_fidelity_experiment(&cfg)? {
            println!(
                "n {:>6} p {:>4}: gap {:>8.3} (shift^2 {:>9.1}) bound {:.3e}",
                n, r.p, r.gap, r.amplitude_sq, r.bound
            );
        }
    }
    Ok(())
}
