//! Bias and spread of the EWMA variance estimate for independent and
//! short-memory series. Long memory (fGn with H >= 3/4) is refused.

use sparse_telescope::theory::{ewma_variance_consistency_experiment, ConsistencyConfig, CorrelationSpec};

fn main() -> sparse_telescope::Result<()> {
    for correlation in [
        CorrelationSpec::Iid,
        CorrelationSpec::Ar1 { phi: 0.5 },
        CorrelationSpec::Fgn { hurst: 0.6 },
    ] {
        let cfg = ConsistencyConfig {
            correlation,
            replications: 30,
            ..ConsistencyConfig::default()
        };
        println!("{correlation:?}");
        for r in ewma_variance_consistency_experiment(&cfg)? {
            println!("  lambda {:e}: bias {:+.5} variance {:.3e}", r.lambda, r.bias, r.variance);
        }
    }
    let refused = ewma_variance_consistency_experiment(&ConsistencyConfig {
        correlation: CorrelationSpec::Fgn { hurst: 0.9 },
        ..ConsistencyConfig::default()
    });
    println!("H = 0.9: {}", refused.unwrap_err());
    Ok(())
}
