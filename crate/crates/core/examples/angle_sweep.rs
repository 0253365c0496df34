//! How far incremental PCA drifts from the true trend subspace for each
//! step size, against a batch fit of the whole series.

use sparse_telescope::subspace::{angle_sweep, AngleSweepConfig};

fn main() -> sparse_telescope::Result<()> {
    let cfg = AngleSweepConfig {
        replications: 3,
        ..AngleSweepConfig::default()
    };
    let rows = angle_sweep(&cfg)?;
    println!("{:>10}  {:>8}", "eta", "angle");
    for r in &rows {
        let bar = "#".repeat((r.mean_angle * 40.0) as usize);
        println!("{:>10.1e}  {:>8.4}  {bar}", r.eta, r.mean_angle);
    }
    println!("batch PCA: {:.4}", rows[0].batch_angle);
    Ok(())
}
