//! Grid search over the detector's parameters for one (snr, duration) cell.
//! The full grid takes several minutes; this uses a reduced one.

use sparse_telescope::detector::DetectorConfig;
use sparse_telescope::evalkit::{tune_cell, Grids, TUNING_CONTROL_LIMITS};
use sparse_telescope::synthgen::{SyntheticPreset, TICKS_PER_HOUR};

fn main() -> sparse_telescope::Result<()> {
    let preset = SyntheticPreset {
        snr: 7.0,
        duration_ticks: 6 * TICKS_PER_HOUR,
        ..SyntheticPreset::default()
    };
    let data = (0..3).map(|s| preset.generate(s)).collect::<sparse_telescope::Result<Vec<_>>>()?;
    let refs: Vec<_> = data.iter().collect();
    let grids = Grids {
        lambda: vec![1e-2, 1e-4],
        lambda_mu: vec![1e-2, 1e-3],
        lambda_sigma: vec![1e-4],
        control_limit: TUNING_CONTROL_LIMITS.to_vec(),
        reg_guard: vec![3.0, 4.0],
    };
    let (rec, scores) = tune_cell(&refs, &grids, &DetectorConfig::default())?;
    for s in &scores {
        println!(
            "lambda {:e} lambda_mu {:e} R {}: auc {:.5}",
            s.config.lambda, s.config.lambda_mu, s.config.reg_guard, s.roc.auc
        );
    }
    println!(
        "chosen: L {} R {} lambda {:e} lambda_mu {:e} lambda_sigma {:e} (auc {:.5}, f1 {:.3})",
        rec.control_limit, rec.reg_guard, rec.lambda, rec.lambda_mu, rec.lambda_sigma, rec.auc, rec.f1
    );
    Ok(())
}
