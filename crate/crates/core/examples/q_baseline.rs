//! The chi-square baseline on the same data as the detector, and the
//! rows-level AUC of both at p = 100.

use sparse_telescope::baseline::{fit_q_detector, q_detect_stream};
use sparse_telescope::evalkit::{compare_with_q, QComparisonConfig};
use sparse_telescope::synthgen::SyntheticPreset;

fn main() -> sparse_telescope::Result<()> {
    let preset = SyntheticPreset::default();
    let ds = preset.generate(0)?;
    let x = ds.data.values();
    let warm = preset.warmup_len;
    let q = fit_q_detector(&x.columns(0, warm).clone_owned(), 0.05)?;
    let flags = q_detect_stream(x, &q, warm)?;
    let hits = flags.iter().filter(|&&f| f).count();
    println!(
        "chi2 threshold {:.1} (dof {}, ridge {:e}): {hits} of {} ticks rejected",
        q.threshold,
        q.dof,
        q.ridge,
        flags.len()
    );

    let cfg = QComparisonConfig {
        seeds: vec![0, 1],
        ..QComparisonConfig::default()
    };
    for r in compare_with_q(&cfg)? {
        println!(
            "seed {}: detector AUC {:.4}, Q AUC {:.4}, gap {:+.4}",
            r.seed,
            r.auc_detector,
            r.auc_q,
            r.gap()
        );
    }
    Ok(())
}
