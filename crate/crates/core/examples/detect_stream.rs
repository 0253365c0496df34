//! Runs the streaming detector on a synthetic dataset, scores it and shows
//! how a checkpoint lets the run continue later.

use sparse_telescope::detector::{run_from_state, run_stream, DetectorConfig, DetectorState};
use sparse_telescope::evalkit::evaluate;
use sparse_telescope::synthgen::SyntheticPreset;

fn main() -> sparse_telescope::Result<()> {
    let ds = SyntheticPreset::default().generate(1)?;
    let x = ds.data.values();
    let config = DetectorConfig {
        control_limit: 7.0,
        ..DetectorConfig::default()
    };

    let out = run_stream(x, &config)?;
    let report = evaluate(&out.alerts, &ds.mask)?;
    println!("k = {}, {} alerts", out.k, out.alerts.len());
    println!(
        "rows  tpr {:.3} fpr {:.4}\nindiv tpr {:.3} fpr {:.5}  f1 {:.3}",
        report.tpr_rows, report.fpr_rows, report.tpr_indiv, report.fpr_indiv, report.f1
    );
    for a in out.alerts.records.iter().take(5) {
        println!(
            "  tick {} stream {}: |r - nu| = {:.2} > {:.2}",
            a.tick, a.stream, a.centered_abs, a.threshold
        );
    }

    // stop halfway, save, restore, finish
    let half = x.columns(0, 18_000).clone_owned();
    let first = run_stream(&half, &config)?;
    let saved = first.state.to_checkpoint();
    let resumed = run_from_state(x, DetectorState::from_checkpoint(&saved)?, &config, false)?;
    assert_eq!(first.alerts.len() + resumed.alerts.len(), out.alerts.len());
    println!("checkpoint of {} bytes; resumed run matches", saved.len());
    Ok(())
}
