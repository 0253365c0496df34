//! Loads a counts CSV the way the detector sees real traffic: log(1+x),
//! the busiest ports only, missing cells kept as NaN.
//!
//! cargo run --example ingest_csv -- [path]

use std::path::PathBuf;

use sparse_telescope::io::{load_timeseries_csv, IngestOptions};

fn main() -> sparse_telescope::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let p = std::env::temp_dir().join("sparse_telescope_counts.csv");
            std::fs::write(
                &p,
                "t,port_22,port_23,port_80,port_445\n0,120,900,40,5\n1,131,,38,7\n2,118,870,NaN,6\n3,125,910,44,300\n",
            )?;
            p
        }
    };
    let opts = IngestOptions {
        log_transform: true,
        top_k: Some(3),
        ..IngestOptions::default()
    };
    let series = load_timeseries_csv(&path, &opts)?;
    println!("kept {:?}", series.names());
    for t in 0..series.ticks() {
        let row: Vec<String> = series.tick(t).iter().map(|v| format!("{v:.3}")).collect();
        println!("  t {t}: {}", row.join("  "));
    }
    Ok(())
}
