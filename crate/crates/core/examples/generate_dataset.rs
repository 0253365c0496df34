//! Simulates the default five-week synthetic telescope and writes it out.
//!
//! cargo run --example generate_dataset -- [out_dir] [seed]

use std::path::PathBuf;

use sparse_telescope::io;
use sparse_telescope::synthgen::SyntheticPreset;

fn main() -> sparse_telescope::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| ".".into()));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));

    let ds = SyntheticPreset::default().generate(seed)?;
    println!(
        "{} streams x {} ticks, anomaly on {:?} from tick {} for {} ticks",
        ds.data.streams(),
        ds.data.ticks(),
        ds.spec.streams,
        ds.spec.start_tick,
        ds.spec.duration_ticks
    );
    for (s, u) in ds.spec.streams.iter().zip(&ds.shifts) {
        println!("  stream {s}: shift {u:.3}");
    }
    io::write_timeseries_csv(&dir.join("data.csv"), &ds.data, 0)?;
    io::write_mask_csv(&dir.join("mask.csv"), &ds.mask)?;
    println!("wrote {}/data.csv and mask.csv", dir.display());
    Ok(())
}
