//! Builds the default wait map, prints its wait-time histogram and saves it.
//!
//! cargo run --release --example build_wait_map -- [out.json] [turn_bias_dps]

use std::time::Instant;

use daa_waitmap::mdp::{save_map, IntruderMotionModel, MdpConfig, StateGrid, WaitMap};

fn main() -> daa_waitmap::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next();
    let bias: f64 = args.next().map_or(0.0, |s| s.parse().expect("turn bias in deg/s"));

    let t = Instant::now();
    let model = IntruderMotionModel::default().with_turn_bias(bias);
    let map = WaitMap::build(StateGrid::default(), model, MdpConfig::default())?;
    println!(
        "{} cells solved in {:.1?}: {} sweeps, residual {:.1e}",
        map.grid.normal_cells(),
        t.elapsed(),
        map.metadata.sweeps,
        map.metadata.residual
    );

    let h = map.histogram(5.0);
    println!("wait time min {:.1} s, max {:.1} s, mean {:.2} s", h.min_s, h.max_s, h.mean_s);
    println!("{} cells start in loss of well clear, {} never reach it", h.in_lowc, h.unreachable);
    let widest = *h.counts.iter().max().unwrap_or(&1);
    for (i, &c) in h.counts.iter().enumerate() {
        let lo = i as f64 * h.bin_width_s;
        let bar = "#".repeat(c * 50 / widest.max(1));
        println!("{:>3.0}-{:<3.0} {c:>6} {bar}", lo, lo + h.bin_width_s);
    }

    if let Some(path) = out {
        save_map(&map, &path)?;
        println!("saved to {path}");
    }
    Ok(())
}
