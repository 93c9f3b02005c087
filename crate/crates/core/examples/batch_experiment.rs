//! Runs all five experiment groups over a shared encounter set and prints
//! the comparison tables.
//!
//! cargo run --release --example batch_experiment -- [count] [seed]

use std::time::Instant;

use daa_waitmap::encounters::sample_batch;
use daa_waitmap::mdp::{IntruderMotionModel, MdpConfig, StateGrid, WaitMap};
use daa_waitmap::sim::{run_batch, BatchReport, Group, SimConfig};

fn main() -> daa_waitmap::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map_or(200, |s| s.parse().expect("count"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let t0 = Instant::now();
    let map = WaitMap::build(StateGrid::default(), IntruderMotionModel::default(), MdpConfig::default())?;
    eprintln!("map built in {:.1?}", t0.elapsed());

    let specs = sample_batch(count, seed);
    let mut runs = Vec::new();
    for group in Group::ALL {
        let t = Instant::now();
        runs.push(run_batch(&specs, &SimConfig::for_group(group), Some(&map))?);
        eprintln!("{group}: {:.1?}", t.elapsed());
    }
    let report = BatchReport::new(&specs, &runs)?;
    report.check_consistency()?;
    for (name, text) in report.tables(Group::B2)? {
        println!("== {name}\n{text}");
    }
    println!("group  lowc_enc  p_lowc     p_nmac  mean_pi  max_pi  exact  axis  other  fallback  withheld  late");
    for g in &report.groups {
        let f = |v: Option<f64>| v.map_or("-".into(), |x| format!("{x:.2}"));
        println!(
            "{:<6} {:>8}  {:.3e}  {:.1e}  {:>7.3}  {:>6.3}  {:>5}  {:>4}  {:>5}  {:>8}  {:>8}  {:>4}",
            g.group.name(),
            g.lowc_encounters,
            g.p_lowc,
            g.p_nmac,
            g.mean_pi,
            g.max_pi,
            f(g.blend_exact_fraction),
            f(g.blend_axis_fraction),
            f(g.blend_unmatched_fraction),
            f(g.blend_fallback_fraction),
            g.pilot_withheld,
            g.commands_late,
        );
    }
    Ok(())
}
