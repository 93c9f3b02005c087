//! Samples an encounter set, shows the spread of its parameters and the
//! closest approach of a few trajectories, then writes it as CSV.
//!
//! cargo run --example encounter_set -- [count] [seed] [out.csv]

use daa_waitmap::encounters::{build_trajectories, sample_batch, save_specs};
use daa_waitmap::geometry::{SeparationThresholds, Separation};

fn main() -> daa_waitmap::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map_or(1000, |s| s.parse().expect("count"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));
    let out = args.next();

    let specs = sample_batch(count, seed);
    let range = |f: &dyn Fn(&daa_waitmap::encounters::EncounterSpec) -> f64| {
        specs.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    println!("{count} encounters from seed {seed}");
    for (name, (lo, hi)) in [
        ("intruder speed m/s", range(&|s| s.intruder_speed)),
        ("intruder climb m/s", range(&|s| s.intruder_vz)),
        ("incident angle deg", range(&|s| s.ia_deg)),
        ("miss distance m", range(&|s| s.hmd_target)),
        ("vertical miss m", range(&|s| s.vmd_target)),
        ("turn rate deg/s", range(&|s| s.turn_rate_dps)),
    ] {
        println!("  {name:<20} {lo:>9.2} .. {hi:>8.2}");
    }

    let th = SeparationThresholds::default();
    println!("closest approach without any avoidance:");
    for spec in specs.iter().take(5) {
        let plan = build_trajectories(spec, 240.0)?;
        let (t, sep) = (0..=240)
            .map(|t| {
                let t = t as f64;
                (t, Separation::between(&plan.ownship_at(t), &plan.intruder_at(t), &th))
            })
            .min_by(|a, b| a.1.range.total_cmp(&b.1.range))
            .expect("non-empty");
        println!(
            "  seed {:>4}: {:>6.0} m apart, {:>5.0} m vertically at t = {t:.0} s",
            spec.seed, sep.range, sep.dh
        );
    }

    if let Some(path) = out {
        save_specs(&path, &specs)?;
        println!("wrote {path}");
    }
    Ok(())
}
