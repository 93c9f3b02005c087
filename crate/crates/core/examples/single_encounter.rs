//! Flies one encounter under a baseline and an integrated group and prints
//! what each step was decided by.
//!
//! cargo run --release --example single_encounter -- [encounter_seed] [trace.csv]

use daa_waitmap::encounters::sample_spec;
use daa_waitmap::mdp::{IntruderMotionModel, MdpConfig, StateGrid, WaitMap};
use daa_waitmap::sim::{run_encounter, Group, SimConfig, StepRecord};

fn describe(r: &StepRecord) -> String {
    let mode = r.mode.map_or("route".to_string(), |m| format!("{m:?}"));
    let heading = r.command.target_heading.map(|h| format!(" hdg {:.0}", h.to_degrees())).unwrap_or_default();
    let vz = r.command.target_vz.filter(|v| *v != 0.0).map(|v| format!(" vz {v:+.1}")).unwrap_or_default();
    format!("{mode}{heading}{vz}")
}

fn main() -> daa_waitmap::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(35, |s| s.parse().expect("encounter seed"));
    let trace = args.next();

    let map = WaitMap::build(StateGrid::default(), IntruderMotionModel::default(), MdpConfig::default())?;
    let spec = sample_spec(seed);
    println!("{spec:?}");

    for group in [Group::B2, Group::ID2] {
        let log = run_encounter(&spec, &SimConfig::for_group(group), Some(&map))?;
        let s = &log.summary;
        println!(
            "\n{group}: {} conflict steps, {} waits, {} DAA, {} pilot, {} blended, {} LoWC steps",
            s.conflict_steps,
            s.wait_steps,
            s.no_wait_steps + s.exec_daa_override,
            s.exec_pilot,
            s.exec_blended,
            s.lowc_steps
        );
        // print only where the decision changes
        let mut last = String::new();
        for r in log.records.iter().filter(|r| r.conflict || r.lowc) {
            let now = describe(r);
            if now != last {
                let (h_ft, v_ft) = r.separation_ft();
                println!("  t {:>5.0}  {now:<28} sep {h_ft:>6.0} ft / {v_ft:>4.0} ft", r.t);
                last = now;
            }
        }
        if let (Some(path), Group::ID2) = (&trace, group) {
            let file = std::fs::File::create(path).expect("trace file");
            log.write_trace(std::io::BufWriter::new(file))?;
            println!("trace written to {path}");
        }
    }
    Ok(())
}
