//! Walks the allocation agent through one geometry: the wait decision with
//! no pilot command in hand, then what happens to a safe and to an unsafe
//! delayed pilot command.
//!
//! cargo run --release --example allocation_agent

use std::f64::consts::PI;

use daa_waitmap::actors::{daa_resolve, DaaModel};
use daa_waitmap::agent::{
    allocate, safety_metric, wait_decision, AgentConfig, CommandSource, Direction, ManeuverCommand, Scene,
};
use daa_waitmap::geometry::{AircraftState, OwnshipCommand, Performance, SeparationThresholds};
use daa_waitmap::mdp::{IntruderMotionModel, MdpConfig, StateGrid, WaitMap};

fn main() -> daa_waitmap::Result<()> {
    let map = WaitMap::build(StateGrid::default(), IntruderMotionModel::default(), MdpConfig::default())?;
    let cfg = AgentConfig::default();
    let route = OwnshipCommand::new(55.0, 0.0, 0.0);
    let candidates = DaaModel::default().candidates(&route);
    let maintain = ManeuverCommand::maintain(&route);

    // a faster intruder catching up from behind and above, descending
    for above in [400.0, 200.0, 130.0] {
        let scene = Scene {
            own: AircraftState::new(0.0, 0.0, 1000.0, 55.0, 0.0, 0.0, 0.0),
            intr: AircraftState::new(-1400.0, 300.0, 1000.0 + above, 80.0, 0.0, -3.0, 0.0),
            route,
            thresholds: SeparationThresholds::default(),
            performance: Performance::default(),
        };
        let (choice, wait) = wait_decision(&map, &scene.relative(), &scene, &route, &cfg)?;
        let u_daa = daa_resolve(&scene, &candidates, cfg.sm_horizon_s)?;
        println!("{above:>3.0} m above: {choice:?} (map wait {wait:.1} s), DAA would fly {:?}", u_daa.direction);

        let no_cmd = allocate(None, &maintain, &u_daa, &candidates, || Ok((choice, wait)), &scene, &cfg)?;
        println!("  no pilot command  -> {:?}", no_cmd.mode);

        for (label, heading) in [("left 45", PI / 4.0), ("right 15", -PI / 12.0)] {
            let dir = if heading > 0.0 { Direction::Left } else { Direction::Right };
            let u_p = ManeuverCommand::turn(dir, heading.rem_euclid(2.0 * PI), CommandSource::Pilot);
            let sm = safety_metric(&u_p, &scene, cfg.sm_horizon_s);
            let d = allocate(Some(&u_p), &maintain, &u_daa, &candidates, || Ok((choice, wait)), &scene, &cfg)?;
            println!(
                "  pilot {label:<8} (SM {sm:+.2}) -> {:?}, flies {:?} {:?}",
                d.mode,
                d.command.direction,
                d.command.target_heading.map(|h| h.to_degrees().round())
            );
        }
    }
    Ok(())
}
