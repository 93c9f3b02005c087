use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{penetration_step, trajectory_deviation};
use super::{SimConfig, WaitSource};
use crate::actors::{daa_resolve, pilot_respond, LatencyChannel};
use crate::agent::{
    allocate, extract_intent, safety_metric, wait_decision, wait_rule, AgentMode, BlendTier, IntentMatch,
    ManeuverCommand, Scene, WaitChoice,
};
use crate::encounters::{build_trajectories, EncounterSpec};
use crate::error::{Error, Result};
use crate::geometry::{AircraftState, RelativeState, Separation, FEET_PER_METER};
use crate::mdp::WaitMap;

/// One simulated instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub own: AircraftState,
    pub intr: AircraftState,
    /// Intruder relative to the ownship, in the ownship heading frame.
    pub rel: RelativeState,
    pub conflict: bool,
    /// `None` outside conflicts, where the route is flown.
    pub mode: Option<AgentMode>,
    pub command: ManeuverCommand,
    pub pilot_in_hand: bool,
    pub wait_lookup_s: Option<f64>,
    pub blend: Option<BlendTier>,
    /// For blended steps, how the flown command relates to the pilot's.
    pub intent_match: Option<IntentMatch>,
    pub separation: Separation,
    pub lowc: bool,
    pub nmac: bool,
}

impl StepRecord {
    /// Horizontal and vertical separation in feet.
    pub fn separation_ft(&self) -> (f64, f64) {
        (
            self.separation.range * FEET_PER_METER,
            self.separation.dh.abs() * FEET_PER_METER,
        )
    }

    /// A DAA command flown while a pilot command was available.
    pub fn is_override(&self) -> bool {
        self.mode == Some(AgentMode::AllocateDaa) && self.pilot_in_hand
    }

    /// Authority handed to the DAA for want of a pilot command.
    pub fn is_no_wait(&self) -> bool {
        self.mode == Some(AgentMode::AllocateDaa) && !self.pilot_in_hand
    }
}

/// Per-encounter tallies. Step counts are conflict steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EncounterSummary {
    pub seed: u64,
    pub steps: usize,
    pub conflict_steps: usize,
    pub wait_steps: usize,
    pub no_wait_steps: usize,
    /// Conflict steps with a pilot command in hand.
    pub reception_steps: usize,
    pub exec_daa_override: usize,
    pub exec_pilot: usize,
    pub exec_blended: usize,
    /// Blended steps by how the flown command matches the pilot's intent.
    pub blend_exact: usize,
    pub blend_axis_only: usize,
    pub blend_unmatched: usize,
    /// Blended steps by the tier that produced them, when no candidate of
    /// the intended axis was safe.
    pub blend_any_safe: usize,
    pub blend_max_margin: usize,
    /// Commands the pilot decided on.
    pub pilot_decisions: usize,
    /// Decisions dropped because the conflict had gone from the pilot's view.
    pub pilot_withheld: usize,
    pub commands_sent: usize,
    /// Commands delivered during a conflict.
    pub commands_received: usize,
    /// Commands delivered after the conflict had cleared.
    pub commands_late: usize,
    pub lowc_steps: usize,
    pub nmac_steps: usize,
    pub penetration_integral: f64,
    pub max_deviation_h_m: f64,
    pub max_deviation_v_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncounterLog {
    pub spec: EncounterSpec,
    pub records: Vec<StepRecord>,
    pub summary: EncounterSummary,
}

pub const TRACE_HEADER: [&str; 30] = [
    "t_s",
    "own_x_m",
    "own_y_m",
    "own_h_m",
    "own_heading_rad",
    "own_vz_mps",
    "intr_x_m",
    "intr_y_m",
    "intr_h_m",
    "intr_heading_rad",
    "intr_vz_mps",
    "rel_dx_m",
    "rel_dy_m",
    "rel_dh_m",
    "conflict",
    "mode",
    "source",
    "target_heading_rad",
    "target_vz_mps",
    "pilot_in_hand",
    "wait_lookup_s",
    "blend_tier",
    "intent_match",
    "range_m",
    "dh_m",
    "hmd_m",
    "tau_mod_s",
    "lowc",
    "nmac",
    "range_rate_mps",
];

fn opt<T: std::fmt::Debug>(v: Option<T>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

impl EncounterLog {
    /// Writes the step trace as CSV with [`TRACE_HEADER`] columns.
    pub fn write_trace<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(TRACE_HEADER)?;
        for r in &self.records {
            let c = &r.command;
            let s = &r.separation;
            w.write_record([
                r.t.to_string(),
                r.own.x.to_string(),
                r.own.y.to_string(),
                r.own.h.to_string(),
                r.own.heading.to_string(),
                r.own.vz.to_string(),
                r.intr.x.to_string(),
                r.intr.y.to_string(),
                r.intr.h.to_string(),
                r.intr.heading.to_string(),
                r.intr.vz.to_string(),
                r.rel.dx.to_string(),
                r.rel.dy.to_string(),
                r.rel.dh.to_string(),
                r.conflict.to_string(),
                opt(r.mode),
                format!("{:?}", c.source),
                c.target_heading.map(|x| x.to_string()).unwrap_or_default(),
                c.target_vz.map(|x| x.to_string()).unwrap_or_default(),
                r.pilot_in_hand.to_string(),
                r.wait_lookup_s.map(|x| x.to_string()).unwrap_or_default(),
                opt(r.blend),
                opt(r.intent_match),
                s.range.to_string(),
                s.dh.to_string(),
                s.hmd.to_string(),
                s.tau_mod.to_string(),
                r.lowc.to_string(),
                r.nmac.to_string(),
                s.range_rate.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("trace", e))?;
        Ok(())
    }
}

/// Independent random stream `stream` of one encounter. Identical across
/// groups, so every group sees the same link delays and pilot reactions.
fn stream(run_seed: u64, spec_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed ^ spec_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(stream);
    rng
}

enum Pilot {
    Idle,
    Deciding { command: ManeuverCommand, issue_at: f64 },
    Done,
}

/// Simulates one encounter from t = 0 to T in `dt` steps.
///
/// Each step the true picture is sent down to the pilot; the pilot, on
/// seeing a conflict, picks a maneuver and sends it up after a reaction
/// delay unless the conflict has vanished from view by then. While a
/// conflict is active, baseline groups fly the pilot command when it is
/// safe and the DAA resolution otherwise; integrated groups defer to the
/// allocation agent. Outside conflicts the route is flown.
pub fn run_encounter(spec: &EncounterSpec, cfg: &SimConfig, map: Option<&WaitMap>) -> Result<EncounterLog> {
    cfg.validate()?;
    let map = match (cfg.wait_source, map) {
        (WaitSource::Map, None) => return Err(Error::MissingMap(cfg.group.name().into())),
        (_, m) => m,
    };
    let p = &cfg.params;
    let th = &p.thresholds;
    let plan = build_trajectories(spec, p.total_time_s)?;
    let route = plan.route;
    let candidates = p.daa.candidates(&route);
    let n = p.agent.projection_horizon_s;
    let mut uplink = LatencyChannel::new(cfg.latency, stream(p.seed, spec.seed, 1));
    let mut downlink = LatencyChannel::new(cfg.latency, stream(p.seed, spec.seed, 2));
    let mut pilot_rng = stream(p.seed, spec.seed, 3);

    let steps = p.steps();
    let mut records = Vec::with_capacity(steps + 1);
    let mut sum = EncounterSummary {
        seed: spec.seed,
        steps: steps + 1,
        ..Default::default()
    };
    let mut own = plan.ownship;
    let mut last = ManeuverCommand::maintain(&route);
    let mut view: Option<(f64, Scene)> = None;
    let mut pilot = Pilot::Idle;
    let mut in_hand: Option<ManeuverCommand> = None;

    for k in 0..=steps {
        let t = k as f64 * p.dt_s;
        let intr = plan.intruder_at(t);
        let seen = if p.observe_turn_rate {
            intr
        } else {
            AircraftState { turn_rate: 0.0, ..intr }
        };
        let scene = Scene {
            own,
            intr: seen,
            route,
            thresholds: *th,
            performance: p.performance,
        };
        let separation = Separation::between(&own, &intr, th);
        let lowc = separation.is_lowc(th);
        let conflict = lowc || scene.projected_lowc(&route, p.alert_horizon_s).is_some();

        uplink.send((t, scene), t);
        if let Some(latest) = uplink.poll(t).pop() {
            view = Some(latest);
        }
        let sees_conflict = view.as_ref().is_some_and(|(_, v)| p.pilot.perceives_conflict(v));
        pilot = match pilot {
            Pilot::Idle if sees_conflict => {
                let (stamp, v) = view.as_ref().expect("conflict seen in a view");
                let judged = if p.pilot.anticipate_latency {
                    let lead = t - stamp + p.pilot.reaction_mean_s + cfg.latency.nominal();
                    v.advanced(lead.round() as usize)
                } else {
                    *v
                };
                let (command, issue_at) = pilot_respond(&judged, t, &p.pilot, &candidates, &mut pilot_rng)?;
                sum.pilot_decisions += 1;
                Pilot::Deciding { command, issue_at }
            }
            Pilot::Deciding { command, issue_at } if issue_at <= t => {
                if sees_conflict {
                    downlink.send(command, issue_at);
                    sum.commands_sent += 1;
                } else {
                    sum.pilot_withheld += 1;
                }
                Pilot::Done
            }
            Pilot::Done => {
                let route_clear = view
                    .as_ref()
                    .is_some_and(|(_, v)| v.projected_lowc(&route, p.pilot.lookahead_s).is_none());
                if route_clear && !sees_conflict {
                    Pilot::Idle
                } else {
                    Pilot::Done
                }
            }
            other => other,
        };

        for cmd in downlink.poll(t) {
            if conflict {
                in_hand = Some(cmd);
                sum.commands_received += 1;
            } else {
                sum.commands_late += 1;
            }
        }
        if !conflict {
            in_hand = None;
        }

        let mut wait_lookup = None;
        let mut blend = None;
        let mut intent_match = None;
        let (mode, command) = if !conflict {
            (None, ManeuverCommand::maintain(&route))
        } else {
            sum.conflict_steps += 1;
            let u_daa = daa_resolve(&scene, &candidates, n)?;
            match cfg.wait_source {
                WaitSource::None => match in_hand {
                    Some(u_p) if safety_metric(&u_p, &scene, p.agent.sm_horizon_s) > 0.0 => {
                        (Some(AgentMode::ExecutePilot), u_p)
                    }
                    _ => (Some(AgentMode::AllocateDaa), u_daa),
                },
                source => {
                    let maintain = last.to_ownship(&route);
                    let wait = || match source {
                        WaitSource::Map => wait_decision(
                            map.expect("checked above"),
                            &scene.relative(),
                            &scene,
                            &maintain,
                            &p.agent,
                        ),
                        WaitSource::Constant { seconds } => {
                            let projected = scene.projected_lowc(&maintain, n);
                            Ok((wait_rule(seconds, projected, &p.agent), seconds))
                        }
                        WaitSource::None => Ok((WaitChoice::NoWait, 0.0)),
                    };
                    let d = allocate(in_hand.as_ref(), &last, &u_daa, &candidates, wait, &scene, &p.agent)?;
                    if in_hand.is_none() {
                        wait_lookup = Some(d.wait_remaining_s);
                    }
                    blend = d.blend;
                    if d.mode == AgentMode::ExecuteBlended {
                        let intent = extract_intent(&in_hand.expect("blending needs a pilot command"))?;
                        intent_match = Some(intent.match_of(&d.command));
                    }
                    (Some(d.mode), d.command)
                }
            }
        };

        let record = StepRecord {
            t,
            own,
            intr,
            rel: scene.relative(),
            conflict,
            mode,
            command,
            pilot_in_hand: in_hand.is_some(),
            wait_lookup_s: wait_lookup,
            blend,
            intent_match,
            separation,
            lowc,
            nmac: separation.is_nmac(th),
        };
        tally(&mut sum, &record, p.dt_s);
        records.push(record);

        if k < steps {
            own = p.performance.track(&own, &command.to_ownship(&route), p.dt_s);
            last = command;
        }
    }

    let (dev_h, dev_v) = trajectory_deviation(records.iter().map(|r| &r.own), &plan.ownship, &route);
    sum.max_deviation_h_m = dev_h;
    sum.max_deviation_v_m = dev_v;
    Ok(EncounterLog {
        spec: *spec,
        records,
        summary: sum,
    })
}

fn tally(sum: &mut EncounterSummary, r: &StepRecord, dt: f64) {
    if r.lowc {
        sum.lowc_steps += 1;
        let s = &r.separation;
        sum.penetration_integral += penetration_step(s.hmd, s.dh, s.tau_mod, dt);
    }
    if r.nmac {
        sum.nmac_steps += 1;
    }
    if r.pilot_in_hand {
        sum.reception_steps += 1;
    }
    match r.mode {
        Some(AgentMode::Wait) => sum.wait_steps += 1,
        Some(AgentMode::AllocateDaa) if r.pilot_in_hand => sum.exec_daa_override += 1,
        Some(AgentMode::AllocateDaa) => sum.no_wait_steps += 1,
        Some(AgentMode::ExecutePilot) => sum.exec_pilot += 1,
        Some(AgentMode::ExecuteBlended) => {
            sum.exec_blended += 1;
            match r.intent_match {
                Some(IntentMatch::Exact) => sum.blend_exact += 1,
                Some(IntentMatch::AxisOnly) => sum.blend_axis_only += 1,
                Some(IntentMatch::Neither) | None => sum.blend_unmatched += 1,
            }
            match r.blend {
                Some(BlendTier::AnySafe) => sum.blend_any_safe += 1,
                Some(BlendTier::MaxMargin) => sum.blend_max_margin += 1,
                _ => {}
            }
        }
        None => {}
    }
}
