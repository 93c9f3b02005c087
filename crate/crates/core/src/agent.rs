//! The control-allocation agent: whether to wait for a delayed pilot
//! command, whom to hand authority to, and how to repair an unsafe pilot
//! command by blending it with the DAA maneuver menu.

use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    proj_lowc, wrap_pi, AircraftState, OwnshipCommand, Performance, RelativeState, Separation, SeparationThresholds,
};
use crate::mdp::WaitMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ManeuverAxis {
    Horizontal,
    Vertical,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Left,
    Right,
    Up,
    Down,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CommandSource {
    Pilot,
    Daa,
    Blended,
    MaintainCourse,
}

/// A maneuver request. Absent targets are filled from the route command
/// when the maneuver is flown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManeuverCommand {
    pub axis: ManeuverAxis,
    pub direction: Direction,
    /// rad
    pub target_heading: Option<f64>,
    /// m/s
    pub target_vz: Option<f64>,
    /// m/s
    pub target_speed: Option<f64>,
    pub source: CommandSource,
}

impl ManeuverCommand {
    /// A turn onto `target_heading`. Left is counter-clockwise.
    pub fn turn(direction: Direction, target_heading: f64, source: CommandSource) -> Self {
        Self {
            axis: ManeuverAxis::Horizontal,
            direction,
            target_heading: Some(target_heading),
            target_vz: None,
            target_speed: None,
            source,
        }
    }

    /// A climb (`vz > 0`) or descent.
    pub fn vertical(target_vz: f64, source: CommandSource) -> Self {
        Self {
            axis: ManeuverAxis::Vertical,
            direction: if target_vz >= 0.0 { Direction::Up } else { Direction::Down },
            target_heading: None,
            target_vz: Some(target_vz),
            target_speed: None,
            source,
        }
    }

    /// Keep flying `cmd`.
    pub fn maintain(cmd: &OwnshipCommand) -> Self {
        Self {
            axis: ManeuverAxis::None,
            direction: Direction::None,
            target_heading: Some(cmd.heading),
            target_vz: Some(cmd.vz),
            target_speed: Some(cmd.speed),
            source: CommandSource::MaintainCourse,
        }
    }

    pub fn with_source(mut self, source: CommandSource) -> Self {
        self.source = source;
        self
    }

    /// Checks that axis, direction and targets agree.
    pub fn validate(&self) -> Result<()> {
        let ok = match self.axis {
            ManeuverAxis::Horizontal => {
                matches!(self.direction, Direction::Left | Direction::Right) && self.target_heading.is_some()
            }
            ManeuverAxis::Vertical => {
                matches!(self.direction, Direction::Up | Direction::Down) && self.target_vz.is_some()
            }
            ManeuverAxis::None => self.direction == Direction::None,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("inconsistent maneuver command {self:?}")))
        }
    }

    /// The autopilot command this maneuver amounts to on top of `route`.
    pub fn to_ownship(&self, route: &OwnshipCommand) -> OwnshipCommand {
        OwnshipCommand::new(
            self.target_speed.unwrap_or(route.speed),
            self.target_heading.unwrap_or(route.heading),
            self.target_vz.unwrap_or(route.vz),
        )
    }

    /// Sort key for "least deviating": normalized size first (a 90° turn and
    /// a 5 m/s climb both count as 1), then heading change, then vertical
    /// rate.
    pub fn deviation(&self, route: &OwnshipCommand) -> [f64; 3] {
        let cmd = self.to_ownship(route);
        let dpsi = wrap_pi(cmd.heading - route.heading).abs();
        let dvz = (cmd.vz - route.vz).abs();
        [dpsi / FRAC_PI_2 + dvz / 5.0, dpsi, dvz]
    }

    pub fn intent(&self) -> Option<PilotIntent> {
        extract_intent(self).ok()
    }
}

/// Lexicographic comparison of deviation keys; differences below 1e-9
/// (angle wrapping noise) count as ties.
pub(crate) fn cmp_keys(a: &[f64; 3], b: &[f64; 3]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| if (x - y).abs() <= 1e-9 { Ordering::Equal } else { x.total_cmp(y) })
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// The (axis, direction) pair a pilot command expresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PilotIntent {
    pub ax: ManeuverAxis,
    pub d: Direction,
}

impl PilotIntent {
    pub fn matches(&self, u: &ManeuverCommand) -> bool {
        u.axis == self.ax && u.direction == self.d
    }

    pub fn match_of(&self, u: &ManeuverCommand) -> IntentMatch {
        if self.matches(u) {
            IntentMatch::Exact
        } else if u.axis == self.ax {
            IntentMatch::AxisOnly
        } else {
            IntentMatch::Neither
        }
    }
}

/// How much of a pilot intent an executed command keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntentMatch {
    Exact,
    AxisOnly,
    Neither,
}

pub fn extract_intent(u: &ManeuverCommand) -> Result<PilotIntent> {
    if u.axis == ManeuverAxis::None || u.direction == Direction::None {
        return Err(Error::NoIntent);
    }
    Ok(PilotIntent {
        ax: u.axis,
        d: u.direction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    /// Minimum map wait time worth waiting for, s.
    pub wait_threshold_s: f64,
    /// Look-ahead of the projected-LoWC check, s.
    pub projection_horizon_s: usize,
    /// Look-ahead of the safety metric, s.
    pub sm_horizon_s: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            wait_threshold_s: 4.0,
            projection_horizon_s: 10,
            sm_horizon_s: 10,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.wait_threshold_s >= 0.0) || self.projection_horizon_s == 0 || self.sm_horizon_s == 0 {
            return Err(Error::InvalidConfig(
                "agent horizons must be at least 1 s and the wait threshold non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// What the agent sees at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scene {
    pub own: AircraftState,
    pub intr: AircraftState,
    /// Course flown when nothing else is commanded.
    pub route: OwnshipCommand,
    pub thresholds: SeparationThresholds,
    pub performance: Performance,
}

impl Scene {
    pub fn relative(&self) -> RelativeState {
        crate::geometry::relative_state_body(&self.own, &self.intr)
    }

    /// First projected LoWC step while flying `cmd`.
    pub fn projected_lowc(&self, cmd: &OwnshipCommand, horizon_s: usize) -> Option<usize> {
        proj_lowc(&self.own, &self.intr, cmd, horizon_s, &self.thresholds, &self.performance)
    }

    /// The scene `seconds` later with the ownship holding its present course
    /// and the intruder coasting.
    pub fn advanced(&self, seconds: usize) -> Scene {
        let hold = OwnshipCommand::hold(&self.own);
        let mut next = *self;
        for _ in 0..seconds {
            next.own = self.performance.track(&next.own, &hold, 1.0);
            next.intr = next.intr.coast(1.0);
        }
        next
    }
}

/// Signed safety margin of flying `u` for `horizon_s` seconds against an
/// intruder holding its speed, climb and turn rate: the smallest normalized
/// well-clear margin over the projection. Positive exactly when no projected
/// step is in loss of well clear.
pub fn safety_metric(u: &ManeuverCommand, scene: &Scene, horizon_s: usize) -> f64 {
    let cmd = u.to_ownship(&scene.route);
    let th = &scene.thresholds;
    let mut own = scene.own;
    let mut intr = scene.intr;
    let mut sm = f64::INFINITY;
    for _ in 0..horizon_s {
        own = scene.performance.track(&own, &cmd, 1.0);
        intr = intr.coast(1.0);
        sm = sm.min(Separation::between(&own, &intr, th).margin(th));
    }
    sm
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WaitChoice {
    Wait,
    NoWait,
}

/// The waiting rule: wait only while the available wait time reaches the
/// threshold and no loss of well clear is projected.
pub fn wait_rule(wait_s: f64, projected: Option<usize>, cfg: &AgentConfig) -> WaitChoice {
    if wait_s >= cfg.wait_threshold_s && projected.is_none() {
        WaitChoice::Wait
    } else {
        WaitChoice::NoWait
    }
}

/// Wait decision from the map: looks up the wait time at `s` and projects
/// the current course (`maintain`) `N` seconds ahead. Returns the choice and
/// the looked-up wait time.
pub fn wait_decision(
    map: &WaitMap,
    s: &RelativeState,
    scene: &Scene,
    maintain: &OwnshipCommand,
    cfg: &AgentConfig,
) -> Result<(WaitChoice, f64)> {
    let (_, wait_s) = map.lookup(s)?;
    let projected = scene.projected_lowc(maintain, cfg.projection_horizon_s);
    Ok((wait_rule(wait_s, projected, cfg), wait_s))
}

/// Which rule of the blending cascade produced a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlendTier {
    /// Safe and matching both axis and direction.
    Exact,
    /// Safe and matching the axis.
    AxisOnly,
    /// Safe, any axis.
    AnySafe,
    /// Nothing safe; the largest margin.
    MaxMargin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlendOutcome {
    pub command: ManeuverCommand,
    pub tier: BlendTier,
    pub sm: f64,
}

/// Least-deviating candidate among those passing `keep`.
fn least_deviating<'a>(
    scored: &'a [(ManeuverCommand, f64)],
    route: &OwnshipCommand,
    keep: impl Fn(&ManeuverCommand, f64) -> bool,
) -> Option<&'a (ManeuverCommand, f64)> {
    scored
        .iter()
        .filter(|(u, sm)| keep(u, *sm))
        .min_by(|a, b| cmp_keys(&a.0.deviation(route), &b.0.deviation(route)))
}

/// Candidate with the largest margin, least deviating among equals.
pub(crate) fn max_margin<'a>(
    scored: &'a [(ManeuverCommand, f64)],
    route: &OwnshipCommand,
) -> Option<&'a (ManeuverCommand, f64)> {
    scored.iter().min_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| cmp_keys(&a.0.deviation(route), &b.0.deviation(route)))
    })
}

pub(crate) fn score(candidates: &[ManeuverCommand], scene: &Scene, horizon_s: usize) -> Vec<(ManeuverCommand, f64)> {
    candidates
        .iter()
        .map(|u| (*u, safety_metric(u, scene, horizon_s)))
        .collect()
}

/// Picks a safe candidate that honours as much of the pilot's intent as
/// possible: same axis and direction, else same axis, else anything safe.
/// When no candidate is safe the largest-margin one is returned.
pub fn blend(
    intent: &PilotIntent,
    scene: &Scene,
    candidates: &[ManeuverCommand],
    cfg: &AgentConfig,
) -> Result<BlendOutcome> {
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("blending needs at least one candidate".into()));
    }
    let scored = score(candidates, scene, cfg.sm_horizon_s);
    let route = &scene.route;
    let tiers: [(BlendTier, &dyn Fn(&ManeuverCommand) -> bool); 3] = [
        (BlendTier::Exact, &|u| intent.matches(u)),
        (BlendTier::AxisOnly, &|u| u.axis == intent.ax),
        (BlendTier::AnySafe, &|_| true),
    ];
    for (tier, accept) in tiers {
        if let Some((u, sm)) = least_deviating(&scored, route, |u, sm| sm > 0.0 && accept(u)) {
            return Ok(BlendOutcome {
                command: u.with_source(CommandSource::Blended),
                tier,
                sm: *sm,
            });
        }
    }
    let (u, sm) = max_margin(&scored, route).expect("candidates are non-empty");
    Ok(BlendOutcome {
        command: u.with_source(CommandSource::Blended),
        tier: BlendTier::MaxMargin,
        sm: *sm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentMode {
    Wait,
    AllocateDaa,
    ExecutePilot,
    ExecuteBlended,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentDecision {
    pub mode: AgentMode,
    pub command: ManeuverCommand,
    /// Wait time behind a `Wait` or `AllocateDaa` decision, s; zero otherwise.
    pub wait_remaining_s: f64,
    pub blend: Option<BlendTier>,
}

/// One allocation step.
///
/// Without a pilot command the wait rule decides between holding the
/// previous course and handing authority to the DAA. With one, the pilot
/// command is flown if safe and blended otherwise; the DAA never overrides
/// a pilot command.
pub fn allocate(
    pilot: Option<&ManeuverCommand>,
    maintain: &ManeuverCommand,
    u_daa: &ManeuverCommand,
    candidates: &[ManeuverCommand],
    wait: impl FnOnce() -> Result<(WaitChoice, f64)>,
    scene: &Scene,
    cfg: &AgentConfig,
) -> Result<AgentDecision> {
    let Some(u_p) = pilot else {
        let (choice, wait_s) = wait()?;
        return Ok(match choice {
            WaitChoice::Wait => AgentDecision {
                mode: AgentMode::Wait,
                command: maintain.with_source(CommandSource::MaintainCourse),
                wait_remaining_s: wait_s,
                blend: None,
            },
            WaitChoice::NoWait => AgentDecision {
                mode: AgentMode::AllocateDaa,
                command: u_daa.with_source(CommandSource::Daa),
                wait_remaining_s: wait_s,
                blend: None,
            },
        });
    };
    if safety_metric(u_p, scene, cfg.sm_horizon_s) > 0.0 {
        return Ok(AgentDecision {
            mode: AgentMode::ExecutePilot,
            command: u_p.with_source(CommandSource::Pilot),
            wait_remaining_s: 0.0,
            blend: None,
        });
    }
    let out = blend(&extract_intent(u_p)?, scene, candidates, cfg)?;
    Ok(AgentDecision {
        mode: AgentMode::ExecuteBlended,
        command: out.command,
        wait_remaining_s: 0.0,
        blend: Some(out.tier),
    })
}
