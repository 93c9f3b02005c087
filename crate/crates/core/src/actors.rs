//! Stand-ins for the onboard DAA resolution logic, the remote pilot and the
//! command/surveillance link.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::agent::{
    cmp_keys, max_margin, score, CommandSource, Direction, ManeuverAxis, ManeuverCommand, PilotIntent, Scene,
};
use crate::error::{Error, Result};
use crate::geometry::OwnshipCommand;

/// Draws from `N(mean, sd)` restricted to `[lo, hi]` by rejection.
pub fn truncated_normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    if sd <= 0.0 {
        return mean.clamp(lo, hi);
    }
    let normal = Normal::new(mean, sd).expect("sd is positive and finite");
    for _ in 0..10_000 {
        let x = normal.sample(rng);
        if (lo..=hi).contains(&x) {
            return x;
        }
    }
    // only reachable when [lo, hi] sits far out in a tail
    mean.clamp(lo, hi)
}

/// Resolution menu of the onboard DAA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaaModel {
    /// Turn sizes in degrees; each is offered both left and right of the route.
    pub heading_offsets_deg: Vec<f64>,
    /// Vertical rates in m/s; each is offered as a climb and a descent.
    pub vz_options: Vec<f64>,
}

impl Default for DaaModel {
    fn default() -> Self {
        Self {
            heading_offsets_deg: vec![15.0, 30.0, 45.0, 60.0, 90.0],
            vz_options: vec![2.5, 5.0],
        }
    }
}

impl DaaModel {
    pub fn validate(&self) -> Result<()> {
        let all = self.heading_offsets_deg.iter().chain(&self.vz_options);
        if self.heading_offsets_deg.is_empty() && self.vz_options.is_empty() {
            return Err(Error::InvalidConfig("DAA menu is empty".into()));
        }
        if all.clone().any(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidConfig("DAA menu entries must be positive".into()));
        }
        Ok(())
    }

    /// Candidate maneuvers around `route`, smallest first, left before right
    /// and descent before climb.
    pub fn candidates(&self, route: &OwnshipCommand) -> Vec<ManeuverCommand> {
        let mut out = Vec::with_capacity(2 * (self.heading_offsets_deg.len() + self.vz_options.len()));
        for deg in &self.heading_offsets_deg {
            let r = deg.to_radians();
            out.push(ManeuverCommand::turn(Direction::Left, route.heading + r, CommandSource::Daa));
            out.push(ManeuverCommand::turn(Direction::Right, route.heading - r, CommandSource::Daa));
        }
        for vz in &self.vz_options {
            out.push(ManeuverCommand::vertical(route.vz - vz, CommandSource::Daa));
            out.push(ManeuverCommand::vertical(route.vz + vz, CommandSource::Daa));
        }
        for u in &mut out {
            if let Some(h) = &mut u.target_heading {
                *h = crate::geometry::wrap_two_pi(*h);
            }
        }
        out
    }
}

/// The DAA resolution: least-deviating candidate that stays well clear over
/// `horizon_s`, or the largest-margin one when none does.
pub fn daa_resolve(scene: &Scene, candidates: &[ManeuverCommand], horizon_s: usize) -> Result<ManeuverCommand> {
    let scored = score(candidates, scene, horizon_s);
    let route = &scene.route;
    let safe = scored
        .iter()
        .filter(|(_, sm)| *sm > 0.0)
        .min_by(|a, b| cmp_keys(&a.0.deviation(route), &b.0.deviation(route)));
    let (u, _) = safe
        .or_else(|| max_margin(&scored, route))
        .ok_or_else(|| Error::InvalidConfig("DAA menu is empty".into()))?;
    Ok(u.with_source(CommandSource::Daa))
}

/// Remote pilot stand-in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotModel {
    pub reaction_mean_s: f64,
    pub reaction_sd_s: f64,
    pub reaction_min_s: f64,
    /// Preferred (axis, direction) pairs, most preferred first.
    pub preference: Vec<PilotIntent>,
    /// How far ahead the pilot looks, both to notice a conflict and to judge
    /// a maneuver, s.
    pub lookahead_s: usize,
    /// Extrapolate the delayed view to the expected arrival time of the
    /// command before judging maneuvers.
    pub anticipate_latency: bool,
}

impl Default for PilotModel {
    fn default() -> Self {
        use Direction::*;
        use ManeuverAxis::*;
        Self {
            reaction_mean_s: 3.0,
            reaction_sd_s: 1.0,
            reaction_min_s: 0.5,
            preference: vec![
                PilotIntent { ax: Horizontal, d: Right },
                PilotIntent { ax: Horizontal, d: Left },
                PilotIntent { ax: Vertical, d: Up },
                PilotIntent { ax: Vertical, d: Down },
            ],
            lookahead_s: 25,
            anticipate_latency: true,
        }
    }
}

impl PilotModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.reaction_min_s > 0.0) || !(self.reaction_sd_s >= 0.0) || self.lookahead_s == 0 {
            return Err(Error::InvalidConfig(
                "pilot reaction delays must be positive and the look-ahead at least 1 s".into(),
            ));
        }
        Ok(())
    }

    pub fn sample_reaction<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        truncated_normal(rng, self.reaction_mean_s, self.reaction_sd_s, self.reaction_min_s, f64::INFINITY)
    }

    fn rank(&self, u: &ManeuverCommand) -> usize {
        self.preference
            .iter()
            .position(|p| p.matches(u))
            .unwrap_or(self.preference.len())
    }

    /// Whether the pilot, looking at `view`, sees a conflict ahead on the
    /// aircraft's present course.
    pub fn perceives_conflict(&self, view: &Scene) -> bool {
        view.projected_lowc(&OwnshipCommand::hold(&view.own), self.lookahead_s)
            .is_some()
    }
}

/// The pilot's maneuver for the (delayed) `view` and the time it will be
/// issued. Candidates are tried in preference order, smallest first within a
/// preference; the first one that stays well clear over the look-ahead wins,
/// else the largest-margin one.
pub fn pilot_respond<R: Rng + ?Sized>(
    view: &Scene,
    t_now: f64,
    model: &PilotModel,
    candidates: &[ManeuverCommand],
    rng: &mut R,
) -> Result<(ManeuverCommand, f64)> {
    let mut scored = score(candidates, view, model.lookahead_s);
    let route = &view.route;
    scored.sort_by(|a, b| {
        model
            .rank(&a.0)
            .cmp(&model.rank(&b.0))
            .then_with(|| cmp_keys(&a.0.deviation(route), &b.0.deviation(route)))
    });
    let pick = scored
        .iter()
        .find(|(_, sm)| *sm > 0.0)
        .or_else(|| max_margin(&scored, route))
        .ok_or_else(|| Error::InvalidConfig("pilot menu is empty".into()))?;
    let issue = t_now + model.sample_reaction(rng);
    Ok((pick.0.with_source(CommandSource::Pilot), issue))
}

/// One-way delay distribution of a link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LatencyMode {
    Constant { seconds: f64 },
    Gaussian { mean: f64, sd: f64, min: f64, max: f64 },
}

impl LatencyMode {
    /// Truncated Gaussian with mean 5 s and sd 3 s over `[0.2, 10]`.
    pub fn gaussian_default() -> Self {
        LatencyMode::Gaussian {
            mean: 5.0,
            sd: 3.0,
            min: 0.2,
            max: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            LatencyMode::Constant { seconds } => seconds >= 0.0 && seconds.is_finite(),
            LatencyMode::Gaussian { sd, min, max, .. } => sd >= 0.0 && 0.0 <= min && min <= max && max.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid latency {self:?}")))
        }
    }

    /// Nominal one-way delay: the constant, or the Gaussian mean clamped to
    /// its bounds.
    pub fn nominal(&self) -> f64 {
        match *self {
            LatencyMode::Constant { seconds } => seconds,
            LatencyMode::Gaussian { mean, min, max, .. } => mean.clamp(min, max),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            LatencyMode::Constant { seconds } => seconds,
            LatencyMode::Gaussian { mean, sd, min, max } => truncated_normal(rng, mean, sd, min, max),
        }
    }
}

/// A first-in first-out link with random delay.
#[derive(Debug, Clone)]
pub struct LatencyChannel<T, R> {
    mode: LatencyMode,
    rng: R,
    queue: VecDeque<(f64, T)>,
    last_deliver: f64,
}

impl<T, R: Rng> LatencyChannel<T, R> {
    pub fn new(mode: LatencyMode, rng: R) -> Self {
        Self {
            mode,
            rng,
            queue: VecDeque::new(),
            last_deliver: f64::NEG_INFINITY,
        }
    }

    /// Queues `payload` and returns its delivery time, never earlier than
    /// that of the message before it.
    pub fn send(&mut self, payload: T, t_now: f64) -> f64 {
        let at = (t_now + self.mode.sample(&mut self.rng)).max(self.last_deliver);
        self.last_deliver = at;
        self.queue.push_back((at, payload));
        at
    }

    /// Everything due by `t_now`, in send order.
    pub fn poll(&mut self, t_now: f64) -> Vec<T> {
        let mut out = Vec::new();
        while self.queue.front().is_some_and(|(at, _)| *at <= t_now) {
            out.push(self.queue.pop_front().expect("front exists").1);
        }
        out
    }

    pub fn in_flight(&self) -> usize {
        self.queue.len()
    }
}
