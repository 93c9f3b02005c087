//! Relative kinematics and the separation predicates shared by the MDP and
//! the closed-loop simulator.
//!
//! Frame convention: `x` points along heading 0 (north), `y` along heading
//! π/2. Headings are measured counter-clockwise from north, so a velocity of
//! speed `v` at heading `θ` is `(v cos θ, v sin θ)`. Distances are meters,
//! times seconds. NMAC thresholds are stored in feet and converted at the
//! predicate boundary.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FEET_PER_METER: f64 = 1.0 / 0.3048;
pub const METERS_PER_FOOT: f64 = 0.3048;

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_two_pi(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_pi(angle: f64) -> f64 {
    let a = wrap_two_pi(angle);
    if a > std::f64::consts::PI {
        a - TAU
    } else {
        a
    }
}

/// Full state of one aircraft in the shared horizontal frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AircraftState {
    pub x: f64,
    pub y: f64,
    /// Altitude, m.
    pub h: f64,
    /// Horizontal airspeed, m/s.
    pub v: f64,
    /// Heading from north, counter-clockwise positive, rad in `[0, 2π)`.
    pub heading: f64,
    /// Vertical rate, m/s.
    pub vz: f64,
    /// Current turn rate, rad/s.
    pub turn_rate: f64,
}

impl AircraftState {
    pub fn new(x: f64, y: f64, h: f64, v: f64, heading: f64, vz: f64, turn_rate: f64) -> Self {
        Self {
            x,
            y,
            h,
            v: v.max(0.0),
            heading: wrap_two_pi(heading),
            vz,
            turn_rate,
        }
    }

    pub fn velocity(&self) -> (f64, f64) {
        (self.v * self.heading.cos(), self.v * self.heading.sin())
    }

    /// Advances at constant speed, vertical rate and turn rate for `dt`
    /// seconds. Position integrates along the mid-step heading.
    pub fn coast(&self, dt: f64) -> Self {
        let mid = self.heading + 0.5 * self.turn_rate * dt;
        Self {
            x: self.x + self.v * mid.cos() * dt,
            y: self.y + self.v * mid.sin() * dt,
            h: self.h + self.vz * dt,
            heading: wrap_two_pi(self.heading + self.turn_rate * dt),
            ..*self
        }
    }
}

/// Horizontal speed, heading and vertical rate requested of the ownship.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OwnshipCommand {
    pub speed: f64,
    pub heading: f64,
    pub vz: f64,
}

impl OwnshipCommand {
    pub fn new(speed: f64, heading: f64, vz: f64) -> Self {
        Self { speed, heading, vz }
    }

    /// The command that holds the aircraft's present velocity vector.
    pub fn hold(state: &AircraftState) -> Self {
        Self::new(state.v, state.heading, state.vz)
    }
}

impl Default for OwnshipCommand {
    fn default() -> Self {
        Self::new(55.0, 0.0, 0.0)
    }
}

/// Ownship performance limits used when it tracks a command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Performance {
    /// rad/s
    pub max_turn_rate: f64,
    /// m/s²
    pub max_vertical_accel: f64,
    /// m/s, applies to both climb and descent
    pub max_vertical_rate: f64,
}

impl Default for Performance {
    fn default() -> Self {
        Self {
            max_turn_rate: 6.0_f64.to_radians(),
            max_vertical_accel: 2.0,
            max_vertical_rate: 5.0,
        }
    }
}

impl Performance {
    /// One `dt` step of the ownship tracking `cmd` within the limits.
    pub fn track(&self, own: &AircraftState, cmd: &OwnshipCommand, dt: f64) -> AircraftState {
        let err = wrap_pi(cmd.heading - own.heading);
        let max_turn = self.max_turn_rate * dt;
        let turn = err.clamp(-max_turn, max_turn);
        let target_vz = cmd.vz.clamp(-self.max_vertical_rate, self.max_vertical_rate);
        let max_dvz = self.max_vertical_accel * dt;
        let vz1 = own.vz + (target_vz - own.vz).clamp(-max_dvz, max_dvz);
        let mid = own.heading + 0.5 * turn;
        let speed = cmd.speed.max(0.0);
        AircraftState {
            x: own.x + speed * mid.cos() * dt,
            y: own.y + speed * mid.sin() * dt,
            h: own.h + 0.5 * (own.vz + vz1) * dt,
            v: speed,
            heading: wrap_two_pi(own.heading + turn),
            vz: vz1,
            turn_rate: if dt > 0.0 { turn / dt } else { 0.0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateTag {
    Normal,
    Out,
    LoWC,
}

/// Six-component relative state used by the MDP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeState {
    pub dx: f64,
    pub dy: f64,
    pub dh: f64,
    /// Intruder horizontal speed, m/s.
    pub vi: f64,
    /// Intruder minus ownship vertical rate, m/s.
    pub vh: f64,
    /// Intruder heading, rad.
    pub theta_i: f64,
    pub tag: StateTag,
}

impl RelativeState {
    pub fn new(dx: f64, dy: f64, dh: f64, vi: f64, vh: f64, theta_i: f64) -> Self {
        Self {
            dx,
            dy,
            dh,
            vi,
            vh,
            theta_i,
            tag: StateTag::Normal,
        }
    }

    pub fn special(tag: StateTag) -> Self {
        Self {
            dx: 0.0,
            dy: 0.0,
            dh: 0.0,
            vi: 0.0,
            vh: 0.0,
            theta_i: 0.0,
            tag,
        }
    }

    pub fn is_normal(&self) -> bool {
        self.tag == StateTag::Normal
    }

    /// Relative horizontal velocity `(V_rx, V_ry)` against an ownship
    /// flying `own`.
    pub fn relative_velocity(&self, own: &OwnshipCommand) -> (f64, f64) {
        (
            self.vi * self.theta_i.cos() - own.speed * own.heading.cos(),
            self.vi * self.theta_i.sin() - own.speed * own.heading.sin(),
        )
    }

    pub fn range(&self) -> f64 {
        self.dx.hypot(self.dy)
    }

    /// Horizontal range rate, positive when diverging. Zero at zero range.
    pub fn range_rate(&self, own: &OwnshipCommand) -> f64 {
        let r = self.range();
        if r == 0.0 {
            return 0.0;
        }
        let (wx, wy) = self.relative_velocity(own);
        (self.dx * wx + self.dy * wy) / r
    }
}

/// Intruder perturbation applied over one MDP step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IntruderDelta {
    /// Horizontal acceleration, m/s².
    pub dvi: f64,
    /// Turn rate, rad/s.
    pub dtheta: f64,
    /// Relative vertical acceleration, m/s².
    pub dvh: f64,
}

/// Bounds applied to the intruder speed and relative vertical rate after a
/// step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLimits {
    pub vi: (f64, f64),
    pub vh: (f64, f64),
}

impl Default for StepLimits {
    fn default() -> Self {
        Self {
            vi: (70.0, 300.0),
            vh: (-5.0, 5.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationThresholds {
    pub hmd_star: f64,
    pub dh_star: f64,
    pub tau_mod_star: f64,
    /// NMAC horizontal radius, ft.
    pub nmac_r: f64,
    /// NMAC vertical half-height, ft.
    pub nmac_h: f64,
    pub dmod: f64,
}

impl Default for SeparationThresholds {
    fn default() -> Self {
        Self {
            hmd_star: 1220.0,
            dh_star: 122.0,
            tau_mod_star: 35.0,
            nmac_r: 500.0,
            nmac_h: 120.0,
            dmod: 1220.0,
        }
    }
}

impl SeparationThresholds {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.hmd_star,
            self.dh_star,
            self.tau_mod_star,
            self.nmac_r,
            self.nmac_h,
            self.dmod,
        ];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "separation thresholds must be finite and strictly positive".into(),
            ))
        }
    }
}

/// Relative state of `intr` with respect to `own`, in the shared frame.
pub fn relative_state(own: &AircraftState, intr: &AircraftState) -> RelativeState {
    RelativeState::new(
        intr.x - own.x,
        intr.y - own.y,
        intr.h - own.h,
        intr.v,
        intr.vz - own.vz,
        intr.heading,
    )
}

/// Relative state expressed in the ownship's heading frame, i.e. the frame
/// in which the ownship flies heading 0. This is what the wait map indexes.
pub fn relative_state_body(own: &AircraftState, intr: &AircraftState) -> RelativeState {
    let (s, c) = own.heading.sin_cos();
    let ex = intr.x - own.x;
    let ey = intr.y - own.y;
    RelativeState::new(
        c * ex + s * ey,
        -s * ex + c * ey,
        intr.h - own.h,
        intr.v,
        intr.vz - own.vz,
        wrap_two_pi(intr.heading - own.heading),
    )
}

/// One step of the relative kinematics. Position updates use the relative
/// velocity evaluated before the step; the ownship vertical rate is already
/// folded into `vh`, so `own.vz` plays no part here.
pub fn step_relative(
    s: &RelativeState,
    own: &OwnshipCommand,
    delta: &IntruderDelta,
    dt: f64,
    limits: &StepLimits,
) -> Result<RelativeState> {
    if !s.is_normal() {
        return Err(Error::NotNormalState(s.tag));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    let (vrx, vry) = s.relative_velocity(own);
    Ok(RelativeState::new(
        s.dx + vrx * dt,
        s.dy + vry * dt,
        s.dh + s.vh * dt,
        (s.vi + delta.dvi * dt).clamp(limits.vi.0, limits.vi.1),
        (s.vh + delta.dvh * dt).clamp(limits.vh.0, limits.vh.1),
        wrap_two_pi(s.theta_i + delta.dtheta * dt),
    ))
}

/// Horizontal miss distance at the (future) closest point of approach for
/// relative position `p` and relative velocity `w`.
pub fn hmd_from(p: (f64, f64), w: (f64, f64)) -> f64 {
    let ww = w.0 * w.0 + w.1 * w.1;
    let t = if ww == 0.0 {
        0.0
    } else {
        (-(p.0 * w.0 + p.1 * w.1) / ww).max(0.0)
    };
    (p.0 + w.0 * t).hypot(p.1 + w.1 * t)
}

pub fn hmd(s: &RelativeState, own: &OwnshipCommand) -> f64 {
    hmd_from((s.dx, s.dy), s.relative_velocity(own))
}

/// Modified tau: zero inside `dmod`, `(dmod² − r²)/(r·ṙ)` when closing,
/// `+∞` otherwise.
pub fn tau_mod(range: f64, range_rate: f64, dmod: f64) -> f64 {
    if range <= dmod {
        0.0
    } else if range_rate < 0.0 {
        (dmod * dmod - range * range) / (range * range_rate)
    } else {
        f64::INFINITY
    }
}

/// All separation metrics between two aircraft at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub range: f64,
    pub range_rate: f64,
    pub hmd: f64,
    /// Intruder minus ownship altitude, m.
    pub dh: f64,
    pub tau_mod: f64,
}

impl Separation {
    pub fn between(own: &AircraftState, intr: &AircraftState, th: &SeparationThresholds) -> Self {
        let (ovx, ovy) = own.velocity();
        let (ivx, ivy) = intr.velocity();
        Self::from_parts(
            (intr.x - own.x, intr.y - own.y),
            (ivx - ovx, ivy - ovy),
            intr.h - own.h,
            th,
        )
    }

    pub fn of_relative(s: &RelativeState, own: &OwnshipCommand, th: &SeparationThresholds) -> Self {
        Self::from_parts((s.dx, s.dy), s.relative_velocity(own), s.dh, th)
    }

    fn from_parts(p: (f64, f64), w: (f64, f64), dh: f64, th: &SeparationThresholds) -> Self {
        let range = p.0.hypot(p.1);
        let range_rate = if range > 0.0 {
            (p.0 * w.0 + p.1 * w.1) / range
        } else {
            0.0
        };
        Self {
            range,
            range_rate,
            hmd: hmd_from(p, w),
            dh,
            tau_mod: tau_mod(range, range_rate, th.dmod),
        }
    }

    /// True iff the vertical, horizontal and time conditions hold together.
    pub fn is_lowc(&self, th: &SeparationThresholds) -> bool {
        self.dh.abs() <= th.dh_star
            && self.hmd <= th.hmd_star
            && self.tau_mod >= 0.0
            && self.tau_mod <= th.tau_mod_star
    }

    pub fn is_nmac(&self, th: &SeparationThresholds) -> bool {
        is_nmac_with(
            self.range * FEET_PER_METER,
            self.dh.abs() * FEET_PER_METER,
            th,
        )
    }

    /// Normalized well-clear margin: non-positive exactly when all three
    /// loss-of-well-clear conditions hold.
    pub fn margin(&self, th: &SeparationThresholds) -> f64 {
        let horizontal = self.hmd / th.hmd_star - 1.0;
        let vertical = self.dh.abs() / th.dh_star - 1.0;
        let time = if self.tau_mod < 0.0 {
            f64::INFINITY
        } else {
            self.tau_mod / th.tau_mod_star - 1.0
        };
        horizontal.max(vertical).max(time)
    }
}

pub fn is_lowc(s: &RelativeState, own: &OwnshipCommand, th: &SeparationThresholds) -> bool {
    s.is_normal() && Separation::of_relative(s, own, th).is_lowc(th)
}

/// NMAC test on horizontal and vertical separations given in feet, using
/// the default 500 ft / 120 ft cylinder.
pub fn is_nmac(r_ft: f64, h_ft: f64) -> bool {
    is_nmac_with(r_ft, h_ft, &SeparationThresholds::default())
}

pub fn is_nmac_with(r_ft: f64, h_ft: f64, th: &SeparationThresholds) -> bool {
    r_ft <= th.nmac_r && h_ft <= th.nmac_h
}

/// First step `i` in `1..=horizon` at which the projected pair is in loss of
/// well clear, with the ownship tracking `own_cmd` and the intruder coasting
/// at its present speed, vertical rate and turn rate. Steps are 1 s.
pub fn proj_lowc(
    own: &AircraftState,
    intr: &AircraftState,
    own_cmd: &OwnshipCommand,
    horizon: usize,
    th: &SeparationThresholds,
    perf: &Performance,
) -> Option<usize> {
    let mut o = *own;
    let mut t = *intr;
    for i in 1..=horizon {
        o = perf.track(&o, own_cmd, 1.0);
        t = t.coast(1.0);
        if Separation::between(&o, &t, th).is_lowc(th) {
            return Some(i);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn own_north() -> OwnshipCommand {
        OwnshipCommand::new(55.0, 0.0, 0.0)
    }

    #[test]
    fn relative_state_same_course() {
        let own = AircraftState::new(0.0, 0.0, 0.0, 55.0, 0.0, 0.0, 0.0);
        let intr = AircraftState::new(1000.0, 0.0, 0.0, 55.0, 0.0, 0.0, 0.0);
        let s = relative_state(&own, &intr);
        assert_eq!((s.dx, s.dy, s.dh, s.vh), (1000.0, 0.0, 0.0, 0.0));
        assert_eq!(s.tag, StateTag::Normal);
    }

    #[test]
    fn relative_state_hand_subtraction() {
        let own = AircraftState::new(0.0, 0.0, 100.0, 55.0, 0.0, 2.0, 0.0);
        let intr = AircraftState::new(500.0, -300.0, 150.0, 155.0, PI, -3.0, 0.0);
        let s = relative_state(&own, &intr);
        assert_eq!(
            (s.dx, s.dy, s.dh, s.vi, s.vh, s.theta_i),
            (500.0, -300.0, 50.0, 155.0, -5.0, PI)
        );
    }

    #[test]
    fn relative_state_self_encounter() {
        let own = AircraftState::new(10.0, 20.0, 30.0, 55.0, 1.0, 1.0, 0.0);
        let s = relative_state(&own, &own);
        assert_eq!((s.dx, s.dy, s.dh, s.vh), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(s.vi, own.v);
    }

    #[test]
    fn step_head_on() {
        let s = RelativeState::new(1000.0, 0.0, 0.0, 55.0, 0.0, PI);
        let next = step_relative(&s, &own_north(), &IntruderDelta::default(), 1.0, &StepLimits::default()).unwrap();
        assert_abs_diff_eq!(next.dx, 890.0, epsilon = 1e-9);
        assert_abs_diff_eq!(next.dy, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn step_formation_flight_is_identity() {
        let limits = StepLimits { vi: (0.0, 400.0), vh: (-5.0, 5.0) };
        let s = RelativeState::new(300.0, -200.0, 40.0, 55.0, 0.0, 0.0);
        let next = step_relative(&s, &own_north(), &IntruderDelta::default(), 1.0, &limits).unwrap();
        assert_eq!((next.dx, next.dy, next.dh), (s.dx, s.dy, s.dh));
    }

    #[test]
    fn step_vertical_acceleration() {
        let s = RelativeState::new(0.0, 0.0, 0.0, 100.0, 0.0, 0.0);
        let d = IntruderDelta { dvh: 3.0, ..Default::default() };
        let next = step_relative(&s, &own_north(), &d, 1.0, &StepLimits::default()).unwrap();
        assert_eq!(next.vh, 3.0);
    }

    #[test]
    fn step_rejects_special_states() {
        for tag in [StateTag::Out, StateTag::LoWC] {
            let s = RelativeState::special(tag);
            assert!(matches!(
                step_relative(&s, &own_north(), &IntruderDelta::default(), 1.0, &StepLimits::default()),
                Err(Error::NotNormalState(_))
            ));
        }
    }

    #[test]
    fn hmd_examples() {
        assert_abs_diff_eq!(hmd_from((1000.0, 0.0), (-100.0, 0.0)), 0.0);
        assert_abs_diff_eq!(hmd_from((1000.0, 300.0), (-100.0, 0.0)), 300.0, epsilon = 1e-9);
        assert_abs_diff_eq!(hmd_from((1000.0, 0.0), (100.0, 0.0)), 1000.0);
        assert_abs_diff_eq!(hmd_from((1000.0, 0.0), (0.0, 0.0)), 1000.0);
    }

    #[test]
    fn tau_mod_examples() {
        let expected = (1220.0_f64.powi(2) - 2000.0_f64.powi(2)) / (2000.0 * -100.0);
        assert_abs_diff_eq!(tau_mod(2000.0, -100.0, 1220.0), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(tau_mod(2000.0, -100.0, 1220.0), 12.558, epsilon = 1e-3);
        assert_eq!(tau_mod(1000.0, -100.0, 1220.0), 0.0);
        assert_eq!(tau_mod(2000.0, 50.0, 1220.0), f64::INFINITY);
    }

    #[test]
    fn lowc_examples() {
        let th = SeparationThresholds::default();
        // collocated, closing
        let s = RelativeState::new(0.0, 0.0, 0.0, 100.0, 0.0, PI);
        assert!(is_lowc(&s, &own_north(), &th));
        // vertical clearance alone keeps the pair well clear
        let s = RelativeState::new(100.0, 0.0, 200.0, 100.0, 0.0, PI);
        assert!(!is_lowc(&s, &own_north(), &th));
        // dh=100, hmd=1000, tau_mod=10 constructed explicitly
        let sep = Separation { range: 2000.0, range_rate: -100.0, hmd: 1000.0, dh: 100.0, tau_mod: 10.0 };
        assert!(sep.is_lowc(&th));
        // and the same through a geometry: p=(x,1000), w=(-v,0)
        let v = 155.0 + 55.0;
        let x = {
            // solve (dmod² − r²)/(r ṙ) = 10 with ṙ = −v x / r  ⇒  r² − dmod² = 10 v x
            // r² = x² + 1000²  ⇒  x² − 10 v x + (1000² − dmod²) = 0
            let b = -10.0 * v;
            let c = 1000.0_f64.powi(2) - 1220.0_f64.powi(2);
            (-b + (b * b - 4.0 * c).sqrt()) / 2.0
        };
        let s = RelativeState::new(x, 1000.0, 100.0, 155.0, 0.0, PI);
        let sep = Separation::of_relative(&s, &own_north(), &th);
        assert_abs_diff_eq!(sep.hmd, 1000.0, epsilon = 1e-6);
        assert_abs_diff_eq!(sep.tau_mod, 10.0, epsilon = 1e-6);
        assert!(is_lowc(&s, &own_north(), &th));
    }

    #[test]
    fn nmac_examples() {
        assert!(is_nmac(500.0, 120.0));
        assert!(is_nmac(0.0, 0.0));
        assert!(!is_nmac(501.0, 0.0));
        assert!(!is_nmac(0.0, 120.5));
    }

    #[test]
    fn proj_lowc_examples() {
        let th = SeparationThresholds::default();
        let perf = Performance::default();
        // head-on at 200 m, closing 110 m/s; 200 m is inside DMOD so
        // the first projected step is already a loss of well clear
        let own = AircraftState::new(0.0, 0.0, 0.0, 55.0, 0.0, 0.0, 0.0);
        let intr = AircraftState::new(200.0, 0.0, 0.0, 55.0, PI, 0.0, 0.0);
        let cmd = OwnshipCommand::hold(&own);
        assert_eq!(proj_lowc(&own, &intr, &cmd, 10, &th, &perf), Some(1));

        let intr = AircraftState::new(0.0, 5000.0, 0.0, 55.0, 0.0, 0.0, 0.0);
        assert_eq!(proj_lowc(&own, &intr, &cmd, 60, &th, &perf), None);

        // collocated now, still collocated at i=1
        let intr = AircraftState::new(0.0, 0.0, 0.0, 55.0, 0.0, 0.0, 0.0);
        assert_eq!(proj_lowc(&own, &intr, &cmd, 10, &th, &perf), Some(1));
    }

    #[test]
    fn track_respects_turn_limit() {
        let perf = Performance::default();
        let own = AircraftState::new(0.0, 0.0, 0.0, 55.0, 0.0, 0.0, 0.0);
        let cmd = OwnshipCommand::new(55.0, PI / 2.0, 5.0);
        let next = perf.track(&own, &cmd, 1.0);
        assert_abs_diff_eq!(next.heading, perf.max_turn_rate, epsilon = 1e-12);
        assert_abs_diff_eq!(next.vz, perf.max_vertical_accel, epsilon = 1e-12);
        let right = OwnshipCommand::new(55.0, 3.0 * PI / 2.0, 0.0);
        let next = perf.track(&own, &right, 1.0);
        assert_abs_diff_eq!(wrap_pi(next.heading), -perf.max_turn_rate, epsilon = 1e-12);
    }

    fn arb_pw() -> impl Strategy<Value = ((f64, f64), (f64, f64))> {
        (
            (-5000.0..5000.0f64, -5000.0..5000.0f64),
            (-500.0..500.0f64, -500.0..500.0f64),
        )
    }

    proptest! {
        #[test]
        fn hmd_never_exceeds_range((p, w) in arb_pw()) {
            prop_assert!(hmd_from(p, w) <= p.0.hypot(p.1) + 1e-9);
        }

        #[test]
        fn hmd_rotation_and_reflection_invariant((p, w) in arb_pw(), angle in 0.0..TAU) {
            let base = hmd_from(p, w);
            let (s, c) = angle.sin_cos();
            let rot = |v: (f64, f64)| (c * v.0 - s * v.1, s * v.0 + c * v.1);
            prop_assert!((hmd_from(rot(p), rot(w)) - base).abs() <= 1e-6 * (1.0 + base));
            prop_assert_eq!(hmd_from((p.0, -p.1), (w.0, -w.1)), base);
        }

        #[test]
        fn tau_mod_continuous_at_dmod(rate in -500.0..-1.0f64, dmod in 100.0..3000.0f64) {
            let just_outside = tau_mod(dmod * (1.0 + 1e-9), rate, dmod);
            prop_assert!(just_outside >= 0.0 && just_outside < 1e-3);
        }

        #[test]
        fn nmac_implies_lowc(r in 0.0..152.0f64, bearing in 0.0..TAU, dh in -36.0..36.0f64,
                             vi in 0.0..400.0f64, heading in 0.0..TAU) {
            let th = SeparationThresholds::default();
            let s = RelativeState::new(r * bearing.cos(), r * bearing.sin(), dh, vi, 0.0, heading);
            let sep = Separation::of_relative(&s, &own_north(), &th);
            prop_assume!(sep.is_nmac(&th));
            prop_assert!(sep.is_lowc(&th));
        }

        #[test]
        fn margin_sign_matches_lowc(dx in -3000.0..3000.0f64, dy in -3000.0..3000.0f64,
                                    dh in -300.0..300.0f64, vi in 70.0..300.0f64, th_i in 0.0..TAU) {
            let th = SeparationThresholds::default();
            let sep = Separation::of_relative(&RelativeState::new(dx, dy, dh, vi, 0.0, th_i), &own_north(), &th);
            prop_assert_eq!(sep.margin(&th) <= 0.0, sep.is_lowc(&th));
        }
    }
}
