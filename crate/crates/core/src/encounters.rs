//! Random pairwise encounters and the nominal trajectories that realize them.
//!
//! The ownship flies north (heading 0) from the origin at 55 m/s and level.
//! The intruder flies a straight line placed so that, without its turn, the
//! closest approach happens at `T/2` with the sampled miss distances; from
//! `advance_rate · T` onwards it turns at a constant rate.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::actors::truncated_normal;
use crate::error::{Error, Result};
use crate::geometry::{wrap_two_pi, AircraftState, OwnshipCommand};

pub const CSV_HEADER: [&str; 9] = [
    "seed",
    "speed_mps",
    "vz_mps",
    "ia_deg",
    "hma_deg",
    "hmd_m",
    "vmd_m",
    "turn_dps",
    "advance_rate",
];

/// One sampled scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncounterSpec {
    pub seed: u64,
    #[serde(rename = "speed_mps")]
    pub intruder_speed: f64,
    #[serde(rename = "vz_mps")]
    pub intruder_vz: f64,
    /// Incident angle from the ownship axis to the intruder velocity.
    pub ia_deg: f64,
    /// Horizontal miss angle; its sign picks the side of the miss.
    pub hma_deg: f64,
    #[serde(rename = "hmd_m")]
    pub hmd_target: f64,
    /// Intruder minus ownship altitude at the closest approach.
    #[serde(rename = "vmd_m")]
    pub vmd_target: f64,
    /// Counter-clockwise positive.
    #[serde(rename = "turn_dps")]
    pub turn_rate_dps: f64,
    /// Fraction of the encounter elapsed when the intruder starts turning.
    pub advance_rate: f64,
}

/// Sampling bounds. Fields outside them are rejected on import.
pub mod bounds {
    pub const SPEED: (f64, f64) = (70.0, 400.0);
    pub const VZ: (f64, f64) = (-10.0, 10.0);
    pub const IA: (f64, f64) = (0.0, 180.0);
    pub const HMA: (f64, f64) = (-110.0, 110.0);
    pub const HMD: (f64, f64) = (0.0, 2750.0);
    pub const VMD: (f64, f64) = (-915.0, 915.0);
    pub const TURN: (f64, f64) = (-5.0, 5.0);
    pub const ADVANCE: (f64, f64) = (0.0, 0.8);
}

impl EncounterSpec {
    pub fn validate(&self) -> Result<()> {
        use bounds::*;
        let fields = [
            ("speed_mps", self.intruder_speed, SPEED),
            ("vz_mps", self.intruder_vz, VZ),
            ("ia_deg", self.ia_deg, IA),
            ("hma_deg", self.hma_deg, HMA),
            ("hmd_m", self.hmd_target, HMD),
            ("vmd_m", self.vmd_target, VMD),
            ("turn_dps", self.turn_rate_dps, TURN),
            ("advance_rate", self.advance_rate, ADVANCE),
        ];
        for (name, x, (lo, hi)) in fields {
            if !(lo..=hi).contains(&x) {
                return Err(Error::Validation(format!("{name} = {x} outside [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

/// Draws one encounter; the same seed always gives the same encounter.
pub fn sample_spec(seed: u64) -> EncounterSpec {
    use bounds::*;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let intruder_speed = truncated_normal(&mut rng, 100.0, 30.0, SPEED.0, SPEED.1);
    let intruder_vz = truncated_normal(&mut rng, 0.0, 10.0, VZ.0, VZ.1);
    let ia_deg = if rng.random_bool(0.3) {
        180.0
    } else {
        rng.random_range(IA.0..=IA.1)
    };
    let hma_deg = truncated_normal(&mut rng, 0.0, 110.0, HMA.0, HMA.1);
    let hmd_target = rng.random_range(HMD.0..=HMD.1);
    let vmd_target = rng.random_range(VMD.0..=VMD.1);
    let turn_rate_dps = rng.random_range(TURN.0..=TURN.1);
    let advance_rate = truncated_normal(&mut rng, 0.5, 0.5, f64::NEG_INFINITY, f64::INFINITY)
        .clamp(ADVANCE.0, ADVANCE.1);
    EncounterSpec {
        seed,
        intruder_speed,
        intruder_vz,
        ia_deg,
        hma_deg,
        hmd_target,
        vmd_target,
        turn_rate_dps,
        advance_rate,
    }
}

/// `count` encounters with seeds `base_seed, base_seed + 1, ...`.
pub fn sample_batch(count: usize, base_seed: u64) -> Vec<EncounterSpec> {
    (0..count as u64).map(|i| sample_spec(base_seed.wrapping_add(i))).collect()
}

pub const OWNSHIP_SPEED: f64 = 55.0;
const SANITY_RADIUS_M: f64 = 100_000.0;
const ALTITUDE_LIMIT_M: f64 = 3000.0;

/// Nominal (unmitigated) trajectories of both aircraft.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPlan {
    pub ownship: AircraftState,
    pub route: OwnshipCommand,
    /// Intruder state at `t = 0`, before any turn.
    pub intruder: AircraftState,
    pub turn_start_s: f64,
    /// rad/s
    pub turn_rate: f64,
    pub total_time_s: f64,
    /// Time of the closest approach of the turn-free geometry.
    pub cpa_time_s: f64,
}

impl TrajectoryPlan {
    /// Ownship on its route at `t`.
    pub fn ownship_at(&self, t: f64) -> AircraftState {
        let (vx, vy) = self.ownship.velocity();
        AircraftState {
            x: self.ownship.x + vx * t,
            y: self.ownship.y + vy * t,
            h: self.ownship.h + self.ownship.vz * t,
            ..self.ownship
        }
    }

    /// Intruder at `t`: straight until the turn starts, then on an arc.
    pub fn intruder_at(&self, t: f64) -> AircraftState {
        let s0 = self.intruder;
        let h = s0.h + s0.vz * t;
        let straight = t.min(self.turn_start_s).max(0.0);
        let (vx, vy) = s0.velocity();
        let (mut x, mut y) = (s0.x + vx * straight, s0.y + vy * straight);
        let turning = t >= self.turn_start_s && self.turn_start_s < self.total_time_s;
        let mut heading = s0.heading;
        if turning {
            let tau = (t - self.turn_start_s).min(self.total_time_s - self.turn_start_s);
            let w = self.turn_rate;
            let end = s0.heading + w * tau;
            if w.abs() > 1e-12 {
                x += s0.v / w * (end.sin() - s0.heading.sin());
                y -= s0.v / w * (end.cos() - s0.heading.cos());
            } else {
                x += s0.v * s0.heading.cos() * tau;
                y += s0.v * s0.heading.sin() * tau;
            }
            heading = end;
        }
        AircraftState {
            x,
            y,
            h,
            v: s0.v,
            heading: wrap_two_pi(heading),
            vz: s0.vz,
            turn_rate: if turning && t < self.total_time_s { self.turn_rate } else { 0.0 },
        }
    }
}

/// Builds the nominal trajectories for `spec` over `total_time_s`.
pub fn build_trajectories(spec: &EncounterSpec, total_time_s: f64) -> Result<TrajectoryPlan> {
    if !(total_time_s > 0.0) {
        return Err(Error::InvalidConfig(format!("encounter length must be positive, got {total_time_s}")));
    }
    let tc = 0.5 * total_time_s;
    let route = OwnshipCommand::new(OWNSHIP_SPEED, 0.0, 0.0);
    let ownship = AircraftState::new(0.0, 0.0, 0.0, route.speed, route.heading, 0.0, 0.0);

    let heading = spec.ia_deg.to_radians();
    let (ivx, ivy) = (spec.intruder_speed * heading.cos(), spec.intruder_speed * heading.sin());
    let (wx, wy) = (ivx - route.speed, ivy);
    let wn = wx.hypot(wy);
    let (mut nx, mut ny) = if wn > 0.0 { (-wy / wn, wx / wn) } else { (0.0, 1.0) };
    let hma = spec.hma_deg.to_radians();
    let side = nx * hma.cos() + ny * hma.sin();
    if side < 0.0 || (side == 0.0 && (ny < 0.0 || (ny == 0.0 && nx < 0.0))) {
        nx = -nx;
        ny = -ny;
    }
    let own_cpa = (route.speed * tc, 0.0);
    let cpa = (own_cpa.0 + spec.hmd_target * nx, own_cpa.1 + spec.hmd_target * ny);
    let start = (cpa.0 - ivx * tc, cpa.1 - ivy * tc);
    if start.0.hypot(start.1) > SANITY_RADIUS_M {
        return Err(Error::InfeasibleGeometry(format!(
            "intruder would start {:.0} m away",
            start.0.hypot(start.1)
        )));
    }

    let max_vz = ((ALTITUDE_LIMIT_M - spec.vmd_target.abs()) / tc).max(0.0);
    let vz = spec.intruder_vz.clamp(-max_vz, max_vz);
    let h0 = spec.vmd_target - vz * tc;

    Ok(TrajectoryPlan {
        ownship,
        route,
        intruder: AircraftState::new(start.0, start.1, h0, spec.intruder_speed, heading, vz, 0.0),
        turn_start_s: spec.advance_rate * total_time_s,
        turn_rate: spec.turn_rate_dps.to_radians(),
        total_time_s,
        cpa_time_s: tc,
    })
}

pub fn write_specs<W: Write>(writer: W, specs: &[EncounterSpec]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for s in specs {
        w.serialize(s)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_specs<R: Read>(reader: R, origin: &Path) -> Result<Vec<EncounterSpec>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Schema {
            path: origin.to_path_buf(),
            reason: format!("expected header {}, found {}", CSV_HEADER.join(","), header.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<EncounterSpec>().enumerate() {
        let spec = row.map_err(|e| Error::Schema {
            path: origin.to_path_buf(),
            reason: format!("row {}: {e}", i + 1),
        })?;
        spec.validate().map_err(|e| Error::Schema {
            path: origin.to_path_buf(),
            reason: format!("row {}: {e}", i + 1),
        })?;
        out.push(spec);
    }
    Ok(out)
}

pub fn save_specs(path: impl AsRef<Path>, specs: &[EncounterSpec]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_specs(std::io::BufWriter::new(file), specs)
}

pub fn load_specs(path: impl AsRef<Path>) -> Result<Vec<EncounterSpec>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_specs(std::io::BufReader::new(file), path)
}
