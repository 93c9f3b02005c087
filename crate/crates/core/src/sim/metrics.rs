//! Risk and involvement metrics over simulated encounters.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::engine::{EncounterLog, EncounterSummary, StepRecord};
use crate::error::{Error, Result};
use crate::geometry::{AircraftState, OwnshipCommand, FEET_PER_METER};

fn step_fraction(logs: &[EncounterLog], flag: impl Fn(&StepRecord) -> bool) -> Result<f64> {
    let k: usize = logs.iter().map(|l| l.records.len()).sum();
    if k == 0 {
        return Err(Error::Validation("no step samples to average over".into()));
    }
    let hits = logs.iter().flat_map(|l| &l.records).filter(|r| flag(r)).count();
    Ok(hits as f64 / k as f64)
}

/// Fraction of all step samples in loss of well clear.
pub fn p_lowc(logs: &[EncounterLog]) -> Result<f64> {
    step_fraction(logs, |r| r.lowc)
}

/// Fraction of all step samples inside the NMAC cylinder.
pub fn p_nmac(logs: &[EncounterLog]) -> Result<f64> {
    step_fraction(logs, |r| r.nmac)
}

/// Qualitative likelihood bands for a per-flight-hour rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Likelihood {
    Frequent,
    Probable,
    Remote,
    ExtremelyRemote,
    ExtremelyImprobable,
}

impl Likelihood {
    pub fn of_rate(rate: f64) -> Self {
        match rate {
            r if r >= 1e-3 => Likelihood::Frequent,
            r if r >= 1e-5 => Likelihood::Probable,
            r if r >= 1e-7 => Likelihood::Remote,
            r if r >= 1e-9 => Likelihood::ExtremelyRemote,
            _ => Likelihood::ExtremelyImprobable,
        }
    }
}

impl fmt::Display for Likelihood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Likelihood::Frequent => "Frequent",
            Likelihood::Probable => "Probable",
            Likelihood::Remote => "Remote",
            Likelihood::ExtremelyRemote => "Extremely Remote",
            Likelihood::ExtremelyImprobable => "Extremely Improbable",
        })
    }
}

/// LoWC probability per simulated flight hour and its likelihood band.
pub fn lowc_rate_per_hour(p_lowc: f64, hours: f64) -> Result<(f64, Likelihood)> {
    if !(hours > 0.0) {
        return Err(Error::Validation(format!("flight hours must be positive, got {hours}")));
    }
    let rate = p_lowc / hours;
    Ok((rate, Likelihood::of_rate(rate)))
}

/// Penetration of one LoWC step: the smaller of the horizontal and
/// vertical penetration fractions scaled by the time fraction, each in
/// `[0, 1]`. Distances are metres and converted to feet.
pub fn penetration_step(hmd_m: f64, dh_m: f64, tau_mod_s: f64, dt: f64) -> f64 {
    let h = ((4000.0 - hmd_m * FEET_PER_METER) / 4000.0).clamp(0.0, 1.0);
    let v = ((450.0 - dh_m.abs() * FEET_PER_METER) / 450.0).clamp(0.0, 1.0);
    let tau = ((35.0 - tau_mod_s) / 35.0).clamp(0.0, 1.0);
    h.min(v) * tau * dt
}

/// Penetration integral of one encounter: the sum of
/// [`penetration_step`] over its LoWC steps.
pub fn penetration_integral(log: &EncounterLog) -> f64 {
    let dt = match log.records.as_slice() {
        [a, b, ..] => b.t - a.t,
        _ => 1.0,
    };
    log.records
        .iter()
        .filter(|r| r.lowc)
        .map(|r| penetration_step(r.separation.hmd, r.separation.dh, r.separation.tau_mod, dt))
        .sum()
}

/// Largest cross-track and vertical distance of a flown ownship path from
/// the straight nominal track that starts at `start` and follows `route`.
pub fn trajectory_deviation<'a>(
    path: impl IntoIterator<Item = &'a AircraftState>,
    start: &AircraftState,
    route: &OwnshipCommand,
) -> (f64, f64) {
    let (s, c) = route.heading.sin_cos();
    path.into_iter().fold((0.0_f64, 0.0_f64), |(h, v), p| {
        let cross = (-s * (p.x - start.x) + c * (p.y - start.y)).abs();
        let rise = (p.h - start.h).abs();
        (h.max(cross), v.max(rise))
    })
}

/// Per-group command and involvement tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Involvement {
    pub wait: usize,
    pub no_wait: usize,
    pub receptions: usize,
    pub exec_daa_override: usize,
    pub exec_pilot: usize,
    pub exec_blended: usize,
    pub blend_exact: usize,
    pub blend_axis_only: usize,
    pub blend_unmatched: usize,
    pub blend_any_safe: usize,
    pub blend_max_margin: usize,
    pub conflict_steps: usize,
}

impl Involvement {
    pub fn from_summaries<'a>(sums: impl IntoIterator<Item = &'a EncounterSummary>) -> Self {
        sums.into_iter().fold(Self::default(), |mut a, s| {
            a.wait += s.wait_steps;
            a.no_wait += s.no_wait_steps;
            a.receptions += s.reception_steps;
            a.exec_daa_override += s.exec_daa_override;
            a.exec_pilot += s.exec_pilot;
            a.exec_blended += s.exec_blended;
            a.blend_exact += s.blend_exact;
            a.blend_axis_only += s.blend_axis_only;
            a.blend_unmatched += s.blend_unmatched;
            a.blend_any_safe += s.blend_any_safe;
            a.blend_max_margin += s.blend_max_margin;
            a.conflict_steps += s.conflict_steps;
            a
        })
    }

    fn blend_share(&self, n: usize) -> Option<f64> {
        (self.exec_blended > 0).then(|| n as f64 / self.exec_blended as f64)
    }

    /// Share of blended executions matching the pilot's axis and direction.
    pub fn blend_exact_fraction(&self) -> Option<f64> {
        self.blend_share(self.blend_exact)
    }

    /// Share matching the axis only.
    pub fn blend_axis_fraction(&self) -> Option<f64> {
        self.blend_share(self.blend_axis_only)
    }

    /// Share keeping neither the intended axis nor direction.
    pub fn blend_unmatched_fraction(&self) -> Option<f64> {
        self.blend_share(self.blend_unmatched)
    }

    /// Share produced without a safe candidate on the intended axis.
    pub fn blend_fallback_fraction(&self) -> Option<f64> {
        self.blend_share(self.blend_any_safe + self.blend_max_margin)
    }
}

/// `100·(reference − value)/reference`; `None` when the reference is zero.
pub fn percent_reduction(value: f64, reference: f64) -> Option<f64> {
    (reference != 0.0).then(|| 100.0 * (reference - value) / reference)
}

/// `100·(value − reference)/reference`; `None` when the reference is zero.
pub fn percent_increment(value: f64, reference: f64) -> Option<f64> {
    percent_reduction(value, reference).map(|r| -r)
}
