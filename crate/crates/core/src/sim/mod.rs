//! Closed-loop fast-time simulation of one ownship, one intruder, a remote
//! pilot behind a latency-prone link and, depending on the group, the
//! control-allocation agent.

mod batch;
mod engine;
pub mod metrics;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::actors::{DaaModel, LatencyMode, PilotModel};
use crate::agent::AgentConfig;
use crate::error::{Error, Result};
use crate::geometry::{Performance, SeparationThresholds};

pub use batch::{run_batch, GroupRun};
pub use engine::{run_encounter, EncounterLog, EncounterSummary, StepRecord, TRACE_HEADER};
pub use report::{
    compare, encounter_set_hash, BatchReport, ComparisonRow, GroupReport, TABLE_FILES, LIKELIHOOD_NOTE,
};

/// Experiment group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "B-1")]
    B1,
    #[serde(rename = "B-2")]
    B2,
    #[serde(rename = "IC-1")]
    IC1,
    #[serde(rename = "ID-1")]
    ID1,
    #[serde(rename = "ID-2")]
    ID2,
}

impl Group {
    pub const ALL: [Group; 5] = [Group::B1, Group::B2, Group::IC1, Group::ID1, Group::ID2];

    pub fn name(self) -> &'static str {
        match self {
            Group::B1 => "B-1",
            Group::B2 => "B-2",
            Group::IC1 => "IC-1",
            Group::ID1 => "ID-1",
            Group::ID2 => "ID-2",
        }
    }

    /// Baseline groups have no allocation agent.
    pub fn is_baseline(self) -> bool {
        matches!(self, Group::B1 | Group::B2)
    }

    pub fn latency(self) -> LatencyMode {
        match self {
            Group::B1 | Group::ID1 => LatencyMode::Constant { seconds: 4.0 },
            Group::IC1 => LatencyMode::Constant { seconds: 5.0 },
            Group::B2 | Group::ID2 => LatencyMode::gaussian_default(),
        }
    }

    pub fn wait_source(self) -> WaitSource {
        match self {
            Group::B1 | Group::B2 => WaitSource::None,
            Group::IC1 => WaitSource::Constant { seconds: 5.0 },
            Group::ID1 | Group::ID2 => WaitSource::Map,
        }
    }

    pub fn needs_map(self) -> bool {
        self.wait_source() == WaitSource::Map
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Group::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown group {s:?}")))
    }
}

/// Where the agent's wait time comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaitSource {
    /// No agent: baseline behaviour.
    None,
    /// The same wait time at every state.
    Constant { seconds: f64 },
    /// Looked up in the wait map.
    Map,
}

/// Parameters shared by every group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimParams {
    pub dt_s: f64,
    pub total_time_s: f64,
    /// A conflict is active while the nominal route projects a loss of well
    /// clear within this many seconds.
    pub alert_horizon_s: usize,
    pub agent: AgentConfig,
    pub daa: DaaModel,
    pub pilot: PilotModel,
    pub thresholds: SeparationThresholds,
    pub performance: Performance,
    /// Whether surveillance reports the intruder's turn rate. Without it
    /// every projection on board and at the ground station assumes the
    /// intruder flies straight.
    pub observe_turn_rate: bool,
    /// Mixed with each encounter's seed to drive link delays and the pilot.
    pub seed: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt_s: 1.0,
            total_time_s: 240.0,
            alert_horizon_s: 25,
            agent: AgentConfig::default(),
            daa: DaaModel::default(),
            pilot: PilotModel::default(),
            thresholds: SeparationThresholds::default(),
            performance: Performance::default(),
            observe_turn_rate: false,
            seed: 0,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_s > 0.0) || !(self.total_time_s > 0.0) {
            return Err(Error::InvalidConfig("dt and total time must be positive".into()));
        }
        let steps = self.total_time_s / self.dt_s;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "total time {} s is not a whole number of {} s steps",
                self.total_time_s, self.dt_s
            )));
        }
        if self.alert_horizon_s == 0 {
            return Err(Error::InvalidConfig("alert horizon must be at least 1 s".into()));
        }
        self.agent.validate()?;
        self.daa.validate()?;
        self.pilot.validate()?;
        self.thresholds.validate()
    }

    pub fn steps(&self) -> usize {
        (self.total_time_s / self.dt_s).round() as usize
    }

    /// Simulated flight hours of `encounters` encounters.
    pub fn hours(&self, encounters: usize) -> f64 {
        encounters as f64 * self.total_time_s / 3600.0
    }
}

/// Full configuration of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub group: Group,
    pub latency: LatencyMode,
    pub wait_source: WaitSource,
    pub params: SimParams,
}

impl SimConfig {
    /// The preset for `group` with shared parameters `params`.
    pub fn new(group: Group, params: SimParams) -> Self {
        Self {
            group,
            latency: group.latency(),
            wait_source: group.wait_source(),
            params,
        }
    }

    pub fn for_group(group: Group) -> Self {
        Self::new(group, SimParams::default())
    }

    pub fn validate(&self) -> Result<()> {
        self.latency.validate()?;
        if let WaitSource::Constant { seconds } = self.wait_source {
            if !(seconds >= 0.0) {
                return Err(Error::InvalidConfig("constant wait time must be non-negative".into()));
            }
        }
        self.params.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let rows: Vec<_> = Group::ALL
            .iter()
            .map(|g| (g.name(), g.is_baseline(), g.latency(), g.wait_source()))
            .collect();
        assert_eq!(rows[0], ("B-1", true, LatencyMode::Constant { seconds: 4.0 }, WaitSource::None));
        assert_eq!(rows[1], ("B-2", true, LatencyMode::gaussian_default(), WaitSource::None));
        assert_eq!(
            rows[2],
            ("IC-1", false, LatencyMode::Constant { seconds: 5.0 }, WaitSource::Constant { seconds: 5.0 })
        );
        assert_eq!(rows[3], ("ID-1", false, LatencyMode::Constant { seconds: 4.0 }, WaitSource::Map));
        assert_eq!(rows[4], ("ID-2", false, LatencyMode::gaussian_default(), WaitSource::Map));
    }

    #[test]
    fn group_names_round_trip() {
        for g in Group::ALL {
            assert_eq!(g.name().parse::<Group>().unwrap(), g);
            assert_eq!(serde_json::to_string(&g).unwrap(), format!("\"{}\"", g.name()));
        }
        assert!("C-3".parse::<Group>().is_err());
    }

    #[test]
    fn params_reject_fractional_step_counts() {
        let p = SimParams {
            total_time_s: 240.5,
            ..SimParams::default()
        };
        assert!(p.validate().is_err());
        assert_eq!(SimParams::default().steps(), 240);
        assert!((SimParams::default().hours(15) - 1.0).abs() < 1e-12);
    }
}
