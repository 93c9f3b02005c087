use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{OwnshipCommand, SeparationThresholds};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdpConfig {
    /// Discount factor, strictly inside (0, 1).
    pub gamma: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Transition time, s.
    pub dt: f64,
    /// Fixed ownship command assumed while the MDP runs.
    pub ownship: OwnshipCommand,
    pub convergence_tol: f64,
    pub max_sweeps: usize,
    /// Upper bound on any reported wait time, s.
    pub wait_horizon_cap: f64,
    /// Lower bound applied to HMD and |d_h| in the wait reward, m.
    pub reward_floor: f64,
    pub thresholds: SeparationThresholds,
}

impl Default for MdpConfig {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            c1: 1220.0,
            c2: 122.0,
            c3: 1.0,
            dt: 1.0,
            ownship: OwnshipCommand::new(55.0, 0.0, 0.0),
            convergence_tol: 1e-6,
            max_sweeps: 10_000,
            wait_horizon_cap: 60.0,
            reward_floor: 1.0,
            thresholds: SeparationThresholds::default(),
        }
    }
}

impl MdpConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0 && self.c3 > 0.0) {
            return bad("reward constants c1, c2, c3 must be positive");
        }
        if !(self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.convergence_tol > 0.0) || self.max_sweeps == 0 {
            return bad("convergence_tol and max_sweeps must be positive");
        }
        if !(self.wait_horizon_cap >= self.dt) {
            return bad("wait_horizon_cap must be at least one step");
        }
        if !(self.reward_floor > 0.0) {
            return bad("reward_floor must be positive");
        }
        self.thresholds.validate()
    }

    /// Number of whole steps covered by the wait horizon.
    pub fn horizon_steps(&self) -> usize {
        (self.wait_horizon_cap / self.dt + 1e-9).floor() as usize
    }
}
