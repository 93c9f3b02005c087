use serde::{Deserialize, Serialize};

use super::config::MdpConfig;
use super::grid::{CellId, StateGrid};
use super::hitting::wait_times;
use super::kernel::{Action, WaitKernel};
use super::motion::IntruderMotionModel;
use super::solve::value_iterate;
use crate::error::{Error, Result};
use crate::geometry::{self, RelativeState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub sweeps: usize,
    pub residual: f64,
    /// Hex SHA-256 of the grid, motion model and configuration.
    pub config_hash: String,
    pub tool_version: String,
}

/// Per-cell optimal action, value and expected wait time over a grid.
/// Arrays cover every cell in [`StateGrid`] order, virtual cells last.
#[derive(Debug, Clone, PartialEq)]
pub struct WaitMap {
    pub grid: StateGrid,
    pub motion_model: IntruderMotionModel,
    pub config: MdpConfig,
    pub action: Vec<Action>,
    pub wait_time: Vec<f64>,
    pub value: Vec<f64>,
    /// Probability that continued waiting reaches LoWC within the cap.
    pub reach_prob: Vec<f64>,
    pub metadata: MapMetadata,
}

/// Summary of the wait-time distribution. `min_s`/`max_s` span every
/// normal cell; the histogram, mean and mode skip cells whose center is
/// itself in loss of well clear, since those are the LoWC state in all but
/// name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaitHistogram {
    pub bin_width_s: f64,
    /// `counts[k]` holds cells with wait in `[k·w, (k+1)·w)`; the cap lands
    /// in the last bin.
    pub counts: Vec<usize>,
    pub min_s: f64,
    pub max_s: f64,
    pub mean_s: f64,
    /// Lower edge of the most populated bin.
    pub mode_lo_s: f64,
    /// Cells entering the histogram.
    pub cells: usize,
    /// Cells skipped because their center is already in LoWC.
    pub in_lowc: usize,
    /// Histogram cells that cannot reach LoWC within the cap.
    pub unreachable: usize,
}

pub(crate) fn config_hash(grid: &StateGrid, model: &IntruderMotionModel, cfg: &MdpConfig) -> String {
    use sha2::{Digest, Sha256};
    let bytes = serde_json::to_vec(&(grid, model, cfg)).expect("plain data serializes");
    hex::encode(Sha256::digest(&bytes))
}

impl WaitMap {
    /// Solves the MDP and extracts wait times.
    pub fn build(grid: StateGrid, model: IntruderMotionModel, config: MdpConfig) -> Result<Self> {
        grid.validate()?;
        config.validate()?;
        model.validate()?;
        let kernel = WaitKernel::build(&grid, &model, &config)?;
        let sol = value_iterate(&kernel, config.gamma, config.convergence_tol, config.max_sweeps)?;
        let hit = wait_times(&kernel, config.dt, config.horizon_steps(), config.wait_horizon_cap);
        let mut wait_time = hit.wait_s;
        // LoWC is already lost; Out has left the encounter
        wait_time.extend([config.wait_horizon_cap, 0.0]);
        let mut reach_prob = hit.reach_prob;
        reach_prob.extend([0.0, 1.0]);
        let metadata = MapMetadata {
            sweeps: sol.sweeps,
            residual: sol.residual(),
            config_hash: config_hash(&grid, &model, &config),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        };
        Ok(Self {
            grid,
            motion_model: model,
            config,
            action: sol.action,
            wait_time,
            value: sol.value,
            reach_prob,
            metadata,
        })
    }

    pub fn cell_action(&self, cell: CellId) -> Action {
        self.action[cell]
    }

    pub fn cell_wait(&self, cell: CellId) -> f64 {
        self.wait_time[cell]
    }

    /// Action and wait time for a state in the ownship heading frame.
    /// Off-grid diverging geometries return `(Wait, cap)`; everything else
    /// snaps to the nearest cell.
    pub fn lookup(&self, s: &RelativeState) -> Result<(Action, f64)> {
        if !s.is_normal() {
            return Err(Error::NotNormalState(s.tag));
        }
        let off_grid = !self.grid.dx.contains(s.dx) || !self.grid.dy.contains(s.dy);
        if off_grid && s.range_rate(&self.config.ownship) > 0.0 {
            return Ok((Action::Wait, self.config.wait_horizon_cap));
        }
        let cell = self.grid.nearest_cell(s);
        Ok((self.action[cell], self.wait_time[cell]))
    }

    /// Histogram of wait times with `bin_width_s` bins.
    pub fn histogram(&self, bin_width_s: f64) -> WaitHistogram {
        let n = self.grid.normal_cells();
        let cap = self.config.wait_horizon_cap;
        let all = &self.wait_time[..n];
        let bins = ((cap / bin_width_s).floor() as usize + 1).max(1);
        let mut counts = vec![0usize; bins];
        let (mut cells, mut in_lowc, mut unreachable, mut sum) = (0, 0, 0, 0.0);
        for (cell, &w) in all.iter().enumerate() {
            let center = self.grid.center(cell);
            if geometry::is_lowc(&center, &self.config.ownship, &self.config.thresholds) {
                in_lowc += 1;
                continue;
            }
            cells += 1;
            sum += w;
            if self.reach_prob[cell] == 0.0 {
                unreachable += 1;
            }
            counts[((w / bin_width_s).floor() as usize).min(bins - 1)] += 1;
        }
        let mode_k = counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map_or(0, |m| m.0);
        WaitHistogram {
            bin_width_s,
            min_s: all.iter().copied().fold(f64::INFINITY, f64::min),
            max_s: all.iter().copied().fold(0.0, f64::max),
            mean_s: if cells > 0 { sum / cells as f64 } else { 0.0 },
            mode_lo_s: mode_k as f64 * bin_width_s,
            cells,
            in_lowc,
            unreachable,
            counts,
        }
    }
}
