use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::MdpConfig;
use super::grid::{CellId, StateGrid};
use super::motion::IntruderMotionModel;
use crate::error::{Error, Result};
use crate::geometry::{self, IntruderDelta, RelativeState};

/// MDP action. `Terminal` marks the two absorbing virtual cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Action {
    Wait = 0,
    Evade = 1,
    Terminal = 2,
}

impl Action {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Action::Wait),
            1 => Some(Action::Evade),
            2 => Some(Action::Terminal),
            _ => None,
        }
    }
}

/// Wait reward for a transition landing at HMD `hmd` and relative altitude
/// `dh`; evasion always earns zero.
pub fn reward_value(hmd: f64, dh: f64, action: Action, cfg: &MdpConfig) -> f64 {
    match action {
        Action::Wait => {
            let h = hmd.max(cfg.reward_floor);
            let v = dh.abs().max(cfg.reward_floor);
            -(cfg.c1 / h).min(cfg.c2 / v) + cfg.c3 * cfg.dt
        }
        Action::Evade | Action::Terminal => 0.0,
    }
}

pub fn reward(next: &RelativeState, action: Action, cfg: &MdpConfig) -> f64 {
    reward_value(geometry::hmd(next, &cfg.ownship), next.dh, action, cfg)
}

/// Outcome of one intruder motion from a cell center under the wait action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    LoWC,
    Out,
    Inside(RelativeState),
}

/// Classifies the continuous stepped state before it is mapped onto the
/// grid: loss of well clear first, then leaving the grid while diverging.
pub fn classify_step(grid: &StateGrid, next: &RelativeState, cfg: &MdpConfig) -> StepOutcome {
    if geometry::is_lowc(next, &cfg.ownship, &cfg.thresholds) {
        return StepOutcome::LoWC;
    }
    let off_horizontal = !grid.dx.contains(next.dx) || !grid.dy.contains(next.dy);
    if off_horizontal && next.range_rate(&cfg.ownship) > 0.0 {
        return StepOutcome::Out;
    }
    if !grid.dh.contains(next.dh) && next.dh * next.vh > 0.0 {
        return StepOutcome::Out;
    }
    StepOutcome::Inside(*next)
}

/// Wait-action row of a non-virtual cell: merged next-cell distribution and
/// expected one-step reward.
pub(crate) fn wait_row(
    grid: &StateGrid,
    cell: CellId,
    cfg: &MdpConfig,
    motions: &[(IntruderDelta, f64)],
) -> Result<(Vec<(CellId, f64)>, f64)> {
    let center = grid.center(cell);
    let limits = grid.step_limits();
    let mut entries: Vec<(CellId, f64)> = Vec::with_capacity(128);
    let mut expected_reward = 0.0;
    for (delta, p) in motions {
        let next = geometry::step_relative(&center, &cfg.ownship, delta, cfg.dt, &limits)?;
        expected_reward += p * reward(&next, Action::Wait, cfg);
        match classify_step(grid, &next, cfg) {
            StepOutcome::LoWC => entries.push((grid.lowc_cell(), *p)),
            StepOutcome::Out => entries.push((grid.out_cell(), *p)),
            StepOutcome::Inside(s) => {
                entries.extend(grid.interpolate(&s).into_iter().map(|(c, w)| (c, w * p)));
            }
        }
    }
    entries.sort_by_key(|e| e.0);
    let mut merged: Vec<(CellId, f64)> = Vec::with_capacity(entries.len());
    for (c, p) in entries {
        match merged.last_mut() {
            Some(last) if last.0 == c => last.1 += p,
            _ => merged.push((c, p)),
        }
    }
    merged.retain(|e| e.1 > 0.0);
    Ok((merged, expected_reward))
}

/// Next-cell distribution for `action` taken at a non-virtual `cell`.
pub fn transition_distribution(
    grid: &StateGrid,
    cell: CellId,
    action: Action,
    cfg: &MdpConfig,
    model: &IntruderMotionModel,
) -> Result<Vec<(CellId, f64)>> {
    if grid.is_virtual(cell) {
        return Err(Error::InvalidConfig(format!(
            "cell {cell} is virtual and has no transitions"
        )));
    }
    match action {
        Action::Evade => Ok(vec![(grid.out_cell(), 1.0)]),
        Action::Wait => Ok(wait_row(grid, cell, cfg, &model.enumerate_motions()?)?.0),
        Action::Terminal => Err(Error::InvalidConfig(
            "terminal is not an action of a normal cell".into(),
        )),
    }
}

/// Sparse wait-action transition matrix over the normal cells, plus the
/// expected wait reward of each. Evasion needs no storage: it always moves
/// to `Out` with reward zero.
#[derive(Debug, Clone)]
pub struct WaitKernel {
    normal: usize,
    row_ptr: Vec<usize>,
    next: Vec<u32>,
    prob: Vec<f64>,
    reward: Vec<f64>,
}

impl WaitKernel {
    pub fn build(grid: &StateGrid, model: &IntruderMotionModel, cfg: &MdpConfig) -> Result<Self> {
        grid.validate()?;
        cfg.validate()?;
        let motions = model.enumerate_motions()?;
        let rows: Vec<(Vec<(CellId, f64)>, f64)> = (0..grid.normal_cells())
            .into_par_iter()
            .map(|cell| wait_row(grid, cell, cfg, &motions))
            .collect::<Result<_>>()?;
        let (trans, rewards): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        Self::from_rows(trans, rewards)
    }

    /// Assembles a kernel from explicit rows. Cell ids `n` and `n + 1`
    /// (with `n = rows.len()`) denote `Out` and `LoWC`.
    pub fn from_rows(rows: Vec<Vec<(CellId, f64)>>, rewards: Vec<f64>) -> Result<Self> {
        let normal = rows.len();
        if rewards.len() != normal {
            return Err(Error::InvalidConfig("one reward per row required".into()));
        }
        let mut row_ptr = Vec::with_capacity(normal + 1);
        row_ptr.push(0);
        let total: usize = rows.iter().map(Vec::len).sum();
        let mut next = Vec::with_capacity(total);
        let mut prob = Vec::with_capacity(total);
        for (i, row) in rows.into_iter().enumerate() {
            let mut sum = 0.0;
            for (c, p) in row {
                if c > normal + 1 {
                    return Err(Error::InvalidConfig(format!("row {i} targets unknown cell {c}")));
                }
                sum += p;
                next.push(c as u32);
                prob.push(p);
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidConfig(format!(
                    "row {i} probabilities sum to {sum}"
                )));
            }
            row_ptr.push(next.len());
        }
        Ok(Self {
            normal,
            row_ptr,
            next,
            prob,
            reward: rewards,
        })
    }

    pub fn normal_cells(&self) -> usize {
        self.normal
    }

    pub fn out_cell(&self) -> CellId {
        self.normal
    }

    pub fn lowc_cell(&self) -> CellId {
        self.normal + 1
    }

    pub fn nnz(&self) -> usize {
        self.next.len()
    }

    pub fn row(&self, cell: CellId) -> impl Iterator<Item = (CellId, f64)> + '_ {
        let (a, b) = (self.row_ptr[cell], self.row_ptr[cell + 1]);
        self.next[a..b]
            .iter()
            .zip(&self.prob[a..b])
            .map(|(&c, &p)| (c as CellId, p))
    }

    pub fn reward(&self, cell: CellId) -> f64 {
        self.reward[cell]
    }

    /// Σ p(s'|s) · f(s') over the wait row of `cell`, where `f` is indexed
    /// over all cells including the two virtual ones.
    pub(crate) fn expect(&self, cell: CellId, f: &[f64]) -> f64 {
        let (a, b) = (self.row_ptr[cell], self.row_ptr[cell + 1]);
        self.next[a..b]
            .iter()
            .zip(&self.prob[a..b])
            .map(|(&c, &p)| p * f[c as usize])
            .sum()
    }
}
