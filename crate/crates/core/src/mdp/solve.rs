use rayon::prelude::*;

use super::kernel::{Action, WaitKernel};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ValueSolution {
    /// Optimal value of every cell, virtual cells (always 0) last.
    pub value: Vec<f64>,
    /// Greedy action of every cell; virtual cells are `Terminal`.
    pub action: Vec<Action>,
    pub sweeps: usize,
    /// Max-norm change of each sweep.
    pub residuals: Vec<f64>,
}

impl ValueSolution {
    pub fn residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::INFINITY)
    }
}

fn wait_q(kernel: &WaitKernel, gamma: f64, cell: usize, v: &[f64]) -> f64 {
    kernel.reward(cell) + gamma * kernel.expect(cell, v)
}

/// Synchronous value iteration. Evasion is worth exactly zero (reward 0 into
/// the absorbing `Out` cell), so each backup is `max(0, Q_wait)`; ties go to
/// evasion.
pub fn value_iterate(kernel: &WaitKernel, gamma: f64, tol: f64, max_sweeps: usize) -> Result<ValueSolution> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidConfig(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let n = kernel.normal_cells();
    let mut v = vec![0.0; n + 2];
    let mut next = vec![0.0; n + 2];
    let mut residuals = Vec::new();
    let mut converged = false;
    for _ in 0..max_sweeps {
        next[..n]
            .par_iter_mut()
            .enumerate()
            .for_each(|(cell, out)| *out = wait_q(kernel, gamma, cell, &v).max(0.0));
        let residual = next[..n]
            .iter()
            .zip(&v[..n])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut next);
        residuals.push(residual);
        if residual < tol {
            converged = true;
            break;
        }
    }
    let sweeps = residuals.len();
    if !converged {
        return Err(Error::NonConvergence {
            sweeps,
            residual: residuals.last().copied().unwrap_or(f64::INFINITY),
            tolerance: tol,
        });
    }
    let mut action: Vec<Action> = (0..n)
        .into_par_iter()
        .map(|cell| {
            if wait_q(kernel, gamma, cell, &v) > 0.0 {
                Action::Wait
            } else {
                Action::Evade
            }
        })
        .collect();
    action.extend([Action::Terminal, Action::Terminal]);
    Ok(ValueSolution {
        value: v,
        action,
        sweeps,
        residuals,
    })
}
