//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use daa_waitmap::geometry;
use daa_waitmap::mdp::{transition_distribution, Action, IntruderMotionModel, MdpConfig, StateGrid};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn small_grid() -> StateGrid {
    StateGrid::with_bins([4, 4, 2, 2, 2, 2])
}

pub fn small_config() -> MdpConfig {
    MdpConfig {
        gamma: 0.9,
        convergence_tol: 1e-12,
        ..MdpConfig::default()
    }
}

/// Finite-horizon backward induction over dense rows, with rewards computed
/// by stepping every motion directly.
pub fn brute_force_values(grid: &StateGrid, model: &IntruderMotionModel, cfg: &MdpConfig, horizon: usize) -> Vec<f64> {
    let n = grid.normal_cells();
    let motions = model.enumerate_motions().unwrap();
    let limits = grid.step_limits();
    let mut rows = Vec::with_capacity(n);
    let mut rewards = Vec::with_capacity(n);
    for cell in 0..n {
        rows.push(transition_distribution(grid, cell, Action::Wait, cfg, model).unwrap());
        let center = grid.center(cell);
        let r: f64 = motions
            .iter()
            .map(|(d, p)| {
                let next = geometry::step_relative(&center, &cfg.ownship, d, cfg.dt, &limits).unwrap();
                let hmd = geometry::hmd(&next, &cfg.ownship);
                let h = hmd.max(1.0);
                let v = next.dh.abs().max(1.0);
                p * (1.0 - (1220.0 / h).min(122.0 / v))
            })
            .sum();
        rewards.push(r);
    }
    let mut v = vec![0.0; n + 2];
    for _ in 0..horizon {
        let mut next = vec![0.0; n + 2];
        for cell in 0..n {
            let q_wait = rewards[cell] + cfg.gamma * rows[cell].iter().map(|&(c, p)| p * v[c]).sum::<f64>();
            next[cell] = q_wait.max(0.0);
        }
        v = next;
    }
    v
}

/// Probability of reaching LoWC and probability-weighted path length, by
/// walking every path of an acyclic chain.
pub fn enumerate_paths(rows: &[Vec<(usize, f64)>], lowc: usize, out: usize, cell: usize) -> (f64, f64) {
    let mut reach = 0.0;
    let mut weighted = 0.0;
    for &(next, p) in &rows[cell] {
        if next == lowc {
            reach += p;
            weighted += p;
        } else if next != out {
            let (r, w) = enumerate_paths(rows, lowc, out, next);
            reach += p * r;
            weighted += p * (w + r);
        }
    }
    (reach, weighted)
}

pub fn random_acyclic_chain(rng: &mut ChaCha8Rng) -> Vec<Vec<(usize, f64)>> {
    let n = rng.random_range(1..8);
    let (out, lowc) = (n, n + 1);
    (0..n)
        .map(|i| {
            let mut targets: Vec<usize> = (i + 1..n).collect();
            targets.extend([out, lowc]);
            let mut row = Vec::new();
            for c in targets {
                if rng.random_bool(0.6) {
                    row.push((c, rng.random_range(0.05..1.0)));
                }
            }
            if row.is_empty() {
                row.push((lowc, 1.0));
            }
            let total: f64 = row.iter().map(|e| e.1).sum();
            row.iter_mut().for_each(|e| e.1 /= total);
            row
        })
        .collect()
}

/// Cell reached by reflecting across the ownship track: dy -> -dy and
/// theta -> -theta.
pub fn mirror_cell(grid: &StateGrid, cell: usize) -> usize {
    let [i, j, k, l, m, q] = grid.unindex(cell);
    let [_, ny, _, _, _, nq] = grid.bins();
    grid.index([i, ny - 1 - j, k, l, m, nq - 1 - q])
}
