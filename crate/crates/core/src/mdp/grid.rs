use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_two_pi, RelativeState, StepLimits};

/// One discretized state dimension. Bins are uniform; each bin is
/// represented by its center. A circular axis wraps at `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub bins: usize,
    #[serde(default)]
    pub circular: bool,
}

impl Axis {
    pub const fn linear(min: f64, max: f64, bins: usize) -> Self {
        Self {
            min,
            max,
            bins,
            circular: false,
        }
    }

    pub const fn circular(bins: usize) -> Self {
        Self {
            min: 0.0,
            max: TAU,
            bins,
            circular: true,
        }
    }

    pub fn width(&self) -> f64 {
        (self.max - self.min) / self.bins as f64
    }

    pub fn center(&self, k: usize) -> f64 {
        self.min + (k as f64 + 0.5) * self.width()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.circular || (x >= self.min && x <= self.max)
    }

    /// Index of the bin whose center is nearest `x`, clamping to the end
    /// bins on a linear axis.
    pub fn nearest(&self, x: f64) -> usize {
        let n = self.bins;
        if self.circular {
            let k = (wrap_two_pi(x) / self.width()).floor() as isize;
            return k.rem_euclid(n as isize) as usize;
        }
        let k = ((x - self.min) / self.width()).floor();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(n - 1)
        }
    }

    /// Linear interpolation onto the two neighbouring bin centers. Values
    /// beyond the outermost centers of a linear axis go wholly to the end
    /// bin. Zero weights are dropped.
    pub fn interpolate(&self, x: f64) -> ([(usize, f64); 2], usize) {
        let n = self.bins;
        if n == 1 {
            return ([(0, 1.0), (0, 0.0)], 1);
        }
        let w = self.width();
        let u = if self.circular {
            wrap_two_pi(x) / w - 0.5
        } else {
            (x - self.min) / w - 0.5
        };
        if !self.circular {
            if u <= 0.0 {
                return ([(0, 1.0), (0, 0.0)], 1);
            }
            if u >= (n - 1) as f64 {
                return ([(n - 1, 1.0), (0, 0.0)], 1);
            }
        }
        let k = u.floor();
        let f = u - k;
        let k = k as isize;
        let lo = k.rem_euclid(n as isize) as usize;
        let hi = (k + 1).rem_euclid(n as isize) as usize;
        if f == 0.0 {
            ([(lo, 1.0), (0, 0.0)], 1)
        } else {
            ([(lo, 1.0 - f), (hi, f)], 2)
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.bins == 0 || !(self.max > self.min) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "axis {name}: need bins > 0 and finite min < max"
            )));
        }
        Ok(())
    }
}

/// Index of a grid cell. Non-virtual cells come first in row-major order
/// with `dx` outermost; the two virtual cells follow.
pub type CellId = usize;

/// Discretization of the six relative-state dimensions plus the two
/// absorbing cells `Out` and `LoWC`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateGrid {
    pub dx: Axis,
    pub dy: Axis,
    pub dh: Axis,
    pub vi: Axis,
    pub vh: Axis,
    pub theta_i: Axis,
}

impl Default for StateGrid {
    fn default() -> Self {
        Self {
            dx: Axis::linear(-1500.0, 1500.0, 12),
            dy: Axis::linear(-1500.0, 1500.0, 12),
            dh: Axis::linear(-200.0, 200.0, 4),
            vi: Axis::linear(70.0, 300.0, 5),
            vh: Axis::linear(-5.0, 5.0, 5),
            theta_i: Axis::circular(5),
        }
    }
}

pub const AXIS_NAMES: [&str; 6] = ["dx", "dy", "dh", "vi", "vh", "theta_i"];

impl StateGrid {
    /// Same ranges as the default grid with different bin counts.
    pub fn with_bins(bins: [usize; 6]) -> Self {
        let d = Self::default();
        Self {
            dx: Axis { bins: bins[0], ..d.dx },
            dy: Axis { bins: bins[1], ..d.dy },
            dh: Axis { bins: bins[2], ..d.dh },
            vi: Axis { bins: bins[3], ..d.vi },
            vh: Axis { bins: bins[4], ..d.vh },
            theta_i: Axis { bins: bins[5], ..d.theta_i },
        }
    }

    pub fn axes(&self) -> [&Axis; 6] {
        [&self.dx, &self.dy, &self.dh, &self.vi, &self.vh, &self.theta_i]
    }

    pub fn bins(&self) -> [usize; 6] {
        self.axes().map(|a| a.bins)
    }

    pub fn validate(&self) -> Result<()> {
        for (a, name) in self.axes().iter().zip(AXIS_NAMES) {
            a.validate(name)?;
        }
        if !self.theta_i.circular {
            return Err(Error::InvalidConfig("theta_i axis must be circular".into()));
        }
        Ok(())
    }

    /// Number of non-virtual cells.
    pub fn normal_cells(&self) -> usize {
        self.bins().iter().product()
    }

    /// Total cells including `Out` and `LoWC`.
    pub fn cell_count(&self) -> usize {
        self.normal_cells() + 2
    }

    pub fn out_cell(&self) -> CellId {
        self.normal_cells()
    }

    pub fn lowc_cell(&self) -> CellId {
        self.normal_cells() + 1
    }

    pub fn is_virtual(&self, cell: CellId) -> bool {
        cell >= self.normal_cells()
    }

    pub fn index(&self, idx: [usize; 6]) -> CellId {
        let b = self.bins();
        let mut id = 0;
        for d in 0..6 {
            debug_assert!(idx[d] < b[d]);
            id = id * b[d] + idx[d];
        }
        id
    }

    pub fn unindex(&self, mut cell: CellId) -> [usize; 6] {
        let b = self.bins();
        let mut idx = [0; 6];
        for d in (0..6).rev() {
            idx[d] = cell % b[d];
            cell /= b[d];
        }
        idx
    }

    /// Center state of a non-virtual cell.
    pub fn center(&self, cell: CellId) -> RelativeState {
        let i = self.unindex(cell);
        RelativeState::new(
            self.dx.center(i[0]),
            self.dy.center(i[1]),
            self.dh.center(i[2]),
            self.vi.center(i[3]),
            self.vh.center(i[4]),
            self.theta_i.center(i[5]),
        )
    }

    /// Per-dimension nearest bin, clamped to the boundary bins.
    pub fn nearest_cell(&self, s: &RelativeState) -> CellId {
        self.index([
            self.dx.nearest(s.dx),
            self.dy.nearest(s.dy),
            self.dh.nearest(s.dh),
            self.vi.nearest(s.vi),
            self.vh.nearest(s.vh),
            self.theta_i.nearest(s.theta_i),
        ])
    }

    /// Multilinear interpolation weights of `s` over surrounding cell
    /// centers. Weights are positive and sum to one.
    pub fn interpolate(&self, s: &RelativeState) -> Vec<(CellId, f64)> {
        let parts = [
            self.dx.interpolate(s.dx),
            self.dy.interpolate(s.dy),
            self.dh.interpolate(s.dh),
            self.vi.interpolate(s.vi),
            self.vh.interpolate(s.vh),
            self.theta_i.interpolate(s.theta_i),
        ];
        let mut out = Vec::with_capacity(64);
        let mut idx = [0usize; 6];
        fn rec(
            grid: &StateGrid,
            parts: &[([(usize, f64); 2], usize); 6],
            d: usize,
            idx: &mut [usize; 6],
            w: f64,
            out: &mut Vec<(CellId, f64)>,
        ) {
            if d == 6 {
                out.push((grid.index(*idx), w));
                return;
            }
            let (pairs, n) = parts[d];
            for &(k, wk) in &pairs[..n] {
                idx[d] = k;
                rec(grid, parts, d + 1, idx, w * wk, out);
            }
        }
        rec(self, &parts, 0, &mut idx, 1.0, &mut out);
        out
    }

    pub fn step_limits(&self) -> StepLimits {
        StepLimits {
            vi: (self.vi.min, self.vi.max),
            vh: (self.vh.min, self.vh.max),
        }
    }

    pub fn describe(&self) -> String {
        let b = self.bins();
        format!("{}x{}x{}x{}x{}x{}", b[0], b[1], b[2], b[3], b[4], b[5])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_cell_counts() {
        let g = StateGrid::default();
        assert_eq!(g.normal_cells(), 72_000);
        assert_eq!(g.cell_count(), 72_002);
    }

    #[test]
    fn index_round_trip() {
        let g = StateGrid::default();
        for cell in [0, 1, 4999, 71_999] {
            assert_eq!(g.index(g.unindex(cell)), cell);
        }
        assert_eq!(g.unindex(g.index([11, 0, 3, 2, 4, 1])), [11, 0, 3, 2, 4, 1]);
    }

    #[test]
    fn nearest_center_is_identity() {
        let g = StateGrid::with_bins([4, 3, 2, 2, 3, 5]);
        for cell in 0..g.normal_cells() {
            assert_eq!(g.nearest_cell(&g.center(cell)), cell);
        }
    }

    #[test]
    fn nearest_clamps_off_grid() {
        let a = Axis::linear(-1500.0, 1500.0, 12);
        assert_eq!(a.nearest(1700.0), 11);
        assert_eq!(a.nearest(-9000.0), 0);
    }

    #[test]
    fn circular_interpolation_wraps() {
        let a = Axis::circular(5);
        let (p, n) = a.interpolate(0.0);
        assert_eq!(n, 2);
        let bins: Vec<usize> = p[..n].iter().map(|x| x.0).collect();
        assert_eq!(bins, vec![4, 0]);
        assert!((p[0].1 - 0.5).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn interpolation_weights_sum_to_one(dx in -2000.0..2000.0f64, dy in -2000.0..2000.0f64,
                                            dh in -300.0..300.0f64, vi in 50.0..350.0f64,
                                            vh in -6.0..6.0f64, th in -10.0..10.0f64) {
            let g = StateGrid::default();
            let w = g.interpolate(&RelativeState::new(dx, dy, dh, vi, vh, th));
            let total: f64 = w.iter().map(|x| x.1).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(w.iter().all(|x| x.1 > 0.0 && x.0 < g.normal_cells()));
        }

        #[test]
        fn interpolation_preserves_interior_mean(dx in -1375.0..1375.0f64) {
            let a = Axis::linear(-1500.0, 1500.0, 12);
            let (p, n) = a.interpolate(dx);
            let mean: f64 = p[..n].iter().map(|&(k, w)| w * a.center(k)).sum();
            prop_assert!((mean - dx).abs() < 1e-9);
        }
    }
}
