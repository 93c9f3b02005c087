//! Expected time to loss of well clear under continued waiting.
//!
//! For every cell the wait-action chain is unrolled `H` steps. With
//! `A_n(s)` the probability of first reaching `LoWC` within `n` steps and
//! `B_n(s) = E[T · 1{T ≤ n}]`,
//!
//! ```text
//! A_n(s) = Σ p(s'|s) · (1               if s' = LoWC, else A_{n-1}(s'))
//! B_n(s) = Σ p(s'|s) · (1               if s' = LoWC, else B_{n-1}(s') + A_{n-1}(s'))
//! ```
//!
//! and the wait time is `dt · B_H / A_H`: the probability-weighted mean
//! length of all paths that end in `LoWC`, truncated at the horizon. `Out`
//! is absorbing with `A = B = 0`.

use rayon::prelude::*;

use super::kernel::WaitKernel;

#[derive(Debug, Clone)]
pub struct HittingTimes {
    /// Seconds, one per normal cell.
    pub wait_s: Vec<f64>,
    /// Probability of reaching `LoWC` within the horizon, one per normal cell.
    pub reach_prob: Vec<f64>,
}

/// Conditional expected hitting time of `LoWC` for every normal cell,
/// in seconds, truncated at `horizon_steps`. Cells that cannot reach
/// `LoWC` within the horizon get `cap_s`.
pub fn wait_times(kernel: &WaitKernel, dt: f64, horizon_steps: usize, cap_s: f64) -> HittingTimes {
    let n = kernel.normal_cells();
    let lowc = kernel.lowc_cell();
    // A and B over all cells; the LoWC entries carry the "arrived" terms so
    // that one sparse product covers both branches of the recursion.
    let mut a = vec![0.0; n + 2];
    let mut b = vec![0.0; n + 2];
    let mut a_next = vec![0.0; n + 2];
    let mut b_next = vec![0.0; n + 2];
    a[lowc] = 1.0;
    a_next[lowc] = 1.0;
    // arriving at LoWC on this step counts one step; elsewhere B + A.
    let mut ab = vec![0.0; n + 2];
    for _ in 0..horizon_steps {
        for i in 0..n + 2 {
            ab[i] = b[i] + a[i];
        }
        ab[lowc] = 1.0;
        a_next[..n]
            .par_iter_mut()
            .zip(b_next[..n].par_iter_mut())
            .enumerate()
            .for_each(|(cell, (an, bn))| {
                *an = kernel.expect(cell, &a);
                *bn = kernel.expect(cell, &ab);
            });
        std::mem::swap(&mut a, &mut a_next);
        std::mem::swap(&mut b, &mut b_next);
    }
    let wait_s = (0..n)
        .map(|cell| {
            if a[cell] > 0.0 {
                (dt * b[cell] / a[cell]).min(cap_s)
            } else {
                cap_s
            }
        })
        .collect();
    a.truncate(n);
    HittingTimes {
        wait_s,
        reach_prob: a,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // cells: 0..n normal, n = Out, n+1 = LoWC

    #[test]
    fn one_step_to_lowc() {
        let k = WaitKernel::from_rows(vec![vec![(2, 1.0)]], vec![0.0]).unwrap();
        let h = wait_times(&k, 1.0, 60, 60.0);
        assert_abs_diff_eq!(h.wait_s[0], 1.0);
        assert_abs_diff_eq!(h.reach_prob[0], 1.0);
    }

    #[test]
    fn two_disjoint_paths() {
        // 0 -> 1 -> LoWC (2 s) w.p. 0.5 ; 0 -> 2 -> 3 -> 4 -> LoWC (4 s) w.p. 0.5
        let n = 5;
        let lowc = n + 1;
        let rows = vec![
            vec![(1, 0.5), (2, 0.5)],
            vec![(lowc, 1.0)],
            vec![(3, 1.0)],
            vec![(4, 1.0)],
            vec![(lowc, 1.0)],
        ];
        let k = WaitKernel::from_rows(rows, vec![0.0; n]).unwrap();
        let h = wait_times(&k, 1.0, 60, 60.0);
        assert_abs_diff_eq!(h.wait_s[0], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn unreachable_gets_cap() {
        let k = WaitKernel::from_rows(vec![vec![(1, 1.0)]], vec![0.0]).unwrap();
        let h = wait_times(&k, 1.0, 60, 60.0);
        assert_eq!(h.wait_s[0], 60.0);
        assert_eq!(h.reach_prob[0], 0.0);
    }

    #[test]
    fn conditioning_ignores_out_paths() {
        // 0 -> LoWC w.p. 0.1 in one step, otherwise Out
        let k = WaitKernel::from_rows(vec![vec![(1, 0.9), (2, 0.1)]], vec![0.0]).unwrap();
        let h = wait_times(&k, 2.0, 30, 60.0);
        assert_abs_diff_eq!(h.wait_s[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h.reach_prob[0], 0.1, epsilon = 1e-12);
    }
}
