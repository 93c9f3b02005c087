use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::IntruderDelta;

/// Stochastic intruder maneuver model. Each row is `(value, probability)`.
/// The intruder maneuvers either horizontally (a speed change paired with a
/// turn) or vertically, never both in one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntruderMotionModel {
    /// Relative vertical acceleration, m/s².
    pub vertical_rows: Vec<(f64, f64)>,
    /// Horizontal acceleration, m/s².
    pub horizontal_speed_rows: Vec<(f64, f64)>,
    /// Turn rate, deg/s.
    pub turn_rows: Vec<(f64, f64)>,
    /// Weight of the horizontal maneuver class.
    pub class_mix: f64,
    /// deg/s added to every turn row.
    pub turn_bias: f64,
}

impl Default for IntruderMotionModel {
    fn default() -> Self {
        Self {
            vertical_rows: vec![(-5.0, 0.15), (-3.0, 0.20), (0.0, 0.30), (3.0, 0.20), (5.0, 0.15)],
            horizontal_speed_rows: vec![
                (-10.0, 0.10),
                (-5.0, 0.15),
                (-2.5, 0.15),
                (0.0, 0.20),
                (2.5, 0.15),
                (5.0, 0.15),
                (10.0, 0.10),
            ],
            turn_rows: vec![(-5.0, 0.20), (-2.5, 0.20), (0.0, 0.20), (2.5, 0.20), (5.0, 0.20)],
            class_mix: 0.5,
            turn_bias: 0.0,
        }
    }
}

const NORMALIZATION_TOL: f64 = 1e-9;

impl IntruderMotionModel {
    pub fn with_turn_bias(mut self, bias_dps: f64) -> Self {
        self.turn_bias = bias_dps;
        self
    }

    pub fn with_class_mix(mut self, class_mix: f64) -> Self {
        self.class_mix = class_mix;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let groups = [
            ("vertical", &self.vertical_rows),
            ("horizontal speed", &self.horizontal_speed_rows),
            ("turn", &self.turn_rows),
        ];
        for (name, rows) in groups {
            if rows.is_empty() {
                return Err(Error::InvalidConfig(format!("{name} rows are empty")));
            }
            if rows.iter().any(|&(v, p)| !v.is_finite() || !(p >= 0.0)) {
                return Err(Error::InvalidConfig(format!(
                    "{name} rows need finite values and non-negative probabilities"
                )));
            }
            let total: f64 = rows.iter().map(|r| r.1).sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidConfig(format!(
                    "{name} probabilities sum to {total}, not 1"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.class_mix) {
            return Err(Error::InvalidConfig(format!(
                "class_mix must lie in [0, 1], got {}",
                self.class_mix
            )));
        }
        if !self.turn_bias.is_finite() {
            return Err(Error::InvalidConfig("turn_bias must be finite".into()));
        }
        Ok(())
    }

    /// Every intruder maneuver with its probability. Turn rates come back
    /// in rad/s with the bias applied. At `class_mix` 0 or 1 the empty
    /// class is dropped.
    pub fn enumerate_motions(&self) -> Result<Vec<(IntruderDelta, f64)>> {
        self.validate()?;
        let mut out = Vec::new();
        if self.class_mix > 0.0 {
            for &(dvi, pv) in &self.horizontal_speed_rows {
                for &(dtheta, pt) in &self.turn_rows {
                    out.push((
                        IntruderDelta {
                            dvi,
                            dtheta: (dtheta + self.turn_bias).to_radians(),
                            dvh: 0.0,
                        },
                        self.class_mix * pv * pt,
                    ));
                }
            }
        }
        if self.class_mix < 1.0 {
            for &(dvh, p) in &self.vertical_rows {
                out.push((
                    IntruderDelta {
                        dvi: 0.0,
                        dtheta: 0.0,
                        dvh,
                    },
                    (1.0 - self.class_mix) * p,
                ));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_enumeration_has_forty_entries() {
        let m = IntruderMotionModel::default().enumerate_motions().unwrap();
        assert_eq!(m.len(), 40);
        let total: f64 = m.iter().map(|x| x.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn straight_and_steady_pair_probability() {
        let m = IntruderMotionModel::default().enumerate_motions().unwrap();
        let p = m
            .iter()
            .find(|(d, _)| d.dvi == 0.0 && d.dtheta == 0.0 && d.dvh == 0.0)
            .map(|x| x.1)
            .unwrap();
        // first match is the horizontal (0, 0) pair
        assert!((p - 0.02).abs() < 1e-15);
    }

    #[test]
    fn pure_horizontal_mixture() {
        let m = IntruderMotionModel::default()
            .with_class_mix(1.0)
            .enumerate_motions()
            .unwrap();
        assert_eq!(m.len(), 35);
        assert!(m.iter().all(|(d, _)| d.dvh == 0.0));
    }

    #[test]
    fn rejects_unnormalized_rows() {
        let mut model = IntruderMotionModel::default();
        model.turn_rows[0].1 = 0.3;
        assert!(matches!(model.enumerate_motions(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn bias_shifts_turn_rows() {
        let m = IntruderMotionModel::default()
            .with_turn_bias(5.0)
            .enumerate_motions()
            .unwrap();
        let max = m.iter().map(|x| x.0.dtheta).fold(f64::MIN, f64::max);
        assert!((max - 10f64.to_radians()).abs() < 1e-15);
    }
}
