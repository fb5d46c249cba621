use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometric grid on `[t_min, t_max]` standing in for `sup_{0<t<inf}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: u32,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, points_per_decade: u32) -> Result<Self> {
        if !(t_min > 0.0 && t_max.is_finite() && t_min < t_max) {
            return Err(Error::InvalidArgument(alloc::format!(
                "time grid needs 0 < t_min < t_max < inf, got [{t_min}, {t_max}]"
            )));
        }
        if points_per_decade == 0 {
            return Err(Error::InvalidArgument("points_per_decade must be positive".into()));
        }
        Ok(Self { t_min, t_max, points_per_decade })
    }

    /// Default grid for decay rates `rates` (zero rates are ignored):
    /// `t_min = 1e-4 / r_max`, `t_max = 1e3 / r_min`, 16 points per decade.
    pub fn for_rates(rates: &[f64]) -> Self {
        let positive = rates.iter().copied().filter(|&r| r > 0.0);
        let r_max = positive.clone().fold(0.0, f64::max);
        let r_min = positive.fold(f64::INFINITY, f64::min);
        if r_max == 0.0 {
            return Self { t_min: 1e-4, t_max: 1e3, points_per_decade: 16 };
        }
        Self { t_min: 1e-4 / r_max, t_max: 1e3 / r_min, points_per_decade: 16 }
    }

    pub fn with_density(self, points_per_decade: u32) -> Self {
        Self { points_per_decade, ..self }
    }

    /// Same range, twice the density; every point of `self` is also a point of the refinement.
    pub fn refined(self) -> Self {
        self.with_density(self.points_per_decade * 2)
    }

    pub fn len(&self) -> usize {
        let decades = (self.t_max / self.t_min).log10();
        (decades * self.points_per_decade as f64).ceil() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        let m = self.len();
        if m == 1 {
            return alloc::vec![self.t_min];
        }
        let ratio = (self.t_max / self.t_min).ln();
        (0..m)
            .map(|i| {
                if i + 1 == m {
                    self.t_max
                } else {
                    self.t_min * (ratio * i as f64 / (m - 1) as f64).exp()
                }
            })
            .collect()
    }
}

/// `count` log-spaced points on `[a, b]`.
pub fn log_space(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return alloc::vec![a];
    }
    let r = (b / a).ln();
    (0..count).map(|i| a * (r * i as f64 / (count - 1) as f64).exp()).collect()
}
