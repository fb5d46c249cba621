//! Estimates of the constants in `||(T_{t+et} - T_t) f||_1 <= c3 e^r ||f||_1` and
//! `||(M_{8t} |T_t f|^2)^{1/2}||_1 <= c4 ||f||_1`.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::RunInfo;
use crate::field::ScalarField;
use crate::grid::TimeGrid;
use crate::sampling::{self, SampleKind};
use crate::semigroup::{Generator, Semigroup, SpectralDecomposition};

/// `e = 2^{-k}` for these `k`.
pub const EPSILON_EXPONENTS: core::ops::RangeInclusive<i32> = 4..=12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HypothesisReport {
    pub info: RunInfo,
    pub epsilons: Vec<f64>,
    /// `sup_{x,t} ||(T_{t+et} - T_t) delta_x||_1 / mu_x` per epsilon.
    pub sups: Vec<f64>,
    /// Fitted exponent; absent when every difference vanishes.
    pub r: Option<f64>,
    /// `max_e sup(e) / e^r`.
    pub c3: Option<f64>,
    /// Worst ratio over point masses (a lower bound for the true constant).
    pub c4_delta: f64,
    /// Worst ratio over random nonnegative fields.
    pub c4_random: f64,
    pub degenerate: bool,
}

/// `||(T_{t(1+e)} - T_t) delta_x||_1 / mu_x`, maximised over `x`.
fn difference_sup(sd: &SpectralDecomposition, t: f64, eps: f64) -> f64 {
    let rates = sd.heat_rates();
    let k = sd.operator_matrix(|m| (-t * rates[m]).exp() * (-t * eps * rates[m]).exp_m1());
    let mu = sd.mu();
    let n = mu.len();
    // column y of k is the image of delta_y
    (0..n)
        .map(|y| (0..n).map(|x| k[(x, y)].abs() * mu[x]).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `||(M_{8t} |T_t f|^2)^{1/2}||_1 / ||f||_1`.
pub fn average_ratio(sd: &SpectralDecomposition, f: &ScalarField, t: f64) -> f64 {
    let mu = sd.mu();
    let tf = sd.apply(t, f).abs_sq();
    let avg = sd.average(8.0 * t, &tf);
    let lhs: f64 = avg.iter().zip(mu).map(|(v, m)| v.re.max(0.0).sqrt() * m).sum();
    lhs / f.norm_p(mu, 1.0).max(1e-300)
}

pub fn estimate_hypotheses(g: &Generator, sd: &SpectralDecomposition, grid: &TimeGrid, random_samples: usize, seed: u64) -> HypothesisReport {
    let times = grid.points();
    let epsilons: Vec<f64> = EPSILON_EXPONENTS.map(|k| 2.0f64.powi(-k)).collect();
    let sups: Vec<f64> = epsilons
        .iter()
        .map(|&e| times.iter().map(|&t| difference_sup(sd, t, e)).fold(0.0, f64::max))
        .collect();
    let degenerate = sups.iter().all(|&s| s <= 1e-300);
    let (r, c3) = if degenerate {
        (None, None)
    } else {
        let pts: Vec<(f64, f64)> = epsilons.iter().zip(&sups).filter(|(_, &s)| s > 0.0).map(|(&e, &s)| (e.ln(), s.ln())).collect();
        let m = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let r = sxy / sxx;
        let c3 = epsilons.iter().zip(&sups).map(|(&e, &s)| s / e.powf(r)).fold(0.0, f64::max);
        (Some(r), Some(c3))
    };
    let n = sd.n();
    let mut c4_delta = 0.0f64;
    for x in 0..n {
        let d = ScalarField::delta(n, x);
        for &t in &times {
            c4_delta = c4_delta.max(average_ratio(sd, &d, t));
        }
    }
    let mut rng = sampling::rng(seed);
    let mut c4_random = 0.0f64;
    for i in 0..random_samples {
        let f = sampling::positive(SampleKind::cycle(i), sd, &mut rng);
        for &t in &times {
            c4_random = c4_random.max(average_ratio(sd, &f, t));
        }
    }
    HypothesisReport {
        info: RunInfo { generator: g.fingerprint(), n, grid: *grid, seed, tolerance: 0.0 },
        epsilons,
        sups,
        r,
        c3,
        c4_delta,
        c4_random,
        degenerate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;
    use nalgebra::DMatrix;

    #[test]
    fn two_state_exponent_is_one() {
        let g = zoo::two_state(1.0, 2.0).unwrap();
        let sd = g.decompose().unwrap();
        let rep = estimate_hypotheses(&g, &sd, &sd.default_grid(), 4, 1);
        let r = rep.r.unwrap();
        assert!((r - 1.0).abs() < 0.05, "{r}");
        // small-e limit: sup_t e^{-u}(1 - e^{-eu}) -> e/e, times the l1 size of the mode part
        assert!(rep.c3.unwrap().is_finite());
    }

    #[test]
    fn two_state_difference_matches_closed_form() {
        let (a, b) = (1.0, 2.0);
        let g = zoo::two_state(a, b).unwrap();
        let sd = g.decompose().unwrap();
        let mu = sd.mu().to_vec();
        let (t, e) = (0.4, 0.01);
        let rate = a + b;
        let m = (-rate * t).exp() * (1.0 - (-rate * e * t).exp());
        // (T_s delta_x)(y) = mu_x/|mu| + e^{-rate s}(delta_xy - mu_x/|mu|), so its l1-size divided by mu_x is
        // m (1 - p_x + p_y mu_y/mu_x... ) = 2 m (1 - p_x) with p = mu/|mu|
        let total: f64 = mu.iter().sum();
        let expect = (0..2).map(|x| 2.0 * m * (1.0 - mu[x] / total)).fold(0.0, f64::max);
        assert!((difference_sup(&sd, t, e) - expect).abs() < 1e-13);
    }

    #[test]
    fn zero_generator_is_degenerate() {
        let g = Generator::validate(DMatrix::zeros(3, 3), alloc::vec![1.0; 3]).unwrap();
        let sd = g.decompose().unwrap();
        let grid = TimeGrid::new(0.1, 10.0, 4).unwrap();
        let rep = estimate_hypotheses(&g, &sd, &grid, 2, 0);
        assert!(rep.degenerate && rep.r.is_none());
    }
}
