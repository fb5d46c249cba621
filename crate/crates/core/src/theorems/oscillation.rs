//! John-Nirenberg variants of `bmo` against `bmo` itself, and the square-function
//! comparison `h1_G <= 2 h1_S` under curvature.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Chain, RunInfo};
use crate::error::Result;
use crate::gamma::require_curvature;
use crate::grid::TimeGrid;
use crate::norms::{big_bmo_norm, bmo_norm, jn_norm};
use crate::sampling::{self, SampleKind};
use crate::semigroup::{Generator, Semigroup, SpectralDecomposition};
use crate::square::h1_norms;
use crate::zoo::Family;

pub const JN_IDENTITY_TOL: f64 = 1e-12;
pub const HGS_TOL: f64 = 1e-10;
/// Allowed drift of an empirical window between consecutive sizes.
pub const WINDOW_DRIFT: f64 = 2.0;

/// Observed range of a ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub min: f64,
    pub max: f64,
}

impl Window {
    pub const EMPTY: Window = Window { min: f64::INFINITY, max: f64::NEG_INFINITY };

    pub fn push(&mut self, v: f64) {
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    pub fn is_finite(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && self.min > 0.0
    }

    /// Both ends move by at most `factor` from `self` to `next`.
    pub fn stable_into(&self, next: &Window, factor: f64) -> bool {
        next.max <= factor * self.max && self.min <= factor * next.min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JohnNirenbergReport {
    pub info: RunInfo,
    pub samples: usize,
    /// Worst `|jn_2(f) - bmo(f)| / max(bmo(f), 1)`.
    pub identity_gap: f64,
    /// `jn_1 / bmo` over samples with nonzero `bmo`.
    pub window_p1: Window,
    /// `jn_4 / bmo`.
    pub window_p4: Window,
    /// Worst `bmo(f) / BMO(f)`; reported only, since it can exceed 1.
    pub max_bmo_over_big_bmo: f64,
    /// Worst `bmo(f) / ||f||_inf` (at most 2).
    pub max_bmo_over_sup: f64,
    pub passed: bool,
}

pub fn check_john_nirenberg(g: &Generator, sd: &SpectralDecomposition, samples: usize, seed: u64, grid: &TimeGrid) -> JohnNirenbergReport {
    let mut rng = sampling::rng(seed);
    let mut rep = JohnNirenbergReport {
        info: RunInfo { generator: g.fingerprint(), n: sd.n(), grid: *grid, seed, tolerance: JN_IDENTITY_TOL },
        samples,
        identity_gap: 0.0,
        window_p1: Window::EMPTY,
        window_p4: Window::EMPTY,
        max_bmo_over_big_bmo: 0.0,
        max_bmo_over_sup: 0.0,
        passed: false,
    };
    for i in 0..samples {
        let f = sampling::field(SampleKind::cycle(i), sd, false, &mut rng);
        let bmo = bmo_norm(sd, &f, grid, false).value;
        let jn2 = jn_norm(sd, &f, 2.0, grid, false).value;
        rep.identity_gap = rep.identity_gap.max((jn2 - bmo).abs() / bmo.max(1.0));
        let sup = f.norm_inf();
        if bmo <= super::duality::BMO_ZERO * sup {
            continue;
        }
        rep.window_p1.push(jn_norm(sd, &f, 1.0, grid, false).value / bmo);
        rep.window_p4.push(jn_norm(sd, &f, 4.0, grid, false).value / bmo);
        rep.max_bmo_over_big_bmo = rep.max_bmo_over_big_bmo.max(bmo / big_bmo_norm(sd, &f, grid, false).value);
        rep.max_bmo_over_sup = rep.max_bmo_over_sup.max(bmo / sup);
    }
    rep.passed = rep.identity_gap < JN_IDENTITY_TOL
        && rep.max_bmo_over_sup <= 2.0 + 1e-9
        && rep.window_p1.is_finite()
        && rep.window_p4.is_finite();
    rep
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JohnNirenbergSweep {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub reports: Vec<JohnNirenbergReport>,
    pub passed: bool,
}

pub fn sweep_john_nirenberg(family: Family, sizes: &[usize], samples: usize, seed: u64) -> Result<JohnNirenbergSweep> {
    let mut reports = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let g = family.build(n, seed)?;
        let sd = g.decompose()?;
        let grid = sd.default_grid().with_density(8);
        reports.push(check_john_nirenberg(&g, &sd, samples, seed, &grid));
    }
    let stable = reports.windows(2).all(|w| {
        w[0].window_p1.stable_into(&w[1].window_p1, WINDOW_DRIFT) && w[0].window_p4.stable_into(&w[1].window_p4, WINDOW_DRIFT)
    });
    let passed = stable && reports.iter().all(|r| r.passed);
    Ok(JohnNirenbergSweep { family, sizes: sizes.to_vec(), reports, passed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SquareComparisonReport {
    pub info: RunInfo,
    pub samples: usize,
    /// Largest `h1_G / h1_S`.
    pub max_ratio: f64,
    /// Samples with `h1_G > 2 h1_S + tol`.
    pub violations: usize,
    pub passed: bool,
}

pub fn check_square_comparison(chain: &Chain, samples: usize, seed: u64) -> Result<SquareComparisonReport> {
    require_curvature(&chain.generator)?;
    let mut rng = sampling::rng(seed);
    let (mut max_ratio, mut violations) = (0.0f64, 0);
    for i in 0..samples {
        let f = sampling::field(SampleKind::cycle(i), &chain.sd, true, &mut rng);
        let h = h1_norms(&chain.sd, &chain.tensor, &f)?;
        if h.h1_g > 2.0 * h.h1_s + HGS_TOL {
            violations += 1;
        }
        if h.h1_s > 0.0 {
            max_ratio = max_ratio.max(h.h1_g / h.h1_s);
        }
    }
    Ok(SquareComparisonReport {
        info: chain.info(chain.grid(), seed, HGS_TOL),
        samples,
        max_ratio,
        violations,
        passed: violations == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn jn_two_matches_and_windows_are_finite() {
        let g = zoo::cycle(6, 1.0, alloc::vec![1.0; 6]).unwrap();
        let sd = g.decompose().unwrap();
        let r = check_john_nirenberg(&g, &sd, 12, 5, &sd.default_grid().with_density(6));
        assert!(r.passed, "{r:?}");
        assert!(r.window_p1.max <= 1.0 + 1e-12, "jn_1 <= jn_2 by Jensen: {r:?}");
        assert!(r.window_p4.min >= 1.0 - 1e-12, "jn_4 >= jn_2 by Jensen: {r:?}");
    }

    #[test]
    fn square_functions_compare_on_complete_graph() {
        let chain = Chain::new(zoo::complete(6, 1.0, alloc::vec![1.0; 6]).unwrap()).unwrap();
        let r = check_square_comparison(&chain, 40, 2).unwrap();
        assert!(r.passed && r.max_ratio <= 2.0, "{r:?}");
    }
}
