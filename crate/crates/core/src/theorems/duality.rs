//! The pairing `|tau(f g*)|` against `h1_S`, `h1_G` and `bmo`, and its stability across sizes.

use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Chain, RunInfo};
use crate::error::Result;
use crate::field::{ScalarField, C64};
use crate::gamma::require_curvature;
use crate::grid::TimeGrid;
use crate::norms::bmo_norm;
use crate::sampling::{self, SampleKind};
use crate::square::h1_norms;
use crate::zoo::Family;

/// Allowed growth of the worst ratio between consecutive sizes.
pub const GROWTH_LIMIT: f64 = 2.0;
/// `bmo(g)` below this multiple of `||g||_inf` counts as zero (the square root
/// lifts roundoff of order `1e-16` to `1e-8`).
pub const BMO_ZERO: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DualityReport {
    pub info: RunInfo,
    pub samples: usize,
    pub skipped: usize,
    pub max_ratio_c1: f64,
    pub max_ratio_c2: f64,
    pub worst_sample_c1: Option<usize>,
    pub worst_sample_c2: Option<usize>,
    /// Largest `h1_G / h1_S` seen (bounded by 2 under curvature).
    pub max_h1_ratio: f64,
}

/// Pair `i`: `f` off the kernel; `g` equal to `f`, a single eigenmode, or an independent draw.
fn sample_pair(chain: &Chain, i: usize, rng: &mut impl Rng) -> (ScalarField, ScalarField) {
    let sd = &chain.sd;
    let f = sampling::field(SampleKind::cycle(i), sd, true, rng);
    let g = match i % 5 {
        0 => f.clone(),
        1 => {
            let n = sd.n();
            let k = rng.random_range(0..n);
            let mut c = alloc::vec![C64::new(0.0, 0.0); n];
            c[k] = C64::new(1.0, 0.0);
            sd.synthesize(&c)
        }
        _ => sampling::field(SampleKind::cycle(i / 5), sd, false, rng),
    };
    (f, g)
}

pub fn verify_theorem01(chain: &Chain, samples: usize, seed: u64, grid: Option<TimeGrid>) -> Result<DualityReport> {
    require_curvature(&chain.generator)?;
    let grid = grid.unwrap_or_else(|| chain.grid());
    let mu = chain.sd.mu();
    let mut report = DualityReport {
        info: chain.info(grid, seed, BMO_ZERO),
        samples: 0,
        skipped: 0,
        max_ratio_c1: 0.0,
        max_ratio_c2: 0.0,
        worst_sample_c1: None,
        worst_sample_c2: None,
        max_h1_ratio: 0.0,
    };
    let mut rng = sampling::rng(seed);
    for i in 0..samples {
        let (f, g) = sample_pair(chain, i, &mut rng);
        let pairing = g.inner(&f, mu).norm();
        let h1 = h1_norms(&chain.sd, &chain.tensor, &f)?;
        let bmo = bmo_norm(&chain.sd, &g, &grid, false).value;
        if bmo <= BMO_ZERO * g.norm_inf() || h1.h1_s <= 0.0 {
            report.skipped += 1;
            continue;
        }
        report.samples += 1;
        let c1 = pairing / ((h1.h1_s * h1.h1_g).sqrt() * bmo);
        let c2 = pairing / (h1.h1_s * bmo);
        if c1 > report.max_ratio_c1 {
            report.max_ratio_c1 = c1;
            report.worst_sample_c1 = Some(i);
        }
        if c2 > report.max_ratio_c2 {
            report.max_ratio_c2 = c2;
            report.worst_sample_c2 = Some(i);
        }
        report.max_h1_ratio = report.max_h1_ratio.max(h1.h1_g / h1.h1_s);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SizeSweep {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub reports: Vec<DualityReport>,
    /// `max_ratio(2n) / max_ratio(n)` for consecutive sizes.
    pub growth_c1: Vec<f64>,
    pub growth_c2: Vec<f64>,
    pub passed: bool,
}

pub fn sweep_theorem01(family: Family, sizes: &[usize], samples: usize, seed: u64) -> Result<SizeSweep> {
    let mut reports = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let chain = Chain::new(family.build(n, seed)?)?;
        reports.push(verify_theorem01(&chain, samples, seed, None)?);
    }
    let growth = |pick: fn(&DualityReport) -> f64| -> Vec<f64> {
        reports.windows(2).map(|w| pick(&w[1]) / pick(&w[0]).max(1e-300)).collect()
    };
    let growth_c1 = growth(|r| r.max_ratio_c1);
    let growth_c2 = growth(|r| r.max_ratio_c2);
    let finite = reports.iter().all(|r| r.max_ratio_c1.is_finite() && r.max_ratio_c2.is_finite() && r.samples > 0);
    let passed = finite && growth_c1.iter().chain(&growth_c2).all(|&g| g <= GROWTH_LIMIT);
    Ok(SizeSweep { family, sizes: sizes.to_vec(), reports, growth_c1, growth_c2, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::zoo;

    #[test]
    fn ratios_are_finite_on_a_cycle() {
        let chain = Chain::new(zoo::cycle(8, 1.0, alloc::vec![1.0; 8]).unwrap()).unwrap();
        let r = verify_theorem01(&chain, 30, 1, None).unwrap();
        assert!(r.samples > 20);
        assert!(r.max_ratio_c1.is_finite() && r.max_ratio_c1 > 0.0);
        assert!(r.max_h1_ratio <= 2.0);
    }

    #[test]
    fn negative_curvature_is_refused() {
        let chain = Chain::new(zoo::random_birth_death(6, 2).unwrap()).unwrap();
        assert!(matches!(verify_theorem01(&chain, 5, 1, None), Err(Error::CurvatureFailed { .. })));
    }
}
