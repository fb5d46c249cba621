//! Cross-checks and inequalities around the subordinated Poisson semigroup:
//! exact against quadrature square functions, spectral against subordination
//! `P_t`, the pointwise subordination inequalities, and the Carleson bounds.

use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::oscillation::{Window, WINDOW_DRIFT};
use super::{Chain, RunInfo};
use crate::carleson::{bmo_bound, carleson_norm, embedding_ratio, CarlesonMeasure};
use crate::error::Result;
use crate::grid::{log_space, TimeGrid};
use crate::poisson::{check_subordination, PoissonSemigroup};
use crate::sampling::{self, SampleKind};
use crate::semigroup::Semigroup;
use crate::square::{square_function_g, square_function_g_quadrature, square_function_s, square_function_s_quadrature};
use crate::zoo::Family;

pub const ROUTE_TOL: f64 = 1e-6;
pub const SUBORDINATION_TOL: f64 = 1e-12;
/// Constant in the BMO bound for Poisson balayages of Carleson measures.
pub const CARLESON_BMO_CONSTANT: f64 = 37.0;

fn worst_gap(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(1e-30f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs() / scale))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SquareRouteReport {
    pub info: RunInfo,
    pub samples: usize,
    /// Worst pointwise gap between exact and quadrature `S_Gamma`, relative to its sup.
    pub gap_s: f64,
    pub gap_g: f64,
    pub passed: bool,
}

pub fn check_square_routes(chain: &Chain, samples: usize, seed: u64) -> Result<SquareRouteReport> {
    let (g, sd, tensor) = (&chain.generator, &chain.sd, &chain.tensor);
    let mut rng = sampling::rng(seed);
    let (mut gap_s, mut gap_g) = (0.0f64, 0.0f64);
    for i in 0..samples {
        let f = sampling::field(SampleKind::cycle(i), sd, true, &mut rng);
        gap_s = gap_s.max(worst_gap(&square_function_s(sd, tensor, &f)?.values(), &square_function_s_quadrature(g, sd, &f)?.values()));
        gap_g = gap_g.max(worst_gap(&square_function_g(sd, tensor, &f)?.values(), &square_function_g_quadrature(g, sd, &f)?.values()));
    }
    Ok(SquareRouteReport {
        info: chain.info(chain.grid(), seed, ROUTE_TOL),
        samples,
        gap_s,
        gap_g,
        passed: gap_s < ROUTE_TOL && gap_g < ROUTE_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PoissonRouteReport {
    pub info: RunInfo,
    pub samples: usize,
    pub times: Vec<f64>,
    /// Worst `||P_t f - P_t^{sub} f||_inf / ||f||_inf`.
    pub gap: f64,
    pub passed: bool,
}

/// Spectral `e^{-t sqrt(-L)}` against the subordination integral over `T_s`.
pub fn check_poisson_routes(chain: &Chain, samples: usize, seed: u64) -> PoissonRouteReport {
    let ps = PoissonSemigroup::subordinate(chain.sd.clone());
    let grid = ps.default_grid();
    let times = log_space(grid.t_min, grid.t_max, 9);
    let mut rng = sampling::rng(seed);
    let mut gap = 0.0f64;
    for i in 0..samples {
        let f = sampling::field(SampleKind::cycle(i), &chain.sd, false, &mut rng);
        let scale = f.norm_inf().max(1e-300);
        for &t in &times {
            gap = gap.max(ps.apply(t, &f).max_abs_diff(&ps.apply_by_subordination(t, &f)) / scale);
        }
    }
    PoissonRouteReport { info: chain.info(grid, seed, ROUTE_TOL), samples, times, gap, passed: gap < ROUTE_TOL }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SubordinationSuiteReport {
    pub info: RunInfo,
    pub samples: usize,
    /// `(t, y)` pairs checked per sample.
    pub pairs: usize,
    pub violations: usize,
    pub max_violation_ratio: f64,
    pub max_violation_difference: f64,
    /// Smallest `(8t/y) P_{y/2} f / |(P_y - P_{y+t}) f|`; at least 1 when the inequality holds.
    pub min_slack_difference: f64,
    pub passed: bool,
}

/// `P_y f / y <= P_t f / t` and `|(P_y - P_{y+t}) f| <= (8t/y) P_{y/2} f` for nonnegative samples.
pub fn check_subordination_samples(chain: &Chain, samples: usize, seed: u64, grid: Option<TimeGrid>) -> Result<SubordinationSuiteReport> {
    let ps = PoissonSemigroup::subordinate(chain.sd.clone());
    let grid = grid.unwrap_or_else(|| ps.default_grid().with_density(4));
    let mut rng = sampling::rng(seed);
    let mut rep = SubordinationSuiteReport {
        info: chain.info(grid, seed, SUBORDINATION_TOL),
        samples,
        pairs: 0,
        violations: 0,
        max_violation_ratio: f64::NEG_INFINITY,
        max_violation_difference: f64::NEG_INFINITY,
        min_slack_difference: f64::INFINITY,
        passed: false,
    };
    for i in 0..samples {
        let f = sampling::positive(SampleKind::cycle(i), &chain.sd, &mut rng);
        let r = check_subordination(&ps, &f, &grid, SUBORDINATION_TOL)?;
        rep.pairs = r.pairs;
        rep.violations += r.violations;
        rep.max_violation_ratio = rep.max_violation_ratio.max(r.max_violation_ratio);
        rep.max_violation_difference = rep.max_violation_difference.max(r.max_violation_difference);
        rep.min_slack_difference = rep.min_slack_difference.min(r.min_slack_difference);
    }
    rep.passed = rep.violations == 0;
    Ok(rep)
}

/// Piecewise-constant measure with `slabs` slabs on random log-spaced breakpoints
/// around the time scales of `ps`, and densities that are random, sparse in space,
/// or spread evenly.
pub fn random_measure(ps: &PoissonSemigroup, slabs: usize, rng: &mut impl Rng) -> CarlesonMeasure {
    let n = ps.decomposition().n();
    let grid = ps.default_grid();
    let (lo, hi) = (grid.t_min.ln(), grid.t_max.ln());
    let mut b: Vec<f64> = (0..=slabs).map(|_| rng.random_range(lo..hi).exp()).collect();
    b.sort_by(f64::total_cmp);
    b.dedup();
    if rng.random_bool(0.3) {
        b[0] = 0.0;
    }
    let densities = (0..b.len() - 1)
        .map(|_| match rng.random_range(0..3) {
            0 => (0..n).map(|_| rng.random::<f64>()).collect(),
            1 => {
                let mut d = alloc::vec![0.0; n];
                d[rng.random_range(0..n)] = rng.random_range(0.1..10.0);
                d
            }
            _ => alloc::vec![rng.random_range(0.1..2.0); n],
        })
        .collect();
    CarlesonMeasure { breakpoints: b, densities }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CarlesonReport {
    pub info: RunInfo,
    pub samples: usize,
    /// Worst `||int P_t(g nu_t) dt||_BMO / ||nu||_{P,4}` with `||g||_inf <= 1`.
    pub max_bmo_ratio: f64,
    /// Same with the first-power oscillation.
    pub max_bmo_ratio_first_power: f64,
    /// `||P f||_{L_2(nu)} / (||f||_2 ||nu||_{P,4}^{1/2})`.
    pub embedding_p2: Window,
    pub passed: bool,
}

pub fn verify_carleson(chain: &Chain, samples: usize, seed: u64) -> Result<CarlesonReport> {
    let ps = PoissonSemigroup::subordinate(chain.sd.clone());
    let grid = ps.default_grid().with_density(8);
    let n = chain.n();
    let mut rng = sampling::rng(seed);
    let (mut ratio, mut first) = (0.0f64, 0.0f64);
    let mut embedding_p2 = Window::EMPTY;
    for i in 0..samples {
        let nu = random_measure(&ps, 1 + i % 4, &mut rng);
        nu.validate(Some(n))?;
        let g = sampling::rough(n, &mut rng);
        let g = g.scale((1.0 / g.norm_inf()).into());
        let b = bmo_bound(&ps, &nu, &g, &grid);
        ratio = ratio.max(b.ratio);
        first = first.max(b.ratio_first_power);
        let c4 = carleson_norm(&ps, &nu, 4.0, &grid).value;
        if c4 > 0.0 {
            let f = sampling::field(SampleKind::cycle(i), &chain.sd, false, &mut rng);
            embedding_p2.push(embedding_ratio(&ps, &nu, &f, 2.0, c4));
        }
    }
    Ok(CarlesonReport {
        info: chain.info(grid, seed, 0.0),
        samples,
        max_bmo_ratio: ratio,
        max_bmo_ratio_first_power: first,
        embedding_p2,
        passed: ratio <= CARLESON_BMO_CONSTANT && embedding_p2.is_finite(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CarlesonSweep {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub reports: Vec<CarlesonReport>,
    /// Every bound holds and `max c_2` grows by at most [`WINDOW_DRIFT`] per size step.
    pub passed: bool,
}

pub fn sweep_carleson(family: Family, sizes: &[usize], samples: usize, seed: u64) -> Result<CarlesonSweep> {
    let mut reports = Vec::with_capacity(sizes.len());
    for &n in sizes {
        reports.push(verify_carleson(&Chain::new(family.build(n, seed)?)?, samples, seed)?);
    }
    let stable = reports.windows(2).all(|w| w[1].embedding_p2.max <= WINDOW_DRIFT * w[0].embedding_p2.max);
    let passed = stable && reports.iter().all(|r| r.passed);
    Ok(CarlesonSweep { family, sizes: sizes.to_vec(), reports, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn chain(n: usize) -> Chain {
        Chain::new(zoo::cycle(n, 1.0, alloc::vec![1.0; n]).unwrap()).unwrap()
    }

    #[test]
    fn square_routes_agree() {
        let r = check_square_routes(&chain(6), 5, 1).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn poisson_routes_agree() {
        let r = check_poisson_routes(&chain(6), 5, 2);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn subordination_inequalities_hold() {
        let r = check_subordination_samples(&chain(5), 10, 3, None).unwrap();
        assert!(r.passed && r.min_slack_difference >= 1.0, "{r:?}");
    }

    #[test]
    fn random_measures_validate() {
        let ps = PoissonSemigroup::subordinate(chain(4).sd);
        let mut r = sampling::rng(4);
        for k in 1..6 {
            random_measure(&ps, k, &mut r).validate(Some(4)).unwrap();
        }
    }

    #[test]
    fn carleson_bound_holds() {
        let r = verify_carleson(&chain(5), 10, 5).unwrap();
        assert!(r.passed, "{r:?}");
    }
}
