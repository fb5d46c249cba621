//! Verification suites on the group algebra: curvature, the two routes to
//! `Gamma`, operator Kadison-Schwarz, the duality ratios, the bilinear hypothesis
//! with its atoms, and subadditivity of `tau(X^{1/2})`.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::algebra::{hermitian_eigenvalues, psd_sqrt, trace_sqrt, AlgebraElement};
use super::multiplier::MultiplierSemigroup;
use crate::error::Result;
use crate::field::C64;
use crate::grid::{log_space, TimeGrid};
use crate::sampling;
use crate::theorems::duality::BMO_ZERO;

pub const GROUP_CURVATURE_TOL: f64 = 1e-10;
pub const ROUTE_TOL: f64 = 1e-12;
pub const OPERATOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GroupCurvatureReport {
    pub group: String,
    pub length: String,
    /// Smallest eigenvalue of `K o K`; nonnegative means `Gamma_2 >= 0` for every element.
    pub gromov_square_min_eigen: f64,
    /// Smallest eigenvalue of `Gamma_2(f)` over sampled `f`, relative to its norm.
    pub sampled_gamma2_min: f64,
    /// Smallest eigenvalue of `T_v Gamma(f) - Gamma(T_v f)` over samples and `v`, relative.
    pub sampled_gradient_min: f64,
    pub threshold: f64,
    pub holds: bool,
    /// The sampled gradient check agrees with the exact one.
    pub agrees: bool,
}

pub fn check_group_curvature(ms: &MultiplierSemigroup, samples: usize, seed: u64) -> GroupCurvatureReport {
    let n = ms.order();
    let scale = ms.psi.scale().max(1e-300);
    let threshold = GROUP_CURVATURE_TOL * scale * scale;
    let mut rng = sampling::rng(seed);
    let grid = ms.default_grid().with_density(2);
    let (mut g2min, mut gradmin) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..samples {
        let f = AlgebraElement::random(n, &mut rng);
        let w = f.norm2().powi(2);
        let g2 = hermitian_eigenvalues(&ms.gamma2(&f, &f).matrix(&ms.group));
        g2min = g2min.min(g2[0] / (w * scale * scale));
        for v in grid.points() {
            gradmin = gradmin.min(ms.gradient_gap(&f, v) / (w * scale));
        }
    }
    let holds = ms.negativity.gromov_square_min_eigen >= -threshold;
    let sampled_holds = gradmin >= -GROUP_CURVATURE_TOL && g2min >= -GROUP_CURVATURE_TOL;
    GroupCurvatureReport {
        group: ms.group.name().into(),
        length: ms.psi.name.clone(),
        gromov_square_min_eigen: ms.negativity.gromov_square_min_eigen,
        sampled_gamma2_min: g2min,
        sampled_gradient_min: gradmin,
        threshold,
        holds,
        agrees: holds == sampled_holds,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RouteReport {
    pub samples: usize,
    /// Worst gap between the Gromov-form and definitional `Gamma`, relative.
    pub gamma_gap: f64,
    pub gamma2_gap: f64,
    pub passed: bool,
}

pub fn check_gamma_routes(ms: &MultiplierSemigroup, samples: usize, seed: u64) -> RouteReport {
    let n = ms.order();
    let mut rng = sampling::rng(seed);
    let s = ms.psi.scale().max(1e-300);
    let (mut g1, mut g2) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let f = AlgebraElement::random(n, &mut rng);
        let h = AlgebraElement::random(n, &mut rng);
        let w = f.norm2() * h.norm2();
        g1 = g1.max(ms.gamma(&f, &h).max_abs_diff(&ms.gamma_definitional(&f, &h)) / (s * w));
        g2 = g2.max(ms.gamma2(&f, &h).max_abs_diff(&ms.gamma2_definitional(&f, &h)) / (s * s * w));
    }
    RouteReport { samples, gamma_gap: g1, gamma2_gap: g2, passed: g1 < ROUTE_TOL && g2 < ROUTE_TOL }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OperatorSchwarzReport {
    pub samples: usize,
    /// Smallest eigenvalue of `T_t(f^* f) - (T_t f)^*(T_t f)`, relative to `||f||_2^2`.
    pub min_eigen: f64,
    pub passed: bool,
}

pub fn check_operator_kadison_schwarz(ms: &MultiplierSemigroup, samples: usize, seed: u64) -> OperatorSchwarzReport {
    let n = ms.order();
    let mut rng = sampling::rng(seed);
    let grid = ms.default_grid().with_density(4);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let f = AlgebraElement::random(n, &mut rng);
        let w = f.norm2().powi(2) * n as f64;
        for t in grid.points() {
            worst = worst.min(ms.kadison_schwarz_gap(&f, t) / w);
        }
    }
    OperatorSchwarzReport { samples, min_eigen: worst, passed: worst >= -OPERATOR_TOL }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NcDualityReport {
    pub group: String,
    pub length: String,
    pub samples: usize,
    pub skipped: usize,
    pub max_ratio_c1: f64,
    pub max_ratio_c2: f64,
    pub max_h1_ratio: f64,
}

/// `|tau(f g^*)|` against `h1_S^{1/2} h1_G^{1/2} bmo(g)` and `h1_S bmo(g)`.
pub fn verify_duality(ms: &MultiplierSemigroup, samples: usize, seed: u64, grid: Option<TimeGrid>) -> Result<NcDualityReport> {
    let n = ms.order();
    let grid = grid.unwrap_or_else(|| ms.default_grid());
    let mut rng = sampling::rng(seed);
    let mut rep = NcDualityReport {
        group: ms.group.name().into(),
        length: ms.psi.name.clone(),
        samples: 0,
        skipped: 0,
        max_ratio_c1: 0.0,
        max_ratio_c2: 0.0,
        max_h1_ratio: 0.0,
    };
    for i in 0..samples {
        let f = ms.project_off_kernel(&AlgebraElement::random(n, &mut rng));
        let g = if i % 4 == 0 { f.clone() } else { AlgebraElement::random(n, &mut rng) };
        // tau(f g^*) = sum_h f_h conj(g_h)
        let pairing = f.0.iter().zip(&g.0).map(|(a, b)| a * b.conj()).sum::<C64>().norm();
        let h = ms.h1_norms(&f)?;
        let bmo = ms.bmo_norm(&g, &grid).value;
        if bmo <= BMO_ZERO * ms.operator_norm(&g) || h.h1_s <= 0.0 {
            rep.skipped += 1;
            continue;
        }
        rep.samples += 1;
        rep.max_ratio_c1 = rep.max_ratio_c1.max(pairing / ((h.h1_s * h.h1_g).sqrt() * bmo));
        rep.max_ratio_c2 = rep.max_ratio_c2.max(pairing / (h.h1_s * bmo));
        rep.max_h1_ratio = rep.max_h1_ratio.max(h.h1_g / h.h1_s);
    }
    Ok(rep)
}

/// `h (T_t g)^{1/2}` for `g >= 0`.
fn weighted(ms: &MultiplierSemigroup, h: &AlgebraElement, g: &AlgebraElement, t: f64) -> AlgebraElement {
    let grp = &ms.group;
    let root = AlgebraElement::from_matrix(&psd_sqrt(&ms.apply(t, g).matrix(grp)), grp);
    h.product(&root, grp)
}

/// Positive `g = k^* k` with `tau(g) = 1` and `h` with `tau(h^* h) = 1`.
fn hypothesis_inputs(ms: &MultiplierSemigroup, rng: &mut impl rand::Rng) -> (AlgebraElement, AlgebraElement) {
    let n = ms.order();
    let grp = &ms.group;
    let k = AlgebraElement::random(n, rng);
    let g = k.abs_sq(grp);
    let g = g.scale(C64::new(1.0 / g.trace(grp).re, 0.0));
    let h = AlgebraElement::random(n, rng);
    let h = h.scale(C64::new(1.0 / h.norm2(), 0.0));
    (g, h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NcHypothesisReport {
    pub group: String,
    pub length: String,
    pub epsilons: Vec<f64>,
    /// Worst `||(T_{t+et} - T_t) f||_1 / ||f||_1` over samples and `t`, per epsilon.
    pub sups: Vec<f64>,
    pub r: Option<f64>,
    pub c3: Option<f64>,
    /// Worst `tau[(M_{8t} |h (T_t g)^{1/2}|^2)^{1/2}] / (tau(g) tau(h^* h))^{1/2}`.
    pub bilinear_constant: f64,
}

/// `tau |x|` via the singular values of the represented operator.
fn l1_norm(ms: &MultiplierSemigroup, f: &AlgebraElement) -> f64 {
    trace_sqrt(&f.abs_sq(&ms.group).matrix(&ms.group))
}

pub fn estimate_group_hypotheses(ms: &MultiplierSemigroup, samples: usize, seed: u64) -> NcHypothesisReport {
    let n = ms.order();
    let grp = &ms.group;
    let times = ms.default_grid().with_density(4).points();
    let epsilons: Vec<f64> = crate::theorems::hypotheses::EPSILON_EXPONENTS.map(|k| 2.0f64.powi(-k)).collect();
    let mut rng = sampling::rng(seed);
    let inputs: Vec<AlgebraElement> = (0..samples).map(|_| AlgebraElement::random(n, &mut rng)).collect();
    let sups: Vec<f64> = epsilons
        .iter()
        .map(|&e| {
            let mut worst = 0.0f64;
            for f in &inputs {
                let norm = l1_norm(ms, f);
                for &t in &times {
                    let d = f.multiply(|g| {
                        let p = ms.psi.get(g);
                        (-t * p).exp() * (-t * e * p).exp_m1()
                    });
                    worst = worst.max(l1_norm(ms, &d) / norm);
                }
            }
            worst
        })
        .collect();
    let (r, c3) = if sups.iter().all(|&s| s <= 1e-300) {
        (None, None)
    } else {
        let pts: Vec<(f64, f64)> = epsilons.iter().zip(&sups).filter(|(_, &s)| s > 0.0).map(|(&e, &s)| (e.ln(), s.ln())).collect();
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let r = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        let c3 = epsilons.iter().zip(&sups).map(|(&e, &s)| s / e.powf(r)).fold(0.0, f64::max);
        (Some(r), Some(c3))
    };
    let mut bilinear = 0.0f64;
    for _ in 0..samples {
        let (g, h) = hypothesis_inputs(ms, &mut rng);
        for &t in &times {
            let x = weighted(ms, &h, &g, t).abs_sq(grp);
            bilinear = bilinear.max(trace_sqrt(&ms.average(8.0 * t, &x).matrix(grp)));
        }
    }
    NcHypothesisReport {
        group: grp.name().into(),
        length: ms.psi.name.clone(),
        epsilons,
        sups,
        r,
        c3,
        bilinear_constant: bilinear,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NcAtomReport {
    pub group: String,
    pub length: String,
    pub times: Vec<f64>,
    pub sup_by_time: Vec<f64>,
    pub sup: f64,
}

/// Atoms `h (T_t g)^{1/2} - T_t(h (T_t g)^{1/2})` and the sup of `||S(atom)||_1`.
pub fn verify_group_atoms(ms: &MultiplierSemigroup, times: usize, per_time: usize, seed: u64) -> Result<NcAtomReport> {
    let grid = ms.default_grid();
    let ts = log_space(grid.t_min, grid.t_max, times);
    let mut rng = sampling::rng(seed);
    let mut sup_by_time = Vec::with_capacity(ts.len());
    for &t in &ts {
        let mut best = 0.0f64;
        for _ in 0..per_time {
            let (g, h) = hypothesis_inputs(ms, &mut rng);
            let x = weighted(ms, &h, &g, t);
            let atom = ms.project_off_kernel(&x.sub(&ms.apply(t, &x)));
            best = best.max(ms.h1_norms(&atom)?.h1_s);
        }
        sup_by_time.push(best);
    }
    let sup = sup_by_time.iter().copied().fold(0.0, f64::max);
    Ok(NcAtomReport { group: ms.group.name().into(), length: ms.psi.name.clone(), times: ts, sup_by_time, sup })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConvexityReport {
    pub samples: usize,
    pub dimension: usize,
    /// Smallest `tau(A^{1/2}) + tau(B^{1/2}) - tau((A+B)^{1/2})`, relative.
    pub min_slack: f64,
    pub violations: usize,
    pub passed: bool,
}

/// `tau((A+B)^{1/2}) <= tau(A^{1/2}) + tau(B^{1/2})` for random PSD `A`, `B` of mixed rank.
pub fn check_two_convexity(dimension: usize, samples: usize, seed: u64) -> ConvexityReport {
    let mut rng = sampling::rng(seed);
    let mut min_slack = f64::INFINITY;
    let mut violations = 0;
    for i in 0..samples {
        let ra = 1 + i % dimension;
        let rb = 1 + (i / dimension) % dimension;
        let a = sampling::psd_matrix(dimension, ra, &mut rng);
        let b = sampling::psd_matrix(dimension, rb, &mut rng);
        let (ta, tb) = (trace_sqrt(&a), trace_sqrt(&b));
        let tab = trace_sqrt(&(&a + &b));
        let slack = (ta + tb - tab) / (ta + tb).max(1e-300);
        if slack < -1e-12 {
            violations += 1;
        }
        min_slack = min_slack.min(slack);
    }
    ConvexityReport { samples, dimension, min_slack, violations, passed: violations == 0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FiniteGroup, LengthFunction};

    fn q8() -> MultiplierSemigroup {
        let g = FiniteGroup::quaternion().unwrap();
        let psi = LengthFunction::indicator(&g).unwrap();
        MultiplierSemigroup::new(g, psi).unwrap()
    }

    #[test]
    fn curvature_holds_and_agrees() {
        let r = check_group_curvature(&q8(), 10, 1);
        assert!(r.holds && r.agrees, "{r:?}");
    }

    #[test]
    fn routes_agree() {
        assert!(check_gamma_routes(&q8(), 20, 2).passed);
    }

    #[test]
    fn operator_kadison_schwarz() {
        let r = check_operator_kadison_schwarz(&q8(), 10, 3);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn duality_ratios_are_finite() {
        let r = verify_duality(&q8(), 20, 4, None).unwrap();
        assert!(r.samples > 10 && r.max_ratio_c1.is_finite() && r.max_h1_ratio <= 2.0 + 1e-10, "{r:?}");
    }

    #[test]
    fn trivial_weight_gives_difference_atom() {
        // g = 1: (T_t 1)^{1/2} = 1, so the weighted element is h itself
        let ms = q8();
        let mut rng = sampling::rng(5);
        let h = AlgebraElement::random(8, &mut rng);
        let x = weighted(&ms, &h, &AlgebraElement::unit(&ms.group), 0.7);
        assert!(x.max_abs_diff(&h) < 1e-12);
    }

    #[test]
    fn hypotheses_and_atoms_are_finite() {
        let ms = q8();
        let h = estimate_group_hypotheses(&ms, 4, 6);
        assert!((h.r.unwrap() - 1.0).abs() < 0.1, "{h:?}");
        assert!(h.bilinear_constant.is_finite() && h.bilinear_constant > 0.0);
        let a = verify_group_atoms(&ms, 5, 5, 7).unwrap();
        assert!(a.sup.is_finite() && a.sup > 0.0);
    }

    #[test]
    fn square_root_trace_is_subadditive() {
        let r = check_two_convexity(6, 100, 8);
        assert!(r.passed, "{r:?}");
    }
}
