//! Pointwise relations between truncated square functions, the averaging
//! comparison `M_y T_{y/2+s} <= 3 M_{3y}`, the gradient chain, and the bilinear
//! estimate bounding `|tau int Gamma(T_{2s} f, T_{(3+v)s} phi) ds|`.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{Chain, RunInfo};
use crate::error::Result;
use crate::field::{ScalarField, C64};
use crate::gamma::{gamma_diagonal, require_curvature};
use crate::grid::log_space;
use crate::sampling::{self, SampleKind};
use crate::semigroup::Semigroup;
use crate::square::{integrate_half_line, smoothed_truncated_s, smoothed_truncated_s_derivative, sqrt_field};

pub const LEMMA_TOL: f64 = 1e-9;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TruncationReport {
    pub info: RunInfo,
    pub samples: usize,
    /// Worst `(G_s - S_s) / max S` (must be `<= tol`).
    pub worst_g_over_s: f64,
    /// Worst `(S_t - S_s) / max S` for `s < t` (must be `<= tol`).
    pub worst_monotonicity: f64,
    /// Worst `d/ds T_{s/2}(S_s)`, normalised (must be `<= tol`).
    pub worst_smoothed_derivative: f64,
    /// Worst violation of `d/ds T_{(a+b)s} S_s >= ((a+b)/b) T_{as}(d/ds T_{bs} S_s)` for
    /// `(a, b) = (3/2 + v, 1/2)`, `v` in {0, 1/2, 1}.
    pub worst_derivative_comparison: f64,
    pub passed: bool,
}

/// `d/ds T_{cs}(S_s) = T_{cs}(c L S_s + dS_s/ds)`.
fn smoothed_derivative(chain: &Chain, a: &[C64], s: f64, c: f64, later: f64) -> Result<Vec<f64>> {
    let t = &chain.tensor;
    let sq = t.truncated_s_squared(a, s)?;
    let dsq = t.truncated_s_squared_derivative(a, s)?;
    let root = sqrt_field(&sq);
    let ds: Vec<f64> = root.iter().zip(&dsq).map(|(&v, &d)| if v > 1e-150 { 0.5 * d / v } else { 0.0 }).collect();
    let rates = chain.sd.heat_rates();
    let ls = chain.sd.apply_multiplier(&ScalarField::from_real(&root), |k| -rates[k]);
    let inner: ScalarField = (0..root.len()).map(|x| ls[x] * c + ds[x]).collect();
    Ok(chain.sd.apply(c * s + later, &inner).real_parts())
}

pub fn verify_truncations(chain: &Chain, samples: usize, seed: u64, points: usize) -> Result<TruncationReport> {
    require_curvature(&chain.generator)?;
    let grid = chain.grid();
    let times = log_space(grid.t_min, grid.t_max, points.max(2));
    let mut rng = sampling::rng(seed);
    let rmax = chain.sd.spectral_radius();
    let mut rep = TruncationReport {
        info: chain.info(grid, seed, LEMMA_TOL),
        samples,
        worst_g_over_s: f64::NEG_INFINITY,
        worst_monotonicity: f64::NEG_INFINITY,
        worst_smoothed_derivative: f64::NEG_INFINITY,
        worst_derivative_comparison: f64::NEG_INFINITY,
        passed: false,
    };
    for i in 0..samples {
        let f = sampling::field(SampleKind::cycle(i), &chain.sd, true, &mut rng);
        let a = chain.tensor.coefficients(&chain.sd, &f)?;
        let s0 = sqrt_field(&chain.tensor.s_squared(&a)?);
        let scale = max_abs(&s0).max(1e-300);
        let mut prev: Option<Vec<f64>> = None;
        for &s in &times {
            let ss = sqrt_field(&chain.tensor.truncated_s_squared(&a, s)?);
            let gs = sqrt_field(&chain.tensor.truncated_g_squared(&a, s)?);
            for x in 0..ss.len() {
                rep.worst_g_over_s = rep.worst_g_over_s.max((gs[x] - ss[x]) / scale);
            }
            if let Some(p) = &prev {
                for x in 0..ss.len() {
                    rep.worst_monotonicity = rep.worst_monotonicity.max((ss[x] - p[x]) / scale);
                }
            }
            prev = Some(ss);
            // derivatives carry a factor of order r_max
            let dscale = scale * rmax.max(1e-300);
            let d = smoothed_derivative(chain, &a, s, 0.5, 0.0)?;
            rep.worst_smoothed_derivative = rep.worst_smoothed_derivative.max(d.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) / dscale);
            for v in [0.0, 0.5, 1.0] {
                let (aa, b) = (1.5 + v, 0.5);
                let lhs = smoothed_derivative(chain, &a, s, aa + b, 0.0)?;
                let rhs = smoothed_derivative(chain, &a, s, b, aa * s)?;
                let k = (aa + b) / b;
                for x in 0..lhs.len() {
                    rep.worst_derivative_comparison = rep.worst_derivative_comparison.max((k * rhs[x] - lhs[x]) / (k * dscale));
                }
            }
        }
    }
    rep.passed = rep.worst_g_over_s <= LEMMA_TOL
        && rep.worst_monotonicity <= LEMMA_TOL
        && rep.worst_smoothed_derivative <= LEMMA_TOL
        && rep.worst_derivative_comparison <= LEMMA_TOL;
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainReport {
    pub info: RunInfo,
    pub samples: usize,
    /// Worst `Gamma(T_t f) - T_{t-s} Gamma(T_s f)` over grid pairs `s <= t`, normalised by `max Gamma(f)`.
    pub worst_gradient_chain: f64,
    /// Worst `M_y T_{y/2+s} h - 3 M_{3y} h` over `0 < s < y`, normalised by `max h`.
    pub worst_averaging: f64,
    pub passed: bool,
}

pub fn verify_chains(chain: &Chain, samples: usize, seed: u64, points: usize) -> ChainReport {
    let grid = chain.grid();
    let times = log_space(grid.t_min, grid.t_max, points.max(2));
    let sd = &chain.sd;
    let g = &chain.generator;
    let mut rng = sampling::rng(seed);
    let mut worst_chain = f64::NEG_INFINITY;
    let mut worst_avg = f64::NEG_INFINITY;
    for i in 0..samples {
        let f = sampling::field(SampleKind::cycle(i), sd, false, &mut rng);
        let scale = max_abs(&gamma_diagonal(g, &f)).max(1e-300);
        let gam: Vec<Vec<f64>> = times.iter().map(|&t| gamma_diagonal(g, &sd.apply(t, &f))).collect();
        for (it, &t) in times.iter().enumerate() {
            for (is, &s) in times.iter().enumerate().take(it + 1) {
                let rhs = sd.apply(t - s, &ScalarField::from_real(&gam[is]));
                for x in 0..f.len() {
                    worst_chain = worst_chain.max((gam[it][x] - rhs[x].re) / scale);
                }
            }
        }
        let h = sampling::positive(SampleKind::cycle(i), sd, &mut rng);
        let hs = h.norm_inf().max(1e-300);
        for &y in &times {
            let rhs = sd.average(3.0 * y, &h).scale(C64::new(3.0, 0.0));
            for frac in [1e-3, 0.25, 0.5, 0.75, 0.999] {
                let s = frac * y;
                let lhs = sd.average(y, &sd.apply(0.5 * y + s, &h));
                for x in 0..h.len() {
                    worst_avg = worst_avg.max((lhs[x].re - rhs[x].re) / hs);
                }
            }
        }
    }
    ChainReport {
        info: chain.info(grid, seed, LEMMA_TOL),
        samples,
        worst_gradient_chain: worst_chain,
        worst_averaging: worst_avg,
        passed: worst_chain <= LEMMA_TOL && worst_avg <= LEMMA_TOL,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BilinearCase {
    pub sample: usize,
    pub v: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Largest positive value of `d/dy T_{y/2}(S_y)` seen (normalised); must not exceed tolerance.
    pub derivative_sign: f64,
    /// Relative gap between the analytic derivative and a Richardson-extrapolated centred difference.
    pub derivative_cross_check: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BilinearReport {
    pub info: RunInfo,
    pub cases: Vec<BilinearCase>,
    pub max_ratio: f64,
    pub violations: usize,
    pub passed: bool,
}

/// Left side `|tau int_0^inf Gamma(T_{2s} f, T_{(3+v)s} phi) ds|` in closed form.
pub fn bilinear_lhs(chain: &Chain, a: &[C64], b: &[C64], v: f64) -> f64 {
    let r = chain.sd.heat_rates();
    let tr = chain.tensor.trace_matrix();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..a.len() {
        for k in 0..b.len() {
            let e = 2.0 * r[j] + (3.0 + v) * r[k];
            if tr[(j, k)] != 0.0 && e > 0.0 {
                acc += a[j].conj() * b[k] * (tr[(j, k)] / e);
            }
        }
    }
    acc.norm()
}

/// `A_y = int_0^y Gamma(T_s phi) ds`.
fn accumulated_gradient(chain: &Chain, b: &[C64], y: f64) -> Vec<f64> {
    let r = chain.sd.heat_rates();
    chain.tensor.weighted_pointwise(b, b, |j, k| {
        let e = r[j] + r[k];
        if e > 0.0 {
            -(-y * e).exp_m1() / e
        } else {
            y
        }
    })
}

/// Right side `(8+4v)^{1/2} ||G f||_1^{1/2} (-tau int (T_{(3/2+v)y} A_y) d/dy T_{y/2}(S_y) dy)^{1/2}`.
pub fn bilinear_rhs(chain: &Chain, a: &[C64], b: &[C64], v: f64) -> Result<f64> {
    let sd = &chain.sd;
    let mu = sd.mu();
    let g1: f64 = sqrt_field(&chain.tensor.g_squared(a)?).iter().zip(mu).map(|(x, m)| x * m).sum();
    let err = core::cell::RefCell::new(None);
    let integral = integrate_half_line(sd, 1e-9, |y| {
        let acc = sd.apply((1.5 + v) * y, &ScalarField::from_real(&accumulated_gradient(chain, b, y)));
        match smoothed_truncated_s_derivative(sd, &chain.tensor, a, y) {
            Ok(d) => alloc::vec![-(0..d.len()).map(|x| mu[x] * acc[x].re * d[x]).sum::<f64>()],
            Err(e) => {
                *err.borrow_mut() = Some(e);
                alloc::vec![0.0]
            }
        }
    })[0];
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok((8.0 + 4.0 * v).sqrt() * g1.sqrt() * integral.max(0.0).sqrt())
}

/// Analytic `d/dy T_{y/2}(S_y)` against centred differences with one Richardson step.
fn derivative_cross_check(chain: &Chain, a: &[C64], y: f64) -> Result<(f64, f64)> {
    let sd = &chain.sd;
    let exact = smoothed_truncated_s_derivative(sd, &chain.tensor, a, y)?;
    let h = 1e-2 * y;
    let val = |t: f64| smoothed_truncated_s(sd, &chain.tensor, a, t);
    let centred = |h: f64| -> Result<Vec<f64>> {
        let (p, m) = (val(y + h)?, val(y - h)?);
        Ok(p.iter().zip(&m).map(|(p, m)| (p - m) / (2.0 * h)).collect())
    };
    let (d1, d2) = (centred(h)?, centred(0.5 * h)?);
    let rich: Vec<f64> = d1.iter().zip(&d2).map(|(a, b)| (4.0 * b - a) / 3.0).collect();
    let scale = max_abs(&exact).max(max_abs(&rich)).max(1e-300);
    let gap = exact.iter().zip(&rich).fold(0.0f64, |m, (e, r)| m.max((e - r).abs())) / scale;
    let sign = exact.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) / scale;
    Ok((sign, gap))
}

pub fn verify_bilinear(chain: &Chain, samples: usize, seed: u64, vs: &[f64]) -> Result<BilinearReport> {
    require_curvature(&chain.generator)?;
    let sd = &chain.sd;
    let mut rng = sampling::rng(seed);
    let probe_times = {
        let g = chain.grid();
        log_space(g.t_min * 10.0, g.t_max / 100.0, 5)
    };
    let mut cases = Vec::new();
    for i in 0..samples {
        let f = sampling::field(SampleKind::cycle(i), sd, true, &mut rng);
        let phi = if i % 3 == 0 { f.clone() } else { sampling::field(SampleKind::cycle(i + 1), sd, true, &mut rng) };
        let a = chain.tensor.coefficients(sd, &f)?;
        let b = chain.tensor.coefficients(sd, &phi)?;
        let (mut sign, mut gap) = (f64::NEG_INFINITY, 0.0f64);
        for &y in &probe_times {
            let (s, g) = derivative_cross_check(chain, &a, y)?;
            sign = sign.max(s);
            gap = gap.max(g);
        }
        for &v in vs {
            cases.push(BilinearCase {
                sample: i,
                v,
                lhs: bilinear_lhs(chain, &a, &b, v),
                rhs: bilinear_rhs(chain, &a, &b, v)?,
                derivative_sign: sign,
                derivative_cross_check: gap,
            });
        }
    }
    let max_ratio = cases.iter().fold(0.0f64, |m, c| if c.rhs > 0.0 { m.max(c.lhs / c.rhs) } else { m });
    let violations = cases
        .iter()
        .filter(|c| c.lhs > c.rhs * (1.0 + 1e-6) + 1e-14 || c.derivative_sign > LEMMA_TOL)
        .count();
    Ok(BilinearReport {
        info: chain.info(chain.grid(), seed, 1e-6),
        cases,
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
    fn truncations_hold_on_complete_graph() {
        let chain = Chain::new(zoo::complete(5, 1.0, alloc::vec![1.0; 5]).unwrap()).unwrap();
        let r = verify_truncations(&chain, 4, 1, 12).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn chains_hold_on_path() {
        let chain = Chain::new(zoo::path(5, 1.0, alloc::vec![1.0; 5]).unwrap()).unwrap();
        let r = verify_chains(&chain, 3, 2, 10);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn bilinear_estimate_on_cycle() {
        let chain = Chain::new(zoo::cycle(5, 1.0, alloc::vec![1.0; 5]).unwrap()).unwrap();
        let r = verify_bilinear(&chain, 3, 4, &[0.5, 1.0]).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.cases.iter().all(|c| c.derivative_cross_check < 1e-5), "{r:?}");
    }
}
