//! Carleson measures that are piecewise constant in time, their Poisson Carleson
//! norms, the `L_p(nu)` embedding ratio, and the BMO bound for `int P_t(g nu_t) dt`.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::TimeGrid;
use crate::norms::{big_bmo_norm, sup_over_grid, NormReport};
use crate::poisson::PoissonSemigroup;
use crate::quadrature::{integrate_adaptive, GaussLegendre};
use crate::semigroup::Semigroup;

/// `nu_t = densities[i]` on `[breakpoints[i], breakpoints[i+1])`, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarlesonMeasure {
    pub breakpoints: Vec<f64>,
    pub densities: Vec<Vec<f64>>,
}

impl CarlesonMeasure {
    pub fn new(breakpoints: Vec<f64>, densities: Vec<Vec<f64>>) -> Result<Self> {
        let m = Self { breakpoints, densities };
        m.validate(None)?;
        Ok(m)
    }

    /// Checks ordering, slab count, optional state count `n`, and nonnegativity.
    pub fn validate(&self, n: Option<usize>) -> Result<()> {
        let b = &self.breakpoints;
        if b.len() < 2 || b[0] < 0.0 || !b.windows(2).all(|w| w[0] < w[1]) || !b.iter().all(|t| t.is_finite()) {
            return Err(Error::InvalidArgument(
                "breakpoints must be finite, nonnegative and strictly increasing, at least two".into(),
            ));
        }
        if self.densities.len() != b.len() - 1 {
            return Err(Error::Dimension(alloc::format!(
                "{} slabs need {} densities, got {}",
                b.len() - 1,
                b.len() - 1,
                self.densities.len()
            )));
        }
        let width = n.unwrap_or(self.densities[0].len());
        for d in &self.densities {
            if d.len() != width {
                return Err(Error::Dimension(alloc::format!("density of length {} on {} states", d.len(), width)));
            }
            if let Some((index, &value)) = d.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
                return Err(Error::NegativeInput { index, value });
            }
        }
        Ok(())
    }

    pub fn zero(n: usize, breakpoints: Vec<f64>) -> Self {
        let k = breakpoints.len() - 1;
        Self { breakpoints, densities: alloc::vec![alloc::vec![0.0; n]; k] }
    }

    pub fn slabs(&self) -> usize {
        self.densities.len()
    }

    pub fn n(&self) -> usize {
        self.densities.first().map_or(0, |d| d.len())
    }

    /// `int_0^T nu_s ds` for piecewise-constant `nu`.
    pub fn cumulative(&self, upper: f64) -> Vec<f64> {
        let mut acc = alloc::vec![0.0; self.n()];
        for (i, d) in self.densities.iter().enumerate() {
            let (a, b) = (self.breakpoints[i], self.breakpoints[i + 1]);
            let len = (b.min(upper) - a).max(0.0);
            if len > 0.0 {
                for (s, v) in acc.iter_mut().zip(d) {
                    *s += len * v;
                }
            }
        }
        acc
    }

    pub fn total(&self) -> Vec<f64> {
        self.cumulative(f64::INFINITY)
    }
}

/// `||nu||_{P,alpha} = sup_t || P_t int_0^{alpha t} nu_s ds ||_inf`, over the grid,
/// the kinks `t_i / alpha`, and the `t -> inf` limit.
pub fn carleson_norm(ps: &PoissonSemigroup, nu: &CarlesonMeasure, alpha: f64, grid: &TimeGrid) -> NormReport {
    let profile = |t: Option<f64>| match t {
        Some(t) => ps.apply(t, &ScalarField::from_real(&nu.cumulative(alpha * t))).norm_inf(),
        None => ps.limit(&ScalarField::from_real(&nu.total())).norm_inf(),
    };
    let mut report = sup_over_grid(grid, false, profile);
    for &b in &nu.breakpoints {
        let t = b / alpha;
        if t > 0.0 {
            let v = profile(Some(t));
            if v > report.value {
                report.value = v;
                report.argmax_t = Some(t);
            }
        }
    }
    report
}

/// `F = int_0^inf P_t(g nu_t) dt`, exactly: slab `[a, b)` contributes the
/// multiplier `(e^{-a s_k} - e^{-b s_k}) / s_k` (`b - a` on the kernel).
pub fn poisson_balayage(ps: &PoissonSemigroup, nu: &CarlesonMeasure, g: &ScalarField) -> ScalarField {
    let sd = ps.decomposition();
    let s = ps.rates();
    let n = g.len();
    let mut out = ScalarField::zeros(n);
    for (i, d) in nu.densities.iter().enumerate() {
        let (a, b) = (nu.breakpoints[i], nu.breakpoints[i + 1]);
        let gd: ScalarField = (0..n).map(|x| g[x] * d[x]).collect();
        let part = sd.apply_multiplier(&gd, |k| {
            if s[k] == 0.0 {
                b - a
            } else {
                let ea = (-a * s[k]).exp();
                -ea * (-(b - a) * s[k]).exp_m1() / s[k]
            }
        });
        out = &out + &part;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BmoBound {
    /// `||F||_BMO(P)` with the quadratic oscillation.
    pub bmo: f64,
    /// `sup_s || P_s |F - P_s F| ||_inf`, the first-power oscillation used in the bound's derivation.
    pub bmo_first_power: f64,
    pub carleson_norm: f64,
    /// `bmo / carleson_norm`, to be compared with 37.
    pub ratio: f64,
    pub ratio_first_power: f64,
}

/// Evaluates `||int_0^inf P_t(g nu_t) dt||_BMO(P) / ||nu||_{P,4}`.
pub fn bmo_bound(ps: &PoissonSemigroup, nu: &CarlesonMeasure, g: &ScalarField, grid: &TimeGrid) -> BmoBound {
    let f = poisson_balayage(ps, nu, g);
    let bmo = big_bmo_norm(ps, &f, grid, false).value;
    let first = sup_over_grid(grid, false, |t| {
        let centred = match t {
            Some(t) => &f - &ps.apply(t, &f),
            None => &f - &ps.limit(&f),
        };
        let abs = ScalarField::from_real(&centred.iter().map(|z| z.norm()).collect::<Vec<_>>());
        match t {
            Some(t) => ps.apply(t, &abs).norm_inf(),
            None => ps.limit(&abs).norm_inf(),
        }
    })
    .value;
    let cn = carleson_norm(ps, nu, 4.0, grid).value;
    let div = |x: f64| if cn > 0.0 { x / cn } else { 0.0 };
    BmoBound { bmo, bmo_first_power: first, carleson_norm: cn, ratio: div(bmo), ratio_first_power: div(first) }
}

/// `||P f||_{L_p(nu)}^p = int sum_x |P_t f(x)|^p nu_t(x) mu_x dt`. For `p = 2`
/// the slab integrals are exact; otherwise adaptive Gauss-Legendre per slab.
pub fn poisson_lp_nu(ps: &PoissonSemigroup, nu: &CarlesonMeasure, f: &ScalarField, p: f64) -> f64 {
    let sd = ps.decomposition();
    let mu = sd.mu();
    let a = sd.coefficients(f);
    let n = f.len();
    let mut total = 0.0;
    if p == 2.0 {
        let s = ps.rates();
        let phi = sd.basis();
        for (i, d) in nu.densities.iter().enumerate() {
            let (lo, hi) = (nu.breakpoints[i], nu.breakpoints[i + 1]);
            let w = |e: f64| {
                if e == 0.0 {
                    hi - lo
                } else {
                    -(-lo * e).exp() * (-(hi - lo) * e).exp_m1() / e
                }
            };
            for x in 0..n {
                if d[x] == 0.0 {
                    continue;
                }
                let mut acc = 0.0;
                for j in 0..n {
                    let cj = a[j] * phi[(x, j)];
                    for k in 0..n {
                        let ck = a[k] * phi[(x, k)];
                        acc += (cj.conj() * ck).re * w(s[j] + s[k]);
                    }
                }
                total += acc * d[x] * mu[x];
            }
        }
        return total;
    }
    let rule = GaussLegendre::new(16);
    for (i, d) in nu.densities.iter().enumerate() {
        let (lo, hi) = (nu.breakpoints[i], nu.breakpoints[i + 1]);
        let res = integrate_adaptive(&rule, &[lo, hi], 1e-10, 1e-300, 4_000, |t| {
            let pt = ps.apply_coefficients(t, &a);
            alloc::vec![(0..n).map(|x| pt[x].norm().powf(p) * d[x] * mu[x]).sum::<f64>()]
        });
        total += res.value[0];
    }
    total
}

/// Same quantity for `p = 2` by Gauss-Legendre per slab (the numerical cross-check).
pub fn poisson_l2_nu_quadrature(ps: &PoissonSemigroup, nu: &CarlesonMeasure, f: &ScalarField) -> f64 {
    let sd = ps.decomposition();
    let mu = sd.mu();
    let a = sd.coefficients(f);
    let rule = GaussLegendre::new(16);
    let mut total = 0.0;
    for (i, d) in nu.densities.iter().enumerate() {
        let (lo, hi) = (nu.breakpoints[i], nu.breakpoints[i + 1]);
        let res = integrate_adaptive(&rule, &[lo, hi], 1e-12, 1e-300, 4_000, |t| {
            let pt = ps.apply_coefficients(t, &a);
            alloc::vec![(0..f.len()).map(|x| pt[x].norm_sqr() * d[x] * mu[x]).sum::<f64>()]
        });
        total += res.value[0];
    }
    total
}

/// `||P f||_{L_p(nu)} / (||f||_p ||nu||_{P,4}^{1/p})`; `0` when `nu` or `f` vanishes.
pub fn embedding_ratio(ps: &PoissonSemigroup, nu: &CarlesonMeasure, f: &ScalarField, p: f64, carleson4: f64) -> f64 {
    let num = poisson_lp_nu(ps, nu, f, p).max(0.0).powf(1.0 / p);
    let den = f.norm_p(ps.mu(), p) * carleson4.powf(1.0 / p);
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// `sup |P_t f(x)|` over slab support (nodes of each slab) against `||f||_inf`.
pub fn linf_endpoint(ps: &PoissonSemigroup, nu: &CarlesonMeasure, f: &ScalarField) -> f64 {
    let rule = GaussLegendre::new(8);
    let mut best: f64 = 0.0;
    for (i, d) in nu.densities.iter().enumerate() {
        let (lo, hi) = (nu.breakpoints[i], nu.breakpoints[i + 1]);
        let mut times: Vec<f64> = rule.nodes().iter().map(|u| 0.5 * (lo + hi) + 0.5 * (hi - lo) * u).collect();
        times.push(lo);
        for t in times {
            let pt = ps.apply(t, f);
            for x in 0..f.len() {
                if d[x] > 0.0 {
                    best = best.max(pt[x].norm());
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{sampling, zoo};

    fn poisson(n: usize) -> PoissonSemigroup {
        PoissonSemigroup::subordinate(zoo::cycle(n, 1.0, alloc::vec![1.0; n]).unwrap().decompose().unwrap())
    }

    #[test]
    fn unit_slab_has_unit_norm() {
        let ps = poisson(4);
        let nu = CarlesonMeasure::new(alloc::vec![0.0, 1.0], alloc::vec![alloc::vec![1.0; 4]]).unwrap();
        let grid = TimeGrid::new(1e-3, 1e3, 8).unwrap();
        let r = carleson_norm(&ps, &nu, 2.0, &grid);
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(carleson_norm(&ps, &CarlesonMeasure::zero(4, alloc::vec![0.0, 1.0]), 1.0, &grid).value == 0.0);
    }

    #[test]
    fn exact_and_quadrature_l2_agree() {
        let ps = poisson(5);
        let mut r = sampling::rng(2);
        let dens = (0..3).map(|_| sampling::rough(5, &mut r).abs_sq().real_parts()).collect();
        let nu = CarlesonMeasure::new(alloc::vec![0.1, 0.5, 2.0, 3.0], dens).unwrap();
        let f = sampling::rough(5, &mut r);
        let a = poisson_lp_nu(&ps, &nu, &f, 2.0);
        let b = poisson_l2_nu_quadrature(&ps, &nu, &f);
        assert!((a - b).abs() < 1e-10 * a);
    }

    #[test]
    fn rejects_bad_measures() {
        assert!(CarlesonMeasure::new(alloc::vec![1.0, 0.5], alloc::vec![alloc::vec![1.0]]).is_err());
        assert!(CarlesonMeasure::new(alloc::vec![0.0, 1.0], alloc::vec![alloc::vec![-1.0]]).is_err());
        assert!(CarlesonMeasure::new(alloc::vec![0.0, 1.0, 2.0], alloc::vec![alloc::vec![1.0]]).is_err());
    }
}
