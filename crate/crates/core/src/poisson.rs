//! Subordinated Poisson semigroup `P_t = exp(-t sqrt(-L))` and the subordination inequalities.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, C64};
use crate::grid::TimeGrid;
use crate::quadrature::{integrate_adaptive, uniform_breaks, GaussLegendre};
use crate::semigroup::{Generator, Semigroup, SpectralDecomposition};

/// Semigroup with multipliers `exp(-t sqrt(r_k))` on the heat eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSemigroup {
    base: SpectralDecomposition,
    rates: Vec<f64>,
}

impl PoissonSemigroup {
    pub fn subordinate(base: SpectralDecomposition) -> Self {
        let rates = base.heat_rates().iter().map(|r| r.sqrt()).collect();
        Self { base, rates }
    }

    pub fn base(&self) -> &SpectralDecomposition {
        &self.base
    }

    /// `|| (d^2/dt^2 + L) P_t f ||_2`, with the time derivative taken spectrally and
    /// `L` applied as the generator matrix.
    pub fn harmonicity_residual(&self, g: &Generator, t: f64, f: &ScalarField) -> f64 {
        let rates = self.base.heat_rates();
        let second = self.base.apply_multiplier(f, |k| rates[k] * (-t * self.rates[k]).exp());
        let lp = g.apply(&self.apply(t, f));
        (&second + &lp).norm_p(self.base.mu(), 2.0)
    }

    /// `P_t f` by the subordination integral
    /// `P_t = (2/sqrt(pi)) int_0^inf e^{-v^2} T_{t^2/(4v^2)} dv`.
    pub fn apply_by_subordination(&self, t: f64, f: &ScalarField) -> ScalarField {
        if t == 0.0 {
            return f.clone();
        }
        let n = f.len();
        let coeffs = self.base.coefficients(f);
        let heat = self.base.heat_rates();
        let rule = GaussLegendre::new(16);
        // e^{-v^2} < 1e-18 beyond v = 6.5
        let res = integrate_adaptive(&rule, &uniform_breaks(0.0, 6.5, 13), 1e-12, 1e-300, 20_000, |v| {
            let w = (-v * v).exp();
            let field = if v == 0.0 {
                self.base.kernel_projection(f)
            } else {
                let u = t * t / (4.0 * v * v);
                self.base.synthesize_with(&coeffs, |k| (-u * heat[k]).exp())
            };
            field.iter().flat_map(|z| [w * z.re, w * z.im]).collect()
        });
        let c = 2.0 / core::f64::consts::PI.sqrt();
        (0..n).map(|x| C64::new(c * res.value[2 * x], c * res.value[2 * x + 1])).collect()
    }
}

impl Semigroup for PoissonSemigroup {
    fn decomposition(&self) -> &SpectralDecomposition {
        &self.base
    }

    fn rates(&self) -> &[f64] {
        &self.rates
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SubordinationReport {
    pub pairs: usize,
    /// Largest `t P_y f - y P_t f` over pairs `t <= y` and points, relative to `y ||f||_inf`.
    pub max_violation_ratio: f64,
    /// Largest `|(P_y - P_{y+t}) f| - (8t/y) P_{y/2} f`, relative to `||f||_inf`.
    pub max_violation_difference: f64,
    pub violations: usize,
    pub tolerance: f64,
    /// Smallest ratio `(8t/y) P_{y/2} f / |(P_y - P_{y+t}) f|` where the left side is nonzero.
    pub min_slack_difference: f64,
}

/// Checks `P_y f / y <= P_t f / t` and `|(P_y - P_{y+t}) f| <= (8t/y) P_{y/2} f`
/// pointwise for all grid pairs `t <= y`, for nonnegative `f`.
pub fn check_subordination(ps: &PoissonSemigroup, f: &ScalarField, grid: &TimeGrid, tol: f64) -> Result<SubordinationReport> {
    if let Some((index, value)) = f.is_nonnegative(0.0) {
        return Err(Error::NegativeInput { index, value });
    }
    let sd = ps.base();
    let coeffs = sd.coefficients(f);
    let sqrt_r = ps.rates();
    let scale = f.norm_inf().max(1e-300);
    let pts = grid.points();
    let at: Vec<Vec<f64>> = pts.iter().map(|&t| ps.apply_coefficients(t, &coeffs).real_parts()).collect();
    let mut report = SubordinationReport {
        pairs: 0,
        max_violation_ratio: f64::NEG_INFINITY,
        max_violation_difference: f64::NEG_INFINITY,
        violations: 0,
        tolerance: tol,
        min_slack_difference: f64::INFINITY,
    };
    for (iy, &y) in pts.iter().enumerate() {
        let half = ps.apply_coefficients(0.5 * y, &coeffs).real_parts();
        for (it, &t) in pts.iter().enumerate().take(iy + 1) {
            report.pairs += 1;
            let mut bad = false;
            for x in 0..f.len() {
                let a = (t * at[iy][x] - y * at[it][x]) / (y * scale);
                report.max_violation_ratio = report.max_violation_ratio.max(a);
                bad |= a > tol;
            }
            let diff = sd.synthesize_with(&coeffs, |k| {
                let e = (-y * sqrt_r[k]).exp();
                -e * (-t * sqrt_r[k]).exp_m1()
            });
            for x in 0..f.len() {
                let lhs = diff[x].re.abs();
                let rhs = 8.0 * t / y * half[x];
                let b = (lhs - rhs) / scale;
                report.max_violation_difference = report.max_violation_difference.max(b);
                bad |= b > tol;
                if lhs > 1e-12 * scale {
                    report.min_slack_difference = report.min_slack_difference.min(rhs / lhs);
                }
            }
            if bad {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}
