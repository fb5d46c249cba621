//! Conical and vertical square functions, their truncations and `H_1` norms.
//!
//! With `f = sum_k a_k phi_k`, every integrand is a finite sum of exponentials in
//! the time variable, so all time integrals are evaluated in closed form through
//! the mode tensor `Gamma(phi_j, phi_k)(x)` and its eigen-expansion
//! `beta[m][j,k] = <phi_m, Gamma(phi_j, phi_k)>_mu`. A second path integrates the
//! same integrands numerically.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, C64};
use crate::gamma::gamma_diagonal;
use crate::quadrature::{integrate_adaptive, uniform_breaks, GaussLegendre};
use crate::semigroup::{Generator, Semigroup, SpectralDecomposition};

/// Largest state space for which the `n^3` tensor is built by default.
pub const DEFAULT_TENSOR_CAP: usize = 128;
/// Relative size of a kernel component that is rejected.
pub const KERNEL_COMPONENT_TOL: f64 = 1e-10;
/// Relative tolerance of the adaptive quadrature path.
pub const QUADRATURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Method {
    SpectralExact,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SquareFunctionResult {
    /// Pointwise square function (real, nonnegative).
    pub field: ScalarField,
    /// `tau(field)`.
    pub h1_norm: f64,
    pub method: Method,
}

impl SquareFunctionResult {
    fn from_squares(squares: Vec<f64>, mu: &[f64], method: Method) -> Self {
        let roots: Vec<f64> = squares.iter().map(|&v| v.max(0.0).sqrt()).collect();
        let h1_norm = roots.iter().zip(mu).map(|(v, m)| v * m).sum();
        Self { field: ScalarField::from_real(&roots), h1_norm, method }
    }

    pub fn values(&self) -> Vec<f64> {
        self.field.real_parts()
    }
}

/// `Gamma(phi_j, phi_k)(x)` for all `j, k, x` and its expansion in the eigenbasis.
#[derive(Debug, Clone)]
pub struct GammaTensor {
    rates: Vec<f64>,
    kernel: Vec<bool>,
    basis: DMatrix<f64>,
    mu: Vec<f64>,
    /// `modes[x][(j, k)] = Gamma(phi_j, phi_k)(x)`.
    modes: Vec<DMatrix<f64>>,
    /// `beta[m][(j, k)] = sum_x mu_x phi_m(x) Gamma(phi_j, phi_k)(x)`.
    beta: Vec<DMatrix<f64>>,
}

impl GammaTensor {
    pub fn new(g: &Generator, sd: &SpectralDecomposition) -> Result<Self> {
        Self::with_cap(g, sd, DEFAULT_TENSOR_CAP)
    }

    pub fn with_cap(g: &Generator, sd: &SpectralDecomposition, cap: usize) -> Result<Self> {
        let n = g.n();
        if n > cap {
            return Err(Error::TooLarge { n, cap });
        }
        let q = g.matrix();
        let phi = sd.basis();
        // Gamma_x = W^T W with W[y][j] = sqrt(Q_xy / 2) (phi_j(y) - phi_j(x))
        let modes: Vec<DMatrix<f64>> = (0..n)
            .map(|x| {
                let w = DMatrix::from_fn(n, n, |y, j| {
                    if y == x {
                        0.0
                    } else {
                        (0.5 * q[(x, y)]).sqrt() * (phi[(y, j)] - phi[(x, j)])
                    }
                });
                w.transpose() * w
            })
            .collect();
        let mu = sd.mu().to_vec();
        let beta = (0..n)
            .map(|m| {
                let mut b = DMatrix::zeros(n, n);
                for (x, gx) in modes.iter().enumerate() {
                    let c = mu[x] * phi[(x, m)];
                    if c != 0.0 {
                        b += gx * c;
                    }
                }
                b
            })
            .collect();
        Ok(Self {
            rates: sd.heat_rates().to_vec(),
            kernel: (0..n).map(|k| sd.is_kernel_mode(k)).collect(),
            basis: phi.clone(),
            mu,
            modes,
            beta,
        })
    }

    pub fn n(&self) -> usize {
        self.rates.len()
    }

    pub fn mode_gamma(&self, x: usize) -> &DMatrix<f64> {
        &self.modes[x]
    }

    pub fn beta(&self, m: usize) -> &DMatrix<f64> {
        &self.beta[m]
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Eigen-coefficients of `f`, rejecting a kernel component above
    /// `1e-10 ||f||_2` and zeroing the rest of it.
    pub fn coefficients(&self, sd: &SpectralDecomposition, f: &ScalarField) -> Result<Vec<C64>> {
        let mut a = sd.coefficients(f);
        let total: f64 = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let kernel: f64 = a
            .iter()
            .zip(&self.kernel)
            .filter(|(_, &k)| k)
            .map(|(c, _)| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if kernel > KERNEL_COMPONENT_TOL * total {
            return Err(Error::KernelComponent { magnitude: kernel });
        }
        for (c, &k) in a.iter_mut().zip(&self.kernel) {
            if k {
                *c = C64::new(0.0, 0.0);
            }
        }
        Ok(a)
    }

    /// `Re sum_{j,k} conj(a_j) b_k w(j,k) M[j][k]`.
    fn form(&self, a: &[C64], b: &[C64], m: &DMatrix<f64>, w: impl Fn(usize, usize) -> Result<f64>) -> Result<f64> {
        let n = self.n();
        let zero = C64::new(0.0, 0.0);
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            if a[j] == zero {
                continue;
            }
            let mut row = zero;
            for k in 0..n {
                if b[k] == zero || m[(j, k)] == 0.0 {
                    continue;
                }
                row += b[k] * (w(j, k)? * m[(j, k)]);
            }
            acc += a[j].conj() * row;
        }
        Ok(acc.re)
    }

    fn exponent_guard(&self, exponent: f64, a: &[C64], j: usize, k: usize) -> Result<()> {
        let scale = self.rates.iter().copied().fold(0.0, f64::max);
        let coefficient = (a[j].conj() * a[k]).norm();
        if exponent <= 1e-14 * scale && coefficient > 1e-14 {
            return Err(Error::ResonanceDivergence { exponent: -exponent, coefficient });
        }
        Ok(())
    }

    /// Synthesize `sum_m c_m phi_m` where `c_m = form(a, beta[m], w_m)`.
    fn expand(&self, a: &[C64], w: impl Fn(usize, usize, usize) -> Result<f64>) -> Result<Vec<f64>> {
        let n = self.n();
        let mut c = alloc::vec![0.0; n];
        for (m, cm) in c.iter_mut().enumerate() {
            *cm = self.form(a, a, &self.beta[m], |j, k| w(j, k, m))?;
        }
        Ok((0..n).map(|x| (0..n).map(|m| c[m] * self.basis[(x, m)]).sum()).collect())
    }

    /// `S^2 = int_0^inf T_s Gamma(T_s f) ds`, pointwise.
    pub fn s_squared(&self, a: &[C64]) -> Result<Vec<f64>> {
        let r = &self.rates;
        self.expand(a, |j, k, m| {
            let e = r[j] + r[k] + r[m];
            self.exponent_guard(e, a, j, k)?;
            Ok(1.0 / e)
        })
    }

    /// `G^2 = int_0^inf Gamma(T_s f) ds`, pointwise.
    pub fn g_squared(&self, a: &[C64]) -> Result<Vec<f64>> {
        let r = &self.rates;
        (0..self.n())
            .map(|x| {
                self.form(a, a, &self.modes[x], |j, k| {
                    let e = r[j] + r[k];
                    self.exponent_guard(e, a, j, k)?;
                    Ok(1.0 / e)
                })
            })
            .collect()
    }

    /// `S_s^2 = int_s^inf T_{y - s/2} Gamma(T_{y + s/2} f) dy`.
    pub fn truncated_s_squared(&self, a: &[C64], s: f64) -> Result<Vec<f64>> {
        let r = &self.rates;
        self.expand(a, |j, k, m| {
            let e = r[j] + r[k] + r[m];
            self.exponent_guard(e, a, j, k)?;
            Ok((-s * (1.5 * (r[j] + r[k]) + 0.5 * r[m])).exp() / e)
        })
    }

    /// `d/ds S_s^2`.
    pub fn truncated_s_squared_derivative(&self, a: &[C64], s: f64) -> Result<Vec<f64>> {
        let r = &self.rates;
        self.expand(a, |j, k, m| {
            let e = r[j] + r[k] + r[m];
            self.exponent_guard(e, a, j, k)?;
            let d = 1.5 * (r[j] + r[k]) + 0.5 * r[m];
            Ok(-d * (-s * d).exp() / e)
        })
    }

    /// `G_s^2 = int_s^inf Gamma(T_{2y} f) dy`.
    pub fn truncated_g_squared(&self, a: &[C64], s: f64) -> Result<Vec<f64>> {
        let r = &self.rates;
        (0..self.n())
            .map(|x| {
                self.form(a, a, &self.modes[x], |j, k| {
                    let e = r[j] + r[k];
                    self.exponent_guard(e, a, j, k)?;
                    Ok((-2.0 * s * e).exp() / (2.0 * e))
                })
            })
            .collect()
    }

    /// `Gamma(f)(x)` from the tensor.
    pub fn gamma_from_coefficients(&self, a: &[C64]) -> Vec<f64> {
        (0..self.n())
            .map(|x| self.form(a, a, &self.modes[x], |_, _| Ok(1.0)).unwrap_or(0.0))
            .collect()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// `sum_m phi_m sum_{j,k} conj(a_j) a_k w(j,k,m) beta[m][j,k]` with arbitrary weights.
    pub fn weighted_expansion(&self, a: &[C64], w: impl Fn(usize, usize, usize) -> f64) -> Vec<f64> {
        self.expand(a, |j, k, m| Ok(w(j, k, m))).unwrap_or_default()
    }

    /// `sum_{j,k} conj(a_j) b_k w(j,k) Gamma(phi_j, phi_k)(x)` at every point.
    pub fn weighted_pointwise(&self, a: &[C64], b: &[C64], w: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        (0..self.n())
            .map(|x| self.form(a, b, &self.modes[x], |j, k| Ok(w(j, k))).unwrap_or(0.0))
            .collect()
    }

    /// `tau(Gamma(phi_j, phi_k))`, which equals `r_j delta_jk`.
    pub fn trace_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut t = DMatrix::zeros(n, n);
        for (x, gx) in self.modes.iter().enumerate() {
            t += gx * self.mu[x];
        }
        t
    }
}

/// Pointwise square root; entries are clamped at zero.
pub fn sqrt_field(squares: &[f64]) -> Vec<f64> {
    squares.iter().map(|&v| v.max(0.0).sqrt()).collect()
}

/// `S_Gamma(f)` in closed form.
pub fn square_function_s(sd: &SpectralDecomposition, tensor: &GammaTensor, f: &ScalarField) -> Result<SquareFunctionResult> {
    let a = tensor.coefficients(sd, f)?;
    Ok(SquareFunctionResult::from_squares(tensor.s_squared(&a)?, sd.mu(), Method::SpectralExact))
}

/// `G_Gamma(f)` in closed form.
pub fn square_function_g(sd: &SpectralDecomposition, tensor: &GammaTensor, f: &ScalarField) -> Result<SquareFunctionResult> {
    let a = tensor.coefficients(sd, f)?;
    Ok(SquareFunctionResult::from_squares(tensor.g_squared(&a)?, sd.mu(), Method::SpectralExact))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct H1Norms {
    pub h1_s: f64,
    pub h1_g: f64,
}

pub fn h1_norms(sd: &SpectralDecomposition, tensor: &GammaTensor, f: &ScalarField) -> Result<H1Norms> {
    let a = tensor.coefficients(sd, f)?;
    let mu = sd.mu();
    let tau = |sq: Vec<f64>| sqrt_field(&sq).iter().zip(mu).map(|(v, m)| v * m).sum::<f64>();
    Ok(H1Norms { h1_s: tau(tensor.s_squared(&a)?), h1_g: tau(tensor.g_squared(&a)?) })
}

/// `S_s` and `G_s` as fields.
pub fn truncated_s(sd: &SpectralDecomposition, tensor: &GammaTensor, f: &ScalarField, s: f64) -> Result<ScalarField> {
    let a = tensor.coefficients(sd, f)?;
    Ok(ScalarField::from_real(&sqrt_field(&tensor.truncated_s_squared(&a, s)?)))
}

pub fn truncated_g(sd: &SpectralDecomposition, tensor: &GammaTensor, f: &ScalarField, s: f64) -> Result<ScalarField> {
    let a = tensor.coefficients(sd, f)?;
    Ok(ScalarField::from_real(&sqrt_field(&tensor.truncated_g_squared(&a, s)?)))
}

/// `d/dy T_{y/2}(S_y) = T_{y/2}(L S_y / 2 + dS_y/dy)` from the closed forms, with
/// `dS_y/dy = (dS_y^2/dy) / (2 S_y)` (taken as 0 where `S_y` vanishes).
pub fn smoothed_truncated_s_derivative(sd: &SpectralDecomposition, tensor: &GammaTensor, a: &[C64], y: f64) -> Result<Vec<f64>> {
    let sq = tensor.truncated_s_squared(a, y)?;
    let dsq = tensor.truncated_s_squared_derivative(a, y)?;
    let s = sqrt_field(&sq);
    let floor = 1e-150;
    let ds: Vec<f64> = s.iter().zip(&dsq).map(|(&v, &d)| if v > floor { 0.5 * d / v } else { 0.0 }).collect();
    let s_field = ScalarField::from_real(&s);
    let rates = sd.heat_rates();
    let ls = sd.apply_multiplier(&s_field, |k| -rates[k]);
    let inner: ScalarField = (0..s.len()).map(|x| ls[x] * 0.5 + ds[x]).collect();
    Ok(sd.apply(0.5 * y, &inner).real_parts())
}

/// `T_{y/2}(S_y)`.
pub fn smoothed_truncated_s(sd: &SpectralDecomposition, tensor: &GammaTensor, a: &[C64], y: f64) -> Result<Vec<f64>> {
    let s = sqrt_field(&tensor.truncated_s_squared(a, y)?);
    Ok(sd.apply(0.5 * y, &ScalarField::from_real(&s)).real_parts())
}

/// Integration window `[s_lo, s_hi]` on which the integrands of the square
/// functions carry all but `~1e-18` of their mass.
pub fn integration_window(sd: &SpectralDecomposition) -> (f64, f64) {
    let r_max = sd.spectral_radius().max(f64::MIN_POSITIVE);
    let r_min = sd.spectral_gap().unwrap_or(1.0);
    (1e-14 / r_max, (1e18f64).ln() / r_min)
}

/// `int_0^inf F(s) ds` through `s = e^u` with adaptive Gauss-Legendre panels,
/// adding `s_lo F(s_lo)` for the initial sliver.
pub fn integrate_half_line(sd: &SpectralDecomposition, rel_tol: f64, f: impl Fn(f64) -> Vec<f64>) -> Vec<f64> {
    let (lo, hi) = integration_window(sd);
    let (u0, u1) = (lo.ln(), hi.ln());
    let panels = ((u1 - u0).ceil() as usize).max(4);
    let rule = GaussLegendre::new(16);
    let head = f(lo);
    let res = integrate_adaptive(&rule, &uniform_breaks(u0, u1, panels), rel_tol, 0.0, 20_000, |u| {
        let s = u.exp();
        f(s).into_iter().map(|v| v * s).collect()
    });
    res.value.iter().zip(&head).map(|(v, h)| v + h * lo).collect()
}

/// `S_Gamma(f)` by numerical integration of `T_s Gamma(T_s f)`, with `Gamma` from its Markov form.
pub fn square_function_s_quadrature(g: &Generator, sd: &SpectralDecomposition, f: &ScalarField) -> Result<SquareFunctionResult> {
    check_kernel(sd, f)?;
    let squares = integrate_half_line(sd, QUADRATURE_TOL, |s| {
        let gamma = gamma_diagonal(g, &sd.apply(s, f));
        sd.apply(s, &ScalarField::from_real(&gamma)).real_parts()
    });
    Ok(SquareFunctionResult::from_squares(squares, sd.mu(), Method::Quadrature))
}

/// `G_Gamma(f)` by numerical integration of `Gamma(T_s f)`.
pub fn square_function_g_quadrature(g: &Generator, sd: &SpectralDecomposition, f: &ScalarField) -> Result<SquareFunctionResult> {
    check_kernel(sd, f)?;
    let squares = integrate_half_line(sd, QUADRATURE_TOL, |s| gamma_diagonal(g, &sd.apply(s, f)));
    Ok(SquareFunctionResult::from_squares(squares, sd.mu(), Method::Quadrature))
}

fn check_kernel(sd: &SpectralDecomposition, f: &ScalarField) -> Result<()> {
    let total = f.norm_p(sd.mu(), 2.0);
    let kernel = sd.kernel_component_norm(f);
    if kernel > KERNEL_COMPONENT_TOL * total {
        return Err(Error::KernelComponent { magnitude: kernel });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{sampling, zoo};

    #[test]
    fn constant_is_rejected() {
        let g = zoo::cycle(4, 1.0, alloc::vec![1.0; 4]).unwrap();
        let sd = g.decompose().unwrap();
        let t = GammaTensor::new(&g, &sd).unwrap();
        let one = ScalarField::constant(4, 1.0);
        assert!(matches!(square_function_s(&sd, &t, &one), Err(Error::KernelComponent { .. })));
        assert!(matches!(GammaTensor::with_cap(&g, &sd, 3), Err(Error::TooLarge { n: 4, cap: 3 })));
    }

    #[test]
    fn single_mode_vertical_function() {
        let (a, b) = (1.0, 2.0);
        let g = zoo::two_state(a, b).unwrap();
        let sd = g.decompose().unwrap();
        let t = GammaTensor::new(&g, &sd).unwrap();
        let phi = ScalarField::from_real(&[sd.basis()[(0, 1)], sd.basis()[(1, 1)]]);
        let gamma = gamma_diagonal(&g, &phi);
        let res = square_function_g(&sd, &t, &phi).unwrap();
        for x in 0..2 {
            let expected = (gamma[x] / (2.0 * (a + b))).sqrt();
            assert!((res.field[x].re - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_and_quadrature_agree() {
        let g = zoo::random_reversible(6, 0.5, 11).unwrap();
        let sd = g.decompose().unwrap();
        let t = GammaTensor::new(&g, &sd).unwrap();
        let f = sampling::smooth(&sd, true, &mut sampling::rng(4));
        let (se, sq) = (square_function_s(&sd, &t, &f).unwrap(), square_function_s_quadrature(&g, &sd, &f).unwrap());
        let (ge, gq) = (square_function_g(&sd, &t, &f).unwrap(), square_function_g_quadrature(&g, &sd, &f).unwrap());
        assert!(se.field.max_abs_diff(&sq.field) < 1e-8 * se.field.norm_inf());
        assert!(ge.field.max_abs_diff(&gq.field) < 1e-8 * ge.field.norm_inf());
    }

    #[test]
    fn truncation_at_zero_is_the_full_function() {
        let g = zoo::path(5, 1.0, alloc::vec![1.0; 5]).unwrap();
        let sd = g.decompose().unwrap();
        let t = GammaTensor::new(&g, &sd).unwrap();
        let f = sampling::smooth(&sd, true, &mut sampling::rng(1));
        let a = t.coefficients(&sd, &f).unwrap();
        let full = t.s_squared(&a).unwrap();
        let trunc = t.truncated_s_squared(&a, 0.0).unwrap();
        for (x, y) in full.iter().zip(&trunc) {
            assert!((x - y).abs() < 1e-14 * x.abs().max(1.0));
        }
    }
}
