//! The Fourier multiplier semigroup `T_t lambda_g = exp(-t psi(g)) lambda_g`, its
//! carre du champ and iterated form, and the operator-valued BMO and Hardy norms.

use nalgebra::DMatrix;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::algebra::{hermitian_eigenvalues, operator_norm, trace_sqrt, AlgebraElement};
use super::length::{gromov_form, require_conditionally_negative, LengthFunction, NegativityReport};
use super::FiniteGroup;
use crate::error::{Error, Result};
use crate::field::C64;
use crate::grid::TimeGrid;
use crate::norms::{sup_over_grid, NormReport};
use crate::square::KERNEL_COMPONENT_TOL;

#[derive(Debug, Clone)]
pub struct MultiplierSemigroup {
    pub group: FiniteGroup,
    pub psi: LengthFunction,
    pub gromov: DMatrix<f64>,
    pub negativity: NegativityReport,
}

impl MultiplierSemigroup {
    /// Refuses `psi` that is not conditionally negative.
    pub fn new(group: FiniteGroup, psi: LengthFunction) -> Result<Self> {
        if psi.order() != group.order() {
            return Err(Error::Dimension(alloc::format!("psi has {} entries for order {}", psi.order(), group.order())));
        }
        let negativity = require_conditionally_negative(&group, &psi)?;
        let gromov = gromov_form(&group, &psi);
        Ok(Self { group, psi, gromov, negativity })
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn default_grid(&self) -> TimeGrid {
        TimeGrid::for_rates(&self.psi.psi)
    }

    pub fn apply(&self, t: f64, f: &AlgebraElement) -> AlgebraElement {
        f.multiply(|g| (-t * self.psi.get(g)).exp())
    }

    /// `M_t = (1/t) int_0^t T_s ds`.
    pub fn average(&self, t: f64, f: &AlgebraElement) -> AlgebraElement {
        f.multiply(|g| crate::semigroup::average_multiplier(t, self.psi.get(g)))
    }

    /// `t -> inf` limit: the part supported where `psi` vanishes.
    pub fn limit(&self, f: &AlgebraElement) -> AlgebraElement {
        f.multiply(|g| if self.psi.is_kernel(g) { 1.0 } else { 0.0 })
    }

    pub fn generator(&self, f: &AlgebraElement) -> AlgebraElement {
        f.multiply(|g| -self.psi.get(g))
    }

    pub fn project_off_kernel(&self, f: &AlgebraElement) -> AlgebraElement {
        f.multiply(|g| if self.psi.is_kernel(g) { 0.0 } else { 1.0 })
    }

    /// `sum_{g,h} conj(f_g) h_h w(g,h) lambda_{g^{-1} h}`.
    fn bilinear(&self, f: &AlgebraElement, h: &AlgebraElement, w: impl Fn(usize, usize) -> f64) -> AlgebraElement {
        let n = self.order();
        let mut out = AlgebraElement::zeros(n);
        for (g, a) in f.0.iter().enumerate() {
            if *a == C64::new(0.0, 0.0) {
                continue;
            }
            for (k, b) in h.0.iter().enumerate() {
                let wt = w(g, k);
                if wt != 0.0 {
                    out.0[self.group.left_quotient(g, k)] += a.conj() * b * wt;
                }
            }
        }
        out
    }

    /// `Gamma(f, h)` from the Gromov form.
    pub fn gamma(&self, f: &AlgebraElement, h: &AlgebraElement) -> AlgebraElement {
        self.bilinear(f, h, |g, k| self.gromov[(g, k)])
    }

    /// `Gamma_2(f, h)` from the entrywise square of the Gromov form.
    pub fn gamma2(&self, f: &AlgebraElement, h: &AlgebraElement) -> AlgebraElement {
        self.bilinear(f, h, |g, k| self.gromov[(g, k)].powi(2))
    }

    /// `(L(f^* h) - L(f^*) h - f^* L(h)) / 2`.
    pub fn gamma_definitional(&self, f: &AlgebraElement, h: &AlgebraElement) -> AlgebraElement {
        let g = &self.group;
        let fs = f.adjoint(g);
        let a = self.generator(&fs.product(h, g));
        let b = self.generator(&fs).product(h, g);
        let c = fs.product(&self.generator(h), g);
        a.sub(&b).sub(&c).scale(C64::new(0.5, 0.0))
    }

    /// `(L Gamma(f,h) - Gamma(Lf, h) - Gamma(f, Lh)) / 2` with the definitional `Gamma`.
    pub fn gamma2_definitional(&self, f: &AlgebraElement, h: &AlgebraElement) -> AlgebraElement {
        let a = self.generator(&self.gamma_definitional(f, h));
        let b = self.gamma_definitional(&self.generator(f), h);
        let c = self.gamma_definitional(f, &self.generator(h));
        a.sub(&b).sub(&c).scale(C64::new(0.5, 0.0))
    }

    fn apply_at(&self, t: Option<f64>, f: &AlgebraElement) -> AlgebraElement {
        match t {
            Some(t) => self.apply(t, f),
            None => self.limit(f),
        }
    }

    /// `|| T_t(f^* f) - (T_t f)^* (T_t f) ||`.
    pub fn bmo_profile(&self, f: &AlgebraElement, t: Option<f64>) -> f64 {
        let g = &self.group;
        let tf = self.apply_at(t, f);
        let d = self.apply_at(t, &f.abs_sq(g)).sub(&tf.abs_sq(g));
        spectral_radius_hermitian(&d.matrix(g))
    }

    /// `|| T_t |f - T_t f|^2 ||`.
    pub fn big_bmo_profile(&self, f: &AlgebraElement, t: Option<f64>) -> f64 {
        let g = &self.group;
        let c = f.sub(&self.apply_at(t, f));
        spectral_radius_hermitian(&self.apply_at(t, &c.abs_sq(g)).matrix(g))
    }

    pub fn bmo_norm(&self, f: &AlgebraElement, grid: &TimeGrid) -> NormReport {
        sup_over_grid(grid, false, |t| self.bmo_profile(f, t).sqrt())
    }

    pub fn big_bmo_norm(&self, f: &AlgebraElement, grid: &TimeGrid) -> NormReport {
        sup_over_grid(grid, false, |t| self.big_bmo_profile(f, t).sqrt())
    }

    fn check_kernel(&self, f: &AlgebraElement) -> Result<()> {
        let total = f.norm2();
        let ker = self.limit(f).norm2();
        if ker > KERNEL_COMPONENT_TOL * total.max(1e-300) && ker > 0.0 {
            return Err(Error::KernelComponent { magnitude: ker });
        }
        Ok(())
    }

    /// `int_0^inf T_s Gamma(T_s f) ds`, coefficientwise in closed form.
    pub fn s_squared(&self, f: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_kernel(f)?;
        let f = self.project_off_kernel(f);
        let p = &self.psi;
        Ok(self.bilinear(&f, &f, |g, k| {
            let e = p.get(g) + p.get(k) + p.get(self.group.left_quotient(g, k));
            if e > 0.0 {
                self.gromov[(g, k)] / e
            } else {
                0.0
            }
        }))
    }

    /// `int_0^inf Gamma(T_s f) ds`.
    pub fn g_squared(&self, f: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_kernel(f)?;
        let f = self.project_off_kernel(f);
        let p = &self.psi;
        Ok(self.bilinear(&f, &f, |g, k| {
            let e = p.get(g) + p.get(k);
            if e > 0.0 {
                self.gromov[(g, k)] / e
            } else {
                0.0
            }
        }))
    }

    pub fn h1_norms(&self, f: &AlgebraElement) -> Result<NcNorms> {
        let g = &self.group;
        let s = trace_sqrt(&self.s_squared(f)?.matrix(g));
        let gg = trace_sqrt(&self.g_squared(f)?.matrix(g));
        Ok(NcNorms { h1_s: s, h1_g: gg })
    }

    /// `(T_t f)^* (T_t f)` against `T_t(f^* f)`: smallest eigenvalue of the difference.
    pub fn kadison_schwarz_gap(&self, f: &AlgebraElement, t: f64) -> f64 {
        let g = &self.group;
        let d = self.apply(t, &f.abs_sq(g)).sub(&self.apply(t, f).abs_sq(g));
        hermitian_eigenvalues(&d.matrix(g)).first().copied().unwrap_or(0.0)
    }

    /// Smallest eigenvalue of the operator `T_v Gamma(f) - Gamma(T_v f)`.
    pub fn gradient_gap(&self, f: &AlgebraElement, v: f64) -> f64 {
        let d = self.apply(v, &self.gamma(f, f)).sub(&self.gamma(&self.apply(v, f), &self.apply(v, f)));
        hermitian_eigenvalues(&d.matrix(&self.group)).first().copied().unwrap_or(0.0)
    }

    pub fn operator_norm(&self, f: &AlgebraElement) -> f64 {
        operator_norm(&f.matrix(&self.group))
    }
}

fn spectral_radius_hermitian(m: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(m).iter().fold(0.0, |a, v| a.max(v.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NcNorms {
    pub h1_s: f64,
    pub h1_g: f64,
}

/// Every norm of one element, for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NcNormTable {
    pub bmo: f64,
    pub big_bmo: f64,
    pub h1_s: Option<f64>,
    pub h1_g: Option<f64>,
    pub operator_norm: f64,
}

pub fn norm_table(ms: &MultiplierSemigroup, f: &AlgebraElement, grid: &TimeGrid) -> NcNormTable {
    let h = ms.h1_norms(&ms.project_off_kernel(f)).ok();
    NcNormTable {
        bmo: ms.bmo_norm(f, grid).value,
        big_bmo: ms.big_bmo_norm(f, grid).value,
        h1_s: h.map(|h| h.h1_s),
        h1_g: h.map(|h| h.h1_g),
        operator_norm: ms.operator_norm(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    fn s3() -> MultiplierSemigroup {
        let g = FiniteGroup::symmetric(3).unwrap();
        let psi = LengthFunction::random_cocycle(&g, 1).unwrap();
        MultiplierSemigroup::new(g, psi).unwrap()
    }

    #[test]
    fn gromov_route_matches_definition() {
        let ms = s3();
        let mut r = sampling::rng(5);
        for _ in 0..20 {
            let f = AlgebraElement::random(6, &mut r);
            let h = AlgebraElement::random(6, &mut r);
            let scale = ms.psi.scale() * f.norm2() * h.norm2();
            assert!(ms.gamma(&f, &h).max_abs_diff(&ms.gamma_definitional(&f, &h)) < 1e-12 * scale);
            assert!(ms.gamma2(&f, &h).max_abs_diff(&ms.gamma2_definitional(&f, &h)) < 1e-12 * scale * ms.psi.scale());
        }
    }

    #[test]
    fn single_mode_values() {
        let ms = s3();
        let g = (0..6).find(|&g| ms.psi.get(g) > 0.0).unwrap();
        let f = AlgebraElement::basis(6, g);
        let gam = ms.gamma(&f, &f);
        assert!((gam.trace(&ms.group).re - ms.psi.get(g)).abs() < 1e-13);
        let h = ms.h1_norms(&f).unwrap();
        assert!((h.h1_g - 0.5f64.sqrt()).abs() < 1e-12, "{h:?}");
    }

    #[test]
    fn identity_element_has_zero_norms() {
        let ms = s3();
        let e = AlgebraElement::unit(&ms.group);
        let grid = ms.default_grid();
        assert!(ms.bmo_norm(&e, &grid).value < 1e-7);
        assert!(ms.big_bmo_norm(&e, &grid).value < 1e-7);
        assert!(matches!(ms.h1_norms(&e), Err(Error::KernelComponent { .. })));
        assert_eq!(ms.h1_norms(&AlgebraElement::zeros(6)).unwrap(), NcNorms { h1_s: 0.0, h1_g: 0.0 });
    }

    #[test]
    fn z2_matches_the_two_state_chain() {
        let g = FiniteGroup::cyclic(2).unwrap();
        let c = 1.5;
        let ms = MultiplierSemigroup::new(g.clone(), LengthFunction::new(&g, "t", alloc::vec![0.0, c]).unwrap()).unwrap();
        let f = AlgebraElement(alloc::vec![C64::new(0.3, 0.0), C64::new(0.7, 0.0)]);
        let t = 0.4;
        let tf = ms.apply(t, &f);
        assert!((tf.0[0].re - 0.3).abs() < 1e-15);
        assert!((tf.0[1].re - 0.7 * (-c * t).exp()).abs() < 1e-15);
    }
}
