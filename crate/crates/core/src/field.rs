//! Complex-valued functions on a finite state space.

use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use num_traits::{Float, Zero};
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

/// A function `x -> f(x)` on `{0, .., n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField(Vec<C64>);

impl ScalarField {
    pub fn new(values: Vec<C64>) -> Self {
        Self(values)
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self(alloc::vec![C64::zero(); n])
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self(alloc::vec![C64::new(value, 0.0); n])
    }

    /// Indicator of the single state `x`.
    pub fn delta(n: usize, x: usize) -> Self {
        let mut f = Self::zeros(n);
        f.0[x] = C64::new(1.0, 0.0);
        f
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[C64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<C64> {
        self.0
    }

    pub fn iter(&self) -> core::slice::Iter<'_, C64> {
        self.0.iter()
    }

    pub fn map(&self, op: impl Fn(C64) -> C64) -> Self {
        Self(self.0.iter().map(|&v| op(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, op: impl Fn(C64, C64) -> C64) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| op(a, b)).collect())
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// Pointwise `|f|^2`, stored with zero imaginary part.
    pub fn abs_sq(&self) -> Self {
        self.map(|v| C64::new(v.norm_sqr(), 0.0))
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|v| v * c)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.0.iter().map(|v| v.re).collect()
    }

    pub fn max_imag(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `(sum_x |f(x)|^p mu_x)^(1/p)`; `p = inf` gives the max norm.
    pub fn norm_p(&self, mu: &[f64], p: f64) -> f64 {
        if p.is_infinite() {
            return self.norm_inf();
        }
        let s: f64 = self.0.iter().zip(mu).map(|(v, &m)| v.norm().powf(p) * m).sum();
        s.powf(1.0 / p)
    }

    /// `sum_x conj(f(x)) g(x) mu_x`.
    pub fn inner(&self, other: &Self, mu: &[f64]) -> C64 {
        self.0
            .iter()
            .zip(&other.0)
            .zip(mu)
            .map(|((a, b), &m)| a.conj() * b * m)
            .sum()
    }

    /// First entry that is not a nonnegative real within `tol`, with its offending part.
    pub fn is_nonnegative(&self, tol: f64) -> Option<(usize, f64)> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, v)| v.re < -tol || v.im.abs() > tol)
            .map(|(i, v)| (i, if v.re < -tol { v.re } else { -v.im.abs() }))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

impl Index<usize> for ScalarField {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ScalarField {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

/// Pointwise product.
impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a * b)
    }
}

impl FromIterator<C64> for ScalarField {
    fn from_iter<I: IntoIterator<Item = C64>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Relative gap `|a - b| / max(|a|, |b|, 1e-30)`.
pub fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-30)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_of_delta() {
        let mu = [1.0, 2.0, 4.0];
        let f = ScalarField::delta(3, 2);
        assert_eq!(f.norm_p(&mu, 1.0), 4.0);
        assert_eq!(f.norm_p(&mu, 2.0), 2.0);
        assert_eq!(f.norm_p(&mu, f64::INFINITY), 1.0);
    }

    #[test]
    fn inner_is_conjugate_linear_in_first_slot() {
        let mu = [1.0, 1.0];
        let f = ScalarField::new(alloc::vec![C64::new(0.0, 1.0), C64::new(1.0, 0.0)]);
        let g = ScalarField::constant(2, 1.0);
        assert_eq!(f.inner(&g, &mu), C64::new(1.0, -1.0));
    }
}
