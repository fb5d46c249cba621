//! Elements `sum_g a_g lambda_g` of the group algebra and the matrix helpers the
//! operator-valued norms need.

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::FiniteGroup;
use crate::field::C64;
use crate::sampling;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraElement(pub Vec<C64>);

impl AlgebraElement {
    pub fn zeros(n: usize) -> Self {
        Self(alloc::vec![C64::new(0.0, 0.0); n])
    }

    /// `lambda_g`.
    pub fn basis(n: usize, g: usize) -> Self {
        let mut a = Self::zeros(n);
        a.0[g] = C64::new(1.0, 0.0);
        a
    }

    pub fn unit(group: &FiniteGroup) -> Self {
        Self::basis(group.order(), group.identity())
    }

    /// Independent `CN(0, 1)` coefficients.
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        Self((0..n).map(|_| sampling::complex_normal(rng)).collect())
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `tau(f) = a_e`.
    pub fn trace(&self, group: &FiniteGroup) -> C64 {
        self.0[group.identity()]
    }

    /// `f^* = sum_g conj(a_g) lambda_{g^{-1}}`.
    pub fn adjoint(&self, group: &FiniteGroup) -> Self {
        let mut out = Self::zeros(self.len());
        for (g, a) in self.0.iter().enumerate() {
            out.0[group.inv(g)] = a.conj();
        }
        out
    }

    /// Convolution product.
    pub fn product(&self, other: &Self, group: &FiniteGroup) -> Self {
        let mut out = Self::zeros(self.len());
        for (g, a) in self.0.iter().enumerate() {
            if *a == C64::new(0.0, 0.0) {
                continue;
            }
            for (h, b) in other.0.iter().enumerate() {
                out.0[group.mul(g, h)] += a * b;
            }
        }
        out
    }

    /// `|f|^2 = f^* f`.
    pub fn abs_sq(&self, group: &FiniteGroup) -> Self {
        self.adjoint(group).product(self, group)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(self.0.iter().map(|a| a * c).collect())
    }

    /// Coefficientwise multiplier `a_g -> m(g) a_g`.
    pub fn multiply(&self, m: impl Fn(usize) -> f64) -> Self {
        Self(self.0.iter().enumerate().map(|(g, a)| a * m(g)).collect())
    }

    pub fn matrix(&self, group: &FiniteGroup) -> DMatrix<C64> {
        group.regular_matrix(&self.0)
    }

    pub fn from_matrix(m: &DMatrix<C64>, group: &FiniteGroup) -> Self {
        Self(group.coefficients_of(m))
    }

    /// `tau(f^* f)^{1/2} = (sum |a_g|^2)^{1/2}`.
    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<C64>) -> f64 {
    let gram = m.adjoint() * m;
    hermitian_eigenvalues(&gram).last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Positive square root of the Hermitian part, with negative roundoff eigenvalues clamped to 0.
pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| C64::new(v.max(0.0).sqrt(), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Normalised trace `Tr(m) / n`.
pub fn normalized_trace(m: &DMatrix<C64>) -> f64 {
    m.trace().re / m.nrows() as f64
}

/// `tau(X^{1/2})` for Hermitian `X >= 0`.
pub fn trace_sqrt(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows() as f64;
    hermitian_eigenvalues(m).iter().map(|v| v.max(0.0).sqrt()).sum::<f64>() / n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_route_matches_convolution() {
        let g = FiniteGroup::symmetric(3).unwrap();
        let mut r = sampling::rng(1);
        let (a, b) = (AlgebraElement::random(6, &mut r), AlgebraElement::random(6, &mut r));
        let conv = a.product(&b, &g);
        let mat = AlgebraElement::from_matrix(&(a.matrix(&g) * b.matrix(&g)), &g);
        assert!(conv.max_abs_diff(&mat) < 1e-13);
        let adj = AlgebraElement::from_matrix(&a.matrix(&g).adjoint(), &g);
        assert!(adj.max_abs_diff(&a.adjoint(&g)) < 1e-15);
    }

    #[test]
    fn trace_is_the_identity_coefficient() {
        let g = FiniteGroup::dihedral(3).unwrap();
        let mut r = sampling::rng(2);
        let a = AlgebraElement::random(6, &mut r);
        assert!((normalized_trace(&a.matrix(&g)) - a.trace(&g).re).abs() < 1e-14);
        // tau(f^* f) = sum |a_g|^2
        assert!((a.abs_sq(&g).trace(&g).re - a.norm2().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn square_root_squares_back() {
        let mut r = sampling::rng(3);
        let m = sampling::psd_matrix(5, 3, &mut r);
        let s = psd_sqrt(&m);
        assert!((&s * &s - &m).camax() < 1e-10 * m.camax());
    }
}
