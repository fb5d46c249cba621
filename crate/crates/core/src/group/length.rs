//! Real symmetric functions `psi` on a group with `psi(e) = 0`, the conditional
//! negativity test, and the Gromov form `K(g,h) = (psi(g) + psi(h) - psi(g^{-1} h)) / 2`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::FiniteGroup;
use crate::error::{Error, Result};
use crate::gamma::helmert_basis;
use crate::grid::TimeGrid;
use crate::sampling;

/// Relative tolerance for the sign conditions, against `max |psi|`.
pub const LENGTH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LengthFunction {
    pub name: String,
    pub psi: Vec<f64>,
}

impl LengthFunction {
    /// Checks `psi(e) = 0`, `psi(g) = psi(g^{-1})` and finiteness.
    pub fn new(group: &FiniteGroup, name: impl Into<String>, psi: Vec<f64>) -> Result<Self> {
        let n = group.order();
        if psi.len() != n {
            return Err(Error::Dimension(format!("psi has {} entries for a group of order {n}", psi.len())));
        }
        if let Some(g) = psi.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("psi({g}) is not finite")));
        }
        let scale = psi.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let at_e = psi[group.identity()];
        if at_e.abs() > LENGTH_TOL * scale {
            return Err(Error::NonzeroAtIdentity { value: at_e });
        }
        if let Some(g) = (0..n).find(|&g| (psi[g] - psi[group.inv(g)]).abs() > LENGTH_TOL * scale) {
            return Err(Error::NotSymmetricPsi { g });
        }
        Ok(Self { name: name.into(), psi })
    }

    /// Word length for the group's default generators.
    pub fn word_length(group: &FiniteGroup) -> Result<Self> {
        let psi = group
            .word_lengths(&group.default_generators())
            .into_iter()
            .map(|d| d.map(|d| d as f64).ok_or_else(|| Error::InvalidGroup("generators do not generate".into())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(group, "word-length", psi)
    }

    /// `psi(g) = ||lambda_g v - v||^2` for a real vector `v` on the group: always conditionally negative.
    pub fn cocycle(group: &FiniteGroup, v: &[f64]) -> Result<Self> {
        let n = group.order();
        if v.len() != n {
            return Err(Error::Dimension(format!("cocycle vector has {} entries for order {n}", v.len())));
        }
        let psi = (0..n)
            .map(|g| (0..n).map(|x| (v[group.left_quotient(g, x)] - v[x]).powi(2)).sum())
            .collect();
        Self::new(group, "cocycle", psi)
    }

    /// Cocycle from a seeded standard normal vector.
    pub fn random_cocycle(group: &FiniteGroup, seed: u64) -> Result<Self> {
        let mut rng = sampling::rng(seed);
        let v: Vec<f64> = (0..group.order()).map(|_| sampling::real_normal(&mut rng)).collect();
        Self::cocycle(group, &v)
    }

    /// `psi = 1` off the identity.
    pub fn indicator(group: &FiniteGroup) -> Result<Self> {
        let e = group.identity();
        Self::new(group, "indicator", (0..group.order()).map(|g| if g == e { 0.0 } else { 1.0 }).collect())
    }

    /// `psi(k) = 1 - cos(2 pi k / n)` on `Z_n` (elements numbered as in [`FiniteGroup::cyclic`]).
    pub fn cyclic_cosine(group: &FiniteGroup) -> Result<Self> {
        let n = group.order();
        if !(0..n).all(|a| (0..n).all(|b| group.mul(a, b) == (a + b) % n)) {
            return Err(Error::InvalidGroup("cyclic cosine needs the standard numbering of Z_n".into()));
        }
        let psi = (0..n).map(|k| 1.0 - (2.0 * core::f64::consts::PI * k as f64 / n as f64).cos()).collect();
        Self::new(group, "cyclic-cosine", psi)
    }

    pub fn order(&self) -> usize {
        self.psi.len()
    }

    pub fn scale(&self) -> f64 {
        self.psi.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn get(&self, g: usize) -> f64 {
        self.psi[g]
    }

    pub fn is_kernel(&self, g: usize) -> bool {
        self.psi[g].abs() <= LENGTH_TOL * self.scale().max(1e-300)
    }
}

/// `K(g, h) = (psi(g) + psi(h) - psi(g^{-1} h)) / 2`.
pub fn gromov_form(group: &FiniteGroup, psi: &LengthFunction) -> DMatrix<f64> {
    let n = group.order();
    DMatrix::from_fn(n, n, |g, h| 0.5 * (psi.get(g) + psi.get(h) - psi.get(group.left_quotient(g, h))))
}

fn min_eigenvalue(m: DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NegativityReport {
    pub group: String,
    pub length: String,
    /// Largest eigenvalue of `[psi(g^{-1} h)]` on mean-zero vectors (must be `<= threshold`).
    pub max_eigen: f64,
    pub threshold: f64,
    pub conditionally_negative: bool,
    /// Smallest eigenvalue of the Gromov form.
    pub gromov_min_eigen: f64,
    /// Smallest eigenvalue of its entrywise square.
    pub gromov_square_min_eigen: f64,
    /// Smallest eigenvalue of `[exp(-t psi(g^{-1} h))]` over the time grid (positive definiteness for every `t`).
    pub schoenberg_min_eigen: f64,
    /// Dimension of the quotient by the null space of the Gromov form (rank of `K`).
    pub quotient_dimension: usize,
}

pub fn check_conditionally_negative(group: &FiniteGroup, psi: &LengthFunction) -> NegativityReport {
    let n = group.order();
    let scale = psi.scale().max(1e-300);
    let threshold = LENGTH_TOL * scale * n as f64;
    let gram = DMatrix::from_fn(n, n, |g, h| psi.get(group.left_quotient(g, h)));
    let h = helmert_basis(n);
    let restricted = h.transpose() * &gram * &h;
    let max_eigen = if n > 1 { -min_eigenvalue(-restricted) } else { 0.0 };
    let k = gromov_form(group, psi);
    let k_eig = SymmetricEigen::new(k.clone()).eigenvalues;
    let quotient_dimension = k_eig.iter().filter(|&&v| v > threshold).count();
    let gromov_min_eigen = k_eig.iter().copied().fold(f64::INFINITY, f64::min);
    let gromov_square_min_eigen = min_eigenvalue(k.component_mul(&k));
    let grid = TimeGrid::for_rates(&psi.psi).with_density(4);
    let schoenberg_min_eigen = grid
        .points()
        .into_iter()
        .map(|t| min_eigenvalue(gram.map(|v| (-t * v).exp())))
        .fold(f64::INFINITY, f64::min);
    NegativityReport {
        group: group.name().into(),
        length: psi.name.clone(),
        max_eigen,
        threshold,
        conditionally_negative: max_eigen <= threshold,
        gromov_min_eigen,
        gromov_square_min_eigen,
        schoenberg_min_eigen,
        quotient_dimension,
    }
}

pub fn require_conditionally_negative(group: &FiniteGroup, psi: &LengthFunction) -> Result<NegativityReport> {
    let r = check_conditionally_negative(group, psi);
    if r.conditionally_negative {
        Ok(r)
    } else {
        Err(Error::NotConditionallyNegative { max_eigen: r.max_eigen })
    }
}

/// Sample of mean-zero coefficient vectors with `sum conj(a_g) a_h psi(g^{-1} h)`, the direct form of the test.
pub fn sampled_negativity(group: &FiniteGroup, psi: &LengthFunction, samples: usize, rng: &mut impl Rng) -> f64 {
    let n = group.order();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let mut a: Vec<crate::field::C64> = (0..n).map(|_| sampling::complex_normal(rng)).collect();
        let mean = a.iter().sum::<crate::field::C64>() / n as f64;
        a.iter_mut().for_each(|v| *v -= mean);
        let norm: f64 = a.iter().map(|v| v.norm_sqr()).sum();
        let mut s = crate::field::C64::new(0.0, 0.0);
        for g in 0..n {
            for h in 0..n {
                s += a[g].conj() * a[h] * psi.get(group.left_quotient(g, h));
            }
        }
        worst = worst.max(s.re / norm.max(1e-300));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_function_is_conditionally_negative() {
        let g = FiniteGroup::cyclic(5).unwrap();
        let psi = LengthFunction::new(&g, "zero", alloc::vec![0.0; 5]).unwrap();
        assert!(check_conditionally_negative(&g, &psi).conditionally_negative);
    }

    #[test]
    fn negated_indicator_fails() {
        let g = FiniteGroup::cyclic(3).unwrap();
        let psi = LengthFunction::new(&g, "neg", alloc::vec![0.0, -1.0, -1.0]).unwrap();
        let r = check_conditionally_negative(&g, &psi);
        assert!(!r.conditionally_negative);
        // explicit mean-zero vector (1, -1, 0): sum = -psi(1) - psi(-1) = 2 > 0
        let a = [1.0, -1.0, 0.0];
        let mut s = 0.0;
        for x in 0..3 {
            for y in 0..3 {
                s += a[x] * a[y] * psi.get(g.left_quotient(x, y));
            }
        }
        assert_eq!(s, 2.0);
        assert!(matches!(require_conditionally_negative(&g, &psi), Err(Error::NotConditionallyNegative { .. })));
    }

    #[test]
    fn validation_errors() {
        let g = FiniteGroup::cyclic(3).unwrap();
        assert!(matches!(LengthFunction::new(&g, "x", alloc::vec![1.0, 1.0, 1.0]), Err(Error::NonzeroAtIdentity { .. })));
        assert!(matches!(LengthFunction::new(&g, "x", alloc::vec![0.0, 1.0, 2.0]), Err(Error::NotSymmetricPsi { .. })));
    }

    #[test]
    fn library_functions_are_conditionally_negative() {
        let groups = [FiniteGroup::cyclic(6).unwrap(), FiniteGroup::symmetric(3).unwrap(), FiniteGroup::quaternion().unwrap()];
        for g in &groups {
            for psi in [LengthFunction::random_cocycle(g, 4).unwrap(), LengthFunction::indicator(g).unwrap()] {
                let r = check_conditionally_negative(g, &psi);
                assert!(r.conditionally_negative, "{r:?}");
                assert!(r.gromov_min_eigen > -1e-10 * psi.scale(), "{r:?}");
                assert!(r.gromov_square_min_eigen > -1e-10 * psi.scale().powi(2), "{r:?}");
                assert!(r.schoenberg_min_eigen > -1e-10, "{r:?}");
            }
        }
        let z = FiniteGroup::cyclic(7).unwrap();
        assert!(check_conditionally_negative(&z, &LengthFunction::cyclic_cosine(&z).unwrap()).conditionally_negative);
    }

    #[test]
    fn sampled_form_agrees_with_eigen_test() {
        let g = FiniteGroup::dihedral(3).unwrap();
        let psi = LengthFunction::random_cocycle(&g, 9).unwrap();
        let mut r = sampling::rng(1);
        let r_sampled = sampled_negativity(&g, &psi, 50, &mut r);
        let r_eig = check_conditionally_negative(&g, &psi).max_eigen;
        assert!(r_sampled <= r_eig + 1e-12);
    }

    #[test]
    fn cosine_cocycle_has_two_dimensional_quotient() {
        // 1 - cos comes from the rotation representation on R^2
        let z = FiniteGroup::cyclic(8).unwrap();
        let r = check_conditionally_negative(&z, &LengthFunction::cyclic_cosine(&z).unwrap());
        assert_eq!(r.quotient_dimension, 2);
    }
}
