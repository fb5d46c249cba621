//! For `Z_n` the group algebra is the algebra of functions on the dual group, and
//! the multiplier semigroup becomes a reversible Markov chain there. This module
//! builds that chain and compares both norm stacks.

use alloc::string::String;

use nalgebra::DMatrix;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::multiplier::MultiplierSemigroup;
use super::{AlgebraElement, FiniteGroup};
use crate::error::{Error, Result};
use crate::field::{ScalarField, C64};
use crate::norms::{big_bmo_norm, bmo_norm};
use crate::sampling;
use crate::semigroup::{Generator, Semigroup, SpectralDecomposition};
use crate::square::{h1_norms, GammaTensor};

pub const CONSISTENCY_TOL: f64 = 1e-8;

fn require_standard_cyclic(group: &FiniteGroup) -> Result<usize> {
    let n = group.order();
    if (0..n).all(|a| (0..n).all(|b| group.mul(a, b) == (a + b) % n)) {
        Ok(n)
    } else {
        Err(Error::InvalidGroup(alloc::format!("{} is not Z_n in standard numbering", group.name())))
    }
}

/// `chi_j(k) = exp(2 pi i j k / n)`.
fn character(n: usize, j: usize, k: usize) -> C64 {
    let theta = 2.0 * core::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
    C64::new(theta.cos(), theta.sin())
}

/// `F(j) = sum_k a_k chi_j(k)`.
pub fn fourier(f: &AlgebraElement) -> ScalarField {
    let n = f.len();
    (0..n).map(|j| (0..n).map(|k| f.0[k] * character(n, j, k)).sum()).collect()
}

/// Inverse of [`fourier`].
pub fn inverse_fourier(field: &ScalarField) -> AlgebraElement {
    let n = field.len();
    AlgebraElement((0..n).map(|k| (0..n).map(|j| field[j] * character(n, j, k).conj()).sum::<C64>() / n as f64).collect())
}

/// `Q_{jj'} = -(1/n) sum_k psi(k) chi_j(k) conj(chi_{j'}(k))` with uniform mass `1/n`.
pub fn dual_generator(ms: &MultiplierSemigroup) -> Result<Generator> {
    let n = require_standard_cyclic(&ms.group)?;
    let mut imag = 0.0f64;
    let q = DMatrix::from_fn(n, n, |j, jp| {
        let v: C64 = (0..n).map(|k| character(n, j, k) * character(n, jp, k).conj() * ms.psi.get(k)).sum::<C64>() / -(n as f64);
        imag = imag.max(v.im.abs());
        v.re
    });
    if imag > 1e-10 * ms.psi.scale().max(1e-300) {
        return Err(Error::InvalidArgument(alloc::format!("dual generator has imaginary part {imag:e}")));
    }
    // clean roundoff so the axioms are checked on the exact structure
    let mut q = q;
    let scale = q.amax();
    q.iter_mut().for_each(|v| {
        if v.abs() < 1e-14 * scale {
            *v = 0.0
        }
    });
    for j in 0..n {
        let off: f64 = (0..n).filter(|&k| k != j).map(|k| q[(j, k)]).sum();
        q[(j, j)] = -off;
    }
    Generator::validate(q, alloc::vec![1.0 / n as f64; n])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConsistencyReport {
    pub group: String,
    pub length: String,
    pub samples: usize,
    /// `T_t` on both sides, worst sup-norm gap.
    pub semigroup_gap: f64,
    /// Carre du champ, worst gap.
    pub gamma_gap: f64,
    pub bmo_gap: f64,
    pub big_bmo_gap: f64,
    pub h1_s_gap: f64,
    pub h1_g_gap: f64,
    /// Operator norm against the sup norm of the transform.
    pub norm_gap: f64,
    pub passed: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

pub fn check_consistency(ms: &MultiplierSemigroup, samples: usize, seed: u64) -> Result<ConsistencyReport> {
    let g = dual_generator(ms)?;
    let sd: SpectralDecomposition = g.decompose()?;
    let tensor = GammaTensor::new(&g, &sd)?;
    let n = ms.order();
    let grid = ms.default_grid().with_density(8);
    let mut rng = sampling::rng(seed);
    let mut rep = ConsistencyReport {
        group: ms.group.name().into(),
        length: ms.psi.name.clone(),
        samples,
        semigroup_gap: 0.0,
        gamma_gap: 0.0,
        bmo_gap: 0.0,
        big_bmo_gap: 0.0,
        h1_s_gap: 0.0,
        h1_g_gap: 0.0,
        norm_gap: 0.0,
        passed: false,
    };
    for _ in 0..samples {
        let f = AlgebraElement::random(n, &mut rng);
        let ff = fourier(&f);
        for t in [1e-2, 0.3, 2.0] {
            let a = fourier(&ms.apply(t, &f));
            rep.semigroup_gap = rep.semigroup_gap.max(a.max_abs_diff(&sd.apply(t, &ff)) / ff.norm_inf().max(1.0));
        }
        let gam_nc = fourier(&ms.gamma(&f, &f));
        let gam_c = ScalarField::from_real(&crate::gamma::gamma_diagonal(&g, &ff));
        rep.gamma_gap = rep.gamma_gap.max(gam_nc.max_abs_diff(&gam_c) / gam_c.norm_inf().max(1.0));
        rep.bmo_gap = rep.bmo_gap.max(rel(ms.bmo_norm(&f, &grid).value, bmo_norm(&sd, &ff, &grid, false).value));
        rep.big_bmo_gap = rep.big_bmo_gap.max(rel(ms.big_bmo_norm(&f, &grid).value, big_bmo_norm(&sd, &ff, &grid, false).value));
        rep.norm_gap = rep.norm_gap.max(rel(ms.operator_norm(&f), ff.norm_inf()));
        let f0 = ms.project_off_kernel(&f);
        let ff0 = sd.project_off_kernel(&fourier(&f0));
        let nc = ms.h1_norms(&f0)?;
        let c = h1_norms(&sd, &tensor, &ff0)?;
        rep.h1_s_gap = rep.h1_s_gap.max(rel(nc.h1_s, c.h1_s));
        rep.h1_g_gap = rep.h1_g_gap.max(rel(nc.h1_g, c.h1_g));
    }
    let worst = [rep.semigroup_gap, rep.gamma_gap, rep.bmo_gap, rep.big_bmo_gap, rep.h1_s_gap, rep.h1_g_gap, rep.norm_gap]
        .into_iter()
        .fold(0.0, f64::max);
    rep.passed = worst < CONSISTENCY_TOL;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::LengthFunction;

    #[test]
    fn transform_round_trips() {
        let mut r = sampling::rng(1);
        let f = AlgebraElement::random(6, &mut r);
        assert!(inverse_fourier(&fourier(&f)).max_abs_diff(&f) < 1e-14);
    }

    #[test]
    fn z2_dual_is_the_two_state_chain() {
        let g = FiniteGroup::cyclic(2).unwrap();
        let c = 1.5;
        let ms = MultiplierSemigroup::new(g.clone(), LengthFunction::new(&g, "t", alloc::vec![0.0, c]).unwrap()).unwrap();
        let q = dual_generator(&ms).unwrap();
        // -(1/2)(0 + c chi(1)conj(chi'(1))): off-diagonal c/2
        assert!((q.matrix()[(0, 1)] - c / 2.0).abs() < 1e-15);
        assert!((q.matrix()[(0, 0)] + c / 2.0).abs() < 1e-15);
    }

    #[test]
    fn stacks_agree_on_z6() {
        let g = FiniteGroup::cyclic(6).unwrap();
        let ms = MultiplierSemigroup::new(g.clone(), LengthFunction::word_length(&g).unwrap()).unwrap();
        let r = check_consistency(&ms, 5, 2).unwrap();
        assert!(r.passed, "{r:?}");
    }
}
