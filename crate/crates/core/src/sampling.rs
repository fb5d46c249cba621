//! Seeded random fields.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::field::{ScalarField, C64};
use crate::semigroup::SpectralDecomposition;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for item `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> SampleRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

pub fn complex_normal(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

pub fn real_normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleKind {
    /// Complex Gaussian eigen-coefficients with variance `1 / (1 + k)`.
    Smooth,
    /// Independent complex Gaussian values at every state.
    Rough,
    /// Indicator of one state.
    Delta,
}

impl SampleKind {
    /// Round-robin over kinds, weighted towards smooth fields.
    pub fn cycle(index: usize) -> Self {
        match index % 4 {
            0 | 1 => SampleKind::Smooth,
            2 => SampleKind::Rough,
            _ => SampleKind::Delta,
        }
    }
}

/// Field with eigen-coefficients `a_k ~ CN(0, 1/(1+k))`; kernel modes left out when `off_kernel`.
pub fn smooth(sd: &SpectralDecomposition, off_kernel: bool, rng: &mut impl Rng) -> ScalarField {
    let coeffs: Vec<C64> = (0..sd.n())
        .map(|k| {
            let z = complex_normal(rng) / ((1 + k) as f64).sqrt();
            if off_kernel && sd.is_kernel_mode(k) {
                C64::new(0.0, 0.0)
            } else {
                z
            }
        })
        .collect();
    sd.synthesize(&coeffs)
}

pub fn rough(n: usize, rng: &mut impl Rng) -> ScalarField {
    (0..n).map(|_| complex_normal(rng)).collect()
}

pub fn real_rough(n: usize, rng: &mut impl Rng) -> ScalarField {
    ScalarField::from_real(&(0..n).map(|_| real_normal(rng)).collect::<Vec<_>>())
}

/// Draw a field of the given kind; kernel-projected when `off_kernel`.
pub fn field(kind: SampleKind, sd: &SpectralDecomposition, off_kernel: bool, rng: &mut impl Rng) -> ScalarField {
    let n = sd.n();
    let f = match kind {
        SampleKind::Smooth => return smooth(sd, off_kernel, rng),
        SampleKind::Rough => rough(n, rng),
        SampleKind::Delta => ScalarField::delta(n, rng.random_range(0..n)),
    };
    if off_kernel {
        sd.project_off_kernel(&f)
    } else {
        f
    }
}

/// Nonnegative field `|f|^2` for `f` of the given kind.
pub fn positive(kind: SampleKind, sd: &SpectralDecomposition, rng: &mut impl Rng) -> ScalarField {
    match kind {
        SampleKind::Delta => field(kind, sd, false, rng),
        _ => field(kind, sd, false, rng).abs_sq(),
    }
}

/// Random Hermitian positive semidefinite `n x n` matrix `B B^*` of rank `rank`.
pub fn psd_matrix(n: usize, rank: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    let b = DMatrix::from_fn(n, rank, |_, _| complex_normal(rng));
    &b * b.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn smooth_samples_avoid_kernel() {
        let sd = zoo::cycle(6, 1.0, alloc::vec![1.0; 6]).unwrap().decompose().unwrap();
        let mut r = rng(1);
        for _ in 0..10 {
            let f = smooth(&sd, true, &mut r);
            assert!(sd.kernel_component_norm(&f) < 1e-12);
            let g = field(SampleKind::Rough, &sd, true, &mut r);
            assert!(sd.kernel_component_norm(&g) < 1e-12);
        }
    }

    #[test]
    fn seeded_streams_repeat() {
        let a = complex_normal(&mut substream(9, 3));
        let b = complex_normal(&mut substream(9, 3));
        let c = complex_normal(&mut substream(9, 4));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn positive_fields_are_nonnegative() {
        let sd = zoo::path(5, 1.0, alloc::vec![1.0; 5]).unwrap().decompose().unwrap();
        let mut r = rng(2);
        for i in 0..8 {
            let f = positive(SampleKind::cycle(i), &sd, &mut r);
            assert!(f.is_nonnegative(0.0).is_none());
        }
    }
}
