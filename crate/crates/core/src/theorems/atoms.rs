//! Atoms `h T_t g - T_t(h T_t g)` and the norm equivalences `bmo ~ BMO`,
//! `h1_S ~ h1_G`, `BMO ~ bmo + sup_t ||T_t f - T_{2t} f||_inf`.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::duality::BMO_ZERO;
use super::oscillation::{Window, WINDOW_DRIFT};
use super::{Chain, RunInfo};
use crate::error::Result;
use crate::field::{ScalarField, C64};
use crate::gamma::require_curvature;
use crate::grid::{log_space, TimeGrid};
use crate::norms::{big_bmo_norm, bmo_norm, doubling_oscillation};
use crate::sampling::{self, SampleKind};
use crate::semigroup::{Semigroup, SpectralDecomposition};
use crate::square::h1_norms;
use crate::zoo::Family;

pub const ATOM_TIMES: usize = 50;
pub const ATOMS_PER_TIME: usize = 100;

/// `h T_t g - T_t(h T_t g)`, with the (roundoff-sized) kernel part removed.
pub fn atom(sd: &SpectralDecomposition, h: &ScalarField, g: &ScalarField, t: f64) -> ScalarField {
    let inner = h * &sd.apply(t, g);
    sd.project_off_kernel(&(&inner - &sd.apply(t, &inner)))
}

/// `h` with `||h||_inf <= 1` and `g >= 0` with `tau(g) <= 1`.
fn atom_inputs(sd: &SpectralDecomposition, i: usize, rng: &mut impl Rng) -> (ScalarField, ScalarField) {
    let n = sd.n();
    let mu = sd.mu();
    let h = if i % 10 == 0 {
        ScalarField::constant(n, 1.0)
    } else {
        // random field scaled to unit sup norm
        let raw = sampling::field(SampleKind::cycle(i), sd, false, rng);
        let s = raw.norm_inf().max(1e-300);
        raw.scale(C64::new(1.0 / s, 0.0))
    };
    let g = if i % 3 == 0 {
        let x = rng.random_range(0..n);
        ScalarField::delta(n, x).scale(C64::new(1.0 / mu[x], 0.0))
    } else {
        let p = sampling::positive(SampleKind::cycle(i + 1), sd, rng);
        let tau: f64 = p.iter().zip(mu).map(|(v, m)| v.re * m).sum();
        p.scale(C64::new(1.0 / tau.max(1e-300), 0.0))
    };
    (h, g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AtomReport {
    pub info: RunInfo,
    pub times: Vec<f64>,
    /// `sup ||S(atom)||_1` over atoms at each time.
    pub sup_by_time: Vec<f64>,
    /// Uniform bound over all times.
    pub sup: f64,
    /// Largest `||atom||_1` seen (at most 2).
    pub max_l1: f64,
}

pub fn verify_atoms(chain: &Chain, times: usize, per_time: usize, seed: u64) -> Result<AtomReport> {
    require_curvature(&chain.generator)?;
    let sd = &chain.sd;
    let grid = chain.grid();
    let ts = log_space(grid.t_min, grid.t_max, times);
    let mut rng = sampling::rng(seed);
    let mut sup_by_time = Vec::with_capacity(ts.len());
    let mut max_l1 = 0.0f64;
    for &t in &ts {
        let mut best = 0.0f64;
        for i in 0..per_time {
            let (h, g) = atom_inputs(sd, i, &mut rng);
            let a = atom(sd, &h, &g, t);
            max_l1 = max_l1.max(a.norm_p(sd.mu(), 1.0));
            best = best.max(h1_norms(sd, &chain.tensor, &a)?.h1_s);
        }
        sup_by_time.push(best);
    }
    let sup = sup_by_time.iter().copied().fold(0.0, f64::max);
    Ok(AtomReport { info: chain.info(grid, seed, 0.0), times: ts, sup_by_time, sup, max_l1 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EquivalenceReport {
    pub info: RunInfo,
    pub samples: usize,
    /// `bmo / BMO`.
    pub bmo_ratio: Window,
    /// `h1_S / h1_G`.
    pub h1_ratio: Window,
    /// `BMO / (bmo + sup_t ||T_t f - T_{2t} f||_inf)`.
    pub doubling_ratio: Window,
}

pub fn verify_equivalences(chain: &Chain, samples: usize, seed: u64, grid: Option<TimeGrid>) -> Result<EquivalenceReport> {
    require_curvature(&chain.generator)?;
    let sd = &chain.sd;
    let grid = grid.unwrap_or_else(|| chain.grid());
    let mut rng = sampling::rng(seed);
    let (mut bmo_ratio, mut h1_ratio, mut doubling_ratio) = (Window::EMPTY, Window::EMPTY, Window::EMPTY);
    for i in 0..samples {
        let f = sampling::field(SampleKind::cycle(i), sd, true, &mut rng);
        let h = h1_norms(sd, &chain.tensor, &f)?;
        if h.h1_g > 0.0 {
            h1_ratio.push(h.h1_s / h.h1_g);
        }
        let small = bmo_norm(sd, &f, &grid, false).value;
        if small <= BMO_ZERO * f.norm_inf() {
            continue;
        }
        let big = big_bmo_norm(sd, &f, &grid, false).value;
        bmo_ratio.push(small / big);
        doubling_ratio.push(big / (small + doubling_oscillation(sd, &f, &grid, false).value));
    }
    Ok(EquivalenceReport { info: chain.info(grid, seed, BMO_ZERO), samples, bmo_ratio, h1_ratio, doubling_ratio })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConclusionSweep {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub atoms: Vec<AtomReport>,
    pub equivalences: Vec<EquivalenceReport>,
    pub passed: bool,
}

pub fn sweep_conclusions(family: Family, sizes: &[usize], atom_times: usize, atoms_per_time: usize, samples: usize, seed: u64) -> Result<ConclusionSweep> {
    let mut atoms = Vec::new();
    let mut equivalences = Vec::new();
    for &n in sizes {
        let chain = Chain::new(family.build(n, seed)?)?;
        atoms.push(verify_atoms(&chain, atom_times, atoms_per_time, seed)?);
        equivalences.push(verify_equivalences(&chain, samples, seed, None)?);
    }
    let finite = atoms.iter().all(|a| a.sup.is_finite())
        && equivalences.iter().all(|e| e.bmo_ratio.is_finite() && e.h1_ratio.is_finite() && e.doubling_ratio.is_finite());
    let stable = atoms.windows(2).all(|w| w[1].sup <= WINDOW_DRIFT * w[0].sup)
        && equivalences.windows(2).all(|w| {
            w[0].bmo_ratio.stable_into(&w[1].bmo_ratio, WINDOW_DRIFT)
                && w[0].h1_ratio.stable_into(&w[1].h1_ratio, WINDOW_DRIFT)
                && w[0].doubling_ratio.stable_into(&w[1].doubling_ratio, WINDOW_DRIFT)
        });
    Ok(ConclusionSweep { family, sizes: sizes.to_vec(), atoms, equivalences, passed: finite && stable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn constant_multiplier_gives_a_difference_of_heat_flows() {
        let sd = zoo::path(5, 1.0, alloc::vec![1.0; 5]).unwrap().decompose().unwrap();
        let g = ScalarField::from_real(&[0.1, 0.5, 0.2, 0.0, 0.2]);
        let one = ScalarField::constant(5, 1.0);
        let a = atom(&sd, &one, &g, 0.3);
        let expect = &sd.apply(0.3, &g) - &sd.apply(0.6, &g);
        assert!(a.max_abs_diff(&expect) < 1e-13);
    }

    #[test]
    fn atoms_have_no_mean_and_bounded_norms() {
        let chain = Chain::new(zoo::cycle(6, 1.0, alloc::vec![1.0; 6]).unwrap()).unwrap();
        let r = verify_atoms(&chain, 6, 10, 1).unwrap();
        assert!(r.max_l1 <= 2.0 + 1e-12);
        assert!(r.sup.is_finite() && r.sup > 0.0);
    }

    #[test]
    fn two_sided_windows_are_finite() {
        let chain = Chain::new(zoo::complete(5, 1.0, alloc::vec![1.0; 5]).unwrap()).unwrap();
        let r = verify_equivalences(&chain, 12, 3, None).unwrap();
        assert!(r.bmo_ratio.is_finite() && r.doubling_ratio.is_finite(), "{r:?}");
        assert!(r.h1_ratio.is_finite() && r.h1_ratio.min >= 0.5 - 1e-12, "{r:?}");
    }
}
