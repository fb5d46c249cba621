//! Standard-semigroup axioms checked on sampled inputs: semigroup law, unitality,
//! positivity, Kadison-Schwarz, `L_p` contraction, trace conservation and strong
//! continuity. Works for any [`Semigroup`], so the Poisson semigroup is re-checked
//! by the same code.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::field::{ScalarField, C64};
use crate::grid::TimeGrid;
use crate::sampling::{self, SampleKind};
use crate::semigroup::{Generator, Semigroup, RECONSTRUCTION_TOL};

pub const POINTWISE_TOL: f64 = 1e-12;
pub const RELATIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AxiomReport {
    pub samples: usize,
    pub grid: TimeGrid,
    pub seed: u64,
    /// `max |Q - sum_k lambda_k phi_k <phi_k, .>|` relative to `max |Q|`; absent when no generator is given.
    pub reconstruction: Option<f64>,
    /// Worst `|T_t f|^2 - T_t |f|^2` over `||f||_inf^2`.
    pub kadison_schwarz: f64,
    /// Worst `|T_s T_t f - T_{s+t} f|` relative.
    pub semigroup_law: f64,
    /// Worst `|T_t 1 - 1|`.
    pub unitality: f64,
    /// Most negative `T_t h` for `h >= 0`, over `||h||_inf` (reported as a positive violation).
    pub positivity: f64,
    /// Worst `||T_t f||_p / ||f||_p - 1` over `p` in {1, 2, inf}.
    pub contraction: f64,
    /// Worst `|tau(T_t f) - tau(f)|` relative.
    pub trace_conservation: f64,
    /// Worst decrease of `||T_t f - f||_2` along increasing `t`, relative.
    pub continuity: f64,
    pub passed: bool,
}

pub fn check_axioms<S: Semigroup + ?Sized>(sem: &S, generator: Option<&Generator>, samples: usize, seed: u64, grid: &TimeGrid) -> AxiomReport {
    let sd = sem.decomposition();
    let mu = sem.mu();
    let n = mu.len();
    let times = grid.points();
    let mut rng = sampling::rng(seed);
    let reconstruction = generator.map(|g| {
        let q = g.matrix();
        let scale = q.amax().max(1e-30);
        (sd.generator_matrix() - q).amax() / scale
    });
    let one = ScalarField::constant(n, 1.0);
    let (mut ks, mut law, mut unit, mut pos, mut contr, mut tr, mut cont) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &t in &times {
        unit = unit.max(sem.apply(t, &one).max_abs_diff(&one));
    }
    for i in 0..samples {
        let f = sampling::field(SampleKind::cycle(i), sd, false, &mut rng);
        let h = sampling::positive(SampleKind::cycle(i + 1), sd, &mut rng);
        let finf = f.norm_inf().max(1e-300);
        let hinf = h.norm_inf().max(1e-300);
        let sq = f.abs_sq();
        let tau_f: C64 = f.iter().zip(mu).map(|(v, m)| v * m).sum();
        let mut prev_dist = 0.0f64;
        let evolved: Vec<ScalarField> = times.iter().map(|&t| sem.apply(t, &f)).collect();
        for (it, &t) in times.iter().enumerate() {
            let tf = &evolved[it];
            let tsq = sem.apply(t, &sq);
            for x in 0..n {
                ks = ks.max((tf[x].norm_sqr() - tsq[x].re) / (finf * finf));
            }
            let th = sem.apply(t, &h);
            for x in 0..n {
                pos = pos.max(-th[x].re / hinf);
            }
            for p in [1.0, 2.0] {
                let before = f.norm_p(mu, p);
                if before > 0.0 {
                    contr = contr.max(tf.norm_p(mu, p) / before - 1.0);
                }
            }
            contr = contr.max(tf.norm_inf() / finf - 1.0);
            let tau_t: C64 = tf.iter().zip(mu).map(|(v, m)| v * m).sum();
            tr = tr.max((tau_t - tau_f).norm() / tau_f.norm().max(f.norm_p(mu, 1.0)).max(1e-30));
            let dist = tf.zip_map(&f, |a, b| a - b).norm_p(mu, 2.0);
            cont = cont.max((prev_dist - dist) / f.norm_p(mu, 2.0).max(1e-300));
            prev_dist = dist;
        }
        // law on a coarse sub-grid of pairs
        for &s in times.iter().step_by(3) {
            for (it, &t) in times.iter().enumerate().step_by(5) {
                let twice = sem.apply(s, &evolved[it]);
                let once = sem.apply(s + t, &f);
                let scale = once.norm_inf().max(twice.norm_inf()).max(1e-30);
                law = law.max(twice.max_abs_diff(&once) / scale.max(1e-16 * finf));
            }
        }
    }
    let passed = reconstruction.is_none_or(|r| r < RECONSTRUCTION_TOL)
        && ks <= POINTWISE_TOL
        && law <= RELATIVE_TOL
        && unit <= POINTWISE_TOL
        && pos <= POINTWISE_TOL
        && contr <= RELATIVE_TOL
        && tr <= RELATIVE_TOL
        && cont <= RELATIVE_TOL;
    AxiomReport {
        samples,
        grid: *grid,
        seed,
        reconstruction,
        kadison_schwarz: ks,
        semigroup_law: law,
        unitality: unit,
        positivity: pos,
        contraction: contr,
        trace_conservation: tr,
        continuity: cont,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::PoissonSemigroup;
    use crate::zoo::Family;

    #[test]
    fn zoo_members_are_standard() {
        for fam in Family::ALL {
            let g = fam.build(8, 3).unwrap();
            let sd = g.decompose().unwrap();
            let grid = sd.default_grid().with_density(4);
            let r = check_axioms(&sd, Some(&g), 6, 1, &grid);
            assert!(r.passed, "{}: {r:?}", fam.name());
        }
    }

    #[test]
    fn poisson_semigroup_is_standard() {
        let g = Family::Path.build(6, 0).unwrap();
        let ps = PoissonSemigroup::subordinate(g.decompose().unwrap());
        let grid = ps.default_grid().with_density(4);
        let r = check_axioms(&ps, None, 6, 2, &grid);
        assert!(r.passed, "{r:?}");
    }
}
