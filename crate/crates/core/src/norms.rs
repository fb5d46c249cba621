//! Semigroup BMO norms and the John-Nirenberg family, as suprema over a time grid
//! together with the analytic `t -> inf` limit.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::field::ScalarField;
use crate::grid::TimeGrid;
use crate::semigroup::Semigroup;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NormReport {
    pub value: f64,
    /// Grid time attaining the sup; `None` when the `t -> inf` limit attains it.
    pub argmax_t: Option<f64>,
    pub tail_value: f64,
    pub grid: TimeGrid,
    /// The same sup on the grid with twice the density, when requested.
    pub refined_value: Option<f64>,
}

impl NormReport {
    /// Relative change under one level of grid refinement.
    pub fn refinement_gap(&self) -> Option<f64> {
        self.refined_value.map(|r| (r - self.value).abs() / r.abs().max(1e-30))
    }
}

/// `sup` of `profile(t)` over the grid and `profile(None)` (the limit).
pub fn sup_over_grid(grid: &TimeGrid, refine: bool, profile: impl Fn(Option<f64>) -> f64) -> NormReport {
    let tail_value = profile(None);
    let scan = |g: &TimeGrid| {
        let mut best = (tail_value, None);
        for t in g.points() {
            let v = profile(Some(t));
            if v > best.0 {
                best = (v, Some(t));
            }
        }
        best
    };
    let (value, argmax_t) = scan(grid);
    let refined_value = refine.then(|| scan(&grid.refined()).0);
    NormReport { value, argmax_t, tail_value, grid: *grid, refined_value }
}

fn apply_at<S: Semigroup + ?Sized>(sem: &S, t: Option<f64>, f: &ScalarField) -> ScalarField {
    match t {
        Some(t) => sem.apply(t, f),
        None => sem.limit(f),
    }
}

fn kernel_at<S: Semigroup + ?Sized>(sem: &S, t: Option<f64>) -> DMatrix<f64> {
    match t {
        Some(t) => sem.kernel_matrix(t),
        None => sem.limit_matrix(),
    }
}

/// `|| S_t|f|^2 - |S_t f|^2 ||_inf` (`t = None` is the limit).
pub fn bmo_profile<S: Semigroup + ?Sized>(sem: &S, f: &ScalarField, t: Option<f64>) -> f64 {
    let a = apply_at(sem, t, &f.abs_sq());
    let b = apply_at(sem, t, f);
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x.re - y.norm_sqr()).abs()))
}

/// `|| S_t |f - S_t f|^2 ||_inf`.
pub fn big_bmo_profile<S: Semigroup + ?Sized>(sem: &S, f: &ScalarField, t: Option<f64>) -> f64 {
    let centred = f - &apply_at(sem, t, f);
    apply_at(sem, t, &centred.abs_sq()).iter().fold(0.0, |m, v| m.max(v.re.abs()))
}

/// `max_x (S_t |f - (S_t f)(x)|^p)(x)`.
pub fn jn_profile<S: Semigroup + ?Sized>(sem: &S, f: &ScalarField, p: f64, t: Option<f64>) -> f64 {
    let k = kernel_at(sem, t);
    let n = f.len();
    let mean: Vec<crate::field::C64> = (0..n).map(|x| (0..n).map(|y| f[y] * k[(x, y)]).sum()).collect();
    (0..n)
        .map(|x| {
            (0..n)
                .map(|y| k[(x, y)] * (f[y] - mean[x]).norm().powf(p))
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// `||f||_bmo = sup_t || S_t|f|^2 - |S_t f|^2 ||_inf^{1/2}`.
pub fn bmo_norm<S: Semigroup + ?Sized>(sem: &S, f: &ScalarField, grid: &TimeGrid, refine: bool) -> NormReport {
    sup_over_grid(grid, refine, |t| bmo_profile(sem, f, t).sqrt())
}

/// `||f||_BMO = sup_t || S_t |f - S_t f|^2 ||_inf^{1/2}`.
pub fn big_bmo_norm<S: Semigroup + ?Sized>(sem: &S, f: &ScalarField, grid: &TimeGrid, refine: bool) -> NormReport {
    sup_over_grid(grid, refine, |t| big_bmo_profile(sem, f, t).sqrt())
}

/// `sup_t max_x (S_t |f - (S_t f)(x)|^p)(x)^{1/p}`.
pub fn jn_norm<S: Semigroup + ?Sized>(sem: &S, f: &ScalarField, p: f64, grid: &TimeGrid, refine: bool) -> NormReport {
    sup_over_grid(grid, refine, |t| jn_profile(sem, f, p, t).powf(1.0 / p))
}

/// `sup_t || S_t f - S_{2t} f ||_inf` (the limit contributes 0).
pub fn doubling_oscillation<S: Semigroup + ?Sized>(sem: &S, f: &ScalarField, grid: &TimeGrid, refine: bool) -> NormReport {
    sup_over_grid(grid, refine, |t| match t {
        Some(t) => sem.apply(t, f).max_abs_diff(&sem.apply(2.0 * t, f)),
        None => 0.0,
    })
}
