//! Gradient form `Gamma`, iterated form `Gamma_2`, and the curvature check.
//!
//! Convention: `2 Gamma(f,h) = L(f* h) - (L f*) h - f* (L h)` and
//! `2 Gamma_2(f,h) = L Gamma(f,h) - Gamma(f, L h) - Gamma(L f, h)`.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, C64};
use crate::grid::TimeGrid;
use crate::sampling;
use crate::semigroup::{Generator, Semigroup, SpectralDecomposition};

/// Relative PSD threshold: minimum eigenvalues above `-CURVATURE_TOL * |Q|` count as nonnegative.
pub const CURVATURE_TOL: f64 = 1e-10;

fn conj_times(f: &ScalarField, h: &ScalarField) -> ScalarField {
    f.zip_map(h, |a, b| a.conj() * b)
}

/// `Gamma(f, h)`, conjugate-linear in `f`.
pub fn gamma(g: &Generator, f: &ScalarField, h: &ScalarField) -> ScalarField {
    let l_prod = g.apply(&conj_times(f, h));
    let lf_conj = g.apply(&f.conj());
    let lh = g.apply(h);
    (0..f.len())
        .map(|x| 0.5 * (l_prod[x] - lf_conj[x] * h[x] - f[x].conj() * lh[x]))
        .collect()
}

/// `Gamma_2(f, h)`.
pub fn gamma2(g: &Generator, f: &ScalarField, h: &ScalarField) -> ScalarField {
    let l_gamma = g.apply(&gamma(g, f, h));
    let a = gamma(g, f, &g.apply(h));
    let b = gamma(g, &g.apply(f), h);
    (0..f.len()).map(|x| 0.5 * (l_gamma[x] - a[x] - b[x])).collect()
}

/// `Gamma(f)(x) = 1/2 sum_y Q_xy |f(y) - f(x)|^2`, the Markov form of the diagonal.
pub fn gamma_diagonal(g: &Generator, f: &ScalarField) -> Vec<f64> {
    let q = g.matrix();
    let n = g.n();
    (0..n)
        .map(|x| {
            0.5 * (0..n)
                .filter(|&y| y != x)
                .map(|y| q[(x, y)] * (f[y] - f[x]).norm_sqr())
                .sum::<f64>()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormKind {
    Gamma,
    Gamma2,
}

/// Pointwise real symmetric matrices `M_x` with `form(f, h)(x) = f* M_x h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaForm {
    kind: FormKind,
    matrices: Vec<DMatrix<f64>>,
}

impl GammaForm {
    pub fn gamma(g: &Generator) -> Self {
        let n = g.n();
        let q = g.matrix();
        let matrices = (0..n)
            .map(|x| {
                let mut m = DMatrix::zeros(n, n);
                for i in 0..n {
                    if i != x {
                        m[(i, i)] = 0.5 * q[(x, i)];
                        m[(i, x)] = -0.5 * q[(x, i)];
                        m[(x, i)] = -0.5 * q[(x, i)];
                    }
                }
                m[(x, x)] = -0.5 * q[(x, x)];
                m
            })
            .collect();
        Self { kind: FormKind::Gamma, matrices }
    }

    /// `H_x = 1/2 [sum_y Q_xy G_y - G_x Q - Q^T G_x]`.
    pub fn gamma2(g: &Generator) -> Self {
        Self::gamma2_from(g, &Self::gamma(g))
    }

    pub fn gamma2_from(g: &Generator, gamma: &GammaForm) -> Self {
        let n = g.n();
        let q = g.matrix();
        let matrices = (0..n)
            .map(|x| {
                let mut m = DMatrix::zeros(n, n);
                for y in 0..n {
                    if q[(x, y)] != 0.0 {
                        m += &gamma.matrices[y] * q[(x, y)];
                    }
                }
                let gq = &gamma.matrices[x] * q;
                m -= &gq;
                m -= gq.transpose();
                m *= 0.5;
                m
            })
            .collect();
        Self { kind: FormKind::Gamma2, matrices }
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.matrices.len()
    }

    pub fn point(&self, x: usize) -> &DMatrix<f64> {
        &self.matrices[x]
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn evaluate(&self, f: &ScalarField, h: &ScalarField) -> ScalarField {
        let n = self.n();
        let fc: DVector<C64> = DVector::from_iterator(n, f.iter().map(|v| v.conj()));
        let hv: DVector<C64> = DVector::from_iterator(n, h.iter().copied());
        self.matrices
            .iter()
            .map(|m| {
                let mh: DVector<C64> = DVector::from_fn(n, |i, _| (0..n).map(|j| hv[j] * m[(i, j)]).sum());
                fc.dot(&mh)
            })
            .collect()
    }

    /// Smallest eigenvalue over all points, restricted to the complement of the
    /// constants (every `M_x` annihilates `1`). Returns `(value, point, eigenvector)`.
    pub fn min_eigen(&self) -> (f64, usize, DVector<f64>) {
        let n = self.n();
        if n <= 1 {
            return (0.0, 0, DVector::zeros(n));
        }
        let basis = helmert_basis(n);
        let mut best = (f64::INFINITY, 0, DVector::zeros(n));
        for (x, m) in self.matrices.iter().enumerate() {
            let reduced = basis.transpose() * m * &basis;
            let eig = SymmetricEigen::new(reduced);
            let (k, &v) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("nonempty spectrum");
            if v < best.0 {
                best = (v, x, &basis * eig.eigenvectors.column(k));
            }
        }
        best
    }
}

/// Orthonormal basis of the Euclidean complement of the constant vector.
pub fn helmert_basis(n: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(n, n.saturating_sub(1));
    for k in 1..n {
        let c = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            b[(i, k - 1)] = 1.0 / c;
        }
        b[(k, k - 1)] = -(k as f64) / c;
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CurvatureOptions {
    pub grid: Option<TimeGrid>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CurvatureOptions {
    fn default() -> Self {
        Self { grid: None, samples: 16, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CurvatureReport {
    pub holds: bool,
    /// `min_eigen` lies in `(-threshold, 0]`.
    pub boundary: bool,
    pub min_eigen: f64,
    pub worst_point: usize,
    pub threshold: f64,
    pub cross_check_holds: bool,
    pub cross_check_agrees: bool,
    /// Smallest `T_v Gamma(f) - Gamma(T_v f)` seen, over unit-norm samples `f`, points and grid times.
    pub cross_check_min: f64,
    pub cross_check_worst_time: f64,
    pub cross_check_samples: usize,
    pub grid: TimeGrid,
    pub seed: u64,
    pub generator: String,
}

/// Decides `Gamma_2 >= 0` exactly from the matrices `H_x`, and independently by
/// testing `Gamma(T_v f) <= T_v Gamma(f)` over a grid of `v` and a sample family
/// that includes the most negative eigenvector of every `H_x`.
pub fn check_curvature(g: &Generator, sd: &SpectralDecomposition, opts: &CurvatureOptions) -> CurvatureReport {
    let n = g.n();
    let scale = g.scale();
    let threshold = CURVATURE_TOL * scale;
    let gamma_form = GammaForm::gamma(g);
    let h = GammaForm::gamma2_from(g, &gamma_form);
    let (min_eigen, worst_point, _) = h.min_eigen();
    let holds = min_eigen >= -threshold;
    let boundary = holds && min_eigen <= 0.0 && n > 1 && scale > 0.0;

    let mut family: Vec<ScalarField> = Vec::new();
    if n > 1 {
        let basis = helmert_basis(n);
        for m in h.matrices() {
            let eig = SymmetricEigen::new(basis.transpose() * m * &basis);
            let k = eig.eigenvalues.imin();
            let v = &basis * eig.eigenvectors.column(k);
            family.push(ScalarField::from_real(v.as_slice()));
        }
    }
    let mut rng = sampling::rng(opts.seed);
    for i in 0..opts.samples {
        let f = if i % 2 == 0 {
            sampling::rough(n, &mut rng)
        } else {
            sampling::smooth(sd, false, &mut rng)
        };
        family.push(f);
    }
    for f in family.iter_mut() {
        let norm = f.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            *f = f.scale(C64::new(1.0 / norm, 0.0));
        }
    }

    let grid = opts.grid.unwrap_or_else(|| sd.default_grid());
    let gammas: Vec<Vec<f64>> = family.iter().map(|f| gamma_diagonal(g, f)).collect();
    let mut cross_min = f64::INFINITY;
    let mut worst_time = grid.t_min;
    for v in grid.points() {
        let k = sd.kernel_matrix(v);
        for (f, gf) in family.iter().zip(&gammas) {
            let tvf: ScalarField = (0..n).map(|x| (0..n).map(|y| f[y] * k[(x, y)]).sum()).collect();
            let lhs = gamma_diagonal(g, &tvf);
            for x in 0..n {
                let rhs: f64 = (0..n).map(|y| k[(x, y)] * gf[y]).sum();
                let d = rhs - lhs[x];
                if d < cross_min {
                    cross_min = d;
                    worst_time = v;
                }
            }
        }
    }
    if family.is_empty() || n == 0 {
        cross_min = 0.0;
    }
    let cross_holds = cross_min >= -threshold;
    CurvatureReport {
        holds,
        boundary,
        min_eigen,
        worst_point,
        threshold,
        cross_check_holds: cross_holds,
        cross_check_agrees: cross_holds == holds,
        cross_check_min: cross_min,
        cross_check_worst_time: worst_time,
        cross_check_samples: family.len(),
        grid,
        seed: opts.seed,
        generator: g.fingerprint(),
    }
}

/// Fails with [`Error::CurvatureFailed`] unless `Gamma_2 >= 0` holds.
pub fn require_curvature(g: &Generator) -> Result<()> {
    let (min_eigen, point, _) = GammaForm::gamma2(g).min_eigen();
    if min_eigen >= -CURVATURE_TOL * g.scale() {
        Ok(())
    } else {
        Err(Error::CurvatureFailed { min_eigen, point })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;
    use alloc::vec;

    #[test]
    fn two_state_gamma_of_indicator() {
        let (a, b) = (2.0, 3.0);
        let g = zoo::two_state(a, b).unwrap();
        let f = ScalarField::from_real(&[1.0, 0.0]);
        let v = gamma(&g, &f, &f);
        assert!((v[0].re - a / 2.0).abs() < 1e-14);
        assert!((v[1].re - b / 2.0).abs() < 1e-14);
        let m = GammaForm::gamma(&g);
        assert_eq!(m.point(0), &DMatrix::from_row_slice(2, 2, &[a / 2.0, -a / 2.0, -a / 2.0, a / 2.0]));
    }

    #[test]
    fn matrices_match_definitions() {
        let g = zoo::random_reversible(6, 0.5, 4).unwrap();
        let sd = g.decompose().unwrap();
        let mut r = sampling::rng(5);
        let (gf, hf) = (GammaForm::gamma(&g), GammaForm::gamma2(&g));
        for _ in 0..5 {
            let f = sampling::rough(6, &mut r);
            let h = sampling::smooth(&sd, false, &mut r);
            assert!(gf.evaluate(&f, &h).max_abs_diff(&gamma(&g, &f, &h)) < 1e-12);
            assert!(hf.evaluate(&f, &h).max_abs_diff(&gamma2(&g, &f, &h)) < 1e-12);
        }
    }

    #[test]
    fn zero_generator_is_flat() {
        let g = Generator::validate(DMatrix::zeros(3, 3), vec![1.0; 3]).unwrap();
        let sd = g.decompose().unwrap();
        let r = check_curvature(&g, &sd, &CurvatureOptions::default());
        assert!(r.holds && r.cross_check_agrees);
        assert_eq!(r.min_eigen, 0.0);
    }

    #[test]
    fn complete_graph_is_positively_curved() {
        let g = zoo::complete(5, 1.0, vec![1.0; 5]).unwrap();
        let sd = g.decompose().unwrap();
        let r = check_curvature(&g, &sd, &CurvatureOptions::default());
        assert!(r.holds && !r.boundary && r.cross_check_agrees, "{r:?}");
    }

    #[test]
    fn helmert_is_orthonormal() {
        let b = helmert_basis(5);
        let gram = b.transpose() * &b;
        assert!((gram - DMatrix::identity(4, 4)).amax() < 1e-14);
        assert!(b.row_sum().amax() < 1e-14);
    }
}
