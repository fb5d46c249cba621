//! Finite-state standard semigroups `T_t = e^{tL}` via spectral calculus.
//!
//! A generator is a real `n x n` rate matrix `Q` together with a positive measure
//! `mu` such that `Q` is conservative, has nonnegative off-diagonal rates, and is
//! in detailed balance with `mu`. Then `D^{1/2} Q D^{-1/2}` is symmetric and one
//! eigen-solve yields a `mu`-orthonormal eigenbasis; every time-dependent operator
//! (`T_t`, `M_t`, `P_t`, their time integrals) is an eigenvalue multiplier.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ScalarField, C64};
use crate::grid::TimeGrid;

/// Generator axioms are checked to this tolerance relative to `max |Q|`.
pub const AXIOM_TOL: f64 = 1e-12;
/// Eigenvalues within this fraction of the spectral radius count as zero.
pub const KERNEL_TOL: f64 = 1e-10;
/// Relative reconstruction residual allowed for the eigen-system.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSpace {
    mu: Vec<f64>,
    total_mass: f64,
}

impl StateSpace {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::Dimension("state space needs at least one state".into()));
        }
        if let Some((index, &value)) =
            mu.iter().enumerate().find(|(_, &m)| !(m > 0.0 && m.is_finite()))
        {
            return Err(Error::InvalidMeasure { index, value });
        }
        let total_mass = mu.iter().sum();
        Ok(Self { mu, total_mass })
    }

    pub fn uniform(n: usize) -> Self {
        Self { mu: alloc::vec![1.0; n], total_mass: n as f64 }
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `tau(f) = sum_x f(x) mu_x`.
    pub fn trace(&self, f: &ScalarField) -> C64 {
        f.iter().zip(&self.mu).map(|(v, &m)| v * m).sum()
    }

    /// `mu`-weighted mean `tau(f) / tau(1)`.
    pub fn mean(&self, f: &ScalarField) -> C64 {
        self.trace(f) / self.total_mass
    }
}

/// A validated `mu`-reversible Markov generator.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    space: StateSpace,
    q: DMatrix<f64>,
}

impl Generator {
    /// Checks positivity preservation, conservation and detailed balance.
    pub fn validate(q: DMatrix<f64>, mu: Vec<f64>) -> Result<Self> {
        if q.nrows() != q.ncols() {
            return Err(Error::Dimension(alloc::format!(
                "Q is {}x{}, expected square",
                q.nrows(),
                q.ncols()
            )));
        }
        if q.nrows() != mu.len() {
            return Err(Error::Dimension(alloc::format!(
                "Q has {} rows but mu has {} entries",
                q.nrows(),
                mu.len()
            )));
        }
        let space = StateSpace::new(mu)?;
        if let Some((i, v)) = q.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!(
                "Q entry {} is not finite: {v}",
                i
            )));
        }
        let n = q.nrows();
        let scale = q.amax().max(f64::MIN_POSITIVE);
        let tol = AXIOM_TOL * scale;
        for x in 0..n {
            for y in 0..n {
                if x != y && q[(x, y)] < -tol {
                    return Err(Error::NotPositivityPreserving { row: x, col: y, value: q[(x, y)] });
                }
            }
        }
        for x in 0..n {
            let residual: f64 = q.row(x).iter().sum();
            if residual.abs() > tol {
                return Err(Error::NotConservative { row: x, residual });
            }
        }
        let mu = space.mu();
        for x in 0..n {
            for y in (x + 1)..n {
                let residual = mu[x] * q[(x, y)] - mu[y] * q[(y, x)];
                if residual.abs() > tol * mu[x].max(mu[y]) {
                    return Err(Error::NotSymmetric { x, y, residual });
                }
            }
        }
        Ok(Self { space, q })
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn mu(&self) -> &[f64] {
        self.space.mu()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// `max |Q_xy|`, the scale for curvature tolerances.
    pub fn scale(&self) -> f64 {
        self.q.amax()
    }

    /// `(Lf)(x) = sum_y Q_xy f(y)`.
    pub fn apply(&self, f: &ScalarField) -> ScalarField {
        let n = self.n();
        (0..n)
            .map(|x| (0..n).map(|y| f[y] * self.q[(x, y)]).sum())
            .collect()
    }

    /// FNV-1a hash over `n`, `mu` and `Q`, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for b in bytes {
                h ^= *b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        eat(&(self.n() as u64).to_le_bytes());
        for m in self.mu() {
            eat(&m.to_bits().to_le_bytes());
        }
        for v in self.q.iter() {
            eat(&v.to_bits().to_le_bytes());
        }
        alloc::format!("{h:016x}")
    }

    pub fn decompose(&self) -> Result<SpectralDecomposition> {
        SpectralDecomposition::new(self)
    }
}

/// Eigen-system of `L` with a `mu`-orthonormal real eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    mu: Vec<f64>,
    eigenvalues: Vec<f64>,
    rates: Vec<f64>,
    basis: DMatrix<f64>,
    kernel_dim: usize,
}

impl SpectralDecomposition {
    pub fn new(g: &Generator) -> Result<Self> {
        let n = g.n();
        let mu = g.mu();
        let sqrt_mu: Vec<f64> = mu.iter().map(|m| m.sqrt()).collect();
        let q = g.matrix();
        let mut sym = DMatrix::from_fn(n, n, |x, y| sqrt_mu[x] * q[(x, y)] / sqrt_mu[y]);
        // detailed balance makes this symmetric up to the axiom tolerance
        let upper = sym.upper_triangle();
        sym = (&upper + upper.transpose()) - DMatrix::from_diagonal(&sym.diagonal());
        let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::EigenFailure("symmetric QR iteration did not converge".into()))?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let radius = eig.eigenvalues.amax();
        let tol = KERNEL_TOL * radius;

        let mut eigenvalues = Vec::with_capacity(n);
        let mut basis = DMatrix::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            let mut lambda = eig.eigenvalues[k];
            if lambda > tol {
                return Err(Error::EigenFailure(alloc::format!(
                    "positive eigenvalue {lambda:e} for a Markov generator"
                )));
            }
            if lambda.abs() <= tol {
                lambda = 0.0;
            }
            eigenvalues.push(lambda);
            let v = eig.eigenvectors.column(k);
            // canonical sign: largest-magnitude entry positive
            let pivot = v.iter().fold(0.0f64, |p, &e| if e.abs() > p.abs() { e } else { p });
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            for x in 0..n {
                basis[(x, col)] = sign * v[x] / sqrt_mu[x];
            }
        }
        let kernel_dim = eigenvalues.iter().filter(|&&l| l == 0.0).count();
        if kernel_dim == 1 {
            // irreducible: the kernel is exactly the constants
            let mass: f64 = mu.iter().sum();
            basis.column_mut(0).fill(1.0 / mass.sqrt());
            for col in 1..n {
                let mean = (0..n).map(|x| basis[(x, col)] * mu[x]).sum::<f64>() / mass;
                let norm = (0..n).map(|x| (basis[(x, col)] - mean).powi(2) * mu[x]).sum::<f64>().sqrt();
                for x in 0..n {
                    basis[(x, col)] = (basis[(x, col)] - mean) / norm;
                }
            }
        }
        let rates = eigenvalues.iter().map(|&l| -l).collect();
        let sd = Self { mu: mu.to_vec(), eigenvalues, rates, basis, kernel_dim };

        let residual = (sd.generator_matrix() - q).amax();
        if residual > RECONSTRUCTION_TOL * q.amax().max(f64::MIN_POSITIVE) && residual > 1e-300 {
            return Err(Error::EigenFailure(alloc::format!(
                "reconstruction residual {residual:e}"
            )));
        }
        Ok(sd)
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Descending, `eigenvalues[0] = 0`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `-lambda_k >= 0`.
    pub fn heat_rates(&self) -> &[f64] {
        &self.rates
    }

    /// Column `k` is the eigenfunction `phi_k`.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel_dim
    }

    pub fn is_kernel_mode(&self, k: usize) -> bool {
        self.eigenvalues[k] == 0.0
    }

    /// Smallest nonzero `|lambda|`, if any.
    pub fn spectral_gap(&self) -> Option<f64> {
        self.rates.iter().copied().filter(|&r| r > 0.0).reduce(f64::min)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.rates.iter().copied().fold(0.0, f64::max)
    }

    /// `sum_k lambda_k phi_k <phi_k, .>_mu`, which reproduces `Q`.
    pub fn generator_matrix(&self) -> DMatrix<f64> {
        self.operator_matrix(|k| self.eigenvalues[k])
    }

    /// `a_k = <phi_k, f>_mu`.
    pub fn coefficients(&self, f: &ScalarField) -> Vec<C64> {
        let n = self.n();
        (0..n)
            .map(|k| (0..n).map(|x| f[x] * (self.basis[(x, k)] * self.mu[x])).sum())
            .collect()
    }

    /// `sum_k c_k phi_k`.
    pub fn synthesize(&self, coeffs: &[C64]) -> ScalarField {
        let n = self.n();
        (0..n)
            .map(|x| (0..n).map(|k| coeffs[k] * self.basis[(x, k)]).sum())
            .collect()
    }

    /// `sum_k m(k) c_k phi_k`.
    pub fn synthesize_with(&self, coeffs: &[C64], m: impl Fn(usize) -> f64) -> ScalarField {
        let n = self.n();
        let scaled: Vec<C64> = (0..n).map(|k| coeffs[k] * m(k)).collect();
        self.synthesize(&scaled)
    }

    /// Functional calculus: the operator with eigenvalue multiplier `m(k)` applied to `f`.
    pub fn apply_multiplier(&self, f: &ScalarField, m: impl Fn(usize) -> f64) -> ScalarField {
        self.synthesize_with(&self.coefficients(f), m)
    }

    /// Matrix `K` with `(Af)(x) = sum_y K[x][y] f(y)` for the multiplier operator `A`.
    pub fn operator_matrix(&self, m: impl Fn(usize) -> f64) -> DMatrix<f64> {
        let n = self.n();
        let mut scaled = self.basis.clone();
        for k in 0..n {
            let mk = m(k);
            scaled.column_mut(k).scale_mut(mk);
        }
        let mut out = scaled * self.basis.transpose();
        for y in 0..n {
            out.column_mut(y).scale_mut(self.mu[y]);
        }
        out
    }

    /// `T_t f`.
    pub fn semigroup(&self, t: f64, f: &ScalarField) -> ScalarField {
        self.apply_multiplier(f, |k| (-t * self.rates[k]).exp())
    }

    /// `M_t f = (1/t) int_0^t T_s f ds`.
    pub fn average(&self, t: f64, f: &ScalarField) -> ScalarField {
        self.apply_multiplier(f, |k| average_multiplier(t, self.rates[k]))
    }

    /// Orthogonal projection onto `ker L` (the `t -> inf` limit of `T_t`).
    pub fn kernel_projection(&self, f: &ScalarField) -> ScalarField {
        self.apply_multiplier(f, |k| if self.is_kernel_mode(k) { 1.0 } else { 0.0 })
    }

    pub fn project_off_kernel(&self, f: &ScalarField) -> ScalarField {
        self.apply_multiplier(f, |k| if self.is_kernel_mode(k) { 0.0 } else { 1.0 })
    }

    /// `||P_ker f||_2` in `L_2(mu)`.
    pub fn kernel_component_norm(&self, f: &ScalarField) -> f64 {
        let a = self.coefficients(f);
        (0..self.n())
            .filter(|&k| self.is_kernel_mode(k))
            .map(|k| a[k].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// `(1 - e^{-tr}) / (tr)`, equal to 1 at `r = 0`.
pub fn average_multiplier(t: f64, rate: f64) -> f64 {
    let z = t * rate;
    if z < 1e-12 {
        1.0 - 0.5 * z
    } else {
        -(-z).exp_m1() / z
    }
}

/// A symmetric Markov semigroup diagonal in a [`SpectralDecomposition`]:
/// `S_t phi_k = e^{-t r_k} phi_k` with nonnegative decay rates `r_k`.
pub trait Semigroup {
    fn decomposition(&self) -> &SpectralDecomposition;

    fn rates(&self) -> &[f64];

    fn mu(&self) -> &[f64] {
        self.decomposition().mu()
    }

    fn apply(&self, t: f64, f: &ScalarField) -> ScalarField {
        let rates = self.rates();
        self.decomposition().apply_multiplier(f, |k| (-t * rates[k]).exp())
    }

    fn apply_coefficients(&self, t: f64, coeffs: &[C64]) -> ScalarField {
        let rates = self.rates();
        self.decomposition().synthesize_with(coeffs, |k| (-t * rates[k]).exp())
    }

    /// `t -> inf` limit.
    fn limit(&self, f: &ScalarField) -> ScalarField {
        self.decomposition().kernel_projection(f)
    }

    /// Transition kernel: `(S_t f)(x) = sum_y K[x][y] f(y)`.
    fn kernel_matrix(&self, t: f64) -> DMatrix<f64> {
        let rates = self.rates();
        self.decomposition().operator_matrix(|k| (-t * rates[k]).exp())
    }

    fn limit_matrix(&self) -> DMatrix<f64> {
        let sd = self.decomposition();
        sd.operator_matrix(|k| if sd.is_kernel_mode(k) { 1.0 } else { 0.0 })
    }

    fn default_grid(&self) -> TimeGrid {
        TimeGrid::for_rates(self.rates())
    }
}

impl Semigroup for SpectralDecomposition {
    fn decomposition(&self) -> &SpectralDecomposition {
        self
    }

    fn rates(&self) -> &[f64] {
        &self.rates
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_state(a: f64, b: f64) -> Generator {
        Generator::validate(DMatrix::from_row_slice(2, 2, &[-a, a, b, -b]), vec![b, a]).unwrap()
    }

    #[test]
    fn symmetric_two_state_is_valid() {
        let q = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]);
        assert!(Generator::validate(q, vec![1.0, 1.0]).is_ok());
    }

    #[test]
    fn detailed_balance_with_weights() {
        let q = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 2.0, -2.0]);
        assert!(Generator::validate(q.clone(), vec![2.0, 1.0]).is_ok());
        assert!(matches!(
            Generator::validate(q, vec![1.0, 1.0]),
            Err(Error::NotSymmetric { x: 0, y: 1, .. })
        ));
    }

    #[test]
    fn axiom_violations_are_named() {
        let q = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -0.5]);
        assert!(matches!(
            Generator::validate(q, vec![1.0, 1.0]),
            Err(Error::NotConservative { row: 1, .. })
        ));
        let q = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!(matches!(
            Generator::validate(q, vec![1.0, 1.0]),
            Err(Error::NotPositivityPreserving { row: 0, col: 1, .. })
        ));
        let q = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]);
        assert!(matches!(
            Generator::validate(q.clone(), vec![1.0]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            Generator::validate(q, vec![1.0, 0.0]),
            Err(Error::InvalidMeasure { index: 1, .. })
        ));
    }

    #[test]
    fn two_state_eigenvalues() {
        let sd = two_state(0.7, 1.9).decompose().unwrap();
        assert_eq!(sd.eigenvalues()[0], 0.0);
        assert!((sd.eigenvalues()[1] + 2.6).abs() < 1e-14);
        assert_eq!(sd.kernel_dim(), 1);
    }

    #[test]
    fn zero_generator_is_all_kernel() {
        let g = Generator::validate(DMatrix::zeros(3, 3), vec![1.0, 2.0, 3.0]).unwrap();
        let sd = g.decompose().unwrap();
        assert_eq!(sd.kernel_dim(), 3);
        assert!(sd.eigenvalues().iter().all(|&l| l == 0.0));
        let f = ScalarField::from_real(&[1.0, -2.0, 5.0]);
        assert_eq!(sd.semigroup(10.0, &f), sd.kernel_projection(&f));
    }

    #[test]
    fn basis_is_mu_orthonormal() {
        let g = two_state(0.3, 2.0);
        let sd = g.decompose().unwrap();
        let phi = sd.basis();
        for j in 0..2 {
            for k in 0..2 {
                let ip: f64 = (0..2).map(|x| phi[(x, j)] * phi[(x, k)] * g.mu()[x]).sum();
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn two_state_semigroup_closed_form() {
        let (a, b) = (0.7, 1.9);
        let g = two_state(a, b);
        let sd = g.decompose().unwrap();
        let f = ScalarField::from_real(&[1.0, 0.0]);
        // mu = (b, a): the mu-mean of f is b / (a + b)
        let mean = b / (a + b);
        for &t in &[0.0, 0.1, 1.0, 5.0] {
            let decay = (-(a + b) * t).exp();
            let expect = [mean + decay * (1.0 - mean), mean + decay * (0.0 - mean)];
            let got = sd.semigroup(t, &f);
            for x in 0..2 {
                assert!((got[x].re - expect[x]).abs() < 1e-14, "t={t} x={x}");
            }
        }
    }

    #[test]
    fn average_on_eigenvector() {
        let g = two_state(1.0, 1.0);
        let sd = g.decompose().unwrap();
        let phi = ScalarField::from_real(&[1.0, -1.0]);
        let t = 0.8;
        let m = (((-2.0f64) * t).exp() - 1.0) / (-2.0 * t);
        let got = sd.average(t, &phi);
        assert!((got[0].re - m).abs() < 1e-14 && (got[1].re + m).abs() < 1e-14);
        let one = ScalarField::constant(2, 1.0);
        assert!(sd.average(t, &one).max_abs_diff(&one) < 1e-14);
    }

    #[test]
    fn trace_of_constant() {
        let s = StateSpace::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.trace(&ScalarField::constant(3, 1.0)).re, 3.0);
    }
}
