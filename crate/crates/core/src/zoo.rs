//! Reversible generator families.
//!
//! Families are built from symmetric conductances `c_xy` and a measure `mu`; the
//! rates `Q_xy = c_xy / mu_x` are then automatically in detailed balance.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semigroup::Generator;

/// Generator from a symmetric nonnegative conductance matrix (diagonal ignored).
pub fn from_conductances(c: &DMatrix<f64>, mu: Vec<f64>) -> Result<Generator> {
    let n = c.nrows();
    if c.ncols() != n || mu.len() != n {
        return Err(Error::Dimension(alloc::format!(
            "conductances {}x{} with {} masses",
            c.nrows(),
            c.ncols(),
            mu.len()
        )));
    }
    let mut q = DMatrix::zeros(n, n);
    for x in 0..n {
        let mut out = 0.0;
        for y in 0..n {
            if x != y {
                q[(x, y)] = c[(x, y)] / mu[x];
                out += q[(x, y)];
            }
        }
        q[(x, x)] = -out;
    }
    Generator::validate(q, mu)
}

fn edges(n: usize, rate: f64, pairs: impl Iterator<Item = (usize, usize)>) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(n, n);
    for (x, y) in pairs {
        c[(x, y)] += rate;
        c[(y, x)] += rate;
    }
    c
}

/// Two states with `Q = [[-a, a], [b, -b]]` and `mu = (b, a)`.
pub fn two_state(a: f64, b: f64) -> Result<Generator> {
    Generator::validate(DMatrix::from_row_slice(2, 2, &[-a, a, b, -b]), alloc::vec![b, a])
}

/// Nearest-neighbour walk on the cycle `C_n` (a single edge for `n = 2`).
pub fn cycle(n: usize, rate: f64, mu: Vec<f64>) -> Result<Generator> {
    let c = match n {
        0 | 1 => DMatrix::zeros(n, n),
        2 => edges(2, rate, core::iter::once((0, 1))),
        _ => edges(n, rate, (0..n).map(|x| (x, (x + 1) % n))),
    };
    from_conductances(&c, mu)
}

pub fn path(n: usize, rate: f64, mu: Vec<f64>) -> Result<Generator> {
    from_conductances(&edges(n, rate, (1..n).map(|x| (x - 1, x))), mu)
}

pub fn complete(n: usize, rate: f64, mu: Vec<f64>) -> Result<Generator> {
    let pairs = (0..n).flat_map(|x| ((x + 1)..n).map(move |y| (x, y)));
    from_conductances(&edges(n, rate, pairs), mu)
}

/// Star with centre `0`.
pub fn star(n: usize, rate: f64, mu: Vec<f64>) -> Result<Generator> {
    from_conductances(&edges(n, rate, (1..n).map(|x| (0, x))), mu)
}

/// Hypercube `{0,1}^d` with `n = 2^d` states.
pub fn hypercube(n: usize, rate: f64, mu: Vec<f64>) -> Result<Generator> {
    if !n.is_power_of_two() {
        return Err(Error::InvalidArgument(alloc::format!("hypercube needs n = 2^d, got {n}")));
    }
    let d = n.trailing_zeros();
    let pairs = (0..n).flat_map(move |x| (0..d).map(move |b| (x, x ^ (1 << b)))).filter(|(x, y)| x < y);
    from_conductances(&edges(n, rate, pairs), mu)
}

/// Birth-death chain `Q[i][i+1] = birth[i]`, `Q[i+1][i] = death[i]`, with its
/// reversible measure normalised to `mu_0 = 1`.
pub fn birth_death(birth: &[f64], death: &[f64]) -> Result<Generator> {
    if birth.len() != death.len() {
        return Err(Error::Dimension("birth and death rates differ in length".into()));
    }
    if let Some(&r) = birth.iter().chain(death).find(|&&r| !(r > 0.0)) {
        return Err(Error::InvalidArgument(alloc::format!("birth-death rates must be positive, got {r}")));
    }
    let n = birth.len() + 1;
    let mut mu = alloc::vec![1.0; n];
    for i in 1..n {
        mu[i] = mu[i - 1] * birth[i - 1] / death[i - 1];
    }
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        c[(i, i + 1)] = mu[i] * birth[i];
        c[(i + 1, i)] = mu[i] * birth[i];
    }
    from_conductances(&c, mu)
}

/// Random connected reversible chain: a spanning path plus each further edge with
/// probability `density`, conductances in `[0.1, 1]`, masses in `[0.5, 2]`.
pub fn random_reversible(n: usize, density: f64, seed: u64) -> Result<Generator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in (x + 1)..n {
            if y == x + 1 || rng.random::<f64>() < density {
                let w = rng.random_range(0.1..1.0);
                c[(x, y)] = w;
                c[(y, x)] = w;
            }
        }
    }
    let mu = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    from_conductances(&c, mu)
}

/// Seeded birth-death chain with rates in `[0.5, 2]`.
pub fn random_birth_death(n: usize, seed: u64) -> Result<Generator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let birth: Vec<f64> = (1..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let death: Vec<f64> = (1..n).map(|_| rng.random_range(0.5..2.0)).collect();
    birth_death(&birth, &death)
}

/// Named families indexed by size, used for sweeps across `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Cycle,
    Path,
    Complete,
    Star,
    Hypercube,
    BirthDeath,
    RandomReversible,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Cycle,
        Family::Path,
        Family::Complete,
        Family::Star,
        Family::Hypercube,
        Family::BirthDeath,
        Family::RandomReversible,
    ];

    /// Families whose members all satisfy `Gamma_2 >= 0`.
    pub const NONNEGATIVELY_CURVED: [Family; 3] = [Family::Cycle, Family::Path, Family::Complete];

    pub fn name(self) -> &'static str {
        match self {
            Family::Cycle => "cycle",
            Family::Path => "path",
            Family::Complete => "complete",
            Family::Star => "star",
            Family::Hypercube => "hypercube",
            Family::BirthDeath => "birth-death",
            Family::RandomReversible => "random-reversible",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Family::Cycle => "nearest-neighbour walk on the cycle C_n",
            Family::Path => "nearest-neighbour walk on the path P_n",
            Family::Complete => "uniform jumps on the complete graph K_n",
            Family::Star => "walk on the star K_{1,n-1}",
            Family::Hypercube => "walk on the hypercube {0,1}^d, n = 2^d",
            Family::BirthDeath => "seeded birth-death chain with rates in [0.5, 2]",
            Family::RandomReversible => "seeded random reversible chain with random measure",
        }
    }

    /// Uniform measure and unit rates except for the seeded families.
    pub fn build(self, n: usize, seed: u64) -> Result<Generator> {
        let mu = alloc::vec![1.0; n];
        match self {
            Family::Cycle => cycle(n, 1.0, mu),
            Family::Path => path(n, 1.0, mu),
            Family::Complete => complete(n, 1.0, mu),
            Family::Star => star(n, 1.0, mu),
            Family::Hypercube => hypercube(n, 1.0, mu),
            Family::BirthDeath => random_birth_death(n, seed),
            Family::RandomReversible => random_reversible(n, 0.3, seed),
        }
    }

    pub fn label(self, n: usize) -> String {
        alloc::format!("{}-{}", self.name(), n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn every_family_validates() {
        for fam in Family::ALL {
            for n in [2, 4, 8] {
                let g = fam.build(n, 3).unwrap();
                assert_eq!(g.n(), n, "{}", fam.name());
            }
        }
    }

    #[test]
    fn birth_death_measure() {
        let g = birth_death(&[2.0], &[1.0]).unwrap();
        assert_eq!(g.mu(), &[1.0, 2.0]);
        assert_eq!(g.matrix()[(0, 1)], 2.0);
        assert_eq!(g.matrix()[(1, 0)], 1.0);
    }

    #[test]
    fn nonuniform_measure_keeps_balance() {
        let g = cycle(5, 1.0, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert!((g.matrix()[(1, 2)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hypercube_needs_power_of_two() {
        assert!(hypercube(6, 1.0, vec![1.0; 6]).is_err());
        assert_eq!(hypercube(8, 1.0, vec![1.0; 8]).unwrap().matrix()[(0, 0)], -3.0);
    }
}
