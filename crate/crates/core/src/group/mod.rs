//! Finite groups given by multiplication tables, and the group algebra in its left
//! regular representation.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::C64;

pub mod algebra;
pub mod dual;
pub mod length;
pub mod multiplier;
pub mod suites;

pub use algebra::AlgebraElement;
pub use length::LengthFunction;
pub use multiplier::MultiplierSemigroup;

/// Largest supported group order.
pub const MAX_ORDER: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FiniteGroup {
    name: String,
    /// `table[g][h]` is the index of `g h`.
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    identity: usize,
}

impl FiniteGroup {
    /// Validates closure, associativity, identity and inverses.
    pub fn from_table(name: impl Into<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        if n > MAX_ORDER {
            return Err(Error::TooLarge { n, cap: MAX_ORDER });
        }
        if table.iter().any(|row| row.len() != n || row.iter().any(|&v| v >= n)) {
            return Err(Error::InvalidGroup("table is not a closed n x n array".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let mut inverse = vec![0; n];
        for g in 0..n {
            inverse[g] = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {g} has no inverse")))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidGroup(format!("({a} {b}) {c} != {a} ({b} {c})")));
                    }
                }
            }
        }
        Ok(Self { name: name.into(), table, inverse, identity })
    }

    /// `Z_n`, element `k` is `k mod n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        Self::from_table(format!("Z{n}"), (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect())
    }

    /// Dihedral group of order `2n`; index `k + n e` is `r^k s^e`.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGroup("dihedral group needs n >= 2".into()));
        }
        let table = (0..2 * n)
            .map(|x| {
                let (a, b) = (x % n, x / n);
                (0..2 * n)
                    .map(|y| {
                        let (c, d) = (y % n, y / n);
                        // r^a s^b r^c s^d = r^{a + (-1)^b c} s^{b+d}
                        let k = if b == 0 { (a + c) % n } else { (a + n - c) % n };
                        k + n * ((b + d) % 2)
                    })
                    .collect()
            })
            .collect();
        Self::from_table(format!("D{n}"), table)
    }

    /// Symmetric group on `n <= 4` letters; permutations in lexicographic order, product `(p q)(i) = p(q(i))`.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 || n > 4 {
            return Err(Error::InvalidGroup(format!("symmetric group S{n} unsupported (need 1 <= n <= 4)")));
        }
        let perms = permutations(n);
        let index = |p: &[usize]| perms.iter().position(|q| q.as_slice() == p).unwrap_or(0);
        let table = perms
            .iter()
            .map(|p| perms.iter().map(|q| index(&q.iter().map(|&i| p[i]).collect::<Vec<_>>())).collect())
            .collect();
        Self::from_table(format!("S{n}"), table)
    }

    /// `Z_2 x Z_2`.
    pub fn klein() -> Result<Self> {
        let g = Self::direct_product(&Self::cyclic(2)?, &Self::cyclic(2)?)?;
        Ok(Self { name: "V4".into(), ..g })
    }

    /// Quaternion group; index `u + 4 s` is `(-1)^s u` with `u` in `1, i, j, k`.
    pub fn quaternion() -> Result<Self> {
        // unit products: (sign, unit)
        const UNIT: [[(usize, usize); 4]; 4] = [
            [(0, 0), (0, 1), (0, 2), (0, 3)],
            [(0, 1), (1, 0), (0, 3), (1, 2)],
            [(0, 2), (1, 3), (1, 0), (0, 1)],
            [(0, 3), (0, 2), (1, 1), (1, 0)],
        ];
        let table = (0..8)
            .map(|x| {
                (0..8)
                    .map(|y| {
                        let (s, u) = UNIT[x % 4][y % 4];
                        u + 4 * ((s + x / 4 + y / 4) % 2)
                    })
                    .collect()
            })
            .collect();
        Self::from_table("Q8", table)
    }

    /// `A x B`, index `a + |A| b`.
    pub fn direct_product(a: &Self, b: &Self) -> Result<Self> {
        let (na, nb) = (a.order(), b.order());
        let table = (0..na * nb)
            .map(|x| (0..na * nb).map(|y| a.mul(x % na, y % na) + na * b.mul(x / na, y / na)).collect())
            .collect();
        Self::from_table(format!("{}x{}", a.name, b.name), table)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g][h]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }

    /// `g^{-1} h`.
    pub fn left_quotient(&self, g: usize, h: usize) -> usize {
        self.table[self.inverse[g]][h]
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.table[a][b] == self.table[b][a]))
    }

    /// Word length with respect to `generators` (closed under inverses here); `None` for unreachable elements.
    pub fn word_lengths(&self, generators: &[usize]) -> Vec<Option<usize>> {
        let n = self.order();
        let mut gens: Vec<usize> = generators.to_vec();
        gens.extend(generators.iter().map(|&g| self.inv(g)));
        let mut dist = vec![None; n];
        dist[self.identity] = Some(0);
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].unwrap_or(0);
            for &s in &gens {
                let y = self.mul(x, s);
                if dist[y].is_none() {
                    dist[y] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// A small generating set: the standard one for the built-in families, else all non-identity elements.
    pub fn default_generators(&self) -> Vec<usize> {
        let n = self.order();
        let name = self.name.as_str();
        if name == format!("Z{n}") && n > 1 {
            vec![1]
        } else if name == format!("D{}", n / 2) {
            vec![1, n / 2]
        } else if name == "Q8" {
            vec![1, 2]
        } else if let Some(k) = (3..=4).find(|&k| name == format!("S{k}") && permutations(k).len() == n) {
            // adjacent transpositions
            let perms = permutations(k);
            (0..k - 1)
                .filter_map(|i| {
                    let mut p: Vec<usize> = (0..k).collect();
                    p.swap(i, i + 1);
                    perms.iter().position(|q| *q == p)
                })
                .collect()
        } else {
            (0..n).filter(|&g| g != self.identity).collect()
        }
    }

    /// Matrix of `sum_g a_g lambda_g` on `l_2(G)`: entry `(x, y)` is `a_{x y^{-1}}`.
    pub fn regular_matrix(&self, a: &[C64]) -> DMatrix<C64> {
        let n = self.order();
        DMatrix::from_fn(n, n, |x, y| a[self.mul(x, self.inv(y))])
    }

    /// Coefficients of an operator in the group algebra: its image of `delta_e`.
    pub fn coefficients_of(&self, m: &DMatrix<C64>) -> Vec<C64> {
        (0..self.order()).map(|g| m[(g, self.identity)]).collect()
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn built_in_groups_are_valid() {
        let groups = [
            FiniteGroup::cyclic(6).unwrap(),
            FiniteGroup::dihedral(4).unwrap(),
            FiniteGroup::symmetric(3).unwrap(),
            FiniteGroup::symmetric(4).unwrap(),
            FiniteGroup::klein().unwrap(),
            FiniteGroup::quaternion().unwrap(),
        ];
        let orders: Vec<usize> = groups.iter().map(|g| g.order()).collect();
        assert_eq!(orders, [6, 8, 6, 24, 4, 8]);
        let abelian: Vec<bool> = groups.iter().map(|g| g.is_abelian()).collect();
        assert_eq!(abelian, [true, false, false, false, true, false]);
    }

    #[test]
    fn quaternion_has_one_involution() {
        let q = FiniteGroup::quaternion().unwrap();
        let involutions = (0..8).filter(|&g| g != q.identity() && q.mul(g, g) == q.identity()).count();
        assert_eq!(involutions, 1);
    }

    #[test]
    fn bad_tables_are_rejected() {
        assert!(FiniteGroup::from_table("x", vec![vec![0, 1], vec![1, 1]]).is_err());
        assert!(matches!(FiniteGroup::cyclic(25), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn word_length_on_symmetric_group_counts_inversions() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let w = s3.word_lengths(&s3.default_generators());
        let mut counts = [0; 4];
        for d in w {
            counts[d.unwrap()] += 1;
        }
        assert_eq!(counts, [1, 2, 2, 1]);
    }

    #[test]
    fn regular_representation_is_multiplicative() {
        let g = FiniteGroup::dihedral(3).unwrap();
        let delta = |k: usize| -> Vec<C64> { (0..6).map(|i| C64::new((i == k) as u8 as f64, 0.0)).collect() };
        for a in 0..6 {
            for b in 0..6 {
                let prod = g.regular_matrix(&delta(a)) * g.regular_matrix(&delta(b));
                assert_eq!(prod, g.regular_matrix(&delta(g.mul(a, b))));
            }
        }
    }
}
