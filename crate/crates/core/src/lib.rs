//! Semigroup calculus on finite state spaces and finite group von Neumann algebras.
//!
//! The crate realizes symmetric Markov semigroups `T_t = e^{tL}` exactly through
//! one symmetric eigen-solve, and builds on it Meyer's gradient form `Gamma`, the
//! iterated form `Gamma_2`, the semigroup BMO norms, conical and vertical square
//! functions and their `H_1` norms, the subordinated Poisson semigroup, Carleson
//! measures, and a noncommutative backend over finite group algebras. Every
//! functional has a second, independent computation route so that identities and
//! inequalities can be certified numerically.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
// `num_traits::Float` provides libm-backed math under no_std; it is shadowed by
// inherent float methods whenever std is linked elsewhere in the build.
#![allow(unused_imports)]

extern crate alloc;

pub mod carleson;
pub mod error;
pub mod field;
pub mod grid;
pub mod group;
pub mod gamma;
pub mod quadrature;
pub mod sampling;
pub mod norms;
pub mod poisson;
pub mod semigroup;
pub mod square;
pub mod theorems;
pub mod zoo;

pub use error::{Error, Result};
pub use field::{ScalarField, C64};
pub use grid::TimeGrid;
pub use semigroup::{Generator, Semigroup, SpectralDecomposition, StateSpace};
