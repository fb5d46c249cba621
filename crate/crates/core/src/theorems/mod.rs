//! Verification suites: each evaluates both sides of an identity or inequality
//! over seeded samples and reports the worst case with full provenance.

use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::TimeGrid;
use crate::semigroup::{Generator, Semigroup, SpectralDecomposition};
use crate::square::GammaTensor;

pub mod atoms;
pub mod axioms;
pub mod duality;
pub mod hypotheses;
pub mod lemmas;
pub mod meyer;
pub mod oscillation;
pub mod subordination;

/// A generator with its decomposition and mode tensor, shared by the suites.
#[derive(Debug, Clone)]
pub struct Chain {
    pub generator: Generator,
    pub sd: SpectralDecomposition,
    pub tensor: GammaTensor,
}

impl Chain {
    pub fn new(generator: Generator) -> Result<Self> {
        let sd = generator.decompose()?;
        let tensor = GammaTensor::new(&generator, &sd)?;
        Ok(Self { generator, sd, tensor })
    }

    pub fn n(&self) -> usize {
        self.generator.n()
    }

    pub fn grid(&self) -> TimeGrid {
        self.sd.default_grid()
    }

    pub fn info(&self, grid: TimeGrid, seed: u64, tolerance: f64) -> RunInfo {
        RunInfo { generator: self.generator.fingerprint(), n: self.n(), grid, seed, tolerance }
    }
}

/// Provenance attached to every suite report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunInfo {
    pub generator: String,
    pub n: usize,
    pub grid: TimeGrid,
    pub seed: u64,
    pub tolerance: f64,
}

/// `max(|a|, |b|, 1e-30)`.
pub(crate) fn rel_scale(a: f64, b: f64) -> f64 {
    a.abs().max(b.abs()).max(1e-30)
}
