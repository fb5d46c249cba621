//! Field sources for the `norms` and `carleson` commands, and the tables they print.

use cdc_core::carleson::{bmo_bound, carleson_norm, embedding_ratio, CarlesonMeasure};
use cdc_core::field::ScalarField;
use cdc_core::grid::TimeGrid;
use cdc_core::norms::{big_bmo_norm, bmo_norm, jn_norm, NormReport};
use cdc_core::poisson::PoissonSemigroup;
use cdc_core::sampling::{self, SampleKind};
use cdc_core::semigroup::SpectralDecomposition;
use cdc_core::square::h1_norms;
use cdc_core::theorems::Chain;
use serde::Serialize;

use crate::error::CliError;

/// `delta:X`, `random:SEED` or `explicit:v0,v1,...` (real values).
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSource {
    Delta(usize),
    Random(u64),
    Explicit(Vec<f64>),
}

impl FieldSource {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = |m: String| CliError::config("field", m);
        let (kind, rest) = s.split_once(':').ok_or_else(|| bad(format!("expected kind:value, got `{s}`")))?;
        match kind {
            "delta" => rest.parse().map(FieldSource::Delta).map_err(|_| bad(format!("bad point `{rest}`"))),
            "random" => rest.parse().map(FieldSource::Random).map_err(|_| bad(format!("bad seed `{rest}`"))),
            "explicit" => rest
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad(format!("bad value `{v}`"))))
                .collect::<Result<Vec<_>, _>>()
                .map(FieldSource::Explicit),
            _ => Err(bad(format!("unknown field kind `{kind}`"))),
        }
    }

    pub fn build(&self, sd: &SpectralDecomposition) -> Result<ScalarField, CliError> {
        let n = sd.n();
        match self {
            FieldSource::Delta(x) if *x < n => Ok(ScalarField::delta(n, *x)),
            FieldSource::Delta(x) => Err(CliError::config("field", format!("point {x} outside 0..{n}"))),
            FieldSource::Random(seed) => Ok(sampling::field(SampleKind::Smooth, sd, false, &mut sampling::rng(*seed))),
            FieldSource::Explicit(v) if v.len() == n => Ok(ScalarField::from_real(v)),
            FieldSource::Explicit(v) => Err(CliError::config("field", format!("{} values for {n} states", v.len()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NormTable {
    pub generator: String,
    pub grid: TimeGrid,
    pub sup: f64,
    pub bmo: NormReport,
    pub big_bmo: NormReport,
    pub jn1: NormReport,
    pub jn2: NormReport,
    pub jn4: NormReport,
    /// Of the field with its `ker L` part removed.
    pub h1_s: f64,
    pub h1_g: f64,
}

pub fn norm_table(chain: &Chain, f: &ScalarField, grid: &TimeGrid) -> Result<NormTable, CliError> {
    let sd = &chain.sd;
    let h = h1_norms(sd, &chain.tensor, &sd.project_off_kernel(f))?;
    Ok(NormTable {
        generator: chain.generator.fingerprint(),
        grid: *grid,
        sup: f.norm_inf(),
        bmo: bmo_norm(sd, f, grid, true),
        big_bmo: big_bmo_norm(sd, f, grid, true),
        jn1: jn_norm(sd, f, 1.0, grid, true),
        jn2: jn_norm(sd, f, 2.0, grid, true),
        jn4: jn_norm(sd, f, 4.0, grid, true),
        h1_s: h.h1_s,
        h1_g: h.h1_g,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CarlesonTable {
    pub carleson_norm: f64,
    /// Worst `L_2(nu)` embedding ratio over seeded samples.
    pub empirical_cp: f64,
    pub bmo_bound_ratio: f64,
    pub bmo_bound_ratio_first_power: f64,
}

pub fn carleson_table(
    sd: &SpectralDecomposition,
    nu: &CarlesonMeasure,
    g: &ScalarField,
    samples: usize,
    seed: u64,
) -> Result<CarlesonTable, CliError> {
    nu.validate(Some(sd.n()))?;
    let ps = PoissonSemigroup::subordinate(sd.clone());
    let grid = cdc_core::semigroup::Semigroup::default_grid(&ps).with_density(8);
    let c4 = carleson_norm(&ps, nu, 4.0, &grid).value;
    let b = bmo_bound(&ps, nu, g, &grid);
    let mut rng = sampling::rng(seed);
    let cp = (0..samples)
        .map(|i| embedding_ratio(&ps, nu, &sampling::field(SampleKind::cycle(i), sd, false, &mut rng), 2.0, c4))
        .fold(0.0, f64::max);
    Ok(CarlesonTable { carleson_norm: c4, empirical_cp: cp, bmo_bound_ratio: b.ratio, bmo_bound_ratio_first_power: b.ratio_first_power })
}

#[cfg(test)]
mod tests {
    use super::*;
    use cdc_core::zoo;

    #[test]
    fn parses_sources() {
        assert_eq!(FieldSource::parse("delta:3").unwrap(), FieldSource::Delta(3));
        assert_eq!(FieldSource::parse("explicit:1, 2").unwrap(), FieldSource::Explicit(vec![1.0, 2.0]));
        assert!(FieldSource::parse("wave:1").is_err());
        assert!(FieldSource::parse("delta").is_err());
    }

    #[test]
    fn delta_table_on_a_cycle() {
        let chain = Chain::new(zoo::cycle(6, 1.0, vec![1.0; 6]).unwrap()).unwrap();
        let f = FieldSource::Delta(0).build(&chain.sd).unwrap();
        let t = norm_table(&chain, &f, &chain.grid()).unwrap();
        assert!((t.jn2.value - t.bmo.value).abs() < 1e-12);
        assert!(t.h1_g <= 2.0 * t.h1_s + 1e-10);
        assert!(FieldSource::Delta(6).build(&chain.sd).is_err());
    }
}
