//! Scenario configs: which space, which suites, which seed. Unknown keys are rejected.

use std::path::Path;

use cdc_core::error::Result as CoreResult;
use cdc_core::group::{FiniteGroup, LengthFunction, MultiplierSemigroup};
use cdc_core::grid::TimeGrid;
use cdc_core::semigroup::Generator;
use cdc_core::zoo;
use nalgebra::DMatrix;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_SAMPLES: usize = 50;
pub const DEFAULT_SEED: u64 = 0;

fn default_rate() -> f64 {
    1.0
}

fn default_density() -> f64 {
    0.3
}

/// Invariant measure: the string `"uniform"` or explicit positive weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum MuSpec {
    Named(UniformTag),
    Weights(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum UniformTag {
    Uniform,
}

impl Default for MuSpec {
    fn default() -> Self {
        MuSpec::Named(UniformTag::Uniform)
    }
}

impl MuSpec {
    fn weights(&self, n: usize) -> Vec<f64> {
        match self {
            MuSpec::Named(UniformTag::Uniform) => vec![1.0; n],
            MuSpec::Weights(w) => w.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Cycle {
        n: usize,
        #[serde(default = "default_rate")]
        rate: f64,
        #[serde(default)]
        mu: MuSpec,
    },
    Path {
        n: usize,
        #[serde(default = "default_rate")]
        rate: f64,
        #[serde(default)]
        mu: MuSpec,
    },
    Complete {
        n: usize,
        #[serde(default = "default_rate")]
        rate: f64,
        #[serde(default)]
        mu: MuSpec,
    },
    Star {
        n: usize,
        #[serde(default = "default_rate")]
        rate: f64,
        #[serde(default)]
        mu: MuSpec,
    },
    Hypercube {
        n: usize,
        #[serde(default = "default_rate")]
        rate: f64,
        #[serde(default)]
        mu: MuSpec,
    },
    /// Explicit rates, or a seeded draw when only `n` is given.
    BirthDeath {
        #[serde(default)]
        n: Option<usize>,
        #[serde(default)]
        birth: Option<Vec<f64>>,
        #[serde(default)]
        death: Option<Vec<f64>>,
        #[serde(default)]
        seed: u64,
    },
    RandomReversible {
        n: usize,
        #[serde(default = "default_density")]
        density: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Row-major generator matrix.
    Explicit {
        q: Vec<Vec<f64>>,
        #[serde(default)]
        mu: MuSpec,
    },
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<Generator, CliError> {
        let r: CoreResult<Generator> = match self {
            GeneratorSpec::Cycle { n, rate, mu } => zoo::cycle(*n, *rate, mu.weights(*n)),
            GeneratorSpec::Path { n, rate, mu } => zoo::path(*n, *rate, mu.weights(*n)),
            GeneratorSpec::Complete { n, rate, mu } => zoo::complete(*n, *rate, mu.weights(*n)),
            GeneratorSpec::Star { n, rate, mu } => zoo::star(*n, *rate, mu.weights(*n)),
            GeneratorSpec::Hypercube { n, rate, mu } => zoo::hypercube(*n, *rate, mu.weights(*n)),
            GeneratorSpec::BirthDeath { n, birth, death, seed } => match (n, birth, death) {
                (_, Some(b), Some(d)) => zoo::birth_death(b, d),
                (Some(n), None, None) => zoo::random_birth_death(*n, *seed),
                _ => return Err(CliError::config("generator", "birth-death needs either `n` or both `birth` and `death`")),
            },
            GeneratorSpec::RandomReversible { n, density, seed } => zoo::random_reversible(*n, *density, *seed),
            GeneratorSpec::Explicit { q, mu } => {
                let n = q.len();
                if let Some(row) = q.iter().position(|r| r.len() != n) {
                    return Err(CliError::config("generator.q", format!("row {row} has {} entries, expected {n}", q[row].len())));
                }
                let m = DMatrix::from_fn(n, n, |i, j| q[i][j]);
                Generator::validate(m, mu.weights(n))
            }
        };
        r.map_err(|e| CliError::config("generator", e.to_string()))
    }
}

/// Length function on a group: a named construction or an explicit table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum PsiSpec {
    /// Word length for the group's default generators; conditional negativity is checked.
    WordLength,
    /// `1` off the identity.
    Indicator,
    /// `1 - cos(2 pi k / n)` on `Z_n`.
    Cosine,
    /// `sum_x (v(g^-1 x) - v(x))^2` for a seeded random `v`.
    Cocycle { seed: u64 },
    Table(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GroupSpec {
    Cyclic { n: usize, psi: PsiSpec },
    Dihedral { n: usize, psi: PsiSpec },
    Symmetric { n: usize, psi: PsiSpec },
    Klein { psi: PsiSpec },
    Quaternion { psi: PsiSpec },
    /// Multiplication table `table[g][h] = gh`, identity anywhere.
    Table {
        #[serde(default)]
        name: Option<String>,
        table: Vec<Vec<usize>>,
        psi: PsiSpec,
    },
}

impl GroupSpec {
    pub fn psi(&self) -> &PsiSpec {
        match self {
            GroupSpec::Cyclic { psi, .. }
            | GroupSpec::Dihedral { psi, .. }
            | GroupSpec::Symmetric { psi, .. }
            | GroupSpec::Klein { psi }
            | GroupSpec::Quaternion { psi }
            | GroupSpec::Table { psi, .. } => psi,
        }
    }

    pub fn group(&self) -> Result<FiniteGroup, CliError> {
        match self {
            GroupSpec::Cyclic { n, .. } => FiniteGroup::cyclic(*n),
            GroupSpec::Dihedral { n, .. } => FiniteGroup::dihedral(*n),
            GroupSpec::Symmetric { n, .. } => FiniteGroup::symmetric(*n),
            GroupSpec::Klein { .. } => FiniteGroup::klein(),
            GroupSpec::Quaternion { .. } => FiniteGroup::quaternion(),
            GroupSpec::Table { name, table, .. } => FiniteGroup::from_table(name.clone().unwrap_or_else(|| "table".into()), table.clone()),
        }
        .map_err(|e| CliError::config("group", e.to_string()))
    }

    pub fn build(&self) -> Result<MultiplierSemigroup, CliError> {
        let group = self.group()?;
        let psi = match self.psi() {
            PsiSpec::WordLength => LengthFunction::word_length(&group),
            PsiSpec::Indicator => LengthFunction::indicator(&group),
            PsiSpec::Cosine => LengthFunction::cyclic_cosine(&group),
            PsiSpec::Cocycle { seed } => LengthFunction::random_cocycle(&group, *seed),
            PsiSpec::Table(v) => LengthFunction::new(&group, "table", v.clone()),
        }
        .map_err(|e| CliError::config("group.psi", e.to_string()))?;
        MultiplierSemigroup::new(group, psi).map_err(|e| CliError::config("group.psi", e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "default_points")]
    pub points_per_decade: u32,
}

fn default_points() -> u32 {
    16
}

impl GridSpec {
    pub fn build(&self) -> Result<TimeGrid, CliError> {
        TimeGrid::new(self.t_min, self.t_max, self.points_per_decade).map_err(|e| CliError::config("grid", e.to_string()))
    }

    /// `t_min:t_max[:points_per_decade]`.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| CliError::config("grid", format!("cannot parse `{p}`")));
        let spec = match parts.as_slice() {
            [a, b] => GridSpec { t_min: num(a)?, t_max: num(b)?, points_per_decade: 16 },
            [a, b, c] => GridSpec {
                t_min: num(a)?,
                t_max: num(b)?,
                points_per_decade: c.trim().parse().map_err(|_| CliError::config("grid", format!("cannot parse `{c}`")))?,
            },
            _ => return Err(CliError::config("grid", "expected t_min:t_max[:points_per_decade]")),
        };
        spec.build()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Semigroup axioms, Kadison-Schwarz and the semigroup law.
    Axioms,
    /// Gamma_2 >= 0, decided exactly and by the gradient-commutation cross-check.
    Curvature,
    /// `T_s|f|^2 - |T_s f|^2 = c int_0^s T_{s-t} Gamma(T_t f) dt` and the fitted `c`.
    Meyer,
    /// Pairing `|tau(f g^*)|` against `h1_S`, `h1_G` and `bmo`; on groups, in the trace of the algebra.
    Theorem01,
    /// Truncated square function relations and the bilinear estimate.
    Lemma22,
    /// Holder-type difference bound and the maximal bound for the heat flow.
    Hypotheses,
    /// Atoms and the bmo/BMO and h1_S/h1_G equivalences; on groups, the hypotheses and atoms.
    Theorem02,
    /// John-Nirenberg identity and windows, and `h1_G <= 2 h1_S`.
    Oscillation,
    /// Square functions and Poisson semigroup by two routes; subordination inequalities.
    Poisson,
    /// BMO bound for Poisson balayages and the `L_2(nu)` embedding.
    Carleson,
    /// Conditional negativity of the length function.
    Negativity,
    /// Gromov-form and definitional Gamma agree; operator Kadison-Schwarz.
    Routes,
    /// Group stack against the commutative stack on `Z_n`.
    Consistency,
    /// `tau((A+B)^{1/2}) <= tau(A^{1/2}) + tau(B^{1/2})`.
    Convexity,
    All,
}

impl Suite {
    pub const MARKOV: [Suite; 10] = [
        Suite::Axioms,
        Suite::Curvature,
        Suite::Meyer,
        Suite::Theorem01,
        Suite::Lemma22,
        Suite::Hypotheses,
        Suite::Theorem02,
        Suite::Oscillation,
        Suite::Poisson,
        Suite::Carleson,
    ];

    pub const GROUP: [Suite; 7] = [
        Suite::Negativity,
        Suite::Curvature,
        Suite::Routes,
        Suite::Theorem01,
        Suite::Theorem02,
        Suite::Consistency,
        Suite::Convexity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::Curvature => "curvature",
            Suite::Meyer => "meyer",
            Suite::Theorem01 => "theorem01",
            Suite::Lemma22 => "lemma22",
            Suite::Hypotheses => "hypotheses",
            Suite::Theorem02 => "theorem02",
            Suite::Oscillation => "oscillation",
            Suite::Poisson => "poisson",
            Suite::Carleson => "carleson",
            Suite::Negativity => "negativity",
            Suite::Routes => "routes",
            Suite::Consistency => "consistency",
            Suite::Convexity => "convexity",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Markov,
    Group,
}

fn default_suites() -> Vec<Suite> {
    vec![Suite::All]
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ScenarioConfig {
    pub backend: Backend,
    /// Required for the `markov` backend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    /// Required for the `group` backend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
    /// Overrides the default grid derived from the spectrum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_suites")]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Also write `curves.csv` with `(t, norm)` profiles of a seeded sample.
    #[serde(default)]
    pub curves: bool,
    /// Output directory; the CLI flag takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::config("config", e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn check(&self) -> Result<(), CliError> {
        match self.backend {
            Backend::Markov if self.generator.is_none() => return Err(CliError::config("generator", "required for the markov backend")),
            Backend::Group if self.group.is_none() => return Err(CliError::config("group", "required for the group backend")),
            _ => {}
        }
        if self.suites.is_empty() {
            return Err(CliError::config("suites", "at least one suite is required"));
        }
        let allowed: &[Suite] = match self.backend {
            Backend::Markov => &Suite::MARKOV,
            Backend::Group => &Suite::GROUP,
        };
        if let Some(s) = self.suites.iter().find(|s| **s != Suite::All && !allowed.contains(s)) {
            return Err(CliError::config("suites", format!("`{}` is not available on this backend", s.name())));
        }
        if self.samples == 0 {
            return Err(CliError::config("samples", "must be positive"));
        }
        if let Some(g) = &self.grid {
            g.build()?;
        }
        Ok(())
    }

    /// Requested suites with `all` expanded, deduplicated, in canonical order.
    pub fn expanded_suites(&self) -> Vec<Suite> {
        let allowed: &[Suite] = match self.backend {
            Backend::Markov => &Suite::MARKOV,
            Backend::Group => &Suite::GROUP,
        };
        if self.suites.contains(&Suite::All) {
            return allowed.to_vec();
        }
        allowed.iter().copied().filter(|s| self.suites.contains(s)).collect()
    }
}

pub fn schema() -> serde_json::Value {
    serde_json::to_value(schemars::schema_for!(ScenarioConfig)).expect("schema serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_minimal_markov_config() {
        let c = ScenarioConfig::from_json(r#"{"backend": "markov", "generator": {"type": "cycle", "n": 8}}"#).unwrap();
        assert_eq!(c.expanded_suites(), Suite::MARKOV.to_vec());
        assert_eq!(c.samples, DEFAULT_SAMPLES);
        assert_eq!(c.generator.unwrap().build().unwrap().n(), 8);
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = ScenarioConfig::from_json(r#"{"backend": "markov", "generator": {"type": "cycle", "n": 8}, "sede": 3}"#).unwrap_err();
        assert!(e.to_string().contains("sede"), "{e}");
        let e = ScenarioConfig::from_json(r#"{"backend": "markov", "generator": {"type": "cycle", "n": 8, "rte": 1}}"#).unwrap_err();
        assert!(e.to_string().contains("rte"), "{e}");
    }

    #[test]
    fn backend_needs_its_space() {
        assert!(ScenarioConfig::from_json(r#"{"backend": "group"}"#).is_err());
        let e = ScenarioConfig::from_json(r#"{"backend": "group", "group": {"type": "klein", "psi": "indicator"}, "suites": ["meyer"]}"#).unwrap_err();
        assert!(e.to_string().contains("meyer"));
    }

    #[test]
    fn explicit_generators_and_measures() {
        let spec: GeneratorSpec = serde_json::from_str(r#"{"type": "explicit", "q": [[-1, 1], [2, -2]], "mu": [2, 1]}"#).unwrap();
        assert_eq!(spec.build().unwrap().mu(), &[2.0, 1.0]);
        let bad: GeneratorSpec = serde_json::from_str(r#"{"type": "explicit", "q": [[-1, 1], [1, -1]], "mu": [2, 1]}"#).unwrap();
        assert!(bad.build().is_err());
        let zero: GeneratorSpec = serde_json::from_str(r#"{"type": "explicit", "q": [[0, 0], [0, 0]]}"#).unwrap();
        assert!(zero.build().is_ok());
    }

    #[test]
    fn group_specs_build() {
        let g: GroupSpec = serde_json::from_str(r#"{"type": "symmetric", "n": 3, "psi": {"cocycle": {"seed": 2}}}"#).unwrap();
        assert_eq!(g.build().unwrap().order(), 6);
        let t: GroupSpec = serde_json::from_str(r#"{"type": "table", "table": [[0, 1], [1, 0]], "psi": {"table": [0, 2]}}"#).unwrap();
        assert_eq!(t.build().unwrap().psi.get(1), 2.0);
        let neg: GroupSpec = serde_json::from_str(r#"{"type": "cyclic", "n": 3, "psi": {"table": [0, -1, -1]}}"#).unwrap();
        assert!(neg.build().is_err());
    }

    #[test]
    fn grid_strings() {
        assert_eq!(GridSpec::parse("1e-3:10").unwrap().points_per_decade, 16);
        assert_eq!(GridSpec::parse("0.1:1:4").unwrap().points_per_decade, 4);
        assert!(GridSpec::parse("1:0.1").is_err());
        assert!(GridSpec::parse("x").is_err());
    }
}
