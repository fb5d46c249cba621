use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cdc::config::{Backend, GeneratorSpec, GridSpec, GroupSpec, ScenarioConfig, Suite, DEFAULT_SAMPLES};
use cdc::error::CliError;
use cdc::fields::{carleson_table, norm_table, FieldSource};
use cdc::report::{execute, report_json, write_outputs, Outcome};
use cdc_core::carleson::CarlesonMeasure;
use cdc_core::field::ScalarField;
use cdc_core::theorems::Chain;
use cdc_core::zoo::Family;
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

#[derive(Parser)]
#[command(name = "cdc", version, about = "Verification suites for semigroup BMO and Hardy space estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config; writes report.json and metadata.json.
    Run {
        config: PathBuf,
        #[arg(long, value_enum, num_args = 1..)]
        suite: Vec<Suite>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generator families.
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
    /// Print the JSON schema of scenario configs.
    Schema,
    /// Run Markov suites against a generator config.
    Verify {
        #[arg(long, value_enum, default_value = "all", num_args = 1..)]
        suite: Vec<Suite>,
        #[arg(long)]
        generator: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// `t_min:t_max[:points_per_decade]`.
        #[arg(long)]
        grid: Option<String>,
        /// Report path; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Table of all norms of one field.
    Norms {
        #[arg(long)]
        generator: PathBuf,
        /// `delta:X`, `random:SEED` or `explicit:v0,v1,...`.
        #[arg(long, default_value = "random:0")]
        field: String,
        #[arg(long)]
        grid: Option<String>,
    },
    /// Carleson norm, embedding constant and BMO bound of a measure.
    Carleson {
        #[arg(long)]
        generator: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        /// Weight `g` of the balayage, as for `norms`; constant 1 when absent.
        #[arg(long)]
        field: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run group-algebra suites against a group config.
    Group {
        #[arg(long, value_enum, default_value = "all", num_args = 1..)]
        suite: Vec<Suite>,
        #[arg(long)]
        group: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ZooAction {
    List,
}

fn load<T: DeserializeOwned>(path: &Path, field: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(field, e.to_string()))
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<(), CliError> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

enum Destination<'a> {
    Directory(&'a Path),
    File(&'a Path),
    Stdout,
}

fn finish(outcome: &Outcome, dest: Destination) -> Result<bool, CliError> {
    match dest {
        Destination::Directory(dir) => {
            let path = write_outputs(outcome, dir)?;
            eprintln!("wrote {}", path.display());
        }
        Destination::File(path) => std::fs::write(path, report_json(&outcome.report)?).map_err(|e| CliError::io(path, e))?,
        Destination::Stdout => print!("{}", report_json(&outcome.report)?),
    }
    for s in &outcome.report.suites {
        eprintln!("{:<12} {:?}", s.suite, s.status);
        for a in s.assertions.iter().filter(|a| !a.passed) {
            eprintln!("  failed: {} (value {:?}, limit {:?})", a.name, a.value, a.limit);
        }
    }
    Ok(outcome.report.passed)
}

fn destination(out: Option<&Path>) -> Destination<'_> {
    out.map_or(Destination::Stdout, Destination::File)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Run { config, suite, seed, out } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if !suite.is_empty() {
                cfg.suites = suite;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let dir = out.or_else(|| cfg.output.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("cdc-out"));
            finish(&execute(&cfg)?, Destination::Directory(&dir))
        }
        Command::Zoo { action: ZooAction::List } => {
            for f in Family::ALL {
                println!("{:<18} {}", f.name(), f.describe());
            }
            Ok(true)
        }
        Command::Schema => {
            print_json(&cdc::config::schema())?;
            Ok(true)
        }
        Command::Verify { suite, generator, seed, samples, grid, out } => {
            let cfg = ScenarioConfig {
                backend: Backend::Markov,
                generator: Some(load::<GeneratorSpec>(&generator, "generator")?),
                group: None,
                grid: grid.as_deref().map(GridSpec::parse).transpose()?,
                suites: suite,
                seed,
                samples,
                curves: false,
                output: None,
            };
            finish(&execute(&cfg)?, destination(out.as_deref()))
        }
        Command::Norms { generator, field, grid } => {
            let chain = Chain::new(load::<GeneratorSpec>(&generator, "generator")?.build()?)?;
            let f = FieldSource::parse(&field)?.build(&chain.sd)?;
            let grid = match grid {
                Some(g) => GridSpec::parse(&g)?.build()?,
                None => chain.grid(),
            };
            print_json(&norm_table(&chain, &f, &grid)?)?;
            Ok(true)
        }
        Command::Carleson { generator, measure, field, samples, seed } => {
            let sd = load::<GeneratorSpec>(&generator, "generator")?.build()?.decompose()?;
            let nu: CarlesonMeasure = load(&measure, "measure")?;
            let g = match field {
                Some(s) => FieldSource::parse(&s)?.build(&sd)?,
                None => ScalarField::constant(sd.n(), 1.0),
            };
            print_json(&carleson_table(&sd, &nu, &g, samples, seed)?)?;
            Ok(true)
        }
        Command::Group { suite, group, seed, samples, grid, out } => {
            let cfg = ScenarioConfig {
                backend: Backend::Group,
                generator: None,
                group: Some(load::<GroupSpec>(&group, "group")?),
                grid: grid.as_deref().map(GridSpec::parse).transpose()?,
                suites: suite,
                seed,
                samples,
                curves: false,
                output: None,
            };
            finish(&execute(&cfg)?, destination(out.as_deref()))
        }
    }
}

fn main() -> ExitCode {
    cdc::init_threads();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
