use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use rotsym::geometry::Estimator;
use rotsym::montecarlo::{run_experiment, ExperimentConfig, RunOptions};
use rotsym_cli::commands::{
    cmd_are, cmd_sample, cmd_test, default_methods, exit, parse_angular, parse_floats,
    parse_methods, parse_unit, write_csv, write_power_csv, CommandError, Family, SampleParams,
};
use rotsym_cli::describe::{describe, DEFAULT_GRID};
use rotsym_cli::ingest::{ingest_path, write_sample, Format};

/// Tests of rotational symmetry for directional data on the unit sphere.
#[derive(Parser)]
#[command(name = "rotsym", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    /// Spherical mean X̄/‖X̄‖.
    Mean,
    /// Leading eigenvector of Σ XXᵀ.
    Axis,
}

#[derive(clap::Args)]
struct DataArgs {
    /// CSV file of observations.
    #[arg(long)]
    data: PathBuf,
    /// unit_vectors_csv: p columns per row. lonlat_degrees_csv: longitude,
    /// latitude in degrees (latitude in [-90, 90]), mapped to
    /// (cos φ cos λ, cos φ sin λ, sin φ).
    #[arg(long, value_enum, default_value = "unit_vectors_csv")]
    format: Format,
    /// Rows whose norm is within this of 1 are renormalised.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// The first row is a header.
    #[arg(long)]
    header: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run symmetry tests and print a JSON report.
    Test {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated method labels (s-loc, s-sc, s-hyb, s-hybF, s-cov,
        /// u-loc, u-sc, u-hyb, u-hybF, u-loc-eff, s-loc-hd, s-sc-hd, s-hyb-hd).
        #[arg(long, value_delimiter = ',')]
        tests: Vec<String>,
        /// Symmetry axis for the specified-location tests, e.g. 0,0,1.
        #[arg(long)]
        theta: Option<String>,
        /// Location estimator for the unspecified-location tests.
        #[arg(long, value_enum)]
        estimator: Option<EstimatorArg>,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
    },
    /// Draw a sample and write it as CSV.
    Sample {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Location; defaults to the last coordinate axis.
        #[arg(long)]
        theta: Option<String>,
        /// vMF concentration (vmf) or skewness intensity (tm).
        #[arg(long)]
        kappa: Option<f64>,
        /// Angular function: vmf:<eta>, uniform or exp_arcsin:<kappa>.
        #[arg(long, default_value = "vmf:2")]
        g: String,
        /// Shape: diagonal entries or the full row-major matrix; rescaled to
        /// trace p-1 (te) or p (acg) with a warning.
        #[arg(long)]
        lambda: Option<String>,
        /// Skewness direction in R^{p-1} (tm); defaults to e_1.
        #[arg(long)]
        mu: Option<String>,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment from a TOML config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Power table CSV (test, ell, n, p, freq, se, N); standard output
        /// when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Power table JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Override the replicate count of the config.
        #[arg(long)]
        reps: Option<usize>,
        /// Override the base seed of the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Tabulate the vMF efficiency of the unspecified-location test.
    Are {
        #[arg(long, value_delimiter = ',', default_values_t = vec![3usize, 4, 6, 10])]
        p: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0, 2.0, 5.0, 10.0, 20.0])]
        eta: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Kernel density summary of the cosines xᵀθ.
    Describe {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        theta: String,
        /// Probability content of the shortest set.
        #[arg(long, default_value_t = 0.9)]
        mass: f64,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
    },
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(d: &DataArgs) -> Result<rotsym::geometry::DirectionalSample, CommandError> {
    Ok(ingest_path(&d.data, d.format, d.tol, d.header)?)
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Test {
            data,
            tests,
            theta,
            estimator,
            level,
        } => {
            let sample = load(&data)?;
            let theta = theta.as_deref().map(parse_unit).transpose()?;
            let estimator = estimator.map(|e| match e {
                EstimatorArg::Mean => Estimator::SphericalMean,
                EstimatorArg::Axis => Estimator::PrincipalAxis,
            });
            let methods = if tests.is_empty() {
                default_methods(theta.is_some(), estimator.is_some())
            } else {
                parse_methods(&tests)?
            };
            let report = cmd_test(&sample, &methods, theta, estimator, level)?;
            print_json(&report)
        }
        Command::Sample {
            family,
            p,
            n,
            seed,
            theta,
            kappa,
            g,
            lambda,
            mu,
            out,
        } => {
            let params = SampleParams {
                family,
                p,
                n,
                seed,
                theta: theta.as_deref().map(parse_unit).transpose()?,
                kappa,
                g: parse_angular(&g)?,
                lambda: lambda.as_deref().map(parse_floats).transpose()?,
                mu: mu.as_deref().map(parse_unit).transpose()?,
            };
            let (sample, rescaled) = cmd_sample(&params)?;
            if let Some(trace) = rescaled {
                eprintln!("warning: shape matrix had trace {trace}; rescaled to the required trace");
            }
            write_sample(&sample, output(out.as_deref())?).map_err(CommandError::from)?;
            Ok(())
        }
        Command::Simulate {
            config,
            out,
            json,
            workers,
            reps,
            seed,
        } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("cannot read {}", config.display()))?;
            let mut cfg = ExperimentConfig::from_toml_str(&text).map_err(CommandError::from)?;
            if let Some(r) = reps {
                cfg.reps = r;
            }
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            let result = run_experiment(&cfg, &RunOptions { workers, keep_statistics: false })
                .map_err(CommandError::from)?;
            write_power_csv(&result.table, output(out.as_deref())?)?;
            if let Some(j) = json {
                let f = BufWriter::new(File::create(&j).with_context(|| format!("cannot create {}", j.display()))?);
                serde_json::to_writer_pretty(f, &result.table)?;
            }
            Ok(())
        }
        Command::Are { p, eta, out } => {
            let rows = cmd_are(&p, &eta)?;
            write_csv(&rows, output(out.as_deref())?)?;
            Ok(())
        }
        Command::Describe {
            data,
            theta,
            mass,
            grid,
        } => {
            let sample = load(&data)?;
            let theta = parse_unit(&theta)?;
            let summary = describe(&sample, &theta, mass, grid).map_err(CommandError::from)?;
            print_json(&summary)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            let (code, report) = match e.downcast_ref::<CommandError>() {
                Some(c) => (c.exit_code(), serde_json::to_string(&c.report())),
                None => (
                    exit::FAILURE,
                    serde_json::to_string(&serde_json::json!({
                        "error": { "code": "failure", "message": format!("{e:#}") }
                    })),
                ),
            };
            eprintln!("{}", report.unwrap_or_else(|_| format!("{e:#}")));
            ExitCode::from(code as u8)
        }
    }
}
