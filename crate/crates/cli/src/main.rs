//! `gyrostat`: regions of possible motion, bifurcation sets and integral
//! manifolds of the free gyrostat from the command line.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gyrostat::sphere::GridSpec;
use gyrostat::GyrostatParams;

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "gyrostat", version, about = "Regions of possible motion of the free gyrostat")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "RPM_THREADS")]
    threads: Option<usize>,
    /// Principal moments of inertia, "A1,A2,A3".
    #[arg(long, global = true, value_parser = parse_vec3)]
    inertia: Option<[f64; 3]>,
    /// Gyrostatic moment, "l1,l2,l3".
    #[arg(long, global = true, value_parser = parse_vec3, allow_hyphen_values = true)]
    lambda: Option<[f64; 3]>,
    /// Output file (stdout when absent).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bifurcation curve, slices of the bifurcation set and classified samples.
    Bifurcation {
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Curve samples per branch.
        #[arg(long)]
        samples: Option<usize>,
        /// k3 values for the slices, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        k3: Option<Vec<f64>>,
        /// Random integral constants to classify.
        #[arg(long)]
        region_samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Region label and integral-manifold type of k.
    Classify {
        #[command(flatten)]
        k: KArgs,
        #[arg(long)]
        grid: Option<GridSpec>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Integrate a trajectory and check it stays in its region of possible motion.
    Simulate {
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        omega: Option<[f64; 3]>,
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        nu: Option<[f64; 3]>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Draw the initial state at random from this seed when none is given.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generalized boundary of the region of possible motion as CSV.
    Boundary {
        #[command(flatten)]
        k: KArgs,
    },
    /// Fiber counts, components and boundary on a sphere grid as JSON.
    RpmMap {
        #[command(flatten)]
        k: KArgs,
        #[arg(long)]
        grid: Option<GridSpec>,
        /// Also write an SVG of both hemispheres.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Contour condition and fiber-Jacobian rank for states read from CSV.
    Check {
        /// CSV with omega1..3 and nu1..3 columns.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        rank_tol: Option<f64>,
    },
    /// Print the JSON Schema for --config files.
    Schema,
}

#[derive(Debug, Args)]
struct KArgs {
    /// Integral constants "k1,k2,k3".
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    k: Option<[f64; 3]>,
}

fn parse_vec3(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0f64; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().map_err(|e| format!("{p:?}: {e}"))?;
        if !o.is_finite() {
            return Err(format!("{p:?} is not finite"));
        }
    }
    Ok(out)
}

/// Failure classes, mapped to exit codes 2 (input) and 1 (numerical or I/O).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl From<gyrostat::Error> for CliError {
    fn from(e: gyrostat::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Input(e.to_string())
    }
}

/// Settings after merging flags over the config file.
pub struct Context {
    pub config: RunConfig,
    pub params: GyrostatParams,
    pub output: Option<PathBuf>,
}

impl Context {
    pub fn k(&self, flag: Option<[f64; 3]>) -> Result<gyrostat::IntegralConstants, CliError> {
        flag.or(self.config.k)
            .map(Into::into)
            .ok_or_else(|| CliError::Input("integral constants required (--k or \"k\" in the config)".into()))
    }

    pub fn grid(&self, flag: Option<GridSpec>) -> Result<GridSpec, CliError> {
        match (flag, &self.config.grid) {
            (Some(g), _) => Ok(g),
            (None, Some(s)) => s.parse().map_err(CliError::Input),
            (None, None) => Ok(GridSpec::new(128, 256)?),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Schema = cli.command {
        println!("{}", config::SCHEMA.trim_end());
        return Ok(());
    }
    let config = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let threads = cli.common.threads.or(config.threads);
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Input("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Numerical(e.to_string()))?;
    }
    let base = match config.params {
        Some(p) => p.build()?,
        None => GyrostatParams::new([1.0, 2.0, 3.0], [0.1, 0.2, 0.3])?,
    };
    let params = GyrostatParams::new(
        cli.common.inertia.unwrap_or(base.inertia().into()),
        cli.common.lambda.unwrap_or(base.lambda().into()),
    )?;
    let output = cli.common.output.clone().or(config.output.clone());
    let ctx = Context { config, params, output };

    match cli.command {
        Command::Bifurcation { out_dir, samples, k3, region_samples, seed, tol } => commands::bifurcation(
            &ctx,
            commands::BifurcationOptions {
                out_dir: out_dir.or(ctx.config.out_dir.clone()).unwrap_or_else(|| PathBuf::from(".")),
                samples: samples.or(ctx.config.sigma_samples).unwrap_or(400),
                k3: k3.or(ctx.config.k3_slices.clone()).unwrap_or_else(|| vec![0.0, 0.5, 1.0]),
                region_samples: region_samples.or(ctx.config.region_samples).unwrap_or(40),
                seed: seed.or(ctx.config.seed).unwrap_or(0),
                tol: tol.or(ctx.config.sigma_tolerance).unwrap_or(gyrostat::bifurcation::DEFAULT_SIGMA_TOLERANCE),
            },
        ),
        Command::Classify { k, grid, tol } => commands::classify(
            &ctx,
            ctx.k(k.k)?,
            ctx.grid(grid)?,
            tol.or(ctx.config.sigma_tolerance).unwrap_or(gyrostat::bifurcation::DEFAULT_SIGMA_TOLERANCE),
        ),
        Command::Simulate { omega, nu, t_end, tol, seed } => {
            let from_config = ctx.config.state.map(|s| s.build()).transpose()?;
            let state = match (omega, nu, from_config) {
                (Some(w), Some(n), _) => Some(gyrostat::State::new(w.into(), n.into())?),
                (None, None, s) => s,
                (Some(w), None, Some(s)) => Some(gyrostat::State::new(w.into(), s.nu())?),
                (None, Some(n), Some(s)) => Some(gyrostat::State::new(s.omega, n.into())?),
                _ => return Err(CliError::Input("--omega and --nu must be given together".into())),
            };
            commands::simulate(
                &ctx,
                state,
                t_end.or(ctx.config.t_end).unwrap_or(100.0),
                tol.or(ctx.config.integrator_tolerance).unwrap_or(1e-12),
                seed.or(ctx.config.seed).unwrap_or(0),
            )
        }
        Command::Boundary { k } => commands::boundary(&ctx, ctx.k(k.k)?),
        Command::RpmMap { k, grid, svg } => {
            commands::rpm_map(&ctx, ctx.k(k.k)?, ctx.grid(grid)?, svg.or(ctx.config.svg.clone()))
        }
        Command::Check { input, rank_tol } => {
            let input = input
                .or(ctx.config.input.clone())
                .ok_or_else(|| CliError::Input("--input CSV required".into()))?;
            let tol = gyrostat::contour::RankTolerance::new(rank_tol.or(ctx.config.rank_tolerance).unwrap_or(1e-10))?;
            commands::check(&ctx, &input, tol)
        }
        Command::Schema => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Input(_) => ExitCode::from(2),
                CliError::Numerical(_) | CliError::Io(_) => ExitCode::from(1),
            }
        }
    }
}
