#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! `incomefit`: fit shifted income-distribution models, reduce yearly
//! estimates to the constant-shift-scale model, and compute inequality
//! analytics.
//!
//! Exit codes: 0 success, 1 runtime failure (JSON error on stderr),
//! 2 usage or configuration error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use incomefit::distributions::ModelFamily;

use config::RunConfig;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "INCOMEFIT_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "incomefit", version, about = "Fit shifted parametric income distributions")]
struct Cli {
    /// Seed for sampling and bootstrap resampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $INCOMEFIT_OUT_DIR, else the current directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct DataArgs {
    /// Income column name.
    #[arg(long)]
    income_col: Option<String>,
    /// Weight column name; rows weigh 1 without one.
    #[arg(long)]
    weight_col: Option<String>,
    /// Drop this many smallest incomes.
    #[arg(long)]
    trim_lower: Option<usize>,
    /// Drop this many largest incomes.
    #[arg(long)]
    trim_upper: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit one family; writes the model JSON, binned density and model density.
    Fit {
        data: PathBuf,
        #[arg(long)]
        family: ModelFamily,
        /// Survey year, required by css-inverse-gamma.
        #[arg(long)]
        year: Option<i32>,
        /// Bootstrap replicates for standard errors (0 = none).
        #[arg(long)]
        bootstrap: Option<usize>,
        /// Dataset label stored in the output.
        #[arg(long)]
        label: Option<String>,
        #[command(flatten)]
        data_args: DataArgs,
    },
    /// Fit several families to the same data and tabulate KS and log-likelihood.
    Compare {
        data: PathBuf,
        /// Comma-separated families, or "all".
        #[arg(long, default_value = "all")]
        families: String,
        #[arg(long)]
        year: Option<i32>,
        #[command(flatten)]
        data_args: DataArgs,
    },
    /// Run the reduction over a manifest CSV with columns year,path.
    Reduce {
        manifest: PathBuf,
        #[command(flatten)]
        data_args: DataArgs,
    },
    /// Draw a synthetic sample with unit weights.
    Sample {
        #[arg(long)]
        family: ModelFamily,
        /// Parameters as name=value pairs, e.g. alpha=3,beta=40000,c=-2000.
        #[arg(long)]
        params: String,
        #[arg(short = 'n', long = "n", value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
    },
    /// Closed-form Gini profile over a shape grid, or the empirical Gini of data.
    Gini {
        #[arg(long, allow_negative_numbers = true)]
        phi: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        alpha_min: Option<f64>,
        #[arg(long)]
        alpha_max: Option<f64>,
        #[arg(long)]
        alpha_step: Option<f64>,
        /// Compute the empirical Gini of this CSV instead.
        #[arg(long, conflicts_with_all = ["phi", "alpha_min", "alpha_max", "alpha_step"])]
        data: Option<PathBuf>,
        #[command(flatten)]
        data_args: DataArgs,
    },
    /// Binned sample density.
    Bins {
        data: PathBuf,
        #[command(flatten)]
        data_args: DataArgs,
    },
}

/// A failure with its exit code.
pub struct Failure {
    pub code: u8,
    pub kind: String,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, kind: "usage".into(), message: message.into() }
    }

    pub fn runtime(kind: impl Into<String>, message: impl Into<String>) -> Self {
        Failure { code: 1, kind: kind.into(), message: message.into() }
    }
}

impl From<incomefit::Error> for Failure {
    fn from(e: incomefit::Error) -> Self {
        Failure::runtime(e.kind(), e.to_string())
    }
}

fn apply_data_args(cfg: &mut RunConfig, a: &DataArgs) {
    if let Some(v) = &a.income_col {
        cfg.data.income_column = v.clone();
    }
    if let Some(v) = &a.weight_col {
        cfg.data.weight_column = Some(v.clone());
    }
    if let Some(v) = a.trim_lower {
        cfg.data.trim_lower = v;
    }
    if let Some(v) = a.trim_upper {
        cfg.data.trim_upper = v;
    }
}

fn resolve(cli: &Cli) -> Result<(RunConfig, PathBuf), Failure> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(Failure::usage)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match &cli.command {
        Command::Fit { year, bootstrap, data_args, .. } => {
            apply_data_args(&mut cfg, data_args);
            if year.is_some() {
                cfg.fit.css.year = *year;
            }
            if let Some(b) = bootstrap {
                cfg.bootstrap.replicates = *b;
            }
        }
        Command::Compare { year, data_args, .. } => {
            apply_data_args(&mut cfg, data_args);
            if year.is_some() {
                cfg.fit.css.year = *year;
            }
        }
        Command::Reduce { data_args, .. } | Command::Bins { data_args, .. } => apply_data_args(&mut cfg, data_args),
        Command::Gini { phi, alpha_min, alpha_max, alpha_step, data_args, .. } => {
            apply_data_args(&mut cfg, data_args);
            let g = &mut cfg.gini;
            g.phi = phi.unwrap_or(g.phi);
            g.alpha_min = alpha_min.unwrap_or(g.alpha_min);
            g.alpha_max = alpha_max.unwrap_or(g.alpha_max);
            g.alpha_step = alpha_step.unwrap_or(g.alpha_step);
        }
        Command::Sample { .. } => {}
    }
    cfg.validate().map_err(Failure::usage)?;
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((cfg, out_dir))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (cfg, out) = resolve(&cli)?;
    std::fs::create_dir_all(&out).map_err(|e| Failure::runtime("output", format!("{}: {e}", out.display())))?;
    match cli.command {
        Command::Fit { data, family, label, .. } => commands::fit(&cfg, &out, &data, family, label),
        Command::Compare { data, families, .. } => commands::compare(&cfg, &out, &data, &families),
        Command::Reduce { manifest, .. } => commands::reduce(&cfg, &out, &manifest),
        Command::Sample { family, params, n } => commands::sample(&cfg, &out, family, &params, n as usize),
        Command::Gini { data, .. } => commands::gini(&cfg, &out, data.as_deref()),
        Command::Bins { data, .. } => commands::bins(&cfg, &out, &data),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let doc = serde_json::json!({ "error": { "kind": f.kind, "message": f.message } });
            eprintln!("{doc}");
            ExitCode::from(f.code)
        }
    }
}
