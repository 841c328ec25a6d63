//! Run configuration: command-line flags layered over an optional JSON file.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use crate::CliError;

/// Flags shared by every subcommand. Each one overrides the same key in the
/// JSON file given with `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON file with any of the keys below (snake_case); flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Activation, e.g. `logistic`, `tanh`, `ramp`, `three_step`,
    /// `power_tail:gamma=0.4`, `gompertz:alpha=1,beta=1`.
    #[arg(long)]
    pub activation: Option<String>,
    /// `table1`, `identity`, `cosine_bump`, `const:<c>` or an expression in y1..yr.
    #[arg(long)]
    pub target: Option<String>,
    /// Box as `a1,b1[,a2,b2,...]`.
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    /// One or more comma-separated values of n.
    #[arg(long)]
    pub n: Option<String>,
    /// Grid points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Moment order alpha in the bounds.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Lipschitz exponent beta of the target.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Exponent d in delta_n = n^-d (default alpha / (alpha + beta)).
    #[arg(long = "delta-exp")]
    pub delta_exp: Option<f64>,
    /// Certified tail level of the kernel window.
    #[arg(long = "tail-eps")]
    pub tail_eps: Option<f64>,
    /// Output path (file, or file stem for `kernel`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 1 runs everything on the calling thread.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Enumerate the whole lattice instead of the kernel window.
    #[arg(long = "full-lattice")]
    pub full_lattice: bool,
    /// Use the extended max-min operator for targets outside [0, 1].
    #[arg(long)]
    pub extended: bool,
    /// Operator: classical, max_product, max_min, quasi_max_min, extended_max_min.
    #[arg(long)]
    pub operator: Option<String>,
    /// Random trials per property (`verify`).
    #[arg(long)]
    pub trials: Option<usize>,
}

/// Keys accepted in the JSON configuration file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub activation: Option<String>,
    pub target: Option<String>,
    pub domain: Option<Vec<f64>>,
    pub n: Option<Vec<u64>>,
    pub grid: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub delta_exp: Option<f64>,
    pub tail_eps: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub full_lattice: Option<bool>,
    pub extended: Option<bool>,
    pub operator: Option<String>,
    pub trials: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }
}

/// Flags and file merged, still unvalidated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub activation: Option<String>,
    pub target: Option<String>,
    pub domain: Option<Vec<f64>>,
    pub n: Option<Vec<u64>>,
    pub grid: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub delta_exp: Option<f64>,
    pub tail_eps: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub full_lattice: bool,
    pub extended: bool,
    pub operator: Option<String>,
    pub trials: Option<usize>,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let domain = match &args.domain {
            Some(text) => Some(parse_list(text, "domain")?),
            None => file.domain,
        };
        let n = match &args.n {
            Some(text) => Some(parse_list(text, "n")?),
            None => file.n,
        };
        Ok(RunConfig {
            activation: args.activation.clone().or(file.activation),
            target: args.target.clone().or(file.target),
            domain,
            n,
            grid: args.grid.or(file.grid),
            alpha: args.alpha.or(file.alpha),
            beta: args.beta.or(file.beta),
            delta_exp: args.delta_exp.or(file.delta_exp),
            tail_eps: args.tail_eps.or(file.tail_eps),
            out: args.out.clone().or(file.out),
            seed: args.seed.or(file.seed),
            threads: args.threads.or(file.threads),
            full_lattice: args.full_lattice || file.full_lattice.unwrap_or(false),
            extended: args.extended || file.extended.unwrap_or(false),
            operator: args.operator.clone().or(file.operator),
            trials: args.trials.or(file.trials),
        })
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|item| {
            item.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("invalid {what} entry `{}`", item.trim())))
        })
        .collect()
}
