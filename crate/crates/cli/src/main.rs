mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use bebound::DistributionSpec;
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{Command, Family, FilterChoice, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "bebound",
    version,
    about = "Bounds on distribution functions from characteristic functions"
)]
struct Cli {
    /// Read the whole run configuration from a JSON file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write results here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Quadrature tolerance.
    #[arg(long, global = true, env = "BEBOUND_TOL")]
    tol: Option<f64>,
    /// Seed for randomized searches.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Clone, Debug)]
struct Grid(Vec<f64>);

#[derive(Clone, Debug)]
struct Counts(Vec<usize>);

#[derive(Clone, Debug)]
struct Cutoffs(Vec<f64>);

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FilterId {
    Prawitz,
    M02,
}

#[derive(Args, Debug)]
struct FilterArgs {
    #[arg(long, value_enum)]
    filter: FilterId,
    /// Tilt parameter of the m02 filter; defaults to its admissible minimum.
    #[arg(long)]
    kappa: Option<f64>,
}

impl FilterArgs {
    fn choice(&self) -> FilterChoice {
        match self.filter {
            FilterId::Prawitz => FilterChoice::Prawitz,
            FilterId::M02 => FilterChoice::M02 { kappa: self.kappa },
        }
    }
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Prawitz bracket on the CDF over a grid of x (CSV).
    BoundCdf {
        /// Law as JSON, or @path to a JSON file.
        #[arg(long, value_parser = parse_spec)]
        spec: DistributionSpec,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long = "T")]
        big_t: f64,
        /// lo:hi:count or a comma-separated list.
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
        x_grid: Grid,
    },
    /// Bracket on x^k P(X >= x) over a grid of x >= 0 (CSV).
    BoundTail {
        #[arg(long, value_parser = parse_spec)]
        spec: DistributionSpec,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long)]
        k: usize,
        #[arg(long = "T")]
        big_t: f64,
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
        x_grid: Grid,
    },
    /// Extremal characteristic function value over standardized laws with E|X|^3 = rho (JSON).
    Envelope {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        rho: f64,
        /// Maximize |f(t) - exp(-t^2/2)| instead of |f(t)|.
        #[arg(long)]
        normal_gap: bool,
        #[arg(long)]
        starts: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Large-deviation tail bound with its constants (JSON).
    NagaevLd {
        #[arg(long)]
        z0: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.05)]
        a_max: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        z: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        n: usize,
    },
    /// Normalized sup of |P(S > Bz) - P(Z > z)| for iid sums (CSV).
    ScanConstants {
        #[arg(long, value_enum)]
        family: Family,
        /// Comma-separated numbers of summands.
        #[arg(long, value_parser = parse_counts)]
        n: Counts,
        /// Success probability for the bernoulli family.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
        z_grid: Option<Grid>,
    },
    /// Check brackets against exact lattice laws; exit status 1 on a violation (JSON).
    Audit {
        /// JSON array of laws, or @path; the built-in 50-law suite when absent.
        #[arg(long, value_parser = parse_specs)]
        specs: Option<SpecList>,
        /// Comma-separated cutoffs.
        #[arg(long = "T", value_parser = parse_cutoffs)]
        big_t: Option<Cutoffs>,
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
        x_grid: Option<Grid>,
        /// Comma-separated tail orders; empty string for none.
        #[arg(long, value_parser = parse_orders)]
        tail_orders: Option<Counts>,
        /// Restrict to one filter.
        #[arg(long, value_enum)]
        filter: Option<FilterId>,
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Sampled m1, m2 and kernel columns of a filter (CSV).
    FilterInfo {
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, default_value_t = config::default_points())]
        points: usize,
        #[arg(long, default_value_t = config::default_x_max())]
        x_max: f64,
    },
}

#[derive(Clone, Debug)]
struct SpecList(Vec<DistributionSpec>);

fn read_json_arg(s: &str) -> Result<String, String> {
    match s.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}")),
        None => Ok(s.to_string()),
    }
}

fn parse_spec(s: &str) -> Result<DistributionSpec, String> {
    let text = read_json_arg(s)?;
    let spec: DistributionSpec =
        serde_json::from_str(&text).map_err(|e| format!("malformed spec JSON: {e}"))?;
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn parse_specs(s: &str) -> Result<SpecList, String> {
    let text = read_json_arg(s)?;
    let specs: Vec<DistributionSpec> =
        serde_json::from_str(&text).map_err(|e| format!("malformed spec list JSON: {e}"))?;
    for (i, spec) in specs.iter().enumerate() {
        spec.validate().map_err(|e| format!("spec {i}: {e}"))?;
    }
    Ok(SpecList(specs))
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    config::parse_grid(s).map(Grid)
}

fn parse_counts(s: &str) -> Result<Counts, String> {
    config::parse_list(s).map(Counts)
}

fn parse_orders(s: &str) -> Result<Counts, String> {
    if s.trim().is_empty() {
        return Ok(Counts(vec![]));
    }
    parse_counts(s)
}

fn parse_cutoffs(s: &str) -> Result<Cutoffs, String> {
    config::parse_list(s).map(Cutoffs)
}

impl Sub {
    fn into_command(self) -> Command {
        match self {
            Sub::BoundCdf {
                spec,
                filter,
                big_t,
                x_grid,
            } => Command::BoundCdf {
                spec,
                filter: filter.choice(),
                big_t,
                x_grid: x_grid.0,
            },
            Sub::BoundTail {
                spec,
                filter,
                k,
                big_t,
                x_grid,
            } => Command::BoundTail {
                spec,
                filter: filter.choice(),
                k,
                big_t,
                x_grid: x_grid.0,
            },
            Sub::Envelope {
                t,
                rho,
                normal_gap,
                starts,
                iterations,
            } => Command::Envelope {
                t,
                rho,
                normal_gap,
                starts,
                iterations,
            },
            Sub::NagaevLd {
                z0,
                c,
                tau,
                alpha,
                a_max,
                a,
                z,
                rho,
                n,
            } => Command::NagaevLd {
                z0,
                c,
                tau,
                alpha,
                a_max,
                a,
                z,
                rho,
                n,
            },
            Sub::ScanConstants {
                family,
                n,
                p,
                z_grid,
            } => Command::ScanConstants {
                family,
                n: n.0,
                p,
                z_grid: z_grid.map(|g| g.0),
            },
            Sub::Audit {
                specs,
                big_t,
                x_grid,
                tail_orders,
                filter,
                kappa,
            } => Command::Audit {
                specs: specs.map(|s| s.0),
                filters: match filter {
                    None => config::default_audit_filters(),
                    Some(FilterId::Prawitz) => vec![FilterChoice::Prawitz],
                    Some(FilterId::M02) => vec![FilterChoice::M02 { kappa }],
                },
                big_t: big_t.map_or_else(config::default_audit_t, |t| t.0),
                x_grid: x_grid.map_or_else(config::default_audit_grid, |g| g.0),
                tail_orders: tail_orders.map_or_else(config::default_tail_orders, |k| k.0),
            },
            Sub::FilterInfo {
                filter,
                points,
                x_max,
            } => Command::FilterInfo {
                filter: filter.choice(),
                points,
                x_max,
            },
        }
    }
}

fn load_config(cli: Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match (cli.config, cli.command) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            serde_json::from_str::<RunConfig>(&text)
                .with_context(|| format!("invalid config {}", path.display()))?
        }
        (None, Some(sub)) => RunConfig {
            command: sub.into_command(),
            output: None,
            tolerance: None,
            seed: None,
        },
        (Some(_), Some(_)) => bail!(bebound::Error::Domain(
            "give either --config or a subcommand, not both".into()
        )),
        (None, None) => bail!(bebound::Error::Domain(
            "a subcommand or --config is required".into()
        )),
    };
    if cli.output.is_some() {
        cfg.output = cli.output;
    }
    if cli.tol.is_some() {
        cfg.tolerance = cli.tol;
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// 2 for bad input, 3 for numerical failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<serde_json::Error>().is_some()
            || cause.downcast_ref::<std::io::Error>().is_some()
        {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<bebound::Error>() {
            use bebound::Error::*;
            return match e {
                Domain(_)
                | Validity(_)
                | Construction(_)
                | Degenerate(_)
                | Capability { .. }
                | Smoothness(_)
                | Infeasible(_) => 2,
                _ => 3,
            };
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load_config(cli).and_then(|cfg| run::run(&cfg));
    match result {
        Ok(run::Status::Success) => ExitCode::SUCCESS,
        Ok(run::Status::AuditFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
