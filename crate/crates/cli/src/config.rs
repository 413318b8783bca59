use std::path::PathBuf;

use bebound::{DistributionSpec, Error};
use serde::{Deserialize, Serialize};

/// One run: a command with its inputs plus the shared settings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum FilterChoice {
    Prawitz,
    /// `kappa` defaults to the smallest admissible value.
    M02 {
        #[serde(default)]
        kappa: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Esseen,
    Bernoulli,
    Rademacher,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    BoundCdf {
        spec: DistributionSpec,
        filter: FilterChoice,
        #[serde(rename = "T")]
        big_t: f64,
        x_grid: Vec<f64>,
    },
    BoundTail {
        spec: DistributionSpec,
        filter: FilterChoice,
        k: usize,
        #[serde(rename = "T")]
        big_t: f64,
        x_grid: Vec<f64>,
    },
    Envelope {
        t: f64,
        rho: f64,
        #[serde(default)]
        normal_gap: bool,
        #[serde(default)]
        starts: Option<usize>,
        #[serde(default)]
        iterations: Option<usize>,
    },
    NagaevLd {
        z0: f64,
        c: f64,
        tau: f64,
        alpha: f64,
        #[serde(default = "default_a_max")]
        a_max: f64,
        a: f64,
        z: f64,
        rho: f64,
        n: usize,
    },
    ScanConstants {
        family: Family,
        n: Vec<usize>,
        #[serde(default)]
        p: Option<f64>,
        #[serde(default)]
        z_grid: Option<Vec<f64>>,
    },
    Audit {
        /// Laws to audit; the built-in regression suite when absent.
        #[serde(default)]
        specs: Option<Vec<DistributionSpec>>,
        #[serde(default = "default_audit_filters")]
        filters: Vec<FilterChoice>,
        #[serde(rename = "T", default = "default_audit_t")]
        big_t: Vec<f64>,
        #[serde(default = "default_audit_grid")]
        x_grid: Vec<f64>,
        #[serde(default = "default_tail_orders")]
        tail_orders: Vec<usize>,
    },
    FilterInfo {
        filter: FilterChoice,
        #[serde(default = "default_points")]
        points: usize,
        #[serde(default = "default_x_max")]
        x_max: f64,
    },
}

fn default_a_max() -> f64 {
    0.05
}

pub fn default_audit_filters() -> Vec<FilterChoice> {
    vec![FilterChoice::Prawitz, FilterChoice::M02 { kappa: None }]
}

pub fn default_audit_t() -> Vec<f64> {
    vec![5.0, 15.0]
}

pub fn default_audit_grid() -> Vec<f64> {
    bebound::oracle::uniform_grid(-3.0, 3.0, 40)
}

pub fn default_tail_orders() -> Vec<usize> {
    vec![3]
}

pub fn default_points() -> usize {
    201
}

pub fn default_x_max() -> f64 {
    20.0
}

fn increasing(name: &str, grid: &[f64]) -> bebound::Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain(format!("{name} is empty")));
    }
    if let Some(v) = grid.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!(
            "{name} contains the non-finite value {v}"
        )));
    }
    if let Some(i) = grid.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Domain(format!(
            "{name} must be strictly increasing: entry {} ({}) follows {}",
            i + 1,
            grid[i + 1],
            grid[i]
        )));
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> bebound::Result<()> {
        if let Some(tol) = self.tolerance {
            if tol <= 0.0 || !tol.is_finite() {
                return Err(Error::Domain(format!(
                    "tolerance must be positive, got {tol}"
                )));
            }
        }
        match &self.command {
            Command::BoundCdf { x_grid, .. } | Command::BoundTail { x_grid, .. } => {
                increasing("x_grid", x_grid)
            }
            Command::ScanConstants { z_grid, n, .. } => {
                if n.is_empty() || n.contains(&0) {
                    return Err(Error::Domain("n must list positive integers".into()));
                }
                match z_grid {
                    Some(g) => increasing("z_grid", g),
                    None => Ok(()),
                }
            }
            Command::Audit { x_grid, big_t, .. } => {
                increasing("x_grid", x_grid)?;
                if big_t.is_empty() {
                    return Err(Error::Domain("T must list at least one cutoff".into()));
                }
                Ok(())
            }
            Command::FilterInfo { points, x_max, .. } => {
                if *points < 2 || *x_max <= 0.0 || !x_max.is_finite() {
                    return Err(Error::Domain(
                        "filter-info needs points >= 2 and x_max > 0".into(),
                    ));
                }
                Ok(())
            }
            Command::Envelope { .. } | Command::NagaevLd { .. } => Ok(()),
        }
    }
}

/// `lo:hi:count` or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let lo: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|e| format!("bad grid start: {e}"))?;
        let hi: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|e| format!("bad grid end: {e}"))?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|e| format!("bad grid count: {e}"))?;
        if n == 0 {
            return Err("grid count must be positive".into());
        }
        return Ok(bebound::oracle::uniform_grid(lo, hi, n));
    }
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad grid value {v:?}: {e}"))
        })
        .collect()
}

pub fn parse_list<V: std::str::FromStr>(s: &str) -> Result<Vec<V>, String>
where
    V::Err: std::fmt::Display,
{
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<V>()
                .map_err(|e| format!("bad list entry {v:?}: {e}"))
        })
        .collect()
}
