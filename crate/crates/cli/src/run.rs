use std::fs::File;
use std::io::{self, BufWriter, Write};

use anyhow::{Context, Result};
use bebound::charfn::CharFnEvaluator;
use bebound::envelope::{cf_envelope, cf_normal_gap_envelope, EnvelopeBudget};
use bebound::filters::{kappa_02, m02_filter, prawitz_filter};
use bebound::inversion::prawitz_cdf_bounds;
use bebound::nagaev::ld_tail_bound;
use bebound::nonuniform::tail_bound;
use bebound::oracle::{bracket_audit, delta_scan, esseen_p, regression_suite, uniform_grid};
use bebound::specfun::normal_tail;
use bebound::{DistributionSpec, NagaevParams, PVQuadratureConfig, SmoothingFilter};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Command, Family, FilterChoice, RunConfig};

pub enum Status {
    Success,
    AuditFailed,
}

fn sink(cfg: &RunConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_csv<R: Serialize>(cfg: &RunConfig, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink(cfg)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<V: Serialize>(cfg: &RunConfig, value: &V) -> Result<()> {
    let mut out = sink(cfg)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn build_filter(choice: FilterChoice) -> Result<SmoothingFilter> {
    Ok(match choice {
        FilterChoice::Prawitz => prawitz_filter(),
        FilterChoice::M02 { kappa } => m02_filter(kappa.unwrap_or_else(kappa_02))?,
    })
}

fn quad_config(cfg: &RunConfig) -> Result<PVQuadratureConfig> {
    let mut q = PVQuadratureConfig::default();
    if let Some(tol) = cfg.tolerance {
        q = q.with_tolerance(tol);
    }
    q.validate()?;
    Ok(q)
}

/// `P(X ≤ x)` when the law is known exactly.
fn exact_cdf(spec: &DistributionSpec, x: f64) -> Result<Option<f64>> {
    if let DistributionSpec::Normal { mean, sd } = spec {
        return Ok(Some(1.0 - normal_tail((x - mean) / sd)));
    }
    Ok(spec.to_lattice()?.map(|l| l.cdf_le(x)))
}

#[derive(Serialize)]
struct CdfRow {
    x: f64,
    lower: f64,
    upper: f64,
    exact_if_available: Option<f64>,
    width: f64,
}

#[derive(Serialize)]
struct TailRow {
    x: f64,
    k: usize,
    #[serde(rename = "T")]
    big_t: f64,
    lower: f64,
    upper: f64,
    exact: Option<f64>,
    width: f64,
}

#[derive(Serialize)]
struct ScanRow {
    n: usize,
    sup_uniform: f64,
    sup_nonuniform: f64,
}

#[derive(Serialize)]
struct FilterRow {
    t: f64,
    m1: f64,
    m2: f64,
    kernel_x: f64,
    kernel: Option<f64>,
}

#[derive(Serialize)]
struct AuditRun {
    spec: usize,
    filter: String,
    #[serde(rename = "T")]
    big_t: f64,
    points: usize,
    violations: usize,
    worst_excess: f64,
    max_cdf_width: f64,
    skipped_tail_orders: Vec<usize>,
}

#[derive(Serialize)]
struct AuditSummary {
    passed: bool,
    specs: usize,
    points: usize,
    violations: usize,
    worst_excess: f64,
    runs: Vec<AuditRun>,
}

pub fn run(cfg: &RunConfig) -> Result<Status> {
    match &cfg.command {
        Command::BoundCdf {
            spec,
            filter,
            big_t,
            x_grid,
        } => {
            let q = quad_config(cfg)?;
            let filter = build_filter(*filter)?;
            let f = CharFnEvaluator::new(spec.clone(), 0)?;
            let rows = x_grid
                .par_iter()
                .map(|&x| {
                    let b = prawitz_cdf_bounds(&f, &filter, *big_t, x, &q)?;
                    Ok(CdfRow {
                        x,
                        lower: b.lower,
                        upper: b.upper,
                        exact_if_available: exact_cdf(spec, x)?,
                        width: b.width(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            write_csv(cfg, &rows)?;
        }
        Command::BoundTail {
            spec,
            filter,
            k,
            big_t,
            x_grid,
        } => {
            let q = quad_config(cfg)?;
            let filter = build_filter(*filter)?;
            let f = CharFnEvaluator::new(spec.clone(), *k)?;
            let rows = x_grid
                .par_iter()
                .map(|&x| {
                    let r = tail_bound(&f, &filter, *k, *big_t, x, &q)?;
                    Ok(TailRow {
                        x,
                        k: *k,
                        big_t: *big_t,
                        lower: r.lower,
                        upper: r.upper,
                        exact: r.exact,
                        width: r.width(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            write_csv(cfg, &rows)?;
        }
        Command::Envelope {
            t,
            rho,
            normal_gap,
            starts,
            iterations,
        } => {
            let mut budget = EnvelopeBudget::default();
            if let Some(s) = cfg.seed {
                budget.seed = s;
            }
            if let Some(s) = starts {
                budget.starts = *s;
            }
            if let Some(i) = iterations {
                budget.iterations = *i;
            }
            let sol = if *normal_gap {
                cf_normal_gap_envelope(*t, *rho, budget)?
            } else {
                cf_envelope(*t, *rho, budget)?
            };
            write_json(cfg, &sol)?;
        }
        Command::NagaevLd {
            z0,
            c,
            tau,
            alpha,
            a_max,
            a,
            z,
            rho,
            n,
        } => {
            let params = NagaevParams::new(*z0, *c, *tau, *alpha, *a_max, *a)?;
            write_json(cfg, &ld_tail_bound(&params, *z, *rho, *n)?)?;
        }
        Command::ScanConstants {
            family,
            n,
            p,
            z_grid,
        } => {
            let (base, default_grid) = match family {
                Family::Esseen => (
                    DistributionSpec::centered_bernoulli(esseen_p()),
                    uniform_grid(0.0, 3.0, 301),
                ),
                Family::Bernoulli => {
                    let p = p.ok_or_else(|| {
                        bebound::Error::Domain("the bernoulli family needs --p".into())
                    })?;
                    (
                        DistributionSpec::centered_bernoulli(p),
                        uniform_grid(0.0, 8.0, 801),
                    )
                }
                Family::Rademacher => (DistributionSpec::rademacher(), uniform_grid(0.0, 8.0, 801)),
            };
            let grid = z_grid.clone().unwrap_or(default_grid);
            let rows = n
                .par_iter()
                .map(|&n| {
                    let s = delta_scan(&base, n, &grid)?;
                    Ok(ScanRow {
                        n,
                        sup_uniform: s.sup_uniform,
                        sup_nonuniform: s.sup_nonuniform,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            write_csv(cfg, &rows)?;
        }
        Command::Audit {
            specs,
            filters,
            big_t,
            x_grid,
            tail_orders,
        } => {
            let q = quad_config(cfg)?;
            let specs = specs.clone().unwrap_or_else(regression_suite);
            let filters = filters
                .iter()
                .map(|&c| build_filter(c))
                .collect::<Result<Vec<_>>>()?;
            let jobs: Vec<(usize, &SmoothingFilter, f64)> = (0..specs.len())
                .flat_map(|i| {
                    filters
                        .iter()
                        .flat_map(move |f| big_t.iter().map(move |&t| (i, f, t)))
                })
                .collect();
            let runs = jobs
                .par_iter()
                .map(|&(i, f, t)| {
                    let r = bracket_audit(&specs[i], f, t, x_grid, tail_orders, &q).with_context(
                        || format!("auditing spec {i} with the {} filter at T = {t}", f.kind()),
                    )?;
                    Ok(AuditRun {
                        spec: i,
                        filter: f.kind().to_string(),
                        big_t: t,
                        points: r.points.len(),
                        violations: r.violations(),
                        worst_excess: r.worst_excess,
                        max_cdf_width: r.max_cdf_width(),
                        skipped_tail_orders: r.skipped_tail_orders,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let violations = runs.iter().map(|r| r.violations).sum();
            let summary = AuditSummary {
                passed: violations == 0,
                specs: specs.len(),
                points: runs.iter().map(|r| r.points).sum(),
                violations,
                worst_excess: runs
                    .iter()
                    .map(|r| r.worst_excess)
                    .fold(f64::NEG_INFINITY, f64::max),
                runs,
            };
            write_json(cfg, &summary)?;
            if !summary.passed {
                eprintln!("audit failed: {violations} violation(s)");
                return Ok(Status::AuditFailed);
            }
        }
        Command::FilterInfo {
            filter,
            points,
            x_max,
        } => {
            let filter = build_filter(*filter)?;
            let r = filter.support_radius();
            let ts = uniform_grid(-r, r, *points);
            let xs = uniform_grid(-x_max, *x_max, *points);
            let rows = ts
                .iter()
                .zip(&xs)
                .map(|(&t, &x)| {
                    Ok(FilterRow {
                        t,
                        m1: filter.m1(t, 0)?,
                        m2: filter.m2(t, 0)?,
                        kernel_x: x,
                        kernel: filter.kernel(x),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            write_csv(cfg, &rows)?;
        }
    }
    Ok(Status::Success)
}
