//! Checks of computed brackets against exact lattice laws.

use serde::{Deserialize, Serialize};

use crate::charfn::{CharFnEvaluator, DistributionSpec};
use crate::error::{Error, Result};
use crate::filters::{FilterKind, SmoothingFilter};
use crate::inversion::{prawitz_cdf_bounds, PVQuadratureConfig};
use crate::nonuniform::tail_bound;
use crate::oracle::lattice::LatticePmf;
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "bound", rename_all = "snake_case")]
pub enum AuditTarget {
    /// `lower ≤ P(X < x)` and `P(X ≤ x) ≤ upper`.
    Cdf,
    /// `lower ≤ xᵏP(X > x)` and `xᵏP(X ≥ x) ≤ upper`.
    Tail { k: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditPoint<T> {
    pub x: T,
    pub target: AuditTarget,
    pub lower: T,
    pub upper: T,
    /// Exact value the lower bound must not exceed.
    pub exact_low: T,
    /// Exact value the upper bound must not undercut.
    pub exact_high: T,
    /// How far the exact values fall outside `[lower, upper]`, or 0.
    pub violation: T,
    pub tolerance: T,
}

impl<T: Real> AuditPoint<T> {
    pub fn width(&self) -> T {
        self.upper - self.lower
    }
    pub fn passed(&self) -> bool {
        self.violation <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport<T> {
    pub filter: FilterKind,
    #[serde(rename = "T")]
    pub big_t: T,
    pub points: Vec<AuditPoint<T>>,
    /// Largest `violation - tolerance` over all points; `≤ 0` means a pass.
    pub worst_excess: T,
    /// Tail orders skipped because the filter is too rough for the cascade.
    pub skipped_tail_orders: Vec<usize>,
}

impl<T: Real> AuditReport<T> {
    pub fn passed(&self) -> bool {
        self.points.iter().all(AuditPoint::passed)
    }

    pub fn violations(&self) -> usize {
        self.points.iter().filter(|p| !p.passed()).count()
    }

    pub fn max_cdf_width(&self) -> T {
        self.points
            .iter()
            .filter(|p| p.target == AuditTarget::Cdf)
            .fold(T::zero(), |m, p| m.max(p.width()))
    }

    /// `Ok` on a pass, otherwise an audit error naming the worst point.
    pub fn check(&self) -> Result<()> {
        let worst = self.points.iter().filter(|p| !p.passed()).max_by(|a, b| {
            (a.violation - a.tolerance)
                .partial_cmp(&(b.violation - b.tolerance))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        match worst {
            None => Ok(()),
            Some(p) => Err(Error::Audit {
                location: format!(
                    "{:?} filter, T = {}, x = {}, {:?}",
                    self.filter, self.big_t, p.x, p.target
                ),
                violation: p.violation.as_f64(),
                tolerance: p.tolerance.as_f64(),
            }),
        }
    }
}

fn point<T: Real>(
    x: T,
    target: AuditTarget,
    lower: T,
    upper: T,
    lo: T,
    hi: T,
    tolerance: T,
) -> AuditPoint<T> {
    let violation = (lower - lo).max(hi - upper).max(T::zero());
    AuditPoint {
        x,
        target,
        lower,
        upper,
        exact_low: lo,
        exact_high: hi,
        violation,
        tolerance,
    }
}

/// Compares Prawitz CDF brackets at every `x` and, for each order in
/// `tail_orders` the filter admits, tail brackets at every `x > 0`, against
/// the exact law. The tolerance at each point is the reported quadrature
/// error plus the configured tolerance.
pub fn bracket_audit<T: Real>(
    spec: &DistributionSpec<T>,
    filter: &SmoothingFilter<T>,
    big_t: T,
    x_grid: &[T],
    tail_orders: &[usize],
    cfg: &PVQuadratureConfig<T>,
) -> Result<AuditReport<T>> {
    let lattice: LatticePmf<T> = spec.to_lattice()?.ok_or_else(|| {
        Error::Domain("bracket audit needs a law with an exact lattice form".into())
    })?;
    let max_k = tail_orders.iter().copied().max().unwrap_or(0);
    let f = CharFnEvaluator::new(spec.clone(), max_k)?;
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for &x in x_grid {
        let b = prawitz_cdf_bounds(&f, filter, big_t, x, cfg)?;
        points.push(point(
            x,
            AuditTarget::Cdf,
            b.lower,
            b.upper,
            lattice.cdf_lt(x),
            lattice.cdf_le(x),
            b.quad_error_estimate + cfg.tolerance,
        ));
    }
    for &k in tail_orders {
        let mut admitted = true;
        for &x in x_grid.iter().filter(|x| **x > T::zero()) {
            match tail_bound(&f, filter, k, big_t, x, cfg) {
                Ok(r) => {
                    let w = x.powi(k as i32);
                    points.push(point(
                        x,
                        AuditTarget::Tail { k },
                        r.lower,
                        r.upper,
                        w * lattice.tail_gt(x),
                        w * lattice.tail_ge(x),
                        r.quad_error,
                    ));
                }
                Err(Error::Smoothness(_)) => {
                    admitted = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if !admitted {
            skipped.push(k);
        }
    }
    let worst_excess = points
        .iter()
        .map(|p| p.violation - p.tolerance)
        .fold(T::neg_infinity(), T::max);
    Ok(AuditReport {
        filter: filter.kind(),
        big_t,
        points,
        worst_excess,
        skipped_tail_orders: skipped,
    })
}

/// Fifty standardized lattice laws: ten centered bases, each summed
/// `n ∈ {1, 2, 5, 12, 40}` times.
pub fn regression_suite<T: Real>() -> Vec<DistributionSpec<T>> {
    let bernoulli = [0.05, 0.15, 0.3, 0.41886117, 0.5, 0.7, 0.92];
    let mut bases: Vec<DistributionSpec<T>> = bernoulli
        .iter()
        .map(|&p| DistributionSpec::centered_bernoulli(T::lit(p)))
        .collect();
    let lattices: [(f64, &[f64]); 3] = [
        (-1.0, &[0.25, 0.5, 0.25]),
        (-1.0, &[0.5, 0.25, 0.0, 0.25]),
        (-2.0, &[0.2, 0.0, 0.4, 0.4]),
    ];
    for (offset, w) in lattices {
        let weights = w.iter().map(|&v| T::lit(v)).collect();
        let l = LatticePmf::new(T::lit(offset), T::one(), weights).expect("suite lattice");
        bases.push(DistributionSpec::LatticePmf(l));
    }
    let ns = [1usize, 2, 5, 12, 40];
    ns.iter()
        .flat_map(|&n| {
            bases
                .iter()
                .map(move |b| DistributionSpec::iid_sum(b.clone(), n))
        })
        .collect()
}
