use std::sync::Arc;

use super::{Derivs, FilterDescriptor, FilterKind, FilterParts, SmoothingFilter, MAX_ORDER};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_half_line, QuadConfig, QuadResult};
use crate::real::Real;

/// A symmetric probability density on the real line.
pub type DensityFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

const MAX_LENGTH: f64 = 2e5;

/// Relative allowance when comparing a requested κ against a quadrature estimate of κ*.
pub(crate) const KAPPA_SLACK: f64 = 1e-9;

fn half_line<T: Real>(g: impl Fn(T) -> T, rel: f64) -> QuadResult<T, T> {
    let cfg = QuadConfig::new(T::lit(1e-15), T::lit(rel).max(T::epsilon() * T::lit(16.0)))
        .with_max_subdivisions(4000);
    integrate_half_line(g, T::zero(), T::two_pi(), T::lit(MAX_LENGTH), &cfg)
}

/// `∫₀^∞ x^j p(x) dx`, or `None` when the integral does not settle.
fn half_moment<T: Real>(p: &DensityFn<T>, j: usize) -> Option<T> {
    let r = half_line(|x: T| x.powi(j as i32) * p(x), 1e-12);
    r.converged.then_some(r.value)
}

/// `κ* = 1 / ∫|x| p(x) dx` for a symmetric density.
pub fn bohman_kappa_star<T: Real>(p: &DensityFn<T>) -> Result<T> {
    match half_moment(p, 1) {
        Some(m) if m > T::zero() => Ok((T::lit(2.0) * m).recip()),
        Some(_) => Err(Error::Construction(
            "density has zero first absolute moment".into(),
        )),
        None => Err(Error::Construction(
            "first absolute moment of the density diverges".into(),
        )),
    }
}

struct BohmanParts<T> {
    p: DensityFn<T>,
    kappa: T,
}

impl<T: Real> BohmanParts<T> {
    /// `p̂^(j)(t) = 2∫₀^∞ x^j p(x) cos(tx + jπ/2) dx`
    fn transform_deriv(&self, t: T, j: usize) -> T {
        let phase = T::FRAC_PI_2() * T::count(j);
        let r = half_line(
            |x: T| x.powi(j as i32) * (self.p)(x) * (t * x + phase).cos(),
            1e-12,
        );
        T::lit(2.0) * r.value
    }
}

impl<T: Real> FilterParts<T> for BohmanParts<T> {
    fn right(&self, t: T, order: usize) -> (Derivs<T>, Derivs<T>) {
        let mut m1 = [T::zero(); MAX_ORDER + 1];
        let mut m2 = [T::zero(); MAX_ORDER + 1];
        let mut next = self.transform_deriv(t, 0);
        for j in 0..=order.min(MAX_ORDER) {
            m1[j] = next;
            next = self.transform_deriv(t, j + 1);
            m2[j] = self.kappa * next;
        }
        (m1, m2)
    }
}

/// `M = p̂ + iκp̂'` for a symmetric density `p` whose Fourier transform
/// vanishes outside `[-1, 1]`.
pub fn bohman_filter<T: Real>(p: DensityFn<T>, kappa: T) -> Result<SmoothingFilter<T>> {
    for &x in &[0.1, 0.7, 1.3, 2.9, 6.0, 17.0] {
        let (a, b) = (p(T::lit(x)), p(T::lit(-x)));
        if !(a >= T::zero()) || (a - b).abs() > T::lit(1e-12) * a.abs().max(T::one()) {
            return Err(Error::Construction(format!(
                "density must be nonnegative and symmetric (p({x}) = {a}, p(-{x}) = {b})"
            )));
        }
    }
    let mass = half_moment(&p, 0)
        .ok_or_else(|| Error::Construction("density mass integral diverges".into()))?;
    if (T::lit(2.0) * mass - T::one()).abs() > T::lit(1e-6) {
        return Err(Error::Construction(format!(
            "density integrates to {}, not 1",
            T::lit(2.0) * mass
        )));
    }
    let kappa_star = bohman_kappa_star(&p)?;
    if !(kappa >= kappa_star * (T::one() - T::lit(KAPPA_SLACK))) {
        return Err(Error::Validity(format!(
            "kappa = {kappa} is below kappa* = {kappa_star}"
        )));
    }
    let mut top_moment = 1;
    while top_moment < MAX_ORDER + 1 && half_moment(&p, top_moment + 1).is_some() {
        top_moment += 1;
    }
    let parts = BohmanParts {
        p: p.clone(),
        kappa,
    };
    for &t in &[1.05, 1.5, 2.0] {
        let v = parts.transform_deriv(T::lit(t), 0);
        if v.abs() > T::lit(1e-6) {
            return Err(Error::Construction(format!(
                "Fourier transform of the density does not vanish beyond 1 (value {v} at t = {t})"
            )));
        }
    }
    let derivative_order = top_moment - 1;
    let kp = p.clone();
    Ok(SmoothingFilter {
        descriptor: FilterDescriptor {
            kind: FilterKind::Bohman,
            kappa: Some(kappa.as_f64()),
            kappa_star: Some(kappa_star.as_f64()),
            label: None,
        },
        parts: Arc::new(parts),
        kernel: Some(Arc::new(move |x: T| kp(x) * (T::one() - kappa * x))),
        support_radius_m1: T::one(),
        support_radius_m2: T::one(),
        smoothness_order: derivative_order,
        smoothness_away_from_zero: derivative_order,
        derivative_order,
        kinks: vec![],
    })
}
