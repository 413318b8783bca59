//! Smoothing multipliers `M = m1 + i·m2` with `m1` even and `m2` odd, and
//! their constructions.

mod bohman;
mod m02;
mod prawitz;
mod tempered;
mod window;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::real::Real;

pub use bohman::{bohman_filter, bohman_kappa_star, DensityFn};
pub use m02::{kappa_02, m02_filter, p02_density, M02Profile};
pub use prawitz::{prawitz_filter, prawitz_kernel};
pub use tempered::{tempered_kappa_star, tempered_tilt_filter, tilde_transform};
pub use window::{cf_from_window, WindowCf};

/// Highest derivative order any filter in this module provides.
pub const MAX_ORDER: usize = 4;

pub(crate) type Derivs<T> = [T; MAX_ORDER + 1];

/// Right-side evaluation of the two parts for `t ≥ 0`, inside the support.
pub(crate) trait FilterParts<T>: Send + Sync {
    /// `(m1^(j)(t), m2^(j)(t))` for `j = 0..=order`, one-sided from the right at `t = 0`.
    fn right(&self, t: T, order: usize) -> (Derivs<T>, Derivs<T>);
}

/// Even real profile with derivatives, vanishing outside `[-support, support]`.
pub trait EvenProfile<T>: Send + Sync {
    /// `j`-th derivative at `t`, for `j ≤ self.order()`.
    fn eval(&self, t: T, order: usize) -> T;
    fn order(&self) -> usize;
    fn support(&self) -> T;
}

/// Profile built from a closure returning the `j`-th derivative at `t`.
#[derive(Clone)]
pub struct FnProfile<T> {
    f: Arc<dyn Fn(T, usize) -> T + Send + Sync>,
    order: usize,
    support: T,
}

impl<T: Real> FnProfile<T> {
    pub fn new(
        f: impl Fn(T, usize) -> T + Send + Sync + 'static,
        order: usize,
        support: T,
    ) -> Self {
        Self {
            f: Arc::new(f),
            order,
            support,
        }
    }
}

impl<T: Real> EvenProfile<T> for FnProfile<T> {
    fn eval(&self, t: T, order: usize) -> T {
        if t.abs() >= self.support {
            return T::zero();
        }
        (self.f)(t, order)
    }
    fn order(&self) -> usize {
        self.order
    }
    fn support(&self) -> T {
        self.support
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    Prawitz,
    M02,
    Bohman,
    Tempered,
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FilterKind::Prawitz => "prawitz",
            FilterKind::M02 => "m02",
            FilterKind::Bohman => "bohman",
            FilterKind::Tempered => "tempered",
        };
        f.write_str(s)
    }
}

/// Serializable description of a constructed filter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterDescriptor {
    pub kind: FilterKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// A smoothing multiplier with parity-split parts.
#[derive(Clone)]
pub struct SmoothingFilter<T> {
    descriptor: FilterDescriptor,
    parts: Arc<dyn FilterParts<T>>,
    kernel: Option<Arc<dyn Fn(T) -> T + Send + Sync>>,
    pub support_radius_m1: T,
    pub support_radius_m2: T,
    /// Largest `k` with `M ∈ C^k(ℝ)`.
    pub smoothness_order: usize,
    /// Largest `k` with `M ∈ C^k(ℝ \ {0})`.
    pub smoothness_away_from_zero: usize,
    /// Highest derivative order available (one-sided at kinks).
    pub derivative_order: usize,
    /// Points `t > 0` where some derivative of order `≤ derivative_order` jumps.
    pub kinks: Vec<T>,
}

impl<T: Real> fmt::Debug for SmoothingFilter<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothingFilter")
            .field("descriptor", &self.descriptor)
            .field("support_radius_m1", &self.support_radius_m1)
            .field("support_radius_m2", &self.support_radius_m2)
            .field("smoothness_order", &self.smoothness_order)
            .field("derivative_order", &self.derivative_order)
            .finish()
    }
}

impl<T: Real> SmoothingFilter<T> {
    pub fn descriptor(&self) -> &FilterDescriptor {
        &self.descriptor
    }

    pub fn kind(&self) -> FilterKind {
        self.descriptor.kind
    }

    pub fn support_radius(&self) -> T {
        self.support_radius_m1.max(self.support_radius_m2)
    }

    fn check_order(&self, order: usize) -> Result<()> {
        if order > self.derivative_order {
            Err(Error::Capability {
                requested: order,
                available: self.derivative_order,
            })
        } else {
            Ok(())
        }
    }

    /// Derivatives of `(m1, m2)` at `t`, extended by parity; at `t = 0`
    /// the right-hand derivatives are returned.
    pub fn parts_derivs(&self, t: T, order: usize) -> Result<(Derivs<T>, Derivs<T>)> {
        self.check_order(order)?;
        Ok(self.parts_unchecked(t, order))
    }

    pub(crate) fn parts_unchecked(&self, t: T, order: usize) -> (Derivs<T>, Derivs<T>) {
        let a = t.abs();
        let zero = [T::zero(); MAX_ORDER + 1];
        if a >= self.support_radius() {
            return (zero, zero);
        }
        let (mut m1, mut m2) = self.parts.right(a, order);
        if a >= self.support_radius_m1 {
            m1 = zero;
        }
        if a >= self.support_radius_m2 {
            m2 = zero;
        }
        if t < T::zero() {
            // m1^(j)(-t) = (-1)^j m1^(j)(t), m2^(j)(-t) = (-1)^(j+1) m2^(j)(t)
            for j in 0..=order {
                if j % 2 == 1 {
                    m1[j] = -m1[j];
                } else {
                    m2[j] = -m2[j];
                }
            }
        }
        (m1, m2)
    }

    /// `m1^(order)(t)`
    pub fn m1(&self, t: T, order: usize) -> Result<T> {
        Ok(self.parts_derivs(t, order)?.0[order])
    }

    /// `m2^(order)(t)`
    pub fn m2(&self, t: T, order: usize) -> Result<T> {
        Ok(self.parts_derivs(t, order)?.1[order])
    }

    /// `M(t)`
    pub fn value(&self, t: T) -> Complex<T> {
        let (m1, m2) = self.parts_unchecked(t, 0);
        Complex::new(m1[0], m2[0])
    }

    /// Jet of `M` at `t`.
    pub fn jet(&self, t: T, order: usize) -> Result<Jet<T>> {
        let (m1, m2) = self.parts_derivs(t, order)?;
        Ok(Jet {
            d: (0..=order).map(|j| Complex::new(m1[j], m2[j])).collect(),
        })
    }

    /// `M^(j)(0+) - M^(j)(0-)` for `j = 1..=order` (index `j-1`).
    pub fn jumps_at_zero(&self, order: usize) -> Result<Vec<Complex<T>>> {
        let (m1, m2) = self.parts_derivs(T::zero(), order)?;
        let two = T::lit(2.0);
        Ok((1..=order)
            .map(|j| {
                if j % 2 == 1 {
                    Complex::new(two * m1[j], T::zero())
                } else {
                    Complex::new(T::zero(), two * m2[j])
                }
            })
            .collect())
    }

    /// Whether derivatives jump at zero up to `order`.
    pub fn has_jumps_at_zero(&self, order: usize) -> Result<bool> {
        let scale = T::lit(1e-12);
        Ok(self.jumps_at_zero(order)?.iter().any(|j| j.norm() > scale))
    }

    /// Inverse Fourier transform `(1/2π)∫ e^{-itx} M(t) dt`, when known in closed form.
    pub fn kernel(&self, x: T) -> Option<T> {
        self.kernel.as_ref().map(|k| k(x))
    }

    pub fn has_kernel(&self) -> bool {
        self.kernel.is_some()
    }

    /// Nonnegative breakpoints where the filter is not smooth: kinks and support ends.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut v = self.kinks.clone();
        v.push(self.support_radius_m1);
        v.push(self.support_radius_m2);
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        v.dedup();
        v
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// Parity, normalization and support checks shared by every construction.
    pub fn check_filter_invariants(f: &SmoothingFilter<f64>, tol: f64) {
        assert!((f.m1(0.0, 0).unwrap() - 1.0).abs() < tol);
        assert!(f.m2(0.0, 0).unwrap().abs() < tol);
        let r = f.support_radius();
        for i in 0..1000 {
            let t = -1.2 * r + 2.4 * r * (i as f64 + 0.5) / 1000.0;
            let a = f.value(t);
            let b = f.value(-t);
            assert!((a.re - b.re).abs() < tol, "m1 not even at {t}");
            assert!((a.im + b.im).abs() < tol, "m2 not odd at {t}");
            if t.abs() > f.support_radius_m1 {
                assert_eq!(a.re, 0.0);
            }
            if t.abs() > f.support_radius_m2 {
                assert_eq!(a.im, 0.0);
            }
        }
    }
}
