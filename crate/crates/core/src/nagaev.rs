//! Large-deviation tail bound for truncated sums through a Poisson mixture
//! of shifted normal cubic moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{NeumaierSum, Real};
use crate::specfun::{minus_cubic, plus_cubic};

/// Parameters of the large-deviation case.
///
/// `z0` is the threshold of the case split, `c` its logarithmic scale, `tau`
/// the shift, `alpha = y/x` the truncation ratio and `a` the truncated
/// Lyapunov ratio, at most `a_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NagaevParams<T> {
    pub z0: T,
    pub c: T,
    pub tau: T,
    pub alpha: T,
    pub a_max: T,
    pub a: T,
}

impl<T: Real> NagaevParams<T> {
    pub fn new(z0: T, c: T, tau: T, alpha: T, a_max: T, a: T) -> Result<Self> {
        let p = Self {
            z0,
            c,
            tau,
            alpha,
            a_max,
            a,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.z0, self.c, self.tau, self.alpha, self.a_max, self.a];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("parameters must be finite".into()));
        }
        if !(self.z0 > T::zero()) || !(self.c > T::zero()) {
            return Err(Error::Domain("z0 and c must be positive".into()));
        }
        if !(self.tau < T::one()) {
            return Err(Error::Domain(format!(
                "tau must be below 1, got {}",
                self.tau
            )));
        }
        if !(self.alpha > T::zero() && self.alpha < T::one()) {
            return Err(Error::Domain(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.a_max > T::zero()) || !(self.a > T::zero() && self.a <= self.a_max) {
            return Err(Error::Domain(format!(
                "need 0 < a <= a_max, got a = {} and a_max = {}",
                self.a, self.a_max
            )));
        }
        check_shift(self.c, self.tau)?;
        if !(self.a * self.z0 * self.z0 < self.alpha) {
            return Err(Error::Domain(format!(
                "alpha1 = sqrt(1 - a z0²/alpha) needs a z0² < alpha, got {} >= {}",
                self.a * self.z0 * self.z0,
                self.alpha
            )));
        }
        Ok(())
    }

    /// `λ = a/α³`
    pub fn lambda(&self) -> T {
        self.a / self.alpha.powi(3)
    }

    /// `α₁ = √(1 - a z0²/α)`
    pub fn alpha1(&self) -> T {
        (T::one() - self.a * self.z0 * self.z0 / self.alpha).sqrt()
    }

    /// `u_j = α(j - τ/α - λ)z`
    pub fn shift(&self, j: usize, z: T) -> T {
        self.alpha * (T::count(j) - self.tau / self.alpha - self.lambda()) * z
    }
}

fn check_shift<T: Real>(c: T, tau: T) -> Result<()> {
    if !(tau * c * c >= T::lit(2.0)) {
        return Err(Error::Domain(format!(
            "the normal-tail monotonicity step needs tau·c² >= 2, got {}",
            tau * c * c
        )));
    }
    Ok(())
}

/// `Σ_j Q_j λʲe^{-λ}/j!` with `Q_j = (α₁/z)³E(Z + u_j)₊³`.
///
/// Summation stops once a term is below `1e-15` of the partial sum and the
/// remainder, bounded through `E(Z + u)₊³ ≤ (|u| + 2)³` and a geometric
/// majorant of the Poisson tail, is below `1e-12`.
pub fn poisson_mixture_bound<T: Real>(
    params: &NagaevParams<T>,
    z: T,
    series_terms: usize,
) -> Result<T> {
    params.validate()?;
    if !(z >= params.z0) || !z.is_finite() {
        return Err(Error::Domain(format!(
            "z must be finite and at least z0 = {}",
            params.z0
        )));
    }
    let lam = params.lambda();
    let scale = (params.alpha1() / z).powi(3);
    let slope = params.alpha * z;
    let offset = (params.tau.abs() + params.alpha * lam) * z + T::lit(2.0);
    let mut sum = NeumaierSum::new();
    let mut weight = (-lam).exp(); // λʲe^{-λ}/j!
    for j in 0..series_terms {
        let term = scale * plus_cubic(params.shift(j, z)) * weight;
        sum.add(term);
        let next_weight = weight * lam / T::count(j + 1);
        // Certificate for Σ_{i>j}: first omitted majorant term over (1 - ratio).
        let i = T::count(j + 1);
        let first = scale * (slope * i + offset).powi(3) * next_weight;
        let ratio = lam / (i + T::one()) * (T::one() + i.recip()).powi(3);
        let remainder = if ratio < T::one() {
            first / (T::one() - ratio)
        } else {
            T::infinity()
        };
        let total = sum.value();
        if term <= T::lit(1e-15) * total && remainder <= T::lit(1e-12) {
            return Ok(total);
        }
        weight = next_weight;
    }
    Err(Error::Convergence {
        message: format!("Poisson series not certified within {series_terms} terms"),
        estimate: sum.value().as_f64(),
        error_estimate: f64::NAN,
    })
}

fn c0_formula<T: Real>(z0: T, c: T, tau: T) -> T {
    (z0 * z0 / (c * c)).exp() * minus_cubic(tau * z0)
}

/// `C₀ = e^{z0²/c²}E(Z - τz0)₊³`.
pub fn c0_constant<T: Real>(z0: T, c: T, tau: T) -> Result<T> {
    if !z0.is_finite() || !c.is_finite() || !tau.is_finite() || !(c > T::zero()) || z0 < T::zero() {
        return Err(Error::Domain(
            "z0 >= 0, c > 0 and tau must be finite".into(),
        ));
    }
    check_shift(c, tau)?;
    Ok(c0_formula(z0, c, tau))
}

/// `C₁(a)` with the polynomial series `Σ_{j≥1}(u_{j0}³ + 3u_{j0})λ^{j-1}/j!`
/// summed through the Poisson moments.
pub fn c1_constant<T: Real>(params: &NagaevParams<T>) -> Result<T> {
    params.validate()?;
    let lam = params.lambda();
    let s = params.alpha * params.z0;
    let b = -(params.tau + params.alpha * lam) * params.z0;
    let three = T::lit(3.0);
    // (1 - e^{-λ})/λ
    let damp = -(-lam).exp_m1() / lam;
    let series = s.powi(3) * (lam * lam + three * lam + T::one())
        + three * s * s * b * (T::one() + lam)
        + three * s * b * b
        + three * s
        + (b.powi(3) + three * b) * damp;
    let bracket = series
        + (-lam).exp() * minus_cubic(params.shift(1, params.z0))
        + minus_cubic(params.shift(2, params.z0)) * lam / T::lit(2.0);
    Ok((params.alpha1() / s).powi(3) * bracket)
}

/// `C₁(0+) = (αz0)^{-3}E(Z + (α - τ)z0)₊³`.
pub fn c1_zero_plus<T: Real>(z0: T, tau: T, alpha: T) -> Result<T> {
    if !(z0 > T::zero()) || !(alpha > T::zero() && alpha < T::one()) || !(tau < T::one()) {
        return Err(Error::Domain(
            "need z0 > 0, alpha in (0, 1), tau < 1".into(),
        ));
    }
    Ok(plus_cubic((alpha - tau) * z0) / (alpha * z0).powi(3))
}

/// The three quantities making up the large-deviation bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdBound<T> {
    #[serde(rename = "C0")]
    pub c0: T,
    #[serde(rename = "C1_0plus")]
    pub c1_0plus: T,
    pub bound: T,
}

/// `[(C₀ + C₁(0+))/(1 - τ)³]·ρ/(z³√n)`, a bound on `P(S^{(y)} > z√n)`.
pub fn ld_tail_bound<T: Real>(
    params: &NagaevParams<T>,
    z: T,
    rho: T,
    n: usize,
) -> Result<LdBound<T>> {
    params.validate()?;
    if !(z >= params.z0) || !z.is_finite() {
        return Err(Error::Domain(format!(
            "z must be finite and at least z0 = {}",
            params.z0
        )));
    }
    if !(rho > T::zero()) || !rho.is_finite() || n == 0 {
        return Err(Error::Domain(
            "rho must be positive and n at least 1".into(),
        ));
    }
    let c0 = c0_constant(params.z0, params.c, params.tau)?;
    let c1 = c1_zero_plus(params.z0, params.tau, params.alpha)?;
    let bound =
        (c0 + c1) / (T::one() - params.tau).powi(3) * rho / (z.powi(3) * T::count(n).sqrt());
    Ok(LdBound {
        c0,
        c1_0plus: c1,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadConfig};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn params(a: f64) -> NagaevParams<f64> {
        NagaevParams::new(2.0, 2.0, 0.5, 0.5, 0.05, a).unwrap()
    }

    /// `E(Z + u)₊³` by quadrature of the normal density.
    fn cubic_by_quadrature(u: f64) -> f64 {
        let cfg = QuadConfig::new(1e-16, 1e-14);
        let lo = -u;
        integrate(
            |x: f64| (x + u).powi(3) * (-x * x / 2.0).exp() / (2.0 * PI).sqrt(),
            &[
                lo,
                lo + 1.0,
                lo + 4.0,
                lo.max(0.0) + 12.0,
                lo.max(0.0) + 40.0,
            ],
            &cfg,
        )
        .value
    }

    fn c1_brute(p: &NagaevParams<f64>) -> f64 {
        let lam = p.lambda();
        let mut series = 0.0;
        for j in 1..=200 {
            let u = p.shift(j, p.z0);
            let w = (lam.ln() * (j as f64 - 1.0) - ln_factorial(j)).exp();
            series += (u.powi(3) + 3.0 * u) * w;
        }
        let bracket = series
            + cubic_by_quadrature(-p.shift(1, p.z0))
            + cubic_by_quadrature(-p.shift(2, p.z0)) * lam / 2.0 * lam.exp();
        (p.alpha1() / (p.alpha * p.z0)).powi(3) * bracket * (-lam).exp()
    }

    fn ln_factorial(j: usize) -> f64 {
        (1..=j).map(|i| (i as f64).ln()).sum()
    }

    #[test]
    fn quadrature_oracle_matches_closed_form() {
        for &u in &[-3.0, -1.0, 0.0, 0.5, 2.0] {
            assert!(
                (cubic_by_quadrature(u) - plus_cubic(u)).abs() < 1e-12,
                "u={u}"
            );
        }
        assert!((cubic_by_quadrature(0.0) - (2.0 / PI).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn c0_values() {
        let c0 = c0_constant(2.0, 2.0, 0.5).unwrap();
        assert!((minus_cubic(1.0f64) - 0.0912911578).abs() < 1e-10);
        assert!((c0 - 1f64.exp() * minus_cubic(1.0f64)).abs() < 1e-15);
        assert!((c0 - 0.2481550954).abs() < 1e-9);
        // τ = 0, z0 = 0 lies outside τc² ≥ 2; the bare formula gives E(Z)₊³.
        assert!((c0_formula(0.0, 2.0, 0.0) - (2.0 / PI).sqrt()).abs() < 1e-15);
        assert!(matches!(
            c0_constant(0.0, 2.0, 0.0f64),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn c0_decreasing_in_tau() {
        let mut prev = f64::INFINITY;
        for i in 0..40 {
            let tau = 0.5 + 0.0125 * i as f64;
            let v = c0_constant(2.0, 2.0, tau).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(NagaevParams::new(2.0, 2.0, 0.4, 0.5, 0.05, 0.01).is_err());
        assert!(NagaevParams::new(2.0, 2.0, 0.5, 1.5, 0.05, 0.01).is_err());
        assert!(NagaevParams::new(2.0, 2.0, 0.5, 0.5, 0.05, 0.06).is_err());
        assert!(NagaevParams::new(4.0, 2.0, 0.5, 0.05, 0.05, 0.04).is_err());
        assert!(NagaevParams::new(2.0, 2.0, 1.0, 0.5, 0.05, 0.01).is_err());
    }

    #[test]
    fn c1_zero_plus_limit() {
        let want = c1_zero_plus(2.0, 0.5, 0.5).unwrap();
        assert!((want - (2.0 / PI).sqrt()).abs() < 1e-15);
        assert!((want - 0.7978845608).abs() < 1e-9);
        let near = c1_constant(&params(1e-9)).unwrap();
        assert!((near - want).abs() < 1e-6, "{near} vs {want}");
    }

    #[test]
    fn c1_matches_brute_force() {
        let p = params(0.02);
        assert!((c1_constant(&p).unwrap() - c1_brute(&p)).abs() < 1e-10);
    }

    #[test]
    fn c1_decreasing_on_default_grid() {
        let mut prev = f64::INFINITY;
        for i in 0..=100 {
            let a = 1e-6 + (0.05 - 1e-6) * i as f64 / 100.0;
            let v = c1_constant(&params(a)).unwrap();
            assert!(v <= prev, "a={a}");
            prev = v;
        }
        assert!((c1_constant(&params(0.05)).unwrap() - 0.358795).abs() < 1e-6);
    }

    #[test]
    fn poisson_series_against_direct_sum() {
        let p = params(0.01);
        let z = 3.0;
        let lam = p.lambda();
        let direct: f64 = (0..200)
            .map(|j| {
                let w = (-lam + j as f64 * lam.ln() - ln_factorial(j)).exp();
                (p.alpha1() / z).powi(3) * cubic_by_quadrature(p.shift(j, z)) * w
            })
            .sum();
        let v = poisson_mixture_bound(&p, z, 500).unwrap();
        assert!(v > 0.0 && v.is_finite());
        assert!(
            (v - direct).abs() < 1e-12 * direct.max(1.0),
            "{v} vs {direct}"
        );
    }

    #[test]
    fn poisson_series_small_a_limit() {
        let p = params(1e-12);
        let z = 2.5;
        let q0 = (p.alpha1() / z).powi(3) * minus_cubic(0.5 * z);
        let v = poisson_mixture_bound(&p, z, 500).unwrap();
        assert!((v - q0).abs() < 1e-9 * q0, "{v} vs {q0}");
    }

    #[test]
    fn poisson_series_monotone_in_tau() {
        let mut prev = 0.0;
        for &tau in &[0.9, 0.7, 0.5, 0.3] {
            let p = NagaevParams::new(2.0, 3.0, tau, 0.5, 0.05, 0.02).unwrap();
            let v = poisson_mixture_bound(&p, 3.0, 500).unwrap();
            assert!(v > prev, "tau={tau}");
            prev = v;
        }
    }

    #[test]
    fn poisson_series_budget_exhaustion() {
        let p = params(0.04);
        assert!(matches!(
            poisson_mixture_bound(&p, 3.0, 1),
            Err(Error::Convergence { .. })
        ));
    }

    #[test]
    fn ld_bound_composition_and_scaling() {
        let p = params(0.01);
        let b = ld_tail_bound(&p, 3.0, 1.0, 100).unwrap();
        let c0 = c0_constant(2.0, 2.0, 0.5).unwrap();
        let c1 = c1_zero_plus(2.0, 0.5, 0.5).unwrap();
        assert!((b.bound - (c0 + c1) / 0.125 / 270.0).abs() < 1e-15);
        let b2 = ld_tail_bound(&p, 3.0, 2.0, 100).unwrap();
        assert!((b2.bound - 2.0 * b.bound).abs() < 1e-15);
        let b4 = ld_tail_bound(&p, 3.0, 1.0, 400).unwrap();
        assert!((b4.bound - b.bound / 2.0).abs() < 1e-15);
        assert!(ld_tail_bound(&p, 1.0, 1.0, 100).is_err());
    }

    #[test]
    fn ld_bound_dominates_mixture_in_small_a_limit() {
        // On the case-2 boundary ρ/√n = e^{-z²/c²}, with τ²c² ≥ 2 so that
        // e^{z²/c²}E(Z - τz)₊³ decreases in z.
        let p = NagaevParams::new(2.0, 3.0, 0.5, 0.5, 0.05, 1e-12).unwrap();
        for &z in &[2.0, 2.5, 3.0, 4.0] {
            let n = 10_000usize;
            let rho = (-z * z / 9.0f64).exp() * (n as f64).sqrt();
            let b = ld_tail_bound(&p, z, rho, n).unwrap();
            let mix = poisson_mixture_bound(&p, z, 500).unwrap();
            assert!(
                b.bound >= mix / 0.125,
                "z={z}: {} < {}",
                b.bound,
                mix / 0.125
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn closed_form_series(alpha in 0.2f64..0.9, tau in 0.3f64..0.9, z0 in 1.0f64..3.0, frac in 0.01f64..1.0) {
            let c = (2.0 / tau).sqrt() + 0.01;
            let a = frac * 0.05f64.min(0.9 * alpha / (z0 * z0));
            let p = NagaevParams::new(z0, c, tau, alpha, 0.05, a).unwrap();
            let v = c1_constant(&p).unwrap();
            prop_assert!(v.is_finite() && v >= 0.0);
            prop_assert!((v - c1_brute(&p)).abs() < 1e-10 * v.max(1.0));
            let m = poisson_mixture_bound(&p, z0 * 1.3, 1000).unwrap();
            prop_assert!(m.is_finite() && m >= 0.0);
        }
    }
}
