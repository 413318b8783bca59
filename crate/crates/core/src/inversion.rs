//! The principal-value operator `𝔊(h)(x) = (i/2π) p.v.∫ e^{-itx} h(t) dt/t`
//! and the CDF brackets built on it.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::charfn::CharFnEvaluator;
use crate::error::{Error, Result};
use crate::filters::SmoothingFilter;
use crate::quadrature::{integrate, QuadConfig};
use crate::real::Real;
use crate::specfun::{normal_tail, sine_integral};

/// Cutoffs and tolerance for the principal-value integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PVQuadratureConfig<T> {
    /// Width of the first panel next to `t = 0`.
    pub inner_cutoff: T,
    /// Initial truncation point for integrands without compact support.
    pub outer_cutoff: T,
    /// Absolute tolerance on the value of `𝔊`.
    pub tolerance: T,
    /// Number of times the outer cutoff may be doubled.
    pub max_refinements: usize,
}

impl<T: Real> Default for PVQuadratureConfig<T> {
    fn default() -> Self {
        Self {
            inner_cutoff: T::lit(1e-3),
            outer_cutoff: T::lit(40.0),
            tolerance: T::lit(1e-10).max(T::epsilon() * T::lit(1e3)),
            max_refinements: 14,
        }
    }
}

impl<T: Real> PVQuadratureConfig<T> {
    pub fn with_tolerance(mut self, tolerance: T) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.inner_cutoff > T::zero()) || !(self.inner_cutoff < self.outer_cutoff) {
            return Err(Error::Domain(format!(
                "need 0 < inner_cutoff < outer_cutoff, got {} and {}",
                self.inner_cutoff, self.outer_cutoff
            )));
        }
        if !(self.tolerance > T::zero()) || !self.outer_cutoff.is_finite() {
            return Err(Error::Domain("tolerance must be positive".into()));
        }
        Ok(())
    }

    fn quad(&self) -> QuadConfig<T> {
        // 2π·(quadrature error) is what reaches the value of 𝔊.
        QuadConfig::new(self.tolerance * T::lit(0.5), T::zero()).with_max_subdivisions(200_000)
    }
}

/// Where the integrand of `𝔊` lives.
#[derive(Clone, Debug, PartialEq)]
pub enum Support<T> {
    /// `h` vanishes for `|t| ≥ radius`; `kinks` are interior points `t > 0`
    /// where `h` is not smooth.
    Compact {
        radius: T,
        kinks: Vec<T>,
    },
    Unbounded,
}

/// Two-sided bound on `P(X < x)` and `P(X ≤ x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfBracket<T> {
    pub x: T,
    pub lower: T,
    pub upper: T,
    pub quad_error_estimate: T,
}

impl<T: Real> CdfBracket<T> {
    pub fn width(&self) -> T {
        self.upper - self.lower
    }
}

/// Breakpoints on `[a, b]` with panels no longer than `max_panel`, merged with `extra`.
pub(crate) fn panel_grid<T: Real>(a: T, b: T, max_panel: T, extra: &[T]) -> Vec<T> {
    let n = ((b - a) / max_panel).ceil().to_usize().unwrap_or(1).max(1);
    let mut v: Vec<T> = (0..=n)
        .map(|i| a + (b - a) * T::count(i) / T::count(n))
        .collect();
    v.extend(extra.iter().copied().filter(|&k| k > a && k < b));
    v.sort_by(|p, q| p.partial_cmp(q).expect("finite breakpoints"));
    v.dedup();
    v
}

/// Longest panel allowed for oscillation `e^{-itx}`: an eighth of a period.
pub(crate) fn max_panel<T: Real>(x: T, span: T) -> T {
    let cap = span / T::lit(8.0);
    if x == T::zero() {
        cap
    } else {
        (T::PI() / (T::lit(4.0) * x.abs())).min(cap)
    }
}

/// `(i/2π)∫_a^b [e^{-itx}g(t) - e^{itx}g(-t)] dt/t` for `g` vanishing at 0;
/// returns the value, its quadrature error and whether it converged.
fn folded_piece<T, G>(g: G, x: T, bps: &[T], cfg: &QuadConfig<T>) -> (Complex<T>, T, bool)
where
    T: Real,
    G: Fn(T) -> Complex<T>,
{
    let i = Complex::new(T::zero(), T::one());
    let integrand = |t: T| {
        let e = Complex::new(T::zero(), -t * x).exp();
        (e * g(t) - e.conj() * g(-t)) / t
    };
    let r = integrate(integrand, bps, cfg);
    (
        r.value * i / T::two_pi(),
        r.error / T::two_pi(),
        r.converged,
    )
}

/// `𝔊(h)(x)` with its error estimate.
///
/// The `1/t` singularity is removed by subtracting a reference with a
/// closed-form image: the constant `h(0)` on `[-R, R]`, contributing
/// `h(0)Si(Rx)/π`, or `h(0)e^{-t²/2}` on the whole line, contributing
/// `h(0)(Φ(x) - 1/2)`. Without compact support the remainder is summed
/// with a linear taper on `[A, 2A]`, doubling `A` until two successive
/// values agree.
pub fn g_operator<T, H>(
    h: &H,
    support: &Support<T>,
    x: T,
    cfg: &PVQuadratureConfig<T>,
) -> Result<(Complex<T>, T)>
where
    T: Real,
    H: Fn(T) -> Complex<T> + ?Sized,
{
    cfg.validate()?;
    if !x.is_finite() {
        return Err(Error::Domain("x must be finite".into()));
    }
    let h0 = h(T::zero());
    let qc = cfg.quad();
    match support {
        Support::Compact { radius, kinks } => {
            let r = *radius;
            if !(r > T::zero()) || !r.is_finite() {
                return Err(Error::Domain(format!(
                    "support radius must be positive, got {r}"
                )));
            }
            let mut extra = kinks.clone();
            extra.push(cfg.inner_cutoff.min(r / T::lit(2.0)));
            let bps = panel_grid(T::zero(), r, max_panel(x, r), &extra);
            let (v, e, ok) = folded_piece(|t: T| h(t) - h0, x, &bps, &qc);
            let value = v + h0 * (sine_integral(r * x) / T::PI());
            if !ok {
                return Err(Error::Convergence {
                    message: "adaptive quadrature of 𝔊 hit its subdivision limit".into(),
                    estimate: value.re.as_f64(),
                    error_estimate: e.as_f64(),
                });
            }
            Ok((value, e))
        }
        Support::Unbounded => {
            let reference = h0 * (T::lit(0.5) - normal_tail(x));
            let residual = |t: T| h(t) - h0 * (-t * t / T::lit(2.0)).exp();
            let mut a = cfg.outer_cutoff;
            let bps = panel_grid(T::zero(), a, max_panel(x, a), &[cfg.inner_cutoff]);
            let (mut head, mut err, mut ok) = folded_piece(residual, x, &bps, &qc);
            let mut previous: Option<Complex<T>> = None;
            let mut quiet: Option<T> = None;
            let mut last = (reference + head, err);
            for _ in 0..=cfg.max_refinements {
                let b = a * T::lit(2.0);
                let bps = panel_grid(a, b, max_panel(x, a).min(T::FRAC_PI_4()), &[]);
                let taper = |t: T| residual(t) * ((b - t.abs()) / a);
                let (tail, tail_err, ok_t) = folded_piece(taper, x, &bps, &qc);
                let value = reference + head + tail;
                ok = ok && ok_t;
                // The taper error oscillates with A, so one small change can be
                // a coincidence; require two in a row.
                if let Some(p) = previous {
                    let change = (value - p).norm();
                    if change <= cfg.tolerance && ok {
                        if let Some(c) = quiet {
                            return Ok((value, err + tail_err + change.max(c)));
                        }
                        quiet = Some(change);
                    } else {
                        quiet = None;
                    }
                }
                previous = Some(value);
                last = (value, err + tail_err);
                let (full, full_err, ok_f) = folded_piece(residual, x, &bps, &qc);
                head = head + full;
                err = err + full_err;
                ok = ok && ok_f;
                a = b;
            }
            Err(Error::Convergence {
                message: "principal-value integral did not settle as the cutoff grew".into(),
                estimate: last.0.re.as_f64(),
                error_estimate: last.1.as_f64(),
            })
        }
    }
}

/// Prawitz bracket `𝔊(M_{T'}(∓·)f)(x) + 1/2` with `T' = T/R`, `R` the
/// filter's support radius, so that the integrand lives on `[-T, T]`.
pub fn prawitz_cdf_bounds<T: Real>(
    f: &CharFnEvaluator<T>,
    filter: &SmoothingFilter<T>,
    big_t: T,
    x: T,
    cfg: &PVQuadratureConfig<T>,
) -> Result<CdfBracket<T>> {
    if !(big_t > T::zero()) || !big_t.is_finite() {
        return Err(Error::Domain(format!(
            "T must be positive and finite, got {big_t}"
        )));
    }
    let scale = big_t / filter.support_radius();
    let kinks: Vec<T> = filter.kinks.iter().map(|&k| k * scale).collect();
    let support = Support::Compact {
        radius: big_t,
        kinks,
    };
    let side = |sign: T| -> Result<(T, T)> {
        let h = |t: T| filter.value(sign * t / scale) * f.value(t);
        let (v, e) = g_operator(&h, &support, x, cfg)?;
        let allowance = T::lit(10.0) * cfg.tolerance.max(e);
        if v.im.abs() > allowance {
            return Err(Error::Parity {
                residue: v.im.abs().as_f64(),
                allowance: allowance.as_f64(),
            });
        }
        Ok((v.re + T::lit(0.5), e))
    };
    let (upper, eu) = side(T::one())?;
    let (lower, el) = side(-T::one())?;
    Ok(CdfBracket {
        x,
        lower,
        upper,
        quad_error_estimate: eu.max(el),
    })
}

/// `P(X < x) + P(X = x)/2 = 𝔊(f)(x) + 1/2`.
///
/// For lattice laws `f` does not decay and the tapered cutoff controls the
/// truncation; expect slower convergence near atoms.
pub fn invert_cdf<T: Real>(f: &CharFnEvaluator<T>, x: T, cfg: &PVQuadratureConfig<T>) -> Result<T> {
    let h = |t: T| f.value(t);
    let (v, _) = g_operator(&h, &Support::Unbounded, x, cfg)?;
    Ok(v.re + T::lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfn::DistributionSpec;
    use crate::filters::{kappa_02, m02_filter, prawitz_filter};
    use crate::specfun::normal_tail;
    use proptest::prelude::*;

    fn cfg() -> PVQuadratureConfig<f64> {
        PVQuadratureConfig::default()
    }

    fn phi(x: f64) -> f64 {
        1.0 - normal_tail(x)
    }

    #[test]
    fn constant_gives_half_sign() {
        let h = |_t: f64| Complex::new(1.0, 0.0);
        let c = cfg().with_tolerance(1e-8);
        for &x in &[1.3, -2.0, 0.4] {
            let (v, _) = g_operator(&h, &Support::Unbounded, x, &c).unwrap();
            assert!((v.re - 0.5 * x.signum()).abs() < 1e-7, "x={x}: {v}");
            assert!(v.im.abs() < 1e-9);
        }
    }

    #[test]
    fn gaussian_matches_normal_cdf_on_compact_window() {
        // e^{-t²/2} is below 1e-300 beyond 40, so the compact path is exact here.
        let h = |t: f64| Complex::new((-t * t / 2.0).exp(), 0.0);
        let support = Support::Compact {
            radius: 40.0,
            kinks: vec![],
        };
        for &x in &[1.0, -0.3, 2.5, 0.0] {
            let (v, e) = g_operator(&h, &support, x, &cfg()).unwrap();
            assert!((v.re - (phi(x) - 0.5)).abs() < 1e-9, "x={x}: {v}");
            assert!(e < 1e-8);
        }
        let (v, _) = g_operator(&h, &support, 1.0, &cfg()).unwrap();
        assert!((v.re - 0.3413447).abs() < 1e-7);
    }

    #[test]
    fn odd_integrand_vanishes_at_zero() {
        // A real even h (a symmetric law) has an odd integrand at x = 0.
        let h = |t: f64| Complex::new((1.0 - t.abs()).max(0.0) * (1.0 + t * t), 0.0);
        let support = Support::Compact {
            radius: 1.0,
            kinks: vec![],
        };
        let (v, _) = g_operator(&h, &support, 0.0, &cfg()).unwrap();
        assert!(v.norm() < 1e-14, "{v}");
        // An odd imaginary part 0.3t(1-|t|) leaves -(0.3/π)∫₀¹(1-t)dt.
        let h = |t: f64| Complex::new(0.0, 0.3 * t * (1.0 - t.abs()).max(0.0));
        let (v, _) = g_operator(&h, &support, 0.0, &cfg()).unwrap();
        assert!((v.re + 0.15 / std::f64::consts::PI).abs() < 1e-12, "{v}");
    }

    #[test]
    fn config_validation() {
        let mut c = cfg();
        c.inner_cutoff = 100.0;
        assert!(matches!(c.validate(), Err(Error::Domain(_))));
        let mut c = cfg();
        c.tolerance = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn point_mass_bracket_contains_one() {
        let f = CharFnEvaluator::new(DistributionSpec::PointMass { a: 0.0 }, 0).unwrap();
        for filter in [prawitz_filter::<f64>(), m02_filter(kappa_02()).unwrap()] {
            let b = prawitz_cdf_bounds(&f, &filter, 1.0, 1.0, &cfg()).unwrap();
            assert!(b.lower <= 1.0 + 1e-9 && b.upper >= 1.0 - 1e-9, "{b:?}");
        }
    }

    #[test]
    fn normal_bracket_contains_cdf() {
        let f = CharFnEvaluator::new(DistributionSpec::standard_normal(), 0).unwrap();
        let b = prawitz_cdf_bounds(&f, &prawitz_filter(), 10.0, 1.0, &cfg()).unwrap();
        assert!(b.lower <= 0.8413447 && 0.8413447 <= b.upper, "{b:?}");
        assert!(b.width() < 0.2);
    }

    #[test]
    fn binomial_bracket_contains_exact_cdf() {
        let spec = DistributionSpec::iid_sum(DistributionSpec::centered_bernoulli(0.3), 20);
        let lat = spec.to_lattice().unwrap().unwrap();
        let f = CharFnEvaluator::new(spec, 0).unwrap();
        for filter in [prawitz_filter::<f64>(), m02_filter(kappa_02()).unwrap()] {
            let b = prawitz_cdf_bounds(&f, &filter, 15.0, 0.5, &cfg()).unwrap();
            let tol = b.quad_error_estimate + 1e-9;
            assert!(b.lower <= lat.cdf_lt(0.5) + tol, "{b:?}");
            assert!(lat.cdf_le(0.5) <= b.upper + tol, "{b:?}");
        }
    }

    #[test]
    fn width_shrinks_with_cutoff() {
        let f = CharFnEvaluator::new(DistributionSpec::standard_normal(), 0).unwrap();
        let filter = prawitz_filter();
        let widths: Vec<f64> = [2.0, 5.0, 10.0, 20.0]
            .iter()
            .map(|&t| {
                prawitz_cdf_bounds(&f, &filter, t, 0.7, &cfg())
                    .unwrap()
                    .width()
            })
            .collect();
        for w in widths.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{widths:?}");
        }
    }

    #[test]
    fn inversion_of_normal_and_rademacher() {
        let f = CharFnEvaluator::new(DistributionSpec::standard_normal(), 0).unwrap();
        assert!((invert_cdf(&f, 0.0, &cfg()).unwrap() - 0.5).abs() < 1e-12);
        assert!((invert_cdf(&f, 1.0, &cfg()).unwrap() - 0.8413447460685429).abs() < 1e-9);
        let r = CharFnEvaluator::new(DistributionSpec::rademacher(), 0).unwrap();
        let c = cfg().with_tolerance(1e-7);
        assert!((invert_cdf(&r, 1.0, &c).unwrap() - 0.75).abs() < 1e-6);
        assert!((invert_cdf(&r, 0.0, &c).unwrap() - 0.5).abs() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn linearity(a in -2.0f64..2.0, b in -2.0f64..2.0, s in 0.5f64..3.0, x in -4.0f64..4.0) {
            let support = Support::Compact { radius: 2.0, kinks: vec![] };
            let h1 = |t: f64| Complex::new((-t * t * s).exp(), 0.2 * t) * (2.0 - t.abs()).max(0.0);
            let h2 = |t: f64| Complex::new((t * s).cos(), 0.0) * (2.0 - t.abs()).max(0.0).powi(2);
            let comb = |t: f64| h1(t) * a + h2(t) * b;
            let (g1, _) = g_operator(&h1, &support, x, &cfg()).unwrap();
            let (g2, _) = g_operator(&h2, &support, x, &cfg()).unwrap();
            let (g, _) = g_operator(&comb, &support, x, &cfg()).unwrap();
            prop_assert!((g - (g1 * a + g2 * b)).norm() < 1e-9);
        }

        #[test]
        fn lattice_brackets_are_valid(p in 0.05f64..0.95, n in 1usize..12, x in -3.0f64..3.0, big_t in 3.0f64..12.0) {
            let spec = DistributionSpec::iid_sum(DistributionSpec::centered_bernoulli(p), n);
            let lat = spec.to_lattice().unwrap().unwrap();
            let f = CharFnEvaluator::new(spec, 0).unwrap();
            let b = prawitz_cdf_bounds(&f, &prawitz_filter(), big_t, x, &cfg()).unwrap();
            let tol = b.quad_error_estimate + 1e-9;
            prop_assert!(b.lower <= lat.cdf_lt(x) + tol);
            prop_assert!(lat.cdf_le(x) <= b.upper + tol);
        }
    }
}
