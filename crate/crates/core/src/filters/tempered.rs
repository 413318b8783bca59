use std::sync::Arc;

use super::{
    Derivs, EvenProfile, FilterDescriptor, FilterKind, FilterParts, SmoothingFilter, MAX_ORDER,
};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};
use crate::real::Real;

struct TemperedParts<T> {
    p_hat: Arc<dyn EvenProfile<T>>,
    dg_hat: Arc<dyn EvenProfile<T>>,
    gamma: T,
    kappa: T,
}

fn inner_cfg<T: Real>() -> QuadConfig<T> {
    QuadConfig::new(
        T::lit(1e-14),
        T::lit(1e-12).max(T::epsilon() * T::lit(16.0)),
    )
    .with_max_subdivisions(400)
}

impl<T: Real> TemperedParts<T> {
    /// `∫ [p̂^(j)(u-s) - p̂^(j)(u)]/s · dĜ(s) ds` over `[-γ, γ]`.
    fn smoothed_difference(&self, u: T, j: usize) -> T {
        let g = self.gamma;
        let mut bps = vec![-g, T::zero(), g];
        let one = T::one();
        for c in [u - one, u + one] {
            if c > -g && c < g {
                bps.push(c);
            }
        }
        bps.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        bps.dedup();
        let base = self.p_hat.eval(u, j);
        let r = integrate(
            |s: T| (self.p_hat.eval(u - s, j) - base) / s * self.dg_hat.eval(s, 0),
            &bps,
            &inner_cfg(),
        );
        r.value
    }
}

impl<T: Real> FilterParts<T> for TemperedParts<T> {
    fn right(&self, t: T, order: usize) -> (Derivs<T>, Derivs<T>) {
        let mut m1 = [T::zero(); MAX_ORDER + 1];
        let mut m2 = [T::zero(); MAX_ORDER + 1];
        let c = -self.kappa / T::two_pi();
        for j in 0..=order {
            m1[j] = self.p_hat.eval(t, j);
            m2[j] = c * self.smoothed_difference(t, j);
        }
        (m1, m2)
    }
}

/// `∫_{-γ}^{-|t|} dĜ(s)/s ds` for `0 < |t| < γ`, zero for `|t| ≥ γ`.
pub fn tilde_transform<T: Real>(dg_hat: &dyn EvenProfile<T>, gamma: T, t: T) -> Result<T> {
    let a = t.abs();
    if a == T::zero() {
        return Err(Error::Domain(
            "transform is logarithmically singular at 0".into(),
        ));
    }
    if a >= gamma {
        return Ok(T::zero());
    }
    let r = integrate(|s: T| dg_hat.eval(s, 0) / s, &[-gamma, -a], &inner_cfg());
    Ok(r.value)
}

fn validate<T: Real>(
    p_hat: &dyn EvenProfile<T>,
    dg_hat: &dyn EvenProfile<T>,
    gamma: T,
) -> Result<()> {
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(Error::Construction(
            "gamma must be positive and finite".into(),
        ));
    }
    if p_hat.support() > T::one() * (T::one() + T::lit(1e-12)) {
        return Err(Error::Construction(format!(
            "p_hat must vanish outside [-1, 1]; declared support {}",
            p_hat.support()
        )));
    }
    if p_hat.order() < 1 {
        return Err(Error::Construction(
            "p_hat must be continuously differentiable".into(),
        ));
    }
    if (p_hat.eval(T::zero(), 0) - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::Construction("p_hat(0) must equal 1".into()));
    }
    if dg_hat.support() > gamma * (T::one() + T::lit(1e-12)) {
        return Err(Error::Construction(format!(
            "dG_hat must vanish outside [-gamma, gamma]; declared support {}",
            dg_hat.support()
        )));
    }
    if (dg_hat.eval(T::zero(), 0) - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::Construction("dG_hat(0) must equal 1".into()));
    }
    for &x in &[0.13, 0.5, 0.87] {
        let x = T::lit(x);
        let (a, b) = (p_hat.eval(x, 0), p_hat.eval(-x, 0));
        let (c, d) = (dg_hat.eval(x * gamma, 0), dg_hat.eval(-x * gamma, 0));
        if (a - b).abs() > T::lit(1e-12) || (c - d).abs() > T::lit(1e-12) {
            return Err(Error::Construction("p_hat and dG_hat must be even".into()));
        }
    }
    Ok(())
}

/// `κ* = 1/(2∫₀^∞ p G)`, computed in the Fourier domain as
/// `π² / ∫₀^{1+γ} J(u)/u du` with `J` the smoothed difference integral.
pub fn tempered_kappa_star<T: Real>(
    p_hat: Arc<dyn EvenProfile<T>>,
    dg_hat: Arc<dyn EvenProfile<T>>,
    gamma: T,
) -> Result<T> {
    validate(p_hat.as_ref(), dg_hat.as_ref(), gamma)?;
    let parts = TemperedParts {
        p_hat,
        dg_hat,
        gamma,
        kappa: T::one(),
    };
    let one = T::one();
    let mut bps = vec![T::zero(), (one - gamma).abs(), one, gamma, one + gamma];
    bps.retain(|b| *b <= one + gamma);
    bps.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    bps.dedup();
    let cfg = QuadConfig::new(T::lit(1e-12), T::lit(1e-10)).with_max_subdivisions(300);
    let r = integrate(|u: T| parts.smoothed_difference(u, 0) / u, &bps, &cfg);
    if !(r.value > T::zero()) {
        return Err(Error::Construction(format!(
            "tilted mass integral is not positive ({})",
            r.value
        )));
    }
    Ok(T::PI() * T::PI() / r.value)
}

/// Filter with `m1 = p̂` and `m2 = iκ·(pG)^` for the tempered tilt
/// `p(x)(1 - κG(x))`, where `p̂` is supported on `[-1, 1]` and `dĜ` on `[-γ, γ]`.
pub fn tempered_tilt_filter<T: Real>(
    p_hat: Arc<dyn EvenProfile<T>>,
    dg_hat: Arc<dyn EvenProfile<T>>,
    gamma: T,
    kappa: T,
) -> Result<SmoothingFilter<T>> {
    let kappa_star = tempered_kappa_star(p_hat.clone(), dg_hat.clone(), gamma)?;
    if !(kappa >= kappa_star * (T::one() - T::lit(super::bohman::KAPPA_SLACK))) {
        return Err(Error::Validity(format!(
            "kappa = {kappa} is below kappa* = {kappa_star}"
        )));
    }
    let derivative_order = (p_hat.order() - 1).min(MAX_ORDER);
    let one = T::one();
    let mut kinks: Vec<T> = [(one - gamma).abs(), gamma, one]
        .into_iter()
        .filter(|k| *k > T::zero() && *k < one + gamma)
        .collect();
    kinks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    kinks.dedup();
    Ok(SmoothingFilter {
        descriptor: FilterDescriptor {
            kind: FilterKind::Tempered,
            kappa: Some(kappa.as_f64()),
            kappa_star: Some(kappa_star.as_f64()),
            label: Some(format!("gamma={gamma}")),
        },
        parts: Arc::new(TemperedParts {
            p_hat,
            dg_hat,
            gamma,
            kappa,
        }),
        kernel: None,
        support_radius_m1: one,
        support_radius_m2: one + gamma,
        smoothness_order: derivative_order,
        smoothness_away_from_zero: derivative_order,
        derivative_order,
        kinks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::testutil::check_filter_invariants;
    use crate::filters::{p02_density, FnProfile, M02Profile};
    use crate::quadrature::integrate_half_line;
    use crate::specfun::sine_integral;
    use std::f64::consts::PI;

    fn fejer(gamma: f64) -> Arc<dyn EvenProfile<f64>> {
        Arc::new(FnProfile::new(
            move |t: f64, _| (1.0 - t.abs() / gamma).max(0.0),
            0,
            gamma,
        ))
    }

    fn p_hat() -> Arc<dyn EvenProfile<f64>> {
        Arc::new(M02Profile)
    }

    #[test]
    fn tilde_transform_closed_form() {
        let g = fejer(1.0);
        for &t in &[0.01, 0.2, -0.5, 0.9] {
            let v = tilde_transform(g.as_ref(), 1.0, t).unwrap();
            let a: f64 = t.abs();
            let want = 1.0 - a + a.ln();
            assert!((v - want).abs() < 1e-11, "t={t}: {v} vs {want}");
        }
        assert_eq!(tilde_transform(g.as_ref(), 1.0, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn kappa_star_matches_direct_space_integral() {
        // G(x) = (Si(x) - (1 - cos x)/x)/π has dĜ = (1 - |t|)₊.
        let big_g = |x: f64| {
            if x < 1e-6 {
                x / (2.0 * PI)
            } else {
                (sine_integral(x) - (1.0 - x.cos()) / x) / PI
            }
        };
        let cfg = QuadConfig::new(1e-15, 1e-13);
        let r = integrate_half_line(|x: f64| p02_density(x) * big_g(x), 0.0, 2.0 * PI, 1e6, &cfg);
        let oracle = 1.0 / (2.0 * r.value);
        let ks = tempered_kappa_star(p_hat(), fejer(1.0), 1.0).unwrap();
        assert!((ks - oracle).abs() < 1e-7 * oracle, "{ks} vs {oracle}");
        assert!(ks > 2.0);
    }

    #[test]
    fn construction_and_invariants() {
        let gamma = 0.5;
        let ks = tempered_kappa_star(p_hat(), fejer(gamma), gamma).unwrap();
        let f = tempered_tilt_filter(p_hat(), fejer(gamma), gamma, ks).unwrap();
        assert_eq!(f.support_radius_m2, 1.5);
        check_filter_invariants(&f, 1e-10);
        for &t in &[0.0, 0.3, -0.8, 0.99] {
            assert_eq!(f.m1(t, 0).unwrap(), M02Profile.eval(t, 0));
        }
        assert!(f.m2(1.2, 0).unwrap().abs() > 1e-6);
        assert_eq!(f.m2(1.6, 0).unwrap(), 0.0);
        assert!(matches!(
            tempered_tilt_filter(p_hat(), fejer(gamma), gamma, 0.9 * ks),
            Err(Error::Validity(_))
        ));
    }

    #[test]
    fn difference_integral_vanishes_beyond_extended_support() {
        let gamma = 0.5;
        let parts = TemperedParts {
            p_hat: p_hat(),
            dg_hat: fejer(gamma),
            gamma,
            kappa: 1.0,
        };
        for &u in &[1.51, 1.8, 3.0] {
            assert_eq!(parts.smoothed_difference(u, 0), 0.0);
        }
        assert!(parts.smoothed_difference(1.4, 0).abs() > 0.0);
    }

    #[test]
    fn dual_convolution_route_agrees() {
        // J(u) = ∫ p̂'(v) tilde(u - v) dv
        let gamma = 1.0;
        let parts = TemperedParts {
            p_hat: p_hat(),
            dg_hat: fejer(gamma),
            gamma,
            kappa: 1.0,
        };
        let cfg = QuadConfig::new(1e-13, 1e-12).with_max_subdivisions(2000);
        for &u in &[0.2, 0.7, 1.3] {
            let tilde = |t: f64| {
                let a = t.abs();
                if a >= 1.0 || a == 0.0 {
                    0.0
                } else {
                    1.0 - a + a.ln()
                }
            };
            let mut bps = vec![-1.0, 1.0, u];
            for c in [u - 1.0, u + 1.0] {
                if c > -1.0 && c < 1.0 {
                    bps.push(c);
                }
            }
            bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
            bps.dedup();
            let dual = integrate(|v: f64| M02Profile.eval(v, 1) * tilde(u - v), &bps, &cfg).value;
            let direct = parts.smoothed_difference(u, 0);
            assert!((dual - direct).abs() < 1e-8, "u={u}: {dual} vs {direct}");
        }
    }

    #[test]
    fn invalid_inputs() {
        let wide: Arc<dyn EvenProfile<f64>> = Arc::new(FnProfile::new(
            |t: f64, _| (1.0 - t.abs() / 2.0).max(0.0),
            1,
            2.0,
        ));
        assert!(matches!(
            tempered_tilt_filter(wide, fejer(1.0), 1.0, 10.0),
            Err(Error::Construction(_))
        ));
        assert!(matches!(
            tempered_tilt_filter(p_hat(), fejer(2.0), 1.0, 10.0),
            Err(Error::Construction(_))
        ));
    }
}
