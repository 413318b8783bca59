use std::sync::Arc;

use super::{
    Derivs, EvenProfile, FilterDescriptor, FilterKind, FilterParts, SmoothingFilter, MAX_ORDER,
};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_half_line, QuadConfig};
use crate::real::Real;

/// The density `p₀,₂(x) = (32π³/3)(1 - cos x) / (x²(x² - 4π²)²)`.
pub fn p02_density<T: Real>(x: T) -> T {
    let pi = T::PI();
    let two_pi = T::two_pi();
    let c = T::lit(32.0) * pi * pi * pi / T::lit(3.0);
    let a = x.abs();
    let radius = T::lit(1e-3);
    // (1 - cos w)/w² near the removable points
    let vers = |w: T| {
        if w.abs() < radius {
            let w2 = w * w;
            T::lit(0.5) - w2 / T::lit(24.0) + w2 * w2 / T::lit(720.0)
        } else {
            let h = (w / T::lit(2.0)).sin();
            T::lit(2.0) * h * h / (w * w)
        }
    };
    let w = a - two_pi;
    if w.abs() < radius {
        let s = a + two_pi;
        c * vers(w) / (a * a * s * s)
    } else {
        let d = a * a - T::lit(4.0) * pi * pi;
        c * vers(a) / (d * d)
    }
}

/// Right-side derivatives of `m1(t) = ((2 + cos 2πt)/3)(1 - t) + sin(2πt)/(2π)` for `0 ≤ t < 1`, orders 0..=5.
fn m1_right<T: Real>(t: T) -> [T; 6] {
    let pi = T::PI();
    let a = T::two_pi() * t;
    let (s, c) = a.sin_cos();
    let u = T::one() - t;
    let three = T::lit(3.0);
    let k = T::lit(8.0) * pi * pi * pi / three;
    [
        (T::lit(2.0) + c) / three * u + s / T::two_pi(),
        -(T::two_pi() / three) * u * s + T::lit(2.0) / three * (c - T::one()),
        -(T::two_pi() / three) * s - T::lit(4.0) * pi * pi / three * u * c,
        k * u * s,
        k * (-s + T::two_pi() * u * c),
        k * (-T::lit(4.0) * pi * c - T::lit(4.0) * pi * pi * u * s),
    ]
}

/// The even part `m1 = p̂₀,₂` as a profile with derivatives up to order 4.
#[derive(Clone, Copy, Debug, Default)]
pub struct M02Profile;

impl<T: Real> EvenProfile<T> for M02Profile {
    fn eval(&self, t: T, order: usize) -> T {
        let a = t.abs();
        if a >= T::one() {
            return T::zero();
        }
        let d = m1_right(a)[order];
        if t < T::zero() && order % 2 == 1 {
            -d
        } else {
            d
        }
    }
    fn order(&self) -> usize {
        MAX_ORDER
    }
    fn support(&self) -> T {
        T::one()
    }
}

struct M02Parts<T> {
    kappa: T,
}

impl<T: Real> FilterParts<T> for M02Parts<T> {
    fn right(&self, t: T, _order: usize) -> (Derivs<T>, Derivs<T>) {
        let d = m1_right(t);
        let mut m1 = [T::zero(); MAX_ORDER + 1];
        let mut m2 = [T::zero(); MAX_ORDER + 1];
        for j in 0..=MAX_ORDER {
            m1[j] = d[j];
            m2[j] = self.kappa * d[j + 1];
        }
        (m1, m2)
    }
}

/// `κ₀,₂ = 1 / ∫|x| p₀,₂(x) dx`.
pub fn kappa_02<T: Real>() -> T {
    let cfg = QuadConfig::new(
        T::lit(1e-15),
        T::lit(1e-13).max(T::epsilon() * T::lit(16.0)),
    );
    let r = integrate_half_line(
        |x: T| x * p02_density(x),
        T::zero(),
        T::two_pi(),
        T::lit(1e6),
        &cfg,
    );
    (T::lit(2.0) * r.value).recip()
}

/// The C³ filter `M₀,₂ = p̂₀,₂ + iκ p̂₀,₂'` in closed form.
pub fn m02_filter<T: Real>(kappa: T) -> Result<SmoothingFilter<T>> {
    let ks = kappa_02::<T>();
    if !(kappa >= ks * (T::one() - T::lit(super::bohman::KAPPA_SLACK))) || !kappa.is_finite() {
        return Err(Error::Validity(format!(
            "kappa = {kappa} is below the admissible minimum {ks}"
        )));
    }
    Ok(SmoothingFilter {
        descriptor: FilterDescriptor {
            kind: FilterKind::M02,
            kappa: Some(kappa.as_f64()),
            kappa_star: Some(ks.as_f64()),
            label: None,
        },
        parts: Arc::new(M02Parts { kappa }),
        kernel: Some(Arc::new(move |x: T| {
            p02_density(x) * (T::one() - kappa * x)
        })),
        support_radius_m1: T::one(),
        support_radius_m2: T::one(),
        smoothness_order: 3,
        smoothness_away_from_zero: 3,
        derivative_order: MAX_ORDER,
        kinks: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::testutil::check_filter_invariants;
    use crate::quadrature::{integrate, QuadConfig};
    use std::f64::consts::PI;

    #[test]
    fn kappa_value() {
        let k = kappa_02::<f64>();
        assert!((k - 0.3418).abs() < 1e-3, "{k}");
    }

    #[test]
    fn values() {
        let f = m02_filter(kappa_02::<f64>()).unwrap();
        assert!((f.m1(0.0, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((f.m1(0.5, 0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let k = kappa_02::<f64>();
        assert!((f.m2(0.5, 0).unwrap() + 4.0 * k / 3.0).abs() < 1e-14);
        assert!((f.m2(0.5, 0).unwrap() + 0.4558).abs() < 1e-4);
    }

    #[test]
    fn displayed_m2_formula() {
        let k = 0.4;
        let f = m02_filter(k).unwrap();
        for i in -99..100 {
            let t = i as f64 / 100.0;
            let a = t.abs();
            let want = -k * t.signum() / 3.0
                * (2.0 * PI * (1.0 - a) * (2.0 * PI * a).sin() + 4.0 * (PI * t).sin().powi(2));
            assert!((f.m2(t, 0).unwrap() - want).abs() < 1e-14, "t={t}");
        }
    }

    #[test]
    fn kappa_below_minimum_rejected() {
        assert!(matches!(m02_filter(0.3f64), Err(Error::Validity(_))));
    }

    #[test]
    fn invariants() {
        check_filter_invariants(&m02_filter(kappa_02::<f64>()).unwrap(), 1e-12);
    }

    #[test]
    fn smooth_at_support_end_and_zero() {
        let f = m02_filter(kappa_02::<f64>()).unwrap();
        let (m1, m2) = f.parts_derivs(1.0 - 1e-9, 3).unwrap();
        for j in 0..=3 {
            assert!(m1[j].abs() < 1e-5 && m2[j].abs() < 1e-5, "j={j}");
        }
        let jumps = f.jumps_at_zero(3).unwrap();
        assert!(jumps.iter().all(|j| j.norm() < 1e-12));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let f = m02_filter(0.5f64).unwrap();
        let h = 1e-6;
        let mut t = -0.99;
        while t <= 0.99 {
            let (a1, a2) = f.parts_derivs(t, 4).unwrap();
            let (p1, p2) = f.parts_derivs(t + h, 4).unwrap();
            let (n1, n2) = f.parts_derivs(t - h, 4).unwrap();
            for j in 1..=3 {
                let fd1 = (p1[j - 1] - n1[j - 1]) / (2.0 * h);
                let fd2 = (p2[j - 1] - n2[j - 1]) / (2.0 * h);
                let s = a1[j].abs().max(a2[j].abs()).max(1.0);
                assert!((fd1 - a1[j]).abs() < 1e-6 * s, "m1 t={t} j={j}");
                assert!((fd2 - a2[j]).abs() < 1e-6 * s, "m2 t={t} j={j}");
            }
            t += 0.0137;
        }
    }

    #[test]
    fn density_removable_points() {
        assert!((p02_density(0.0f64) - 1.0 / (3.0 * PI)).abs() < 1e-15);
        assert!((p02_density(2.0 * PI) - 1.0 / (12.0 * PI)).abs() < 1e-14);
        for &x in &[
            1e-3 * 0.999,
            1e-3 * 1.001,
            2.0 * PI + 0.999e-3,
            2.0 * PI - 1.001e-3,
        ] {
            let direct = 32.0 * PI.powi(3) / 3.0 * (1.0 - x.cos())
                / (x * x * (x * x - 4.0 * PI * PI).powi(2));
            assert!((p02_density(x) - direct).abs() < 1e-7 * direct, "x={x}");
        }
    }

    #[test]
    fn density_has_unit_mass() {
        let cfg = QuadConfig::new(1e-15, 1e-13);
        let r = integrate_half_line(p02_density::<f64>, 0.0, 2.0 * PI, 1e6, &cfg);
        assert!((2.0 * r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fourier_pair_consistency() {
        // Numerical transform of the density reproduces m1 at 20 points.
        let cfg = QuadConfig::new(1e-15, 1e-13).with_max_subdivisions(20_000);
        for i in 0..20 {
            let t = -0.95 + 1.9 * i as f64 / 19.0;
            let r = integrate_half_line(
                |x: f64| 2.0 * p02_density(x) * (t * x).cos(),
                0.0,
                2.0 * PI,
                1e6,
                &cfg,
            );
            let m1 = M02Profile.eval(t, 0);
            assert!((r.value - m1).abs() < 1e-6, "t={t}: {} vs {m1}", r.value);
        }
    }

    #[test]
    fn kernel_is_tilted_density() {
        let k = kappa_02::<f64>();
        let f = m02_filter(k).unwrap();
        let cfg = QuadConfig::new(1e-12, 1e-12);
        for &x in &[0.0, 1.0, -2.5, 7.0] {
            let o = integrate(
                |t: f64| {
                    let m = f.value(t);
                    (num_complex::Complex::new(0.0, -t * x).exp() * m).re
                },
                &[-1.0, 0.0, 1.0],
                &cfg,
            )
            .value
                / (2.0 * PI);
            assert!((f.kernel(x).unwrap() - o).abs() < 1e-11, "x={x}");
        }
    }
}
