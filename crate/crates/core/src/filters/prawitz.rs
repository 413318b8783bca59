use std::sync::Arc;

use super::{Derivs, FilterDescriptor, FilterKind, FilterParts, SmoothingFilter, MAX_ORDER};
use crate::real::Real;
use crate::specfun::polygamma_regular;

// u·cot(u) = Σ A[n] u^{2n}
const COT_SERIES: [f64; 8] = [
    1.0,
    -1.0 / 3.0,
    -1.0 / 45.0,
    -2.0 / 945.0,
    -1.0 / 4725.0,
    -2.0 / 93555.0,
    -1382.0 / 638_512_875.0,
    -4.0 / 18_243_225.0,
];

const SERIES_RADIUS: f64 = 0.3;

/// `d^j/du^j [u cot u]` for `j = 0..=3`, plus `1 - u cot u` evaluated without cancellation.
fn ucot_derivs<T: Real>(u: T) -> ([T; 4], T) {
    if u.abs() < T::lit(SERIES_RADIUS) {
        let mut d = [T::zero(); 4];
        let mut one_minus = T::zero();
        for (n, &a) in COT_SERIES.iter().enumerate() {
            let a = T::lit(a);
            let p = 2 * n;
            if n > 0 {
                one_minus = one_minus - a * u.powi(p as i32);
            }
            for (j, dj) in d.iter_mut().enumerate() {
                if j > p {
                    break;
                }
                let mut falling = T::one();
                for i in 0..j {
                    falling = falling * T::count(p - i);
                }
                *dj = *dj + a * falling * u.powi((p - j) as i32);
            }
        }
        (d, one_minus)
    } else {
        let cot = u.cos() / u.sin();
        let csc2 = (u.sin() * u.sin()).recip();
        let c0 = u * cot;
        let c1 = cot - u * csc2;
        let c2 = T::lit(2.0) * csc2 * (c0 - T::one());
        let c3 = T::lit(6.0) * csc2 * cot
            - T::lit(4.0) * u * csc2 * cot * cot
            - T::lit(2.0) * u * csc2 * csc2;
        ([c0, c1, c2, c3], T::one() - c0)
    }
}

struct PrawitzParts;

impl<T: Real> FilterParts<T> for PrawitzParts {
    fn right(&self, t: T, order: usize) -> (Derivs<T>, Derivs<T>) {
        let pi = T::PI();
        let mut m1 = [T::zero(); MAX_ORDER + 1];
        let mut m2 = [T::zero(); MAX_ORDER + 1];
        let ord = order.min(3);
        if t <= T::lit(0.5) {
            // m1 = (1-t)·c(t) + t with c(t) = πt·cot(πt)
            let (cu, _) = ucot_derivs(pi * t);
            let mut c = [T::zero(); 4];
            let mut pj = T::one();
            for j in 0..4 {
                c[j] = pj * cu[j];
                pj = pj * pi;
            }
            m1[0] = (T::one() - t) * c[0] + t;
            for j in 1..=ord {
                m1[j] = (T::one() - t) * c[j] - T::count(j) * c[j - 1];
            }
            if ord >= 1 {
                m1[1] = m1[1] + T::one();
            }
        } else {
            // m1 = t·(1 - c(1-t)), from cot(πt) = -cot(π(1-t))
            let s = T::one() - t;
            let (cu, one_minus) = ucot_derivs(pi * s);
            // D[i] = d^i/dt^i of (1 - c(s(t)))
            let mut dd = [T::zero(); 4];
            dd[0] = one_minus;
            let mut pj = pi;
            for i in 1..4 {
                let sign = if i % 2 == 0 { T::one() } else { -T::one() };
                dd[i] = -(sign * pj * cu[i]);
                pj = pj * pi;
            }
            m1[0] = t * dd[0];
            for j in 1..=ord {
                m1[j] = t * dd[j] + T::count(j) * dd[j - 1];
            }
        }
        // m2 = -(1-t)πt
        m2[0] = -(T::one() - t) * pi * t;
        if order >= 1 {
            m2[1] = -pi + T::lit(2.0) * pi * t;
        }
        if order >= 2 {
            m2[2] = T::lit(2.0) * pi;
        }
        (m1, m2)
    }
}

/// q(w) = (2(1 - cos w) - w sin w) / w³
fn pole_remainder<T: Real>(w: T) -> T {
    if w.abs() < T::lit(0.05) {
        let w2 = w * w;
        w * (T::one() / T::lit(12.0) - w2 / T::lit(180.0) + w2 * w2 / T::lit(6720.0))
    } else {
        let h = (w / T::lit(2.0)).sin();
        (T::lit(4.0) * h * h - w * w.sin()) / (w * w * w)
    }
}

/// The Prawitz smoothing kernel, the inverse Fourier transform of the
/// Prawitz multiplier, in closed form through ψ' and ψ''. Values at the
/// excluded points `x = -2nπ` are the continuous limits.
pub fn prawitz_kernel<T: Real>(x: T) -> T {
    let pi = T::PI();
    let two_pi = T::two_pi();
    let pi3 = pi * pi * pi;
    let z = x / two_pi;
    let n = (-z).round();
    if n >= T::one() {
        let n_idx = n.to_usize().expect("pole index");
        let w = x + two_pi * n;
        let psi1 = polygamma_regular(z, 1, Some(n_idx));
        let psi2 = polygamma_regular(z, 2, Some(n_idx));
        let x2 = x * x;
        let x3 = x2 * x;
        let h = (x / T::lit(2.0)).sin();
        let one_minus_cos = T::lit(2.0) * h * h;
        let num = two_pi * x * x.sin() * (two_pi * (x + two_pi) - x2 * psi1)
            - one_minus_cos * (x3 * psi2 + T::lit(4.0) * pi * pi * (x + T::lit(4.0) * pi))
            + T::lit(8.0) * pi3 * x3 * pole_remainder(w);
        num / (T::lit(4.0) * pi3 * x3)
    } else {
        // Pole at z = 0 removed: ψ'(z) - 1/z² = ψ'(z+1), ψ''(z) + 2/z³ = ψ''(z+1).
        let psi1 = polygamma_regular(z + T::one(), 1, None);
        let psi2 = polygamma_regular(z + T::one(), 2, None);
        let sinc = if x == T::zero() {
            T::one()
        } else {
            x.sin() / x
        };
        let half = x / T::lit(2.0);
        let hs = if half == T::zero() {
            T::one()
        } else {
            half.sin() / half
        };
        let vers = hs * hs / T::lit(2.0); // (1 - cos x)/x²
        (two_pi * sinc * (two_pi - x * psi1) - vers * (x * x * psi2 + T::lit(4.0) * pi * pi))
            / (T::lit(4.0) * pi3)
    }
}

/// The Prawitz multiplier
/// `M(t) = [(1-|t|)πt·cot(πt) + |t| - i(1-|t|)πt]·1{|t|<1}`.
pub fn prawitz_filter<T: Real>() -> SmoothingFilter<T> {
    SmoothingFilter {
        descriptor: FilterDescriptor {
            kind: FilterKind::Prawitz,
            kappa: None,
            kappa_star: None,
            label: None,
        },
        parts: Arc::new(PrawitzParts),
        kernel: Some(Arc::new(prawitz_kernel::<T>)),
        support_radius_m1: T::one(),
        support_radius_m2: T::one(),
        smoothness_order: 0,
        smoothness_away_from_zero: 0,
        derivative_order: 3,
        kinks: vec![],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::testutil::check_filter_invariants;
    use crate::quadrature::{integrate, QuadConfig};
    use num_complex::Complex;
    use std::f64::consts::PI;

    #[test]
    fn values() {
        let f = prawitz_filter::<f64>();
        assert!((f.value(0.0) - Complex::new(1.0, 0.0)).norm() < 1e-15);
        let h = f.value(0.5);
        assert!((h.re - 0.5).abs() < 1e-14);
        assert!((h.im + PI / 4.0).abs() < 1e-14);
        assert_eq!(f.value(1.5), Complex::new(0.0, 0.0));
        assert_eq!(f.value(-1.5), Complex::new(0.0, 0.0));
        assert!(f.value(0.999_999).norm() < 1e-5);
    }

    #[test]
    fn direct_formula_agreement() {
        let f = prawitz_filter::<f64>();
        for i in 1..100 {
            let t = i as f64 / 100.0;
            let direct = (1.0 - t) * PI * t / (PI * t).tan() + t;
            assert!((f.m1(t, 0).unwrap() - direct).abs() < 1e-12, "t={t}");
            assert!((f.m2(t, 0).unwrap() + (1.0 - t) * PI * t).abs() < 1e-14);
        }
    }

    #[test]
    fn invariants() {
        check_filter_invariants(&prawitz_filter(), 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let f = prawitz_filter::<f64>();
        let h = 1e-6;
        for i in 1..200 {
            let t = i as f64 / 200.0 * 0.99;
            let (d, _) = f.parts_derivs(t, 3).unwrap();
            let (dp, _) = f.parts_derivs(t + h, 3).unwrap();
            let (dm, _) = f.parts_derivs(t - h, 3).unwrap();
            for j in 1..=3 {
                let fd = (dp[j - 1] - dm[j - 1]) / (2.0 * h);
                assert!(
                    (fd - d[j]).abs() < 1e-6 * d[j].abs().max(1.0),
                    "t={t} j={j}: {fd} vs {}",
                    d[j]
                );
            }
        }
    }

    #[test]
    fn jumps_at_zero() {
        let f = prawitz_filter::<f64>();
        let j = f.jumps_at_zero(3).unwrap();
        assert!(j[0].norm() < 1e-14);
        assert!((j[1] - Complex::new(0.0, 4.0 * PI)).norm() < 1e-12);
        assert!((j[2] - Complex::new(4.0 * PI * PI, 0.0)).norm() < 1e-9);
        assert!(f.has_jumps_at_zero(2).unwrap());
    }

    fn kernel_oracle(x: f64) -> f64 {
        // (1/2π)∫_{-1}^{1} e^{-itx} M(t) dt, real part
        let f = prawitz_filter::<f64>();
        let cfg = QuadConfig::new(1e-14, 1e-13);
        let r = integrate(
            |t: f64| (Complex::new(0.0, -t * x).exp() * f.value(t)).re,
            &[-1.0, -0.5, 0.0, 0.5, 1.0],
            &cfg,
        );
        r.value / (2.0 * PI)
    }

    #[test]
    fn kernel_matches_inverse_transform() {
        for &x in &[
            0.0,
            1e-7,
            0.3,
            3.0,
            -3.0,
            -2.0 * PI,
            -2.0 * PI + 1e-7,
            -2.0 * PI - 0.02,
            -4.0 * PI + 0.5,
            -7.0,
            12.0,
            -25.0,
            40.0,
        ] {
            let k = prawitz_kernel(x);
            let o = kernel_oracle(x);
            assert!((k - o).abs() < 1e-11, "x={x}: {k} vs {o}");
        }
        assert!((prawitz_kernel(0.0f64) - 1.0 / (2.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn kernel_asymmetric() {
        assert!((prawitz_kernel(3.0f64) - prawitz_kernel(-3.0f64)).abs() > 1e-3);
    }

    #[test]
    fn kernel_integrates_to_one() {
        let cfg = QuadConfig::new(1e-10, 1e-10).with_max_subdivisions(20_000);
        let bps: Vec<f64> = (-200..=200).map(|i| i as f64).collect();
        let r = integrate(prawitz_kernel::<f64>, &bps, &cfg);
        assert!((r.value - 1.0).abs() < 0.01, "{}", r.value);
    }

    #[test]
    fn kernel_fourier_transform_recovers_multiplier() {
        let cfg = QuadConfig::new(1e-11, 1e-11).with_max_subdivisions(50_000);
        let l = 2000.0;
        let bps: Vec<f64> = (-400..=400).map(|i| i as f64 * l / 400.0).collect();
        let t = 0.5;
        let re = integrate(|x: f64| prawitz_kernel(x) * (t * x).cos(), &bps, &cfg).value;
        let im = integrate(|x: f64| prawitz_kernel(x) * (t * x).sin(), &bps, &cfg).value;
        let m = prawitz_filter::<f64>().value(t);
        assert!(
            (re - m.re).abs() < 1e-4 && (im - m.im).abs() < 1e-4,
            "{re} {im} vs {m}"
        );
    }
}
