//! Scalar special functions: standard normal density and tail, truncated
//! cubic moments of the standard normal, the digamma family, and the complex
//! generalized exponential integral.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};
use crate::real::{factorial, Real};

/// Which side of the threshold a truncated cubic moment is taken on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CubicSide {
    /// `E(Z + t)_+^3`
    Plus,
    /// `E(Z - t)_+^3`
    Minus,
}

/// Truncated cubic moments of the standard normal at a threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalMoments<T> {
    pub t: T,
    /// `E(Z + t)_+^3`
    pub plus3: T,
    /// `E(Z - t)_+^3`
    pub minus3: T,
}

impl<T: Real> NormalMoments<T> {
    pub fn at(t: T) -> Result<Self> {
        check_finite(t, "t")?;
        Ok(Self {
            t,
            plus3: plus_cubic(t),
            minus3: minus_cubic(t),
        })
    }
}

fn check_finite<T: Real>(x: T, name: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {x}")))
    }
}

/// Standard normal density.
#[inline]
pub fn normal_pdf<T: Real>(t: T) -> T {
    let inv_sqrt_2pi = T::lit(0.398_942_280_401_432_7);
    inv_sqrt_2pi * (-(t * t) / T::lit(2.0)).exp()
}

/// Mills ratio `Φ̄(t)/φ(t)` for `t > 0` by its continued fraction
/// `1/(t + 1/(t + 2/(t + 3/(t + ...))))`, evaluated with modified Lentz.
fn mills_ratio_cf<T: Real>(t: T) -> T {
    let tiny = T::min_positive_value().sqrt();
    let eps = T::epsilon();
    let mut f = t;
    let mut c = f;
    let mut d = T::zero();
    for k in 1..5000 {
        let a = T::count(k);
        d = t + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = t + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() < eps {
            break;
        }
    }
    f.recip()
}

/// `erf(x)` for moderate `x ≥ 0` by the positive-term series
/// `2/√π e^{-x²} Σ 2ⁿ x^{2n+1} / (1·3···(2n+1))`.
fn erf_series<T: Real>(x: T) -> T {
    let two_x2 = T::lit(2.0) * x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..500 {
        term = term * two_x2 / T::count(2 * n + 1);
        sum = sum + term;
        if term < T::epsilon() * sum {
            break;
        }
    }
    T::lit(std::f64::consts::FRAC_2_SQRT_PI) * (-(x * x)).exp() * sum
}

/// Standard normal tail `Φ̄(t) = P(Z > t)`; infallible, with `Φ̄(±∞) ∈ {0, 1}`.
pub fn normal_tail<T: Real>(t: T) -> T {
    if t.is_nan() {
        return t;
    }
    if t < T::zero() {
        return T::one() - normal_tail(-t);
    }
    if t.is_infinite() {
        return T::zero();
    }
    if t <= T::lit(2.5) {
        let x = t / T::SQRT_2();
        T::lit(0.5) * (T::one() - erf_series(x))
    } else {
        normal_pdf(t) * mills_ratio_cf(t)
    }
}

/// Density and tail of the standard normal at `t`.
pub fn normal_pdf_tail<T: Real>(t: T) -> Result<(T, T)> {
    check_finite(t, "t")?;
    Ok((normal_pdf(t), normal_tail(t)))
}

/// `∫₀^∞ s³ exp(-ts - s²/2) ds` for `t > 0`; `E(Z-t)_+^3 = φ(t)` times this.
fn shifted_cubic_integral<T: Real>(t: T) -> T {
    let cfg = QuadConfig {
        abs_tol: T::zero(),
        rel_tol: T::lit(1e-14).max(T::epsilon() * T::lit(16.0)),
        max_subdivisions: 200,
    };
    let breaks = [
        T::zero(),
        T::lit(3.0) / t,
        T::lit(10.0) / t,
        T::lit(50.0) / t,
    ];
    let r = integrate(
        |s: T| s * s * s * (-(t * s) - s * s / T::lit(2.0)).exp(),
        &breaks,
        &cfg,
    );
    r.value
}

/// `E(Z - t)_+^3` for finite `t`.
pub(crate) fn minus_cubic<T: Real>(t: T) -> T {
    if t < T::zero() {
        let s = -t;
        return s * s * s + T::lit(3.0) * s + minus_cubic(s);
    }
    if t <= T::lit(3.0) {
        let t2 = t * t;
        (t2 + T::lit(2.0)) * normal_pdf(t) - t * (t2 + T::lit(3.0)) * normal_tail(t)
    } else {
        // Closed form cancels catastrophically here.
        normal_pdf(t) * shifted_cubic_integral(t)
    }
}

/// `E(Z + t)_+^3` for finite `t`.
pub(crate) fn plus_cubic<T: Real>(t: T) -> T {
    if t >= T::zero() {
        t * t * t + T::lit(3.0) * t + minus_cubic(t)
    } else {
        minus_cubic(-t)
    }
}

/// Truncated cubic moment `E(Z ∓ t)_+^3` of the standard normal.
pub fn normal_cubic_moment<T: Real>(t: T, side: CubicSide) -> Result<T> {
    check_finite(t, "t")?;
    Ok(match side {
        CubicSide::Plus => plus_cubic(t),
        CubicSide::Minus => minus_cubic(t),
    })
}

const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

const SHIFT_TARGET: f64 = 8.0;

fn polygamma_asymptotic<T: Real>(x: T, order: u8) -> T {
    let inv = x.recip();
    let inv2 = inv * inv;
    match order {
        0 => {
            let mut acc = x.ln() - inv / T::lit(2.0);
            let mut p = inv2;
            for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
                acc = acc - T::lit(*b) / T::count(2 * k + 2) * p;
                p = p * inv2;
            }
            acc
        }
        1 => {
            let mut acc = inv + inv2 / T::lit(2.0);
            let mut p = inv2 * inv;
            for b in BERNOULLI_EVEN {
                acc = acc + T::lit(b) * p;
                p = p * inv2;
            }
            acc
        }
        _ => {
            let mut acc = -inv2 - inv2 * inv;
            let mut p = inv2 * inv2;
            for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
                acc = acc - T::count(2 * k + 3) * T::lit(*b) * p;
                p = p * inv2;
            }
            acc
        }
    }
}

/// Shift-term contribution `1/(x+m)^{order+1}` with the sign of the
/// recurrence for the given order.
#[inline]
fn shift_term<T: Real>(y: T, order: u8) -> T {
    match order {
        0 => -y.recip(),
        1 => (y * y).recip(),
        _ => -T::lit(2.0) / (y * y * y),
    }
}

/// Polygamma of order 0..=2 evaluated by upward shift to `x ≥ 8` and an
/// eight-term asymptotic series. When `skip` is `Some(m)`, the pole term
/// belonging to `1/(x+m)` is omitted from the shift sum, which yields the
/// regular part of the function near the pole at `x = -m`.
pub(crate) fn polygamma_regular<T: Real>(x: T, order: u8, skip: Option<usize>) -> T {
    let target = T::lit(SHIFT_TARGET);
    let mut acc = T::zero();
    let mut y = x;
    let mut m = 0usize;
    while y < target {
        if skip != Some(m) {
            acc = acc + shift_term(y, order);
        }
        y = y + T::one();
        m += 1;
    }
    if let Some(s) = skip {
        if s >= m {
            // Pole lies beyond the shift range; subtract it explicitly.
            let yp = x + T::count(s);
            acc = acc - shift_term(yp, order);
        }
    }
    acc + polygamma_asymptotic(y, order)
}

/// `ψ(x)`, `ψ'(x)` or `ψ''(x)` for real `x` away from the poles at the
/// nonpositive integers.
pub fn digamma_family<T: Real>(x: T, order: u8) -> Result<T> {
    check_finite(x, "x")?;
    if order > 2 {
        return Err(Error::Capability {
            requested: order as usize,
            available: 2,
        });
    }
    if x <= T::zero() && x == x.round() {
        return Err(Error::Pole(x.as_f64()));
    }
    Ok(polygamma_regular(x, order, None))
}

pub fn digamma<T: Real>(x: T) -> Result<T> {
    digamma_family(x, 0)
}

/// Euler–Mascheroni constant.
pub(crate) fn euler_gamma<T: Real>() -> T {
    T::lit(0.577_215_664_901_532_9)
}

/// Generalized exponential integral `E_n(z) = ∫₁^∞ e^{-zu} u^{-n} du` for
/// `n ≥ 1` and `Re z ≥ 0`, `z ≠ 0` when `n = 1`.
pub fn expint_en<T: Real>(n: usize, z: Complex<T>) -> Result<Complex<T>> {
    if n == 0 {
        return Err(Error::Domain("E_n requires n >= 1".into()));
    }
    if z.re < T::zero() || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!(
            "E_n requires finite z with Re z >= 0, got {z}"
        )));
    }
    let zero = Complex::new(T::zero(), T::zero());
    if z == zero {
        if n == 1 {
            return Err(Error::Pole(0.0));
        }
        return Ok(Complex::new(T::count(n - 1).recip(), T::zero()));
    }
    let eps = T::epsilon();
    if z.norm() <= T::lit(2.0) {
        // Power series about 0.
        let nm1 = n - 1;
        let mut psi = -euler_gamma::<T>();
        for m in 1..=nm1 {
            psi = psi + T::count(m).recip();
        }
        let minus_z = -z;
        let mut sum = zero;
        let mut pow = Complex::new(T::one(), T::zero()); // (-z)^k / k!
        let mut k = 0usize;
        loop {
            if k != nm1 {
                let denom = T::from_i64(k as i64 - nm1 as i64).expect("small integer");
                let term = pow / denom;
                sum = sum - term;
                if k > nm1 + 2 && term.norm() <= eps * sum.norm() {
                    break;
                }
            }
            k += 1;
            pow = pow * minus_z / T::count(k);
            if k > 400 {
                break;
            }
        }
        let lead = minus_z.powu(nm1 as u32) / factorial::<T>(nm1) * (-z.ln() + psi);
        Ok(sum + lead)
    } else {
        // Continued fraction, modified Lentz.
        let tiny = T::min_positive_value().sqrt();
        let nn = T::count(n);
        let mut b = z + nn;
        let mut c = Complex::new(tiny.recip(), T::zero());
        let mut d = b.inv();
        let mut h = d;
        for i in 1..20_000usize {
            let an = -(T::count(i) * T::count(n - 1 + i));
            b = b + T::lit(2.0);
            d = (d * an + b).inv();
            c = b + Complex::new(an, T::zero()) / c;
            let del = c * d;
            h = h * del;
            if (del - T::one()).norm() < eps {
                return Ok(h * (-z).exp());
            }
        }
        Err(Error::Convergence {
            message: format!("E_{n}({z}) continued fraction"),
            estimate: (h * (-z).exp()).norm().as_f64(),
            error_estimate: f64::NAN,
        })
    }
}

/// Sine integral `Si(x) = ∫₀^x sin(s)/s ds`.
pub fn sine_integral<T: Real>(x: T) -> T {
    if x == T::zero() {
        return T::zero();
    }
    if x.is_infinite() {
        return x.signum() * T::FRAC_PI_2();
    }
    let ax = x.abs();
    if ax < T::lit(1e-4) {
        let x2 = x * x;
        return x * (T::one() - x2 / T::lit(18.0));
    }
    let e1 = expint_en(1, Complex::new(T::zero(), ax)).expect("E1 on the imaginary axis");
    x.signum() * (T::FRAC_PI_2() + e1.im)
}

/// Cosine integral `Ci(x)` for `x > 0`.
pub fn cosine_integral<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::Domain("Ci requires x > 0".into()));
    }
    let e1 = expint_en(1, Complex::new(T::zero(), x))?;
    Ok(-e1.re)
}
