//! The `Λᵏ` cascade and the `xᵏ`-weighted tail bounds built on it.

use std::cell::RefCell;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::charfn::{CharFnEvaluator, DistributionSpec};
use crate::error::{Error, Result};
use crate::filters::SmoothingFilter;
use crate::inversion::{g_operator, max_panel, panel_grid, PVQuadratureConfig, Support};
use crate::jet::Jet;
use crate::quadrature::{integrate, integrate_half_line, QuadConfig};
use crate::real::{factorial, Real};
use crate::specfun::{expint_en, normal_tail};

/// A complex function of a real variable with derivatives, smooth away
/// from 0, possibly with one-sided derivatives at 0.
pub trait JetFunction<T: Real>: Sync {
    /// `[h(t), h'(t), ..., h^(order)(t)]` for `t ≠ 0`; at `t = 0` a function
    /// smooth there returns its derivatives.
    fn jet(&self, t: T, order: usize) -> Result<Jet<T>>;

    /// Derivatives at `0+` (`right`) or `0-`.
    fn jet_at_zero(&self, order: usize, right: bool) -> Result<Jet<T>>;

    fn max_order(&self) -> usize;

    fn support(&self) -> Support<T>;

    fn value(&self, t: T) -> Result<Complex<T>> {
        Ok(self.jet(t, 0)?.d[0])
    }
}

/// Jet function from a closure `(t, order) -> jet`, smooth at 0.
pub struct ClosureJet<T, F> {
    f: F,
    max_order: usize,
    support: Support<T>,
}

impl<T: Real, F: Fn(T, usize) -> Jet<T> + Sync> ClosureJet<T, F> {
    pub fn new(f: F, max_order: usize, support: Support<T>) -> Self {
        Self {
            f,
            max_order,
            support,
        }
    }
}

impl<T: Real, F: Fn(T, usize) -> Jet<T> + Sync> JetFunction<T> for ClosureJet<T, F> {
    fn jet(&self, t: T, order: usize) -> Result<Jet<T>> {
        if order > self.max_order {
            return Err(Error::Capability {
                requested: order,
                available: self.max_order,
            });
        }
        Ok((self.f)(t, order))
    }
    fn jet_at_zero(&self, order: usize, _right: bool) -> Result<Jet<T>> {
        self.jet(T::zero(), order)
    }
    fn max_order(&self) -> usize {
        self.max_order
    }
    fn support(&self) -> Support<T> {
        self.support.clone()
    }
}

/// `r(t) = M(σt/T') f(t)`, the filtered characteristic function.
pub struct FilteredCf<'a, T> {
    f: &'a CharFnEvaluator<T>,
    filter: &'a SmoothingFilter<T>,
    /// `σ/T'`
    rate: T,
    radius: T,
}

impl<'a, T: Real> FilteredCf<'a, T> {
    /// `sign = +1` gives `M(t/T')f(t)`, `-1` gives `M(-t/T')f(t)`, with
    /// `T' = T/R` so that the product lives on `[-T, T]`.
    pub fn new(
        f: &'a CharFnEvaluator<T>,
        filter: &'a SmoothingFilter<T>,
        big_t: T,
        sign: T,
    ) -> Self {
        let scale = big_t / filter.support_radius();
        Self {
            f,
            filter,
            rate: sign / scale,
            radius: big_t,
        }
    }

    fn filter_jet_one_sided(&self, order: usize, right_of_zero: bool) -> Result<Jet<T>> {
        let (m1, m2) = self.filter.parts_derivs(T::zero(), order)?;
        let d = (0..=order)
            .map(|j| {
                if right_of_zero {
                    Complex::new(m1[j], m2[j])
                } else {
                    // m1^(j)(0-) = (-1)^j m1^(j)(0+), m2^(j)(0-) = (-1)^(j+1) m2^(j)(0+)
                    let s = if j % 2 == 0 { T::one() } else { -T::one() };
                    Complex::new(s * m1[j], -s * m2[j])
                }
            })
            .collect();
        Ok(Jet { d })
    }
}

impl<T: Real> JetFunction<T> for FilteredCf<'_, T> {
    fn jet(&self, t: T, order: usize) -> Result<Jet<T>> {
        let m = self
            .filter
            .jet(self.rate * t, order)?
            .chain_scale(self.rate);
        Ok(m.mul(&self.f.jet(t, order)?))
    }

    fn jet_at_zero(&self, order: usize, right: bool) -> Result<Jet<T>> {
        // The filter argument σt/T' sits right of 0 when t and σ agree in sign.
        let arg_right = right == (self.rate > T::zero());
        let m = self
            .filter_jet_one_sided(order, arg_right)?
            .chain_scale(self.rate);
        Ok(m.mul(&self.f.jet(T::zero(), order)?))
    }

    fn max_order(&self) -> usize {
        self.filter
            .derivative_order
            .min(self.f.max_derivative_order())
    }

    fn support(&self) -> Support<T> {
        let s = self.radius / self.filter.support_radius();
        Support::Compact {
            radius: self.radius,
            kinks: self
                .filter
                .breakpoints()
                .into_iter()
                .map(|b| b * s)
                .filter(|&b| b < self.radius)
                .collect(),
        }
    }
}

/// `h^(j)(0+) - h^(j)(0-)` for `j = 1..=k` (index `j - 1`).
pub fn one_sided_jumps<T: Real>(h: &dyn JetFunction<T>, k: usize) -> Result<Vec<Complex<T>>> {
    let right = h.jet_at_zero(k, true)?;
    let left = h.jet_at_zero(k, false)?;
    Ok((1..=k).map(|j| right.d[j] - left.d[j]).collect())
}

/// Evaluator of `Λᵏh`, switching to the integral form near 0.
pub struct LambdaEvaluator<'a, T> {
    pub h: &'a dyn JetFunction<T>,
    pub k: usize,
    pub near_zero_radius: T,
}

impl<'a, T: Real> LambdaEvaluator<'a, T> {
    pub fn new(h: &'a dyn JetFunction<T>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain(
                "the cascade order k must be at least 1".into(),
            ));
        }
        if k > h.max_order() {
            return Err(Error::Capability {
                requested: k,
                available: h.max_order(),
            });
        }
        Ok(Self {
            h,
            k,
            near_zero_radius: T::lit(0.05),
        })
    }

    pub fn with_near_zero_radius(mut self, r: T) -> Self {
        self.near_zero_radius = r;
        self
    }

    /// `(Λᵏh)(t)`.
    pub fn eval(&self, t: T) -> Result<Complex<T>> {
        if t == T::zero() {
            return Ok(Complex::new(T::zero(), T::zero()));
        }
        if t.abs() > self.near_zero_radius {
            self.finite_sum(t)
        } else {
            self.integral_form(t)
        }
    }

    /// `-k! t^{-k} (h(0) - Σ_{j≤k} h^(j)(t)(-t)^j/j!)`
    pub fn finite_sum(&self, t: T) -> Result<Complex<T>> {
        let k = self.k;
        let h0 = self.h.jet_at_zero(0, t > T::zero())?.d[0];
        let jet = self.h.jet(t, k)?;
        let mut taylor = Complex::new(T::zero(), T::zero());
        let mut c = T::one();
        for j in 0..=k {
            taylor = taylor + jet.d[j] * c;
            c = c * (-t) / T::count(j + 1);
        }
        Ok((h0 - taylor) * (-factorial::<T>(k) / t.powi(k as i32)))
    }

    /// `(-1)^k ∫₀¹ [h^(k)(t) - h^(k)(αt)] kα^{k-1} dα`
    pub fn integral_form(&self, t: T) -> Result<Complex<T>> {
        let k = self.k;
        let top = self.h.jet(t, k)?.d[k];
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let kk = T::count(k);
        let integrand = |a: T| match self.h.jet(a * t, k) {
            Ok(j) => (top - j.d[k]) * (kk * a.powi(k as i32 - 1)),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex::new(T::zero(), T::zero())
            }
        };
        let cfg = QuadConfig::new(
            T::lit(1e-15),
            T::lit(1e-13).max(T::epsilon() * T::lit(64.0)),
        )
        .with_max_subdivisions(50);
        let r = integrate(integrand, &[T::zero(), T::one()], &cfg);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let sign = if k.is_multiple_of(2) { T::one() } else { -T::one() };
        Ok(r.value * sign)
    }
}

/// `(Λᵏh)(t)` with the default near-zero radius.
pub fn lambda_k<T: Real>(h: &dyn JetFunction<T>, k: usize, t: T) -> Result<Complex<T>> {
    LambdaEvaluator::new(h, k)?.eval(t)
}

/// `𝔊(Λᵏh)(x)`. Beyond a compact support `R` of `h`, `Λᵏh(t) = -k!h(0)t^{-k}`,
/// whose contribution is `-(i/2π)k!h(0)R^{-k}[E_{k+1}(iRx) - (-1)^k E_{k+1}(-iRx)]`.
pub fn g_of_lambda<T: Real>(
    h: &dyn JetFunction<T>,
    k: usize,
    x: T,
    cfg: &PVQuadratureConfig<T>,
) -> Result<(Complex<T>, T)> {
    let lam = LambdaEvaluator::new(h, k)?;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let eval = |t: T| match lam.eval(t) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            Complex::new(T::zero(), T::zero())
        }
    };
    let out = match h.support() {
        Support::Compact { radius, kinks } => {
            cfg.validate()?;
            let mut extra = kinks.clone();
            extra.push(lam.near_zero_radius.min(radius / T::lit(2.0)));
            let bps = panel_grid(T::zero(), radius, max_panel(x, radius), &extra);
            let i = Complex::new(T::zero(), T::one());
            let integrand = |t: T| {
                let e = Complex::new(T::zero(), -t * x).exp();
                (e * eval(t) - e.conj() * eval(-t)) / t
            };
            let qc = QuadConfig::new(cfg.tolerance * T::lit(0.5), T::zero())
                .with_max_subdivisions(200_000);
            let r = integrate(integrand, &bps, &qc);
            if !r.converged {
                return Err(Error::Convergence {
                    message: "adaptive quadrature of 𝔊(Λᵏh) hit its subdivision limit".into(),
                    estimate: r.value.re.as_f64(),
                    error_estimate: r.error.as_f64(),
                });
            }
            let h0 = h.jet_at_zero(0, true)?.d[0];
            let z = Complex::new(T::zero(), radius * x);
            let sign = if k.is_multiple_of(2) { T::one() } else { -T::one() };
            let ek = expint_en(k + 1, z)? - expint_en(k + 1, z.conj())? * sign;
            let tail = i * h0 * ek * (-factorial::<T>(k) / radius.powi(k as i32) / T::two_pi());
            (r.value * i / T::two_pi() + tail, r.error / T::two_pi())
        }
        Support::Unbounded => g_operator(&eval, &Support::Unbounded, x, cfg)?,
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(out)
}

/// `(i/2π)Σ_{j=1}^k jump_j / (j (ix)^j)`
fn jump_terms<T: Real>(jumps: &[Complex<T>], x: T) -> Complex<T> {
    let ix = Complex::new(T::zero(), x);
    let mut acc = Complex::new(T::zero(), T::zero());
    let mut pow = ix;
    for (idx, jump) in jumps.iter().enumerate() {
        acc = acc + *jump / (pow * T::count(idx + 1));
        pow = pow * ix;
    }
    acc * Complex::new(T::zero(), T::one()) / T::two_pi()
}

/// `𝔊(h)(x)` reconstructed as
/// `h(0)sign(x)/2 + (i/2π)Σ jump_j/(j(ix)^j) + (i/x)ᵏ𝔊(Λᵏh)(x)`,
/// with `jump_j = h^(j)(0+) - h^(j)(0-)`. Returns the value and error estimate.
pub fn lambda_expansion_with_jumps<T: Real>(
    h: &dyn JetFunction<T>,
    k: usize,
    x: T,
    jumps: &[Complex<T>],
    cfg: &PVQuadratureConfig<T>,
) -> Result<(Complex<T>, T)> {
    if x == T::zero() || !x.is_finite() {
        return Err(Error::Domain(
            "the expansion requires a finite x != 0".into(),
        ));
    }
    if jumps.len() != k {
        return Err(Error::Domain(format!(
            "expected {k} jumps, got {}",
            jumps.len()
        )));
    }
    let h0 = h.jet_at_zero(0, true)?.d[0];
    let (g, err) = g_of_lambda(h, k, x, cfg)?;
    let factor = Complex::new(T::zero(), x.recip()).powu(k as u32);
    let value = h0 * (x.signum() * T::lit(0.5)) + jump_terms(jumps, x) + factor * g;
    Ok((value, err * x.abs().powi(-(k as i32))))
}

/// Two-sided bound on `xᵏP(X ≥ x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBoundResult<T> {
    pub x: T,
    pub k: usize,
    #[serde(rename = "T")]
    pub big_t: T,
    pub upper: T,
    pub lower: T,
    pub exact: Option<T>,
    pub quad_error: T,
}

impl<T: Real> TailBoundResult<T> {
    pub fn width(&self) -> T {
        self.upper - self.lower
    }
}

fn check_filter_for_cascade<T: Real>(filter: &SmoothingFilter<T>, k: usize) -> Result<()> {
    if filter.smoothness_away_from_zero + 1 < k {
        return Err(Error::Smoothness(format!(
            "the {} filter is only C^{} away from 0, the order-{k} cascade needs C^{}",
            filter.kind(),
            filter.smoothness_away_from_zero,
            k - 1
        )));
    }
    if filter.derivative_order < k {
        return Err(Error::Smoothness(format!(
            "the {} filter provides derivatives up to order {}, the order-{k} cascade needs {k}",
            filter.kind(),
            filter.derivative_order
        )));
    }
    Ok(())
}

/// `xᵏP(X ≥ x)` when the law is known exactly.
fn exact_weighted_tail<T: Real>(f: &CharFnEvaluator<T>, k: usize, x: T) -> Option<T> {
    let w = x.powi(k as i32);
    if let Some(l) = f.lattice() {
        return Some(w * l.tail_ge(x));
    }
    match f.spec() {
        DistributionSpec::Normal { mean, sd } => Some(w * normal_tail((x - *mean) / *sd)),
        _ => None,
    }
}

/// Bounds `lower ≤ xᵏP(X > x) ≤ xᵏP(X ≥ x) ≤ upper` from
/// `∓iᵏ𝔊(Λᵏr_±)(x)` with `r_±(t) = M(∓t/T')f(t)`, corrected by the
/// one-sided jumps of `r_±` at 0.
pub fn tail_bound<T: Real>(
    f: &CharFnEvaluator<T>,
    filter: &SmoothingFilter<T>,
    k: usize,
    big_t: T,
    x: T,
    cfg: &PVQuadratureConfig<T>,
) -> Result<TailBoundResult<T>> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if !(big_t > T::zero()) || !big_t.is_finite() {
        return Err(Error::Domain(format!(
            "T must be positive and finite, got {big_t}"
        )));
    }
    if !(x >= T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "x must be finite and nonnegative, got {x}"
        )));
    }
    check_filter_for_cascade(filter, k)?;
    if f.max_derivative_order() < k {
        return Err(Error::Capability {
            requested: k,
            available: f.max_derivative_order(),
        });
    }
    let exact = exact_weighted_tail(f, k, x);
    if x == T::zero() {
        return Ok(TailBoundResult {
            x,
            k,
            big_t,
            upper: T::zero(),
            lower: T::zero(),
            exact,
            quad_error: T::zero(),
        });
    }
    let ik = Complex::new(T::zero(), T::one()).powu(k as u32);
    let xk = x.powi(k as i32);
    let side = |sign: T| -> Result<(T, T)> {
        let r = FilteredCf::new(f, filter, big_t, sign);
        let (g, err) = g_of_lambda(&r, k, x, cfg)?;
        let jumps = one_sided_jumps(&r, k)?;
        let v = -(ik * g) - jump_terms(&jumps, x) * xk;
        let allowance = T::lit(10.0) * cfg.tolerance.max(err) * xk.max(T::one());
        if v.im.abs() > allowance {
            return Err(Error::Parity {
                residue: v.im.abs().as_f64(),
                allowance: allowance.as_f64(),
            });
        }
        Ok((v.re, err + cfg.tolerance))
    };
    // r_+ uses M(-t/T'), the lower CDF bound, hence the upper tail bound.
    let (upper, eu) = side(-T::one())?;
    let (lower, el) = side(T::one())?;
    Ok(TailBoundResult {
        x,
        k,
        big_t,
        upper,
        lower,
        exact,
        quad_error: eu.max(el),
    })
}

/// `I(u) = ∫₀¹ (e^{-iu/α} - e^{-iu}) 3α² dα = -iu E₃(iu)`, with `I(-u) = conj I(u)`.
pub fn i_function<T: Real>(u: T) -> Complex<T> {
    if u == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let a = u.abs();
    let e3 = expint_en(3, Complex::new(T::zero(), a)).expect("E_3 on the imaginary axis");
    let v = Complex::new(T::zero(), -a) * e3;
    if u < T::zero() {
        v.conj()
    } else {
        v
    }
}

/// Upper envelope of `|I|` from values on a log grid, using that `|I(u)|`
/// increases in `|u|` from 0 to 1.
#[derive(Clone, Debug)]
pub struct IModulusTable<T> {
    nodes: Vec<T>,
    moduli: Vec<T>,
}

impl<T: Real> IModulusTable<T> {
    pub fn new(u_min: T, u_max: T, per_decade: usize) -> Self {
        let decades = (u_max / u_min).log10();
        let n = (decades * T::count(per_decade))
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        let nodes: Vec<T> = (0..=n)
            .map(|i| u_min * T::lit(10.0).powf(decades * T::count(i) / T::count(n)))
            .collect();
        let moduli = nodes.iter().map(|&u| i_function(u).norm()).collect();
        Self { nodes, moduli }
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// A value `≥ |I(u)|`.
    pub fn upper(&self, u: T) -> T {
        let a = u.abs();
        if a == T::zero() {
            return T::zero();
        }
        let idx = self.nodes.partition_point(|&v| v < a);
        if idx >= self.nodes.len() {
            T::one()
        } else {
            self.moduli[idx]
        }
    }
}

impl<T: Real> Default for IModulusTable<T> {
    fn default() -> Self {
        Self::new(T::lit(1e-4), T::lit(1e5), 60)
    }
}

/// `(1/2π)∫ |I(tx)||H(t)| dt/|t|`, with `|I|` replaced by its tabulated upper envelope.
pub fn averaged_l_bound<T: Real>(
    h: &dyn Fn(T) -> Complex<T>,
    support: &Support<T>,
    x: T,
    cfg: &PVQuadratureConfig<T>,
) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::Domain("x must be finite".into()));
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    let table = IModulusTable::<T>::default();
    let ax = x.abs();
    let integrand = |t: T| table.upper(t * ax) * (h(t).norm() + h(-t).norm()) / t;
    let qc = QuadConfig::new(cfg.tolerance, T::lit(1e-10)).with_max_subdivisions(100_000);
    let cells: Vec<T> = table.nodes().iter().map(|&u| u / ax).collect();
    let (end, unbounded) = match support {
        Support::Compact { radius, .. } => (*radius, false),
        Support::Unbounded => (*cells.last().expect("table nodes"), true),
    };
    let mut bps = vec![T::zero()];
    bps.extend(cells.iter().copied().filter(|&c| c < end));
    bps.push(end);
    let r = integrate(integrand, &bps, &qc);
    let mut total = r.value;
    let mut ok = r.converged;
    if unbounded {
        let tail = integrate_half_line(
            |t: T| (h(t).norm() + h(-t).norm()) / t,
            end,
            end,
            T::lit(1e12),
            &qc,
        );
        total = total + tail.value;
        ok = ok && tail.converged;
    }
    if !ok || !total.is_finite() {
        return Err(Error::Domain(
            "∫|H(t)|dt/|t| does not converge for this H".into(),
        ));
    }
    Ok(total / T::two_pi())
}
