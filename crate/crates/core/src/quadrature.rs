//! Adaptive Gauss–Kronrod (10/21) quadrature with a global error queue,
//! for real and complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use crate::real::Real;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_117_200,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7, 9.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_146,
];

/// Value type an integrand may return.
pub trait QuadValue<T: Real>:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<T, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> T;
}

impl<T: Real> QuadValue<T> for T {
    fn zero() -> Self {
        T::zero()
    }
    fn magnitude(self) -> T {
        self.abs()
    }
}

impl<T: Real> QuadValue<T> for Complex<T> {
    fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn magnitude(self) -> T {
        self.norm()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Real> QuadConfig<T> {
    pub fn new(abs_tol: T, rel_tol: T) -> Self {
        Self {
            abs_tol,
            rel_tol,
            max_subdivisions: 2000,
        }
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }
}

impl<T: Real> Default for QuadConfig<T> {
    fn default() -> Self {
        Self::new(T::lit(1e-12), T::lit(1e-10))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<V, T> {
    pub value: V,
    pub error: T,
    pub evaluations: usize,
    pub converged: bool,
}

struct Panel<V, T> {
    a: T,
    b: T,
    value: V,
    error: T,
}

impl<V, T: Real> PartialEq for Panel<V, T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<V, T: Real> Eq for Panel<V, T> {}
impl<V, T: Real> PartialOrd for Panel<V, T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V, T: Real> Ord for Panel<V, T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.as_f64().total_cmp(&other.error.as_f64())
    }
}

/// One Gauss–Kronrod 10/21 panel: returns (Kronrod value, |K − G|).
pub fn gk21<T, V, F>(f: &F, a: T, b: T) -> (V, T)
where
    T: Real,
    V: QuadValue<T>,
    F: Fn(T) -> V,
{
    let center = (a + b) / T::lit(2.0);
    let half = (b - a) / T::lit(2.0);
    let fc = f(center);
    let mut kron = fc * T::lit(WGK[10]);
    let mut gauss = V::zero();
    for j in 0..10 {
        let dx = half * T::lit(XGK[j]);
        let s = f(center - dx) + f(center + dx);
        kron = kron + s * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + s * T::lit(WG[j / 2]);
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    (kron, (kron - gauss).magnitude())
}

/// Integrates `f` over the sorted breakpoints `[x0, x1, ..., xm]`, refining
/// the panel with the largest error until the total error meets
/// `max(abs_tol, rel_tol·|value|)` or the subdivision budget runs out.
pub fn integrate<T, V, F>(f: F, breakpoints: &[T], cfg: &QuadConfig<T>) -> QuadResult<V, T>
where
    T: Real,
    V: QuadValue<T>,
    F: Fn(T) -> V,
{
    let mut heap: BinaryHeap<Panel<V, T>> = BinaryHeap::new();
    let mut done: Vec<Panel<V, T>> = Vec::new();
    let mut evaluations = 0usize;
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let (value, error) = gk21(&f, a, b);
        evaluations += 21;
        heap.push(Panel { a, b, value, error });
    }
    let totals = |heap: &BinaryHeap<Panel<V, T>>, done: &Vec<Panel<V, T>>| {
        let mut v = V::zero();
        let mut e = T::zero();
        for p in heap.iter().chain(done.iter()) {
            v = v + p.value;
            e = e + p.error;
        }
        (v, e)
    };
    let (mut value, mut error) = totals(&heap, &done);
    let mut splits = 0usize;
    let mut since_resum = 0usize;
    loop {
        let target = cfg.abs_tol.max(cfg.rel_tol * value.magnitude());
        if error <= target || heap.is_empty() {
            break;
        }
        if splits >= cfg.max_subdivisions {
            break;
        }
        let worst = heap.pop().expect("nonempty heap");
        let mid = (worst.a + worst.b) / T::lit(2.0);
        let width = worst.b - worst.a;
        let scale = worst
            .a
            .abs()
            .max(worst.b.abs())
            .max(T::min_positive_value());
        if width <= T::epsilon() * T::lit(64.0) * scale || mid <= worst.a || mid >= worst.b {
            // Cannot refine further in this precision.
            done.push(worst);
            continue;
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        evaluations += 42;
        value = value - worst.value + v1 + v2;
        error = error - worst.error + e1 + e2;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        splits += 1;
        since_resum += 1;
        if since_resum >= 64 {
            let (v, e) = totals(&heap, &done);
            value = v;
            error = e;
            since_resum = 0;
        }
    }
    let (value, error) = totals(&heap, &done);
    let target = cfg.abs_tol.max(cfg.rel_tol * value.magnitude());
    QuadResult {
        value,
        error,
        evaluations,
        converged: error <= target,
    }
}

/// Integrates over `[start, ∞)` in blocks `[start + (2^j - 1)w, start + (2^{j+1} - 1)w]`
/// until a block contributes less than the tolerance, or `max_length` is
/// passed. `converged` is false when the blocks fail to shrink.
pub fn integrate_half_line<T, V, F>(
    f: F,
    start: T,
    first_block: T,
    max_length: T,
    cfg: &QuadConfig<T>,
) -> QuadResult<V, T>
where
    T: Real,
    V: QuadValue<T>,
    F: Fn(T) -> V,
{
    let mut value = V::zero();
    let mut error = T::zero();
    let mut evaluations = 0usize;
    let mut a = start;
    let mut w = first_block;
    let mut converged = false;
    let mut quiet_blocks = 0;
    while a - start < max_length {
        let b = a + w;
        let npanels = 8usize;
        let bps: Vec<T> = (0..=npanels)
            .map(|i| a + w * T::count(i) / T::count(npanels))
            .collect();
        let r = integrate(&f, &bps, cfg);
        value = value + r.value;
        error = error + r.error;
        evaluations += r.evaluations;
        let target = cfg.abs_tol.max(cfg.rel_tol * value.magnitude());
        if r.value.magnitude() <= target {
            quiet_blocks += 1;
            if quiet_blocks >= 2 {
                converged = true;
                break;
            }
        } else {
            quiet_blocks = 0;
        }
        a = b;
        w = w * T::lit(2.0);
    }
    QuadResult {
        value,
        error,
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let cfg = QuadConfig::<f64>::default();
        let r = integrate(|x: f64| x.powi(20) - 3.0 * x, &[0.0, 1.0], &cfg);
        assert!((r.value - (1.0 / 21.0 - 1.5)).abs() < 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let cfg = QuadConfig::new(1e-12, 1e-12).with_max_subdivisions(500);
        let r = integrate(|x: f64| x.sqrt().recip(), &[0.0, 1.0], &cfg);
        assert!((r.value - 2.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn complex_oscillatory() {
        let cfg = QuadConfig::new(1e-13, 1e-12);
        let r = integrate(
            |t: f64| Complex::new(0.0, 10.0 * t).exp(),
            &[0.0, 1.0, 2.0],
            &cfg,
        );
        let exact = (Complex::new(0.0, 20.0).exp() - 1.0) / Complex::new(0.0, 10.0);
        assert!((r.value - exact).norm() < 1e-12);
    }

    #[test]
    fn half_line_gaussian() {
        let cfg = QuadConfig::new(1e-14, 1e-12);
        let r = integrate_half_line(|x: f64| (-x * x / 2.0).exp(), 0.0, 1.0, 1e4, &cfg);
        assert!(r.converged);
        assert!((r.value - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn half_line_divergence_reported() {
        let cfg = QuadConfig::new(1e-10, 1e-10);
        let r = integrate_half_line(|x: f64| 1.0 / (1.0 + x), 0.0, 1.0, 1e4, &cfg);
        assert!(!r.converged);
    }

    #[test]
    fn budget_exhaustion_flags_nonconvergence() {
        let cfg = QuadConfig::new(1e-15, 0.0).with_max_subdivisions(3);
        let r = integrate(|x: f64| (1.0 / x).sin(), &[1e-6, 1.0], &cfg);
        assert!(!r.converged);
        assert!(r.error > 0.0);
    }
}
