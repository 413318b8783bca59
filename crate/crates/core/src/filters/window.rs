use std::sync::Arc;

use super::EvenProfile;
use crate::error::{Error, Result};
use crate::real::{NeumaierSum, Real};

type WindowFn<T> = Arc<dyn Fn(T, usize) -> T + Send + Sync>;

const MIN_INTERVALS: usize = 64;
const MAX_INTERVALS: usize = 1 << 21;

/// Even c.f. `f(t) = ∫ g(u + t) g(u) du / ‖g‖²` of a real window `g` on `[a, b]`.
#[derive(Clone)]
pub struct WindowCf<T> {
    g: WindowFn<T>,
    a: T,
    b: T,
    g_order: usize,
    norm2: T,
}

/// Trapezoid rule on `[lo, hi]` with interval halving until two successive
/// values agree.
fn trapezoid<T: Real>(h: impl Fn(T) -> T, lo: T, hi: T) -> T {
    if hi <= lo {
        return T::zero();
    }
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
    let mut n = MIN_INTERVALS;
    let mut step = (hi - lo) / T::count(n);
    let mut sum = NeumaierSum::new();
    sum.add((h(lo) + h(hi)) / T::lit(2.0));
    for i in 1..n {
        sum.add(h(lo + step * T::count(i)));
    }
    let mut prev = sum.value() * step;
    while n < MAX_INTERVALS {
        // Add the midpoints of the current intervals.
        for i in 0..n {
            sum.add(h(lo + step * (T::count(i) + T::lit(0.5))));
        }
        n *= 2;
        step = (hi - lo) / T::count(n);
        let cur = sum.value() * step;
        if (cur - prev).abs() <= tol * cur.abs().max(T::lit(1e-3)) {
            return cur;
        }
        prev = cur;
    }
    prev
}

impl<T: Real> WindowCf<T> {
    fn correlate(&self, t: T, m: usize) -> T {
        let a = t.abs();
        let lo = self.a.max(self.a - a);
        let hi = self.b.min(self.b - a);
        // Move derivatives onto the second factor once the window's own order is exhausted.
        let first = m.min(self.g_order);
        let second = m - first;
        let sign = if second % 2 == 1 { -T::one() } else { T::one() };
        let v = trapezoid(|u: T| (self.g)(u + a, first) * (self.g)(u, second), lo, hi);
        let v = sign * v / self.norm2;
        if t < T::zero() && m % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

impl<T: Real> EvenProfile<T> for WindowCf<T> {
    fn eval(&self, t: T, order: usize) -> T {
        if t.abs() >= self.b - self.a {
            return T::zero();
        }
        self.correlate(t, order)
    }
    fn order(&self) -> usize {
        2 * self.g_order
    }
    fn support(&self) -> T {
        self.b - self.a
    }
}

/// Builds the autocorrelation c.f. of a real window `g` supported on `[a, b]`.
///
/// `g(u, j)` must return the `j`-th derivative of `g` for `j ≤ g_order`;
/// `g` extended by zero outside `[a, b]` is assumed `C^{g_order}`.
pub fn cf_from_window<T: Real>(
    g: impl Fn(T, usize) -> T + Send + Sync + 'static,
    a: T,
    b: T,
    g_order: usize,
) -> Result<WindowCf<T>> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "window interval [{a}, {b}] is empty"
        )));
    }
    let g: WindowFn<T> = Arc::new(g);
    let norm2 = trapezoid(|u: T| g(u, 0) * g(u, 0), a, b);
    if !(norm2 > T::zero()) || !norm2.is_finite() {
        return Err(Error::Degenerate("window vanishes identically".into()));
    }
    Ok(WindowCf {
        g,
        a,
        b,
        g_order,
        norm2,
    })
}
