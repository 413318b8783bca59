use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{NeumaierSum, Real};

/// Default cap on the number of atoms a convolution may produce.
pub const DEFAULT_MAX_ATOMS: usize = 4_000_000;

/// Finitely supported law on `offset + step·k`, `k = 0..weights.len()`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticePmf<T> {
    pub offset: T,
    pub step: T,
    pub weights: Vec<T>,
}

impl<T: Real> LatticePmf<T> {
    /// Validates and trims leading/trailing zero weights.
    pub fn new(offset: T, step: T, weights: Vec<T>) -> Result<Self> {
        if !(step > T::zero()) || !step.is_finite() || !offset.is_finite() {
            return Err(Error::Domain(format!(
                "lattice needs finite offset and positive step, got offset={offset}, step={step}"
            )));
        }
        if weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(Error::Domain(
                "lattice weights must be finite and nonnegative".into(),
            ));
        }
        let total: T = weights.iter().copied().collect::<NeumaierSum<T>>().value();
        let tol = T::lit(1e-12).max(T::epsilon() * T::count(weights.len().max(1)) * T::lit(8.0));
        if (total - T::one()).abs() > tol {
            return Err(Error::Domain(format!(
                "lattice weights sum to {total}, not 1"
            )));
        }
        Ok(Self::trimmed(offset, step, weights))
    }

    fn trimmed(offset: T, step: T, mut weights: Vec<T>) -> Self {
        let first = weights.iter().position(|w| *w > T::zero()).unwrap_or(0);
        let last = weights.iter().rposition(|w| *w > T::zero()).unwrap_or(0);
        let offset = offset + step * T::count(first);
        weights.truncate(last + 1);
        weights.drain(..first);
        if weights.is_empty() {
            weights.push(T::one());
        }
        Self {
            offset,
            step,
            weights,
        }
    }

    pub fn point_mass(a: T) -> Self {
        Self {
            offset: a,
            step: T::one(),
            weights: vec![T::one()],
        }
    }

    pub fn two_point(x_minus: T, x_plus: T, p_plus: T) -> Result<Self> {
        if !(x_minus < x_plus) || !(p_plus > T::zero() && p_plus < T::one()) {
            return Err(Error::Domain(
                "two-point law needs x_minus < x_plus and 0 < p_plus < 1".into(),
            ));
        }
        Ok(Self {
            offset: x_minus,
            step: x_plus - x_minus,
            weights: vec![T::one() - p_plus, p_plus],
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn atom(&self, k: usize) -> T {
        self.offset + self.step * T::count(k)
    }

    pub fn atoms(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(move |(k, &w)| (self.atom(k), w))
    }

    pub fn total_mass(&self) -> T {
        self.weights
            .iter()
            .copied()
            .collect::<NeumaierSum<T>>()
            .value()
    }

    pub fn moment(&self, j: i32) -> T {
        self.atoms()
            .map(|(x, w)| w * x.powi(j))
            .collect::<NeumaierSum<T>>()
            .value()
    }

    pub fn abs_moment(&self, j: i32) -> T {
        self.atoms()
            .map(|(x, w)| w * x.abs().powi(j))
            .collect::<NeumaierSum<T>>()
            .value()
    }

    pub fn mean(&self) -> T {
        self.moment(1)
    }

    pub fn variance(&self) -> T {
        let m = self.mean();
        self.atoms()
            .map(|(x, w)| w * (x - m) * (x - m))
            .collect::<NeumaierSum<T>>()
            .value()
    }

    /// Law of `(X - shift) / scale` for `scale > 0`.
    pub fn affine(&self, shift: T, scale: T) -> Self {
        Self {
            offset: (self.offset - shift) / scale,
            step: self.step / scale,
            weights: self.weights.clone(),
        }
    }

    /// `tail[k] = Σ_{j ≥ k} w_j`, summed from the far end with compensation;
    /// has one extra trailing zero.
    pub fn upper_sums(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.weights.len() + 1];
        let mut acc = NeumaierSum::new();
        for k in (0..self.weights.len()).rev() {
            acc.add(self.weights[k]);
            out[k] = acc.value();
        }
        out
    }

    /// `lower[k] = Σ_{j < k} w_j` with compensation.
    pub fn lower_sums(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.weights.len() + 1];
        let mut acc = NeumaierSum::new();
        for k in 0..self.weights.len() {
            acc.add(self.weights[k]);
            out[k + 1] = acc.value();
        }
        out
    }

    /// Index range of atoms `< x` and `<= x`: returns `(lt, le)` counts.
    pub fn split_at(&self, x: T) -> (usize, usize) {
        let n = self.weights.len();
        let pos = (x - self.offset) / self.step;
        if pos < T::zero() {
            return (0, 0);
        }
        if pos > T::count(n) {
            return (n, n);
        }
        let r = pos.round();
        let near = (pos - r).abs() <= T::lit(1e-9).max(T::epsilon() * T::lit(64.0) * pos.abs());
        if near && r >= T::zero() && r < T::count(n) {
            let k = r.to_usize().unwrap_or(0);
            (k, k + 1)
        } else {
            let k = pos.floor().to_usize().unwrap_or(0) + 1;
            let k = k.min(n);
            (k, k)
        }
    }

    /// `P(X < x)`.
    pub fn cdf_lt(&self, x: T) -> T {
        let (lt, _) = self.split_at(x);
        self.weights[..lt]
            .iter()
            .copied()
            .collect::<NeumaierSum<T>>()
            .value()
    }

    /// `P(X ≤ x)`.
    pub fn cdf_le(&self, x: T) -> T {
        let (_, le) = self.split_at(x);
        self.weights[..le]
            .iter()
            .copied()
            .collect::<NeumaierSum<T>>()
            .value()
    }

    /// `P(X > x)`, summed over the upper tail directly.
    pub fn tail_gt(&self, x: T) -> T {
        let (_, le) = self.split_at(x);
        self.weights[le..]
            .iter()
            .rev()
            .copied()
            .collect::<NeumaierSum<T>>()
            .value()
    }

    /// `P(X ≥ x)`.
    pub fn tail_ge(&self, x: T) -> T {
        let (lt, _) = self.split_at(x);
        self.weights[lt..]
            .iter()
            .rev()
            .copied()
            .collect::<NeumaierSum<T>>()
            .value()
    }

    /// Convolution with a law on a lattice of the same step.
    pub fn convolve(&self, other: &Self, max_atoms: usize) -> Result<Self> {
        let rel = ((self.step - other.step) / self.step).abs();
        if rel > T::lit(1e-12) {
            return Err(Error::Domain(
                "convolution needs equal lattice steps".into(),
            ));
        }
        let n = self.len() + other.len() - 1;
        if n > max_atoms {
            return Err(Error::Resource(format!(
                "convolution would produce {n} atoms, budget is {max_atoms}"
            )));
        }
        let (a, b) = if self.len() >= other.len() {
            (&self.weights, &other.weights)
        } else {
            (&other.weights, &self.weights)
        };
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let lo = k.saturating_sub(a.len() - 1);
            let hi = k.min(b.len() - 1);
            let mut acc = NeumaierSum::new();
            for j in lo..=hi {
                acc.add(a[k - j] * b[j]);
            }
            out.push(acc.value());
        }
        Ok(Self::trimmed(self.offset + other.offset, self.step, out))
    }
}

/// Exact `n`-fold convolution by binary powering.
pub fn convolve_iid<T: Real>(base: &LatticePmf<T>, n: usize) -> Result<LatticePmf<T>> {
    convolve_iid_with_budget(base, n, DEFAULT_MAX_ATOMS)
}

pub fn convolve_iid_with_budget<T: Real>(
    base: &LatticePmf<T>,
    n: usize,
    max_atoms: usize,
) -> Result<LatticePmf<T>> {
    if n == 0 {
        return Err(Error::Domain("convolution power needs n >= 1".into()));
    }
    let span = (base.len() - 1).saturating_mul(n).saturating_add(1);
    if span > max_atoms {
        return Err(Error::Resource(format!(
            "{n}-fold convolution spans {span} atoms, budget is {max_atoms}"
        )));
    }
    let mut result: Option<LatticePmf<T>> = None;
    let mut power = base.clone();
    let mut m = n;
    loop {
        if m & 1 == 1 {
            result = Some(match result {
                None => power.clone(),
                Some(r) => r.convolve(&power, max_atoms)?,
            });
        }
        m >>= 1;
        if m == 0 {
            break;
        }
        power = power.convolve(&power, max_atoms)?;
    }
    Ok(result.expect("n >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rademacher_square() {
        let r = LatticePmf::two_point(-1.0f64, 1.0, 0.5).unwrap();
        let s = convolve_iid(&r, 2).unwrap();
        assert_eq!(s.offset, -2.0);
        assert_eq!(s.step, 2.0);
        assert_eq!(s.weights, vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn n_one_is_identity() {
        let b = LatticePmf::new(0.5f64, 0.25, vec![0.2, 0.0, 0.3, 0.5]).unwrap();
        assert_eq!(convolve_iid(&b, 1).unwrap(), b);
    }

    #[test]
    fn centered_binomial_matches_closed_form() {
        let p = 0.3f64;
        let n = 20usize;
        let b = LatticePmf::two_point(-p, 1.0 - p, p).unwrap();
        let s = convolve_iid(&b, n).unwrap();
        assert!((s.offset + n as f64 * p).abs() < 1e-13);
        for k in 0..=n {
            // Binomial coefficient built multiplicatively, independent of the convolution.
            let mut c = 1.0f64;
            for i in 0..k {
                c = c * (n - i) as f64 / (i + 1) as f64;
            }
            let want = c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
            assert!((s.weights[k] - want).abs() < 1e-15 + 1e-13 * want, "k={k}");
        }
        assert!((s.total_mass() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn cdf_and_tails_at_atoms() {
        let b = LatticePmf::two_point(-1.0f64, 1.0, 0.25).unwrap();
        assert_eq!(b.cdf_lt(-1.0), 0.0);
        assert_eq!(b.cdf_le(-1.0), 0.75);
        assert_eq!(b.tail_gt(1.0), 0.0);
        assert_eq!(b.tail_ge(1.0), 0.25);
        assert_eq!(b.tail_gt(0.0), 0.25);
        assert_eq!(b.cdf_le(5.0), 1.0);
        assert_eq!(b.cdf_lt(-5.0), 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        let b = LatticePmf::two_point(0.0f64, 1.0, 0.5).unwrap();
        assert!(matches!(
            convolve_iid_with_budget(&b, 1000, 100),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn invalid_weights_rejected() {
        assert!(LatticePmf::new(0.0f64, 1.0, vec![0.5, 0.4]).is_err());
        assert!(LatticePmf::new(0.0f64, 0.0, vec![1.0]).is_err());
        assert!(LatticePmf::new(0.0f64, 1.0, vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn trims_zero_weights() {
        let b = LatticePmf::new(0.0f64, 1.0, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(b.offset, 2.0);
        assert_eq!(b.weights, vec![1.0]);
    }
}
