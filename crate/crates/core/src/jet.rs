//! Truncated derivative vectors `[f, f', ..., f^(K)]` at a point, with the
//! Leibniz rule for products.

use num_complex::Complex;

use crate::real::{binomial, Real};

/// Derivatives `d[j] = f^(j)(t)` for `j = 0..=K` at a fixed point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<T> {
    pub d: Vec<Complex<T>>,
}

impl<T: Real> Jet<T> {
    pub fn constant(c: Complex<T>, order: usize) -> Self {
        let mut d = vec![Complex::new(T::zero(), T::zero()); order + 1];
        d[0] = c;
        Self { d }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Complex::new(T::one(), T::zero()), order)
    }

    pub fn zeros(order: usize) -> Self {
        Self::constant(Complex::new(T::zero(), T::zero()), order)
    }

    pub fn order(&self) -> usize {
        self.d.len() - 1
    }

    pub fn value(&self) -> Complex<T> {
        self.d[0]
    }

    /// Leibniz product, truncated to the smaller of the two orders.
    pub fn mul(&self, other: &Self) -> Self {
        let k = self.order().min(other.order());
        let mut d = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let mut acc = Complex::new(T::zero(), T::zero());
            for i in 0..=j {
                acc = acc + self.d[i] * other.d[j - i] * binomial::<T>(j, i);
            }
            d.push(acc);
        }
        Self { d }
    }

    pub fn powu(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.order());
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Jet of `t ↦ f(c·t)` given the jet of `f` at `c·t`.
    pub fn chain_scale(&self, c: T) -> Self {
        let mut p = T::one();
        let d = self
            .d
            .iter()
            .map(|&v| {
                let r = v * p;
                p = p * c;
                r
            })
            .collect();
        Self { d }
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self {
            d: self.d.iter().map(|&v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let k = self.order().min(other.order());
        Self {
            d: (0..=k).map(|j| self.d[j] + other.d[j]).collect(),
        }
    }

    pub fn truncate(mut self, order: usize) -> Self {
        self.d.truncate(order + 1);
        self
    }
}
