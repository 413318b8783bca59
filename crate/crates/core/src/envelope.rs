//! Extremal values of `|f(t)|` and `|f(t) - e^{-t²/2}|` over laws with
//! mean 0, variance 1 and `E|X|³ = ρ`, searched over supports of at most
//! four atoms.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Search effort for the multistart optimizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvelopeBudget {
    pub starts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for EnvelopeBudget {
    fn default() -> Self {
        Self {
            starts: 48,
            iterations: 600,
            seed: 0x5eed_cafe,
        }
    }
}

/// A feasible law and the objective it attains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSolution<T> {
    pub t: T,
    pub rho: T,
    /// Objective attained by `support`; a lower bound on the supremum.
    pub value: T,
    /// Atoms `(x_j, p_j)`.
    pub support: Vec<(T, T)>,
    /// Maximizing phase in `[0, 2π)`.
    pub theta: T,
    /// `Σp - 1`, `Σpx`, `Σpx² - 1`, `Σp|x|³ - ρ`.
    pub constraint_residuals: [T; 4],
    /// No improvement found on a `±0.2` grid of step `0.02` around the atoms.
    pub locally_optimal: bool,
}

#[derive(Clone, Copy)]
enum Objective {
    Modulus,
    NormalGap,
}

impl Objective {
    fn target<T: Real>(self, t: T) -> Complex<T> {
        match self {
            Objective::Modulus => Complex::new(T::zero(), T::zero()),
            Objective::NormalGap => Complex::new((-t * t / T::lit(2.0)).exp(), T::zero()),
        }
    }
}

/// Solves the 4×4 system by Gaussian elimination with partial pivoting.
fn solve4<T: Real>(mut a: [[T; 4]; 4], mut b: [T; 4]) -> Option<[T; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| cmp_real(&a[i][col].abs(), &a[j][col].abs()))?;
        if a[piv][col].abs() < T::lit(1e-13) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let m = a[row][col] / a[col][col];
            for c in col..4 {
                a[row][c] = a[row][c] - m * a[col][c];
            }
            b[row] = b[row] - m * b[col];
        }
    }
    let mut x = [T::zero(); 4];
    for row in (0..4).rev() {
        let mut s = b[row];
        for c in row + 1..4 {
            s = s - a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

fn cmp_real<T: Real>(a: &T, b: &T) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}

/// Weights making `xs` a law in the moment class, if nonnegative.
fn weights<T: Real>(xs: &[T; 4], rho: T) -> Option<[T; 4]> {
    let mut a = [[T::zero(); 4]; 4];
    for j in 0..4 {
        a[0][j] = T::one();
        a[1][j] = xs[j];
        a[2][j] = xs[j] * xs[j];
        a[3][j] = xs[j].abs().powi(3);
    }
    let p = solve4(a, [T::one(), T::zero(), T::one(), rho])?;
    if p.iter().all(|&v| v >= T::zero()) {
        Some(p)
    } else {
        None
    }
}

fn mixture_cf<T: Real>(atoms: &[(T, T)], t: T) -> Complex<T> {
    atoms
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |acc, &(x, p)| {
            acc + Complex::new(T::zero(), t * x).exp() * p
        })
}

fn residuals<T: Real>(atoms: &[(T, T)], rho: T) -> [T; 4] {
    let mut r = [-T::one(), T::zero(), -T::one(), -rho];
    for &(x, p) in atoms {
        r[0] = r[0] + p;
        r[1] = r[1] + p * x;
        r[2] = r[2] + p * x * x;
        r[3] = r[3] + p * x.abs().powi(3);
    }
    r
}

/// The two standardized two-point laws with `E|X|³ = ρ`, as `(x_-, x_+, p_+)`.
fn two_point_laws<T: Real>(rho: T) -> Vec<[T; 3]> {
    // With s = p(1-p): (1 - 2s)/√s = ρ, so √s solves 2r² + ρr - 1 = 0.
    let r = (-rho + (rho * rho + T::lit(8.0)).sqrt()) / T::lit(4.0);
    let s = (r * r).min(T::lit(0.25));
    let d = (T::one() - T::lit(4.0) * s).max(T::zero()).sqrt();
    let mut out = Vec::new();
    for p in [(T::one() - d) / T::lit(2.0), (T::one() + d) / T::lit(2.0)] {
        if p > T::zero() && p < T::one() {
            let q = T::one() - p;
            out.push([-(p / q).sqrt(), (q / p).sqrt(), p]);
        }
    }
    out
}

struct Search<T> {
    t: T,
    rho: T,
    target: Complex<T>,
}

impl<T: Real> Search<T> {
    fn score(&self, xs: &[T; 4]) -> Option<T> {
        let p = weights(xs, self.rho)?;
        let atoms: Vec<(T, T)> = xs.iter().copied().zip(p).collect();
        Some((mixture_cf(&atoms, self.t) - self.target).norm())
    }

    /// Coordinate pattern search; infeasible moves are rejected.
    fn climb(&self, mut xs: [T; 4], mut best: T, iterations: usize, step0: T) -> ([T; 4], T) {
        let mut step = step0;
        let floor = T::lit(1e-10);
        for _ in 0..iterations {
            let mut improved = false;
            for j in 0..4 {
                for dir in [T::one(), -T::one()] {
                    let mut cand = xs;
                    cand[j] = cand[j] + dir * step;
                    if let Some(v) = self.score(&cand) {
                        if v > best {
                            best = v;
                            xs = cand;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                step = step / T::lit(2.0);
                if step < floor {
                    break;
                }
            }
        }
        (xs, best)
    }

    fn random_start(&self, rng: &mut ChaCha8Rng, span: f64) -> Option<([T; 4], T)> {
        for _ in 0..200 {
            let mut xs = [T::zero(); 4];
            for x in xs.iter_mut() {
                *x = T::lit(rng.gen_range(-span..span));
            }
            if let Some(v) = self.score(&xs) {
                return Some((xs, v));
            }
        }
        None
    }

    fn grid_improves(&self, xs: &[T; 4], best: T) -> bool {
        let offsets: Vec<T> = (-10..=10).map(|i| T::lit(0.02 * i as f64)).collect();
        let tol = T::lit(1e-12);
        for &a in &offsets {
            for &b in &offsets {
                for &c in &offsets {
                    for &d in &offsets {
                        let cand = [xs[0] + a, xs[1] + b, xs[2] + c, xs[3] + d];
                        if let Some(v) = self.score(&cand) {
                            if v > best + tol {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }
}

fn solve<T: Real>(
    t: T,
    rho: T,
    budget: EnvelopeBudget,
    objective: Objective,
) -> Result<EnvelopeSolution<T>> {
    if !(rho >= T::one()) || !rho.is_finite() {
        return Err(Error::Infeasible(format!(
            "E|X|³ = {rho} is below (EX²)^(3/2) = 1"
        )));
    }
    if !t.is_finite() {
        return Err(Error::Domain("t must be finite".into()));
    }
    let search = Search {
        t,
        rho,
        target: objective.target(t),
    };
    let mut best_atoms: Vec<(T, T)> = Vec::new();
    let mut best = -T::one();
    for [xm, xp, pp] in two_point_laws(rho) {
        let atoms = vec![(xm, T::one() - pp), (xp, pp)];
        let v = (mixture_cf(&atoms, t) - search.target).norm();
        if v > best {
            best = v;
            best_atoms = atoms;
        }
    }
    let mut best_xs: Option<[T; 4]> = None;
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let span = (2.0 * rho.as_f64()).max(3.0);
    for s in 0..budget.starts {
        // Alternate wide and narrow starts.
        let width = if s % 2 == 0 { span } else { 1.5 };
        let Some((xs, v)) = search.random_start(&mut rng, width) else {
            continue;
        };
        let (xs, v) = search.climb(xs, v, budget.iterations, T::lit(0.25));
        if v > best {
            best = v;
            best_xs = Some(xs);
        }
    }
    let mut locally_optimal = true;
    if let Some(xs) = best_xs {
        let p = weights(&xs, rho).expect("feasible by construction");
        best_atoms = xs.iter().copied().zip(p).collect();
        locally_optimal = !search.grid_improves(&xs, best);
    }
    best_atoms.retain(|&(_, p)| p > T::zero());
    best_atoms.sort_by(|a, b| cmp_real(&a.0, &b.0));
    let cf = mixture_cf(&best_atoms, t) - search.target;
    let value = cf.norm();
    let mut theta = cf.im.atan2(cf.re);
    if theta < T::zero() {
        theta = theta + T::two_pi();
    }
    Ok(EnvelopeSolution {
        t,
        rho,
        value,
        constraint_residuals: residuals(&best_atoms, rho),
        support: best_atoms,
        theta,
        locally_optimal,
    })
}

/// Certified lower bound on `S(t, ρ) = sup |E e^{itX}|` over the moment class.
pub fn cf_envelope<T: Real>(t: T, rho: T, budget: EnvelopeBudget) -> Result<EnvelopeSolution<T>> {
    solve(t, rho, budget, Objective::Modulus)
}

/// Certified lower bound on `sup |E e^{itX} - e^{-t²/2}|` over the moment class.
pub fn cf_normal_gap_envelope<T: Real>(
    t: T,
    rho: T,
    budget: EnvelopeBudget,
) -> Result<EnvelopeSolution<T>> {
    solve(t, rho, budget, Objective::NormalGap)
}
