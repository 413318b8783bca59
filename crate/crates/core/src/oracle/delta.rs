//! `Δ(z) = |P(S > Bz) - Φ̄(z)|` for iid sums with exact lattice laws.

use serde::{Deserialize, Serialize};

use crate::charfn::DistributionSpec;
use crate::error::{Error, Result};
use crate::real::Real;
use crate::specfun::normal_tail;

/// Δ on a grid of standardized thresholds, with the normalized suprema.
///
/// `rho` is the standardized third absolute moment `E|X₁|³/σ³`, so that
/// `rho/√n` is the Lyapunov ratio of the sum. Atoms of `S/B` inside the grid
/// range appear twice: first with the left limit `P(S ≥ Bz)`, then with the
/// value `P(S > Bz)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaScan<T> {
    pub z_grid: Vec<T>,
    pub delta: Vec<T>,
    pub rho: T,
    #[serde(rename = "B")]
    pub b: T,
    pub n: usize,
    /// `sup √n·Δ/ρ`
    pub sup_uniform: T,
    /// `sup (1 + |z|³)·√n·Δ/ρ`
    pub sup_nonuniform: T,
    /// Grid point attaining `sup_nonuniform`.
    pub argsup_nonuniform: T,
}

/// `points` equispaced values on `[lo, hi]`.
pub fn uniform_grid<T: Real>(lo: T, hi: T, points: usize) -> Vec<T> {
    if points < 2 {
        return vec![lo];
    }
    let step = (hi - lo) / T::count(points - 1);
    (0..points).map(|i| lo + step * T::count(i)).collect()
}

fn standardized_third_moment<T: Real>(base: &DistributionSpec<T>) -> Result<T> {
    let var = base.variance();
    let m3 = match base {
        DistributionSpec::Normal { sd, .. } => {
            // E|Z|³ = 2√(2/π)
            T::lit(2.0) * (T::lit(2.0) / T::PI()).sqrt() * sd.powi(3)
        }
        _ => match base.to_lattice()? {
            Some(l) => l.abs_moment(3),
            None => {
                return Err(Error::Domain(
                    "base law has no finite lattice or normal form".into(),
                ))
            }
        },
    };
    Ok(m3 / var.powf(T::lit(1.5)))
}

/// Δ(z) for `S = X₁ + ... + Xₙ`, `B = σ√n`, on `z_grid` augmented with the
/// one-sided limits at every atom of `S/B` within the grid range.
pub fn delta_scan<T: Real>(
    base: &DistributionSpec<T>,
    n: usize,
    z_grid: &[T],
) -> Result<DeltaScan<T>> {
    base.validate()?;
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if z_grid.is_empty() || z_grid.iter().any(|z| !z.is_finite()) {
        return Err(Error::Domain("z grid must be nonempty and finite".into()));
    }
    if z_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("z grid must be strictly increasing".into()));
    }
    let var = base.variance();
    if !(var > T::zero()) {
        return Err(Error::Domain("base law must have positive variance".into()));
    }
    if base.mean().abs() > T::lit(1e-9) * var.sqrt() {
        return Err(Error::Domain(format!(
            "base law must be centered, mean is {}",
            base.mean()
        )));
    }
    let rho = standardized_third_moment(base)?;
    let b = (var * T::count(n)).sqrt();
    let sum = DistributionSpec::iid_sum(base.clone(), n).to_lattice()?;

    let mut zs = Vec::with_capacity(z_grid.len());
    let mut delta = Vec::with_capacity(z_grid.len());
    match sum {
        None => {
            // S/B is standard normal.
            zs.extend_from_slice(z_grid);
            delta.resize(z_grid.len(), T::zero());
        }
        Some(lat) => {
            let lo = z_grid[0];
            let hi = z_grid[z_grid.len() - 1];
            let mut atoms = lat
                .atoms()
                .map(|(a, _)| a)
                .filter(|a| *a >= lo && *a <= hi)
                .peekable();
            for &z in z_grid {
                while let Some(&a) = atoms.peek() {
                    if a > z {
                        break;
                    }
                    atoms.next();
                    let tail = normal_tail(a);
                    zs.push(a);
                    delta.push((lat.tail_ge(a) - tail).abs());
                    zs.push(a);
                    delta.push((lat.tail_gt(a) - tail).abs());
                }
                if zs.last() != Some(&z) {
                    zs.push(z);
                    delta.push((lat.tail_gt(z) - normal_tail(z)).abs());
                }
            }
        }
    }

    let scale = T::count(n).sqrt() / rho;
    let mut sup_u = T::zero();
    let mut sup_nu = T::zero();
    let mut arg = zs[0];
    for (z, d) in zs.iter().zip(&delta) {
        sup_u = sup_u.max(*d * scale);
        let v = (T::one() + z.abs().powi(3)) * *d * scale;
        if v > sup_nu {
            sup_nu = v;
            arg = *z;
        }
    }
    Ok(DeltaScan {
        z_grid: zs,
        delta,
        rho,
        b,
        n,
        sup_uniform: sup_u,
        sup_nonuniform: sup_nu,
        argsup_nonuniform: arg,
    })
}

/// `p = 2 - √10/2`, the atom probability of Esseen's two-point law.
pub fn esseen_p<T: Real>() -> T {
    T::lit(2.0) - T::lit(10.0).sqrt() / T::lit(2.0)
}

/// `(3 + √10)/(6√(2π))`, the asymptotic uniform constant of Esseen's law.
pub fn esseen_limit<T: Real>() -> T {
    (T::lit(3.0) + T::lit(10.0).sqrt()) / (T::lit(6.0) * T::two_pi().sqrt())
}

/// `sup_{0 ≤ z ≤ 3} √n·Δ(z)/ρ` for Esseen's law, one value per `n`.
///
/// Δ is piecewise monotone between atoms, so the atom limits together with
/// the grid give the supremum exactly.
pub fn esseen_constant_scan<T: Real>(n_list: &[usize]) -> Result<Vec<T>> {
    let base = DistributionSpec::centered_bernoulli(esseen_p::<T>());
    let grid = uniform_grid(T::zero(), T::lit(3.0), 301);
    n_list
        .iter()
        .map(|&n| delta_scan(&base, n, &grid).map(|s| s.sup_uniform))
        .collect()
}
