//! Symbolic laws and their characteristic functions with derivatives.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::oracle::lattice::{convolve_iid_with_budget, LatticePmf, DEFAULT_MAX_ATOMS};
use crate::quadrature::{integrate, QuadConfig};
use crate::real::Real;
use crate::specfun::normal_pdf;

/// Symbolic description of a probability law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec<T> {
    PointMass {
        a: T,
    },
    Normal {
        mean: T,
        sd: T,
    },
    TwoPoint {
        x_minus: T,
        x_plus: T,
        p_plus: T,
    },
    LatticePmf(LatticePmf<T>),
    /// `(X_1 + ... + X_n) / (σ√n)` for iid copies of a centered base law.
    StandardizedIidSum {
        base: Box<DistributionSpec<T>>,
        n: usize,
    },
}

impl<T: Real> DistributionSpec<T> {
    pub fn standard_normal() -> Self {
        Self::Normal {
            mean: T::zero(),
            sd: T::one(),
        }
    }

    /// Centered Bernoulli law `B - p` with `B ~ Bernoulli(p)`.
    pub fn centered_bernoulli(p: T) -> Self {
        Self::TwoPoint {
            x_minus: -p,
            x_plus: T::one() - p,
            p_plus: p,
        }
    }

    pub fn rademacher() -> Self {
        Self::TwoPoint {
            x_minus: -T::one(),
            x_plus: T::one(),
            p_plus: T::lit(0.5),
        }
    }

    pub fn iid_sum(base: Self, n: usize) -> Self {
        Self::StandardizedIidSum {
            base: Box::new(base),
            n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::PointMass { a } => {
                if !a.is_finite() {
                    return Err(Error::Domain("point mass location must be finite".into()));
                }
            }
            Self::Normal { mean, sd } => {
                if !mean.is_finite() || !(*sd > T::zero()) || !sd.is_finite() {
                    return Err(Error::Domain(
                        "normal law needs finite mean and sd > 0".into(),
                    ));
                }
            }
            Self::TwoPoint {
                x_minus,
                x_plus,
                p_plus,
            } => {
                LatticePmf::two_point(*x_minus, *x_plus, *p_plus)?;
            }
            Self::LatticePmf(l) => {
                LatticePmf::new(l.offset, l.step, l.weights.clone())?;
            }
            Self::StandardizedIidSum { base, n } => {
                base.validate()?;
                if *n == 0 {
                    return Err(Error::Domain("iid sum needs n >= 1".into()));
                }
                let var = base.variance();
                if !(var > T::zero()) {
                    return Err(Error::Domain(
                        "iid sum base must have positive variance".into(),
                    ));
                }
                let mean = base.mean();
                if mean.abs() > T::lit(1e-9).max(T::epsilon() * T::lit(64.0)) * var.sqrt() {
                    return Err(Error::Domain(format!(
                        "iid sum base must have zero mean, got {mean}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> T {
        match self {
            Self::PointMass { a } => *a,
            Self::Normal { mean, .. } => *mean,
            Self::TwoPoint {
                x_minus,
                x_plus,
                p_plus,
            } => (T::one() - *p_plus) * *x_minus + *p_plus * *x_plus,
            Self::LatticePmf(l) => l.mean(),
            Self::StandardizedIidSum { .. } => T::zero(),
        }
    }

    pub fn variance(&self) -> T {
        match self {
            Self::PointMass { .. } => T::zero(),
            Self::Normal { sd, .. } => *sd * *sd,
            Self::TwoPoint {
                x_minus,
                x_plus,
                p_plus,
            } => {
                let d = *x_plus - *x_minus;
                *p_plus * (T::one() - *p_plus) * d * d
            }
            Self::LatticePmf(l) => l.variance(),
            Self::StandardizedIidSum { .. } => T::one(),
        }
    }

    /// Whether the law has mean 0 and variance 1 to within `tol`.
    pub fn is_standardized(&self, tol: T) -> bool {
        self.mean().abs() <= tol && (self.variance() - T::one()).abs() <= tol
    }

    /// The exact law as a lattice, or `None` for laws with a density.
    pub fn to_lattice(&self) -> Result<Option<LatticePmf<T>>> {
        self.to_lattice_with_budget(DEFAULT_MAX_ATOMS)
    }

    pub fn to_lattice_with_budget(&self, max_atoms: usize) -> Result<Option<LatticePmf<T>>> {
        self.validate()?;
        Ok(match self {
            Self::PointMass { a } => Some(LatticePmf::point_mass(*a)),
            Self::Normal { .. } => None,
            Self::TwoPoint {
                x_minus,
                x_plus,
                p_plus,
            } => Some(LatticePmf::two_point(*x_minus, *x_plus, *p_plus)?),
            Self::LatticePmf(l) => Some(LatticePmf::new(l.offset, l.step, l.weights.clone())?),
            Self::StandardizedIidSum { base, n } => match base.to_lattice_with_budget(max_atoms)? {
                None => None,
                Some(b) => {
                    let sum = convolve_iid_with_budget(&b, *n, max_atoms)?;
                    let scale = (base.variance() * T::count(*n)).sqrt();
                    Some(sum.affine(T::zero(), scale))
                }
            },
        })
    }
}

#[derive(Clone, Debug)]
enum Repr<T> {
    Normal {
        mean: T,
        sd: T,
    },
    Atoms(Vec<(T, T)>),
    IidSum {
        base: Box<Repr<T>>,
        n: u64,
        scale: T,
    },
}

impl<T: Real> Repr<T> {
    fn build(spec: &DistributionSpec<T>) -> Result<Self> {
        Ok(match spec {
            DistributionSpec::PointMass { a } => Repr::Atoms(vec![(*a, T::one())]),
            DistributionSpec::Normal { mean, sd } => Repr::Normal {
                mean: *mean,
                sd: *sd,
            },
            DistributionSpec::TwoPoint {
                x_minus,
                x_plus,
                p_plus,
            } => Repr::Atoms(vec![(*x_minus, T::one() - *p_plus), (*x_plus, *p_plus)]),
            DistributionSpec::LatticePmf(l) => {
                Repr::Atoms(l.atoms().filter(|(_, w)| *w > T::zero()).collect())
            }
            DistributionSpec::StandardizedIidSum { base, n } => Repr::IidSum {
                base: Box::new(Repr::build(base)?),
                n: *n as u64,
                scale: (base.variance() * T::count(*n)).sqrt(),
            },
        })
    }

    fn jet(&self, t: T, order: usize) -> Jet<T> {
        match self {
            Repr::Normal { mean, sd } => {
                let s2 = *sd * *sd;
                let g = Complex::new(-s2 * t * t / T::lit(2.0), *mean * t).exp();
                let a = Complex::new(-s2 * t, *mean);
                let mut d = Vec::with_capacity(order + 1);
                d.push(g);
                for j in 1..=order {
                    let mut v = a * d[j - 1];
                    if j >= 2 {
                        v = v - d[j - 2] * (T::count(j - 1) * s2);
                    }
                    d.push(v);
                }
                Jet { d }
            }
            Repr::Atoms(atoms) => {
                let mut d = vec![Complex::new(T::zero(), T::zero()); order + 1];
                for &(x, w) in atoms {
                    let e = Complex::new(T::zero(), t * x).exp() * w;
                    let ix = Complex::new(T::zero(), x);
                    let mut p = e;
                    for dj in d.iter_mut() {
                        *dj = *dj + p;
                        p = p * ix;
                    }
                }
                Jet { d }
            }
            Repr::IidSum { base, n, scale } => base
                .jet(t / *scale, order)
                .powu(*n)
                .chain_scale(scale.recip()),
        }
    }
}

/// Evaluates a characteristic function and its derivatives up to a declared
/// order. Immutable once built.
#[derive(Clone, Debug)]
pub struct CharFnEvaluator<T> {
    spec: DistributionSpec<T>,
    max_order: usize,
    repr: Repr<T>,
    lattice: Option<LatticePmf<T>>,
}

impl<T: Real> CharFnEvaluator<T> {
    pub fn new(spec: DistributionSpec<T>, max_order: usize) -> Result<Self> {
        spec.validate()?;
        let repr = Repr::build(&spec)?;
        // Exact law where cheap, for moments.
        let lattice = spec.to_lattice_with_budget(200_000).ok().flatten();
        Ok(Self {
            spec,
            max_order,
            repr,
            lattice,
        })
    }

    pub fn spec(&self) -> &DistributionSpec<T> {
        &self.spec
    }

    pub fn max_derivative_order(&self) -> usize {
        self.max_order
    }

    fn check_order(&self, order: usize) -> Result<()> {
        if order > self.max_order {
            Err(Error::Capability {
                requested: order,
                available: self.max_order,
            })
        } else {
            Ok(())
        }
    }

    /// `[f(t), f'(t), ..., f^(order)(t)]`.
    pub fn jet(&self, t: T, order: usize) -> Result<Jet<T>> {
        self.check_order(order)?;
        if !t.is_finite() {
            return Err(Error::Domain("t must be finite".into()));
        }
        Ok(self.repr.jet(t, order))
    }

    /// `f^(order)(t)`.
    pub fn evaluate(&self, t: T, order: usize) -> Result<Complex<T>> {
        Ok(self.jet(t, order)?.d[order])
    }

    /// Value only, skipping the order check.
    pub fn value(&self, t: T) -> Complex<T> {
        self.repr.jet(t, 0).d[0]
    }

    /// `E|X|^j`.
    pub fn absolute_moment(&self, j: usize) -> Result<T> {
        self.check_order(j)?;
        if let Some(l) = &self.lattice {
            return Ok(l.abs_moment(j as i32));
        }
        match &self.spec {
            DistributionSpec::Normal { mean, sd } => Ok(normal_abs_moment(*mean, *sd, j)),
            DistributionSpec::StandardizedIidSum { .. } => {
                match self.spec.to_lattice()? {
                    Some(l) => Ok(l.abs_moment(j as i32)),
                    // Iid sums of normal laws are standard normal.
                    None => Ok(normal_abs_moment(T::zero(), T::one(), j)),
                }
            }
            _ => unreachable!("lattice-representable specs carry their lattice"),
        }
    }

    /// The exact law, when lattice-representable within the internal budget.
    pub fn lattice(&self) -> Option<&LatticePmf<T>> {
        self.lattice.as_ref()
    }
}

fn normal_abs_moment<T: Real>(mean: T, sd: T, j: usize) -> T {
    if j == 0 {
        return T::one();
    }
    let cfg = QuadConfig::new(T::zero(), T::lit(1e-13).max(T::epsilon() * T::lit(32.0)));
    let lim = T::lit(40.0);
    let r = integrate(
        |z: T| (mean + sd * z).abs().powi(j as i32) * normal_pdf(z),
        &[-lim, -mean / sd, lim],
        &cfg,
    );
    r.value
}

/// `f^(order)(t)` for the law behind `eval`.
pub fn evaluate_cf<T: Real>(eval: &CharFnEvaluator<T>, t: T, order: usize) -> Result<Complex<T>> {
    eval.evaluate(t, order)
}

/// `f(t) - exp(-t²/2)` for a standardized law.
pub fn cf_difference<T: Real>(eval: &CharFnEvaluator<T>, t: T) -> Result<Complex<T>> {
    if !eval
        .spec
        .is_standardized(T::lit(1e-9).max(T::epsilon() * T::lit(64.0)))
    {
        return Err(Error::Domain(
            "normal-gap needs a law with zero mean and unit variance".into(),
        ));
    }
    let f = eval.evaluate(t, 0)?;
    Ok(f - (-(t * t) / T::lit(2.0)).exp())
}
