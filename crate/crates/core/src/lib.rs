//! Rigorous bounds on distribution functions and polynomially weighted tail
//! probabilities computed from characteristic functions.
//!
//! The numerical core is generic over the scalar type (`f32` or `f64`, see
//! [`Real`]); the aliases at the crate root fix it to `f64`.

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Series coefficients are kept at the printed precision of their sources.
#![allow(clippy::excessive_precision)]

pub mod charfn;
pub mod envelope;
pub mod error;
pub mod filters;
pub mod inversion;
pub mod jet;
pub mod nagaev;
pub mod nonuniform;
pub mod oracle;
pub mod quadrature;
pub mod real;
pub mod specfun;

pub use error::{Error, Result};
pub use real::Real;
pub use specfun::CubicSide;

pub type NormalMoments = specfun::NormalMoments<f64>;
pub type DistributionSpec = charfn::DistributionSpec<f64>;
pub type CharFnEvaluator = charfn::CharFnEvaluator<f64>;
pub type LatticePmf = oracle::LatticePmf<f64>;
pub type SmoothingFilter = filters::SmoothingFilter<f64>;
pub type PVQuadratureConfig = inversion::PVQuadratureConfig<f64>;
pub type CdfBracket = inversion::CdfBracket<f64>;
pub type TailBoundResult = nonuniform::TailBoundResult<f64>;
pub type EnvelopeSolution = envelope::EnvelopeSolution<f64>;
pub type NagaevParams = nagaev::NagaevParams<f64>;
pub type LdBound = nagaev::LdBound<f64>;
pub type DeltaScan = oracle::DeltaScan<f64>;
pub type AuditReport = oracle::AuditReport<f64>;
