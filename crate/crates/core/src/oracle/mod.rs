//! Exact ground truth for finitely supported laws.

pub mod audit;
pub mod delta;
pub mod lattice;

pub use audit::{bracket_audit, regression_suite, AuditPoint, AuditReport, AuditTarget};
pub use delta::{
    delta_scan, esseen_constant_scan, esseen_limit, esseen_p, uniform_grid, DeltaScan,
};
pub use lattice::{convolve_iid, LatticePmf};
