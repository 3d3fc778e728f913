//! Shared numerical tolerances.

/// Residuals of identities that hold exactly up to floating-point rounding.
pub const EXACT: f64 = 1e-10;

/// Relative cutoff used to clear rounding debris after gauge averaging.
pub const ROUNDOFF_PRUNE: f64 = 1e-13;

/// Relative tolerance of the iterative norm estimate.
pub const NORM_ESTIMATE: f64 = 1e-9;
