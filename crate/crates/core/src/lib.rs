//! Computational model of Cuntz-Krieger algebras: the shift space of a 0-1
//! matrix, its gauge-invariant AF core, truncated path-space
//! representations, the crossed-product structure by the compression
//! endomorphism, finite-dimensional bimodules, and experiments on uniqueness
//! of the generated C*-algebra.

pub mod af_core;
pub mod crossed_product;
pub mod fd_bimodule;
pub mod linalg;
pub mod matrix_subshift;
pub mod path_rep;
pub mod sparse;
pub mod tolerance;
pub mod uniqueness_lab;
