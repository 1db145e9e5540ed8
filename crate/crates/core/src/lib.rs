//! Sparse Gaussian graphical model estimation.
//!
//! Penalized-likelihood estimators of a sparse precision matrix (LASSO, SCAD
//! via local linear approximation, adaptive LASSO) built on a weighted
//! graphical lasso solver, with BIC and K-fold cross-validation for choosing
//! the tuning parameter and a simulation harness for edge-recovery studies.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod error;
pub mod estimators;
pub mod glasso;
pub mod metrics;
pub mod numerics;
pub mod penalty;
pub mod simdata;
pub mod tuning;

pub use error::{Error, Result};
pub use estimators::{FitOptions, Penalty, PenaltyKind};
pub use glasso::{GlassoOptions, GlassoSolution};
pub use numerics::{DataMatrix, SymmetricMatrix};
pub use tuning::{Criterion, GridSpec, LambdaGrid, SelectionResult};
