//! Projected iterated Tikhonov (PIT) regularization for linear discrete
//! ill-posed problems, executed under simulated floating-point formats.
//!
//! The crate is organised bottom-up:
//!
//! - [`precision`]: floating-point formats and round-to-nearest-even emulation.
//! - [`linalg`]: dense kernels under a [`linalg::PrecisionContext`], the
//!   bidiagonal regularized solve and a one-sided Jacobi SVD.
//! - [`krylov`]: Golub–Kahan bidiagonalization with optional reorthogonalization.
//! - [`solvers`]: Landweber, iterated Tikhonov and the nonstationary PIT method.
//! - [`filters`]: theoretical and effective filter factors.
//! - [`problems`]: the 1D Gaussian-blur spectrum problem and 2D Kronecker blurs.
//! - [`experiments`]: filter-factor and subspace-size drivers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod filters;
pub mod krylov;
pub mod linalg;
pub mod precision;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
