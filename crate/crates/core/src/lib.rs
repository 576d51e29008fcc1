//! Eigenmatrix sparse recovery.
//!
//! Recovers a finite spike signal `f(x) = Σ w_k δ(x − x_k)` from (noisy)
//! observations `u(s_j) = Σ w_k g(s_j, x_k)` taken at unstructured sample
//! locations, for an arbitrary analytic kernel `g`.
//!
//! Two pipelines are provided:
//!
//! * the original eigenmatrix method, which builds `M = Ĝ Λ Ĝ†` from a
//!   thresholded pseudo-inverse of the column-normalized collocation matrix
//!   and runs ESPRIT on the Krylov matrix `[ũ, Mũ, …, Mˡũ]`;
//! * the regularized, `M`-free variant, which solves `Ĝ v = ũ` by Tikhonov
//!   regularization (parameter chosen on the L-curve) and assembles the same
//!   Krylov matrix as `[ũ, ĜΛv, …, ĜΛˡv]`.
//!
//! The crate is `no_std` and only needs `alloc`. IO, reports and the CLI live
//! in the `eigenmatrix-experiments` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod eigenmatrix;
mod error;
pub mod kernels;
pub mod metrics;
pub mod presets;
pub mod regularization;
pub mod rng;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;
