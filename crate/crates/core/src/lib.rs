//! Numerical optimal transport, convex regularization and definable-closure
//! computations on finite-dimensional tracial *-algebras.
//!
//! An algebra here is a weighted direct sum of complex matrix blocks
//! `M_{n_1} ⊕ ... ⊕ M_{n_J}` with trace `τ = Σ_j β_j tr_{n_j}`. Tuples of
//! elements form a real Hilbert space under `Re τ(x* y)`, and all of the
//! convex analysis in [`convex`] and [`duality`] runs on that space.

pub mod algebra;
pub mod closure;
pub mod convex;
pub mod duality;
pub mod error;
pub mod linalg;
pub mod report;
pub mod suite;
pub mod transport;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
pub type Mat = nalgebra::DMatrix<C64>;
pub type Rational = num_rational::Ratio<i64>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
