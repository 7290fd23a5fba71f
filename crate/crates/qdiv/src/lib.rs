//! Quantum f-divergences between positive operators on finite-dimensional
//! Hilbert spaces: standard, maximal, measured and α-z Rényi divergences,
//! Petz recovery maps, and numerical checks of when a channel preserves them.
//!
//! All matrices are dense `DMatrix<Complex64>`. Logarithms are natural.
//! Superoperators use column-stacking vectorization, `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.

pub mod azrenyi;
pub mod channels;
pub mod error;
pub mod fdiv;
pub mod io;
pub mod linalg;
pub mod measured;
pub mod operators;
pub mod paperlab;
pub mod reversibility;

pub use error::{Error, Result};
pub use fdiv::{DivergenceFunction, ExtendedReal};
pub use linalg::{CMatrix, C64};
pub use operators::{HermitianOperator, PsdOperator, Tolerances};
