//! Inhomogeneous dual Diophantine approximation on affine subspaces.

pub mod ball;
pub mod budget;
pub mod dual;
pub mod dynamics;
pub mod error;
pub mod exponents;
pub mod exterior;
pub mod goodfn;
pub mod grid;
pub mod measure;
pub mod par;
pub mod poly;
pub mod psi;
pub mod rng;
pub mod scalar;
pub mod sets;
pub mod shell;
pub mod shift;
pub mod subspace;

pub use ball::Ball;
pub use error::{Error, Result};
pub use exterior::{Blade, CMapImage, MultiVector, SplitSpace};
pub use grid::Grid;
pub use poly::Polynomial;
pub use psi::ApproximatingFunction;
pub use scalar::{Rational, Scalar};
pub use shift::{Callable, InhomShift};
pub use subspace::AffineSubspace;
