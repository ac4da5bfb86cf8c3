//! Differential Riccati equations through nonlinear eigenvalues.
//!
//! The crate works in the field of real meromorphic functions of
//! `x1..xn, t` and its complex extension. It builds differential Hamiltonian
//! matrices, verifies nonlinear eigenpairs and conjugacy, assembles Riccati
//! solutions `X = V U^-1` from invariant-subspace bases, checks the
//! structural properties of those solutions, synthesizes contraction-based
//! controllers, and simulates closed loops.
//!
//! Symbolic algebra is exact over rationals. Numeric layers (evaluation,
//! integration, quadrature) are generic over [`Real`]; the `*64` aliases
//! below fix the scalar to `f64`.

pub mod error;
pub mod expr;
pub mod field;
pub mod lieop;
pub mod model;
pub mod contraction;
pub mod eigen;
pub mod grid;
pub mod riccati;
pub mod sim;
pub mod verdict;
pub mod cli;

pub use error::{Error, ParseError, Result};
pub use field::{CExpr, CMatrix, ResidualReport};
pub use verdict::Verdict;
pub use eigen::{EigenPair, Side};
pub use grid::{Axis, Grid};
pub use riccati::{RiccatiData, SubspaceBasis};
pub use sim::{Dynamics, Trajectory};
pub use lieop::{delta_f, delta_f_matrix, VectorField};
pub use expr::{is_zero, parse, parse_with, simplify, Expr, Func, ParseContext, Point, Var, ZeroCertificate, ZeroTestPolicy};

/// Exact constants inside expression trees.
pub type Rational = num_rational::BigRational;

/// Floating-point scalar used for evaluation and integration.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

pub type Point64 = Point<f64>;
pub type Trajectory64 = Trajectory<f64>;
