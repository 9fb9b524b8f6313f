//! Zeta functions of a hyperelliptic curve y^2 = Q(x) at every prime below a
//! bound, computed together with accumulating remainder trees.
//!
//! The pipeline: [`curve`] parses Q, [`bezout`] supplies the cofactors the
//! reduction formulas need, [`reduction`] builds the per-step matrices,
//! [`rtree`] multiplies them out modulo all prime powers at once,
//! [`frobenius`] turns the products into Frobenius matrices, and [`zeta`]
//! recovers the L-polynomials. [`oracle`] is brute-force ground truth and
//! the small-prime fallback; [`cli`] ties it together.

#![allow(clippy::needless_range_loop)]

pub mod bezout;
pub mod cli;
pub mod curve;
pub mod error;
pub mod fp;
pub mod frobenius;
pub mod matrix;
pub mod oracle;
pub mod reduction;
pub mod rtree;
pub mod zeta;

pub use curve::{parse_curve, parse_curve_str, Curve, Poly};
pub use error::{Error, Result};
pub use matrix::{IntMatrix, ModMatrix};
pub use zeta::{LPolyRecord, Status};
