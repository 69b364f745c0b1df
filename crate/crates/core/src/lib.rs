//! Exact-arithmetic toolkit for Kakeya and almost-Kakeya sets in F_q^n.
//!
//! The crate provides finite-field arithmetic ([`gf`]), sparse multivariate
//! polynomials with Hasse calculus ([`poly`]), the affine geometry of lines
//! and directions ([`geometry`]), Kakeya set constructions, checkers and size
//! bounds ([`kakeya`]), and machine verification of the vanishing-condition
//! linear algebra behind the bounds ([`proofcheck`]).

pub mod error;
pub mod geometry;
pub mod gf;
pub mod kakeya;
pub mod poly;
pub mod proofcheck;
pub mod rational;

pub use error::{Error, Result};
