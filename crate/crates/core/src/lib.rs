//! Exact symbolic engine for orbital equivalence of sub-Riemannian metric
//! pairs, nilpotent approximation and skew-pencil decomposability.

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod expr;
pub mod fiber;
pub mod frame;
pub mod fundamental;
pub mod io;
pub mod levi_civita;
pub mod linalg;
pub mod nilpotent;
pub mod pencil;
pub mod poly;
pub mod qpoly;
pub mod rational;
pub mod scalar;

pub use error::{Error, Result};
