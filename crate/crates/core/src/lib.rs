//! Locally covariant Klein-Gordon field on discretized 1+1 cylinder slabs.
//!
//! Geometry, a conservative finite-difference solver, the Weyl and Borchers-Uhlmann
//! algebras with their morphisms, relative Cauchy evolution, quasifree states and the
//! Wick-square cocycle.

pub mod algebra;
pub mod bump;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod probe;
pub mod rce;
pub mod report;
pub mod solver;
pub mod states;
pub mod tolerances;

pub use error::{Error, Result};
pub use grid::{Grid, GridField};
