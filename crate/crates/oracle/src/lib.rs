//! Independent numerical references for gemcsm and the checks built on them.
//!
//! The quadrature, grid and determinant code here never calls the solver's own integral or
//! eigenvalue routines.

pub mod checks;
pub mod dense;
pub mod elements;
pub mod grid;
pub mod quad;

pub type C = num_complex::Complex64;
