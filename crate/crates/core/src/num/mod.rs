//! Scalar-generic numerical kernel: quadrature, root finding, tridiagonal
//! solves, interpolation.

pub mod interp;
pub mod quad;
pub mod rootfind;
pub mod tridiag;
