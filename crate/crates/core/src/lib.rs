//! Toolkit for the finite-dimensional shadows of symplectic field theory: nodal surface
//! combinatorics, gluing of necks, buildings, moduli-class bookkeeping, index theory of
//! asymptotic operators and an Euler-number averaging experiment.

pub mod average;
pub mod building;
pub mod classify;
pub mod glue;
pub mod linalg;
pub mod spectral;
pub mod surface;
