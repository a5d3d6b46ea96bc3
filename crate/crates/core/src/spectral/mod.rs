//! Asymptotic operators on loops, their spectra, and index theory of symplectic paths.

mod index;
mod model;
mod operator;
mod oracle;
mod orbit;

pub use index::{cz_index, maslov_index, parity_check, rotation_function, ParityReport, RotationData, SymplecticPath};
pub use model::{
    model_contact_check, orbit_check, q_phi_check, ContactResiduals, CoverReport, Ellipsoid, OrbitCheckReport, OrbitCheckSpec, PhiProfile, QReport,
    SimpleOrbitReport,
};
pub use operator::{
    conjugate, conjugation_invariance_check, spectral_gap, spectrum, weight_of_gap, weight_selector, weight_sequence, AsymptoticOperator,
    CoefficientLoop, ConjugationReport, LoopSpec, OperatorSpec, SpectralGap, UnitaryFactor, UnitaryLoop, DEFAULT_MODES, EMPTY_WEIGHT,
};
pub use oracle::{align_around_zero, fd_spectrum, richardson_smallest, smallest_magnitude, FD_COARSE, FD_FINE};
pub use orbit::{is_bad_orbit, is_nondegenerate, return_map, PeriodicOrbitRecord, ReturnMap};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("path sampled too coarsely: {0}")]
    Sampling(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Symplecticity tolerance on input samples.
pub const SYMPLECTIC_TOL: f64 = 1e-9;
/// Distance below which an eigenvalue counts as 1 (or -1).
pub const EIGEN_ONE_TOL: f64 = 1e-9;
