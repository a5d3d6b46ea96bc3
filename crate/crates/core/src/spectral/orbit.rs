use super::{SpectralError, EIGEN_ONE_TOL, SYMPLECTIC_TOL};
use crate::linalg::{asymmetry, j0, serde_rows, symplectic_defect};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const DRIFT_TARGET: f64 = 1e-8;
const DRIFT_LIMIT: f64 = 1e-6;
const INITIAL_STEPS: usize = 64;
const MAX_STEPS: usize = 1 << 20;
/// Relative change between successive step doublings accepted as converged.
const CONVERGENCE_TOL: f64 = 1e-10;
const GENERATOR_CHECKS: usize = 16;

/// A periodic orbit: total period, covering number and linearized return map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbitRecord {
    pub label: String,
    pub period: f64,
    pub covering: u32,
    #[serde(with = "serde_rows")]
    pub return_map: DMatrix<f64>,
}

impl PeriodicOrbitRecord {
    pub fn validate(&self) -> Result<(), SpectralError> {
        if !(self.period > 0.0) || self.covering == 0 {
            return Err(SpectralError::Validation(format!("orbit `{}` needs period > 0 and covering >= 1", self.label)));
        }
        let n = self.return_map.nrows();
        if n == 0 || !n.is_multiple_of(2) || self.return_map.ncols() != n {
            return Err(SpectralError::Shape(format!("orbit `{}`: return map must be square of even size", self.label)));
        }
        let d = symplectic_defect(&self.return_map);
        if d > SYMPLECTIC_TOL * self.return_map.amax().powi(2).max(1.0) {
            return Err(SpectralError::Validation(format!("orbit `{}`: return map not symplectic (defect {d:.3e})", self.label)));
        }
        Ok(())
    }

    pub fn minimal_period(&self) -> f64 {
        self.period / self.covering as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnMap {
    #[serde(with = "serde_rows")]
    pub matrix: DMatrix<f64>,
    pub steps: usize,
    /// Largest symplectic defect met along the integration.
    pub drift: f64,
}

fn rk4(generator: &dyn Fn(f64) -> DMatrix<f64>, dim: usize, period: f64, steps: usize) -> (DMatrix<f64>, f64) {
    let h = period / steps as f64;
    let mut psi = DMatrix::<f64>::identity(dim, dim);
    let mut drift: f64 = 0.0;
    for i in 0..steps {
        let t = i as f64 * h;
        let s0 = generator(t);
        let sm = generator(t + 0.5 * h);
        let s1 = generator(t + h);
        let k1 = &s0 * &psi;
        let k2 = &sm * (&psi + &k1 * (0.5 * h));
        let k3 = &sm * (&psi + &k2 * (0.5 * h));
        let k4 = &s1 * (&psi + &k3 * h);
        psi += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        drift = drift.max(symplectic_defect(&psi));
    }
    (psi, drift)
}

/// Fundamental solution at `period` of `Psi' = S(t) Psi`, `Psi(0) = Id`, by RK4.
///
/// Without `steps`, the step count doubles until the symplectic drift is below `1e-8` and
/// the result changes by less than `1e-10` between doublings.
/// With `steps`, a drift above `1e-6` is an error.
pub fn return_map(
    dim: usize,
    generator: &dyn Fn(f64) -> DMatrix<f64>,
    period: f64,
    steps: Option<usize>,
) -> Result<ReturnMap, SpectralError> {
    if !(period > 0.0) {
        return Err(SpectralError::Validation(format!("period must be positive, got {period}")));
    }
    let j = j0(dim);
    for i in 0..=GENERATOR_CHECKS {
        let t = period * i as f64 / GENERATOR_CHECKS as f64;
        let s = generator(t);
        if s.shape() != (dim, dim) {
            return Err(SpectralError::Shape(format!("generator has shape {:?}, expected {dim}x{dim}", s.shape())));
        }
        let a = asymmetry(&(&j * &s));
        if a > SYMPLECTIC_TOL * s.amax().max(1.0) {
            return Err(SpectralError::Validation(format!("S({t}) is not infinitesimally symplectic (defect {a:.3e})")));
        }
    }
    match steps {
        Some(n) => {
            let (matrix, drift) = rk4(generator, dim, period, n.max(1));
            if drift > DRIFT_LIMIT {
                return Err(SpectralError::Integration(format!("symplectic drift {drift:.3e} with {n} steps; use more steps")));
            }
            Ok(ReturnMap { matrix, steps: n.max(1), drift })
        }
        None => {
            let mut n = INITIAL_STEPS;
            let (mut prev, _) = rk4(generator, dim, period, n);
            loop {
                n *= 2;
                let (matrix, drift) = rk4(generator, dim, period, n);
                let change = (&matrix - &prev).amax() / matrix.amax().max(1.0);
                if drift < DRIFT_TARGET && change < CONVERGENCE_TOL {
                    return Ok(ReturnMap { matrix, steps: n, drift });
                }
                if n >= MAX_STEPS {
                    return Err(SpectralError::Integration(format!("drift {drift:.3e}, step change {change:.3e} after {n} steps")));
                }
                prev = matrix;
            }
        }
    }
}

/// True when no power `A^m`, `1 <= m <= k`, has 1 as an eigenvalue.
pub fn is_nondegenerate(a: &DMatrix<f64>, k: u32) -> bool {
    let eig: Vec<Complex64> = crate::linalg::eigenvalues(a);
    (1..=k as i32).all(|m| eig.iter().all(|l| (l.powi(m) - 1.0).norm() >= EIGEN_ONE_TOL))
}

/// Bad when the covering is even and the simple return map has an odd number of real
/// eigenvalues in `(-1, 0)`.
pub fn is_bad_orbit(orbit: &PeriodicOrbitRecord, simple_return_map: &DMatrix<f64>) -> Result<bool, SpectralError> {
    let eig: Vec<Complex64> = crate::linalg::eigenvalues(simple_return_map);
    if eig.iter().any(|l| (l - 1.0).norm() < EIGEN_ONE_TOL || (l + 1.0).norm() < EIGEN_ONE_TOL) {
        return Err(SpectralError::Degenerate(format!("orbit `{}`: simple return map has eigenvalue +1 or -1", orbit.label)));
    }
    let in_band = eig.iter().filter(|l| l.im.abs() < EIGEN_ONE_TOL && l.re > -1.0 && l.re < 0.0).count();
    Ok(orbit.covering.is_multiple_of(2) && in_band % 2 == 1)
}
