//! Conley-Zehnder and Maslov indices of sampled symplectic paths.
//!
//! The Conley-Zehnder index uses the rotation function
//! `rho(A) = (-1)^{m0/2} prod_c e^{i s_c theta_c}`, where `m0` counts negative real
//! eigenvalues and `c` runs over clusters of eigenvalues in the open upper half plane
//! with common argument `theta_c` and Krein signature `s_c`. Off-circle quadruples have
//! signature zero, so `rho` is continuous along any path; the index is the total change
//! of `arg rho` plus an endpoint correction, divided by `pi`.

use super::{SpectralError, EIGEN_ONE_TOL, SYMPLECTIC_TOL};
use crate::linalg::{direct_sum, j0, symplectic_defect, symplectic_inverse, to_complex};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

const REAL_TOL: f64 = 1e-7;
const CLUSTER_ANGLE_TOL: f64 = 1e-6;
const ELLIPTIC_TOL: f64 = 1e-6;
const CONTOUR_POINTS: usize = 32;
const MAX_ARG_STEP: f64 = PI / 2.0;
const KREIN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PathRepr", into = "PathRepr")]
pub struct SymplecticPath {
    dim: usize,
    times: Vec<f64>,
    matrices: Vec<DMatrix<f64>>,
    nondegenerate_endpoint: bool,
}

/// Wire format: sample times and row-major matrices.
#[derive(Serialize, Deserialize)]
struct PathRepr {
    dim: usize,
    times: Vec<f64>,
    matrices: Vec<Vec<f64>>,
    #[serde(default, skip_deserializing)]
    nondegenerate_endpoint: bool,
}

impl TryFrom<PathRepr> for SymplecticPath {
    type Error = SpectralError;

    fn try_from(r: PathRepr) -> Result<Self, SpectralError> {
        let d = r.dim;
        let mats = r
            .matrices
            .iter()
            .enumerate()
            .map(|(j, m)| {
                if m.len() != d * d {
                    return Err(SpectralError::Shape(format!("matrices[{j}] has {} entries, expected {}", m.len(), d * d)));
                }
                Ok(DMatrix::from_row_slice(d, d, m))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(r.times, mats)
    }
}

impl From<SymplecticPath> for PathRepr {
    fn from(p: SymplecticPath) -> Self {
        let matrices = p.matrices.iter().map(|m| m.transpose().iter().copied().collect()).collect();
        Self { dim: p.dim, times: p.times, matrices, nondegenerate_endpoint: p.nondegenerate_endpoint }
    }
}

fn relative_defect(m: &DMatrix<f64>) -> f64 {
    symplectic_defect(m) / m.amax().powi(2).max(1.0)
}

fn has_eigenvalue_one(a: &DMatrix<f64>) -> bool {
    crate::linalg::eigenvalues(a).iter().any(|l| (l - Complex64::new(1.0, 0.0)).norm() < EIGEN_ONE_TOL)
}

impl SymplecticPath {
    /// Samples must start at `t = 0` with the exact identity and end at `t = 1`.
    pub fn new(times: Vec<f64>, matrices: Vec<DMatrix<f64>>) -> Result<Self, SpectralError> {
        if times.len() != matrices.len() || times.len() < 2 {
            return Err(SpectralError::Shape(format!("{} times for {} matrices (need at least 2)", times.len(), matrices.len())));
        }
        if times[0] != 0.0 || *times.last().expect("non-empty") != 1.0 || times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(SpectralError::Validation("times must increase strictly from 0 to 1".into()));
        }
        let dim = matrices[0].nrows();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(SpectralError::Shape(format!("dimension must be even and positive, got {dim}")));
        }
        if matrices[0] != DMatrix::identity(dim, dim) {
            return Err(SpectralError::Validation("the path must start at the identity exactly".into()));
        }
        for (j, m) in matrices.iter().enumerate() {
            if m.shape() != (dim, dim) {
                return Err(SpectralError::Shape(format!("matrices[{j}] is {:?}, expected {dim}x{dim}", m.shape())));
            }
            let d = relative_defect(m);
            if !(d <= SYMPLECTIC_TOL) {
                return Err(SpectralError::Validation(format!("sample {j} (t = {}) is not symplectic (defect {d:.3e})", times[j])));
            }
        }
        let nondegenerate_endpoint = !has_eigenvalue_one(matrices.last().expect("non-empty"));
        Ok(Self { dim, times, matrices, nondegenerate_endpoint })
    }

    /// `samples + 1` equally spaced samples of `f` on `[0, 1]`. A value at 0 within
    /// `1e-12` of the identity is replaced by the identity.
    pub fn from_fn(dim: usize, samples: usize, f: impl Fn(f64) -> DMatrix<f64>) -> Result<Self, SpectralError> {
        let samples = samples.max(1);
        let times: Vec<f64> = (0..=samples).map(|j| j as f64 / samples as f64).collect();
        let mut matrices: Vec<DMatrix<f64>> = times.iter().map(|&t| f(t)).collect();
        let id = DMatrix::identity(dim, dim);
        if matrices[0].shape() == (dim, dim) && (&matrices[0] - &id).amax() <= 1e-12 {
            matrices[0] = id;
        }
        Self::new(times, matrices)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn endpoint(&self) -> &DMatrix<f64> {
        self.matrices.last().expect("non-empty")
    }

    pub fn nondegenerate_endpoint(&self) -> bool {
        self.nondegenerate_endpoint
    }

    pub fn is_closed(&self) -> bool {
        (self.endpoint() - DMatrix::identity(self.dim, self.dim)).amax() <= SYMPLECTIC_TOL
    }

    /// Pointwise inverse.
    pub fn inverse(&self) -> Self {
        let m = self.matrices.iter().map(symplectic_inverse).collect();
        Self::new(self.times.clone(), m).expect("inverse of a valid path is valid")
    }

    fn check_compatible(&self, o: &Self) -> Result<(), SpectralError> {
        if self.times != o.times {
            return Err(SpectralError::Shape("paths are sampled at different times".into()));
        }
        Ok(())
    }

    /// Pointwise block sum.
    pub fn direct_sum(&self, o: &Self) -> Result<Self, SpectralError> {
        self.check_compatible(o)?;
        Self::new(self.times.clone(), self.matrices.iter().zip(&o.matrices).map(|(a, b)| direct_sum(a, b)).collect())
    }

    /// Pointwise product `self(t) o(t)`.
    pub fn product(&self, o: &Self) -> Result<Self, SpectralError> {
        self.check_compatible(o)?;
        if self.dim != o.dim {
            return Err(SpectralError::Shape(format!("dimensions {} and {} differ", self.dim, o.dim)));
        }
        Self::new(self.times.clone(), self.matrices.iter().zip(&o.matrices).map(|(a, b)| a * b).collect())
    }
}

/// Value of the rotation function at one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationData {
    /// `arg rho` in `(-pi, pi]`.
    pub arg: f64,
    /// Upper-half-plane clusters as `(angle, Krein signature)`.
    pub clusters: Vec<(f64, i32)>,
    /// Number of negative real eigenvalues.
    pub negative_real: usize,
}

pub fn rotation_function(a: &DMatrix<f64>) -> Result<RotationData, SpectralError> {
    let eig: Vec<Complex64> = crate::linalg::eigenvalues(a);
    let is_real = |l: &Complex64| l.im.abs() <= REAL_TOL * l.norm().max(1.0);
    let negative_real = eig.iter().filter(|l| is_real(l) && l.re < 0.0).count();
    if negative_real % 2 != 0 {
        return Err(SpectralError::Validation(format!("odd number ({negative_real}) of negative real eigenvalues; matrix not symplectic?")));
    }
    // Quadruples off the unit circle contribute a positive factor and are skipped.
    let elliptic = |l: &Complex64| l.norm().ln().abs() <= ELLIPTIC_TOL;
    let mut upper: Vec<Complex64> = eig.iter().copied().filter(|l| !is_real(l) && l.im > 0.0 && elliptic(l)).collect();
    upper.sort_by(|x, y| x.arg().total_cmp(&y.arg()));
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for l in upper {
        match groups.last_mut() {
            Some(g) if (l.arg() - g.last().expect("non-empty").arg()).abs() < CLUSTER_ANGLE_TOL => g.push(l),
            _ => groups.push(vec![l]),
        }
    }
    let mut clusters = Vec::with_capacity(groups.len());
    let mut phase = if (negative_real / 2) % 2 == 1 { PI } else { 0.0 };
    for g in &groups {
        let theta = g.iter().map(|l| l.arg()).sum::<f64>() / g.len() as f64;
        let s = krein_signature(a, g, &eig);
        phase += s as f64 * theta;
        clusters.push((theta, s));
    }
    let rho = Complex64::from_polar(1.0, phase);
    Ok(RotationData { arg: rho.arg(), clusters, negative_real })
}

/// Signature of `-i J0` on the generalized eigenspace of a cluster of eigenvalues.
fn krein_signature(a: &DMatrix<f64>, cluster: &[Complex64], all: &[Complex64]) -> i32 {
    let n = a.nrows();
    let ac = a.map(|x| Complex64::new(x, 0.0));
    let g = j0(n).map(|x| Complex64::new(0.0, -x));
    let basis = if cluster.len() == 1 {
        let shifted = &ac - DMatrix::<Complex64>::identity(n, n) * cluster[0];
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let k = svd.singular_values.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).map(|(i, _)| i).expect("non-empty");
        DMatrix::from_fn(n, 1, |i, _| vt[(k, i)].conj())
    } else {
        let center = cluster.iter().sum::<Complex64>() / cluster.len() as f64;
        let inner = cluster.iter().map(|l| (l - center).norm()).fold(0.0, f64::max);
        let mut remaining = all.to_vec();
        for l in cluster {
            if let Some(i) = remaining.iter().position(|m| m == l) {
                remaining.swap_remove(i);
            }
        }
        let outer = remaining.iter().map(|m| (m - center).norm()).fold(f64::INFINITY, f64::min);
        let radius = if outer.is_finite() { 0.5 * (inner + outer) } else { 2.0 * inner + 1.0 };
        let mut proj = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..CONTOUR_POINTS {
            let w = Complex64::from_polar(radius, TAU * k as f64 / CONTOUR_POINTS as f64);
            let resolvent = (DMatrix::<Complex64>::identity(n, n) * (center + w) - &ac).try_inverse().expect("contour avoids the spectrum");
            proj += resolvent * w;
        }
        proj /= Complex64::new(CONTOUR_POINTS as f64, 0.0);
        let svd = proj.svd(true, false);
        let u = svd.u.expect("requested");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
        DMatrix::from_fn(n, cluster.len(), |i, j| u[(i, order[j])])
    };
    let form = basis.adjoint() * g * &basis;
    let herm = (&form + form.adjoint()) * Complex64::new(0.5, 0.0);
    let scale = herm.iter().map(|z| z.norm()).fold(0.0, f64::max).max(KREIN_TOL);
    let values: DVector<f64> = herm.symmetric_eigen().eigenvalues;
    values.iter().map(|v| if *v > KREIN_TOL * scale { 1 } else if *v < -KREIN_TOL * scale { -1 } else { 0 }).sum()
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Total continuous change of a sampled angle, refusing steps above `pi/2`.
fn unwrap_total(path: &SymplecticPath, args: &[f64]) -> Result<f64, SpectralError> {
    let mut total = 0.0;
    for j in 1..args.len() {
        let step = wrap(args[j] - args[j - 1]);
        if step.abs() > MAX_ARG_STEP {
            return Err(SpectralError::Sampling(format!("angle jumps by {step:.3} between t = {} and t = {}", path.times[j - 1], path.times[j])));
        }
        total += step;
    }
    Ok(total)
}

fn round_checked(x: f64, what: &str) -> Result<i64, SpectralError> {
    let r = x.round();
    if (x - r).abs() > 1e-3 {
        return Err(SpectralError::Sampling(format!("{what} evaluates to the non-integer {x}")));
    }
    Ok(r as i64)
}

pub fn cz_index(path: &SymplecticPath) -> Result<i64, SpectralError> {
    if !path.nondegenerate_endpoint {
        return Err(SpectralError::Degenerate("the endpoint has 1 as an eigenvalue".into()));
    }
    let data = path.matrices.iter().map(rotation_function).collect::<Result<Vec<_>, _>>()?;
    let args: Vec<f64> = data.iter().map(|d| d.arg).collect();
    let total = unwrap_total(path, &args)?;
    let end = data.last().expect("non-empty");
    let correction: f64 = end.clusters.iter().map(|(theta, s)| *s as f64 * (PI - theta)).sum();
    round_checked((total + correction) / PI, "Conley-Zehnder index")
}

/// Winding number of the complex determinant of the unitary polar factor along a loop.
pub fn maslov_index(path: &SymplecticPath) -> Result<i64, SpectralError> {
    if !path.is_closed() {
        return Err(SpectralError::Validation("Maslov index needs a loop ending at the identity".into()));
    }
    let args = path
        .matrices
        .iter()
        .map(|m| {
            let svd = m.clone().svd(true, true);
            let u = svd.u.expect("requested") * svd.v_t.expect("requested");
            to_complex(&u).determinant().arg()
        })
        .collect::<Vec<_>>();
    round_checked(unwrap_total(path, &args)? / TAU, "Maslov index")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityReport {
    pub cz: i64,
    pub parity_bit: u8,
    pub sign_det: i8,
    pub consistent: bool,
}

/// Checks `(-1)^{cz + n + 1} = sign det(Id - A)` for a path in `Sp(2(n - 1))`.
pub fn parity_check(path: &SymplecticPath, n: usize) -> Result<ParityReport, SpectralError> {
    if path.dim + 2 != 2 * n {
        return Err(SpectralError::Shape(format!("a path of dimension {} belongs to n = {}, not {n}", path.dim, path.dim / 2 + 1)));
    }
    let cz = cz_index(path)?;
    let a = path.endpoint();
    let det = (DMatrix::identity(path.dim, path.dim) - a).determinant();
    let sign_det: i8 = if det > 0.0 { 1 } else { -1 };
    let expected: i8 = if (cz + n as i64 + 1).rem_euclid(2) == 0 { 1 } else { -1 };
    Ok(ParityReport { cz, parity_bit: (cz + n as i64 - 3).rem_euclid(2) as u8, sign_det, consistent: expected == sign_det })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rotation;

    fn rot_path(dim: usize, total_angle: f64, samples: usize) -> SymplecticPath {
        SymplecticPath::from_fn(dim, samples, |t| rotation(dim, total_angle * t)).unwrap()
    }

    /// `(q, p) -> (M q, M^{-T} p)` with `M = r R(theta)`: a quadruple off the unit circle.
    fn loxodromic(r: f64, theta: f64) -> DMatrix<f64> {
        let m = crate::linalg::rotation2(theta) * r;
        let mt = m.clone().try_inverse().unwrap().transpose();
        let mut a = DMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                a[(2 * i, 2 * j)] = m[(i, j)];
                a[(2 * i + 1, 2 * j + 1)] = mt[(i, j)];
            }
        }
        a
    }

    #[test]
    fn off_circle_quadruples_do_not_capture_nearby_elliptic_eigenvalues() {
        let quad = loxodromic(2.0, 0.7);
        assert!(symplectic_defect(&quad) < 1e-12);
        assert_eq!(rotation_function(&quad).unwrap().arg, 0.0);
        for theta in [0.7, 0.7 + 1e-9, 0.69] {
            let e = rotation_function(&rotation(2, theta)).unwrap().arg;
            let sum = rotation_function(&direct_sum(&quad, &rotation(2, theta))).unwrap();
            assert!((sum.arg - e).abs() < 1e-9, "{theta}: {} vs {e}", sum.arg);
        }
    }

    #[test]
    fn normalization_and_inverse() {
        assert_eq!(cz_index(&rot_path(2, PI, 32)).unwrap(), 1);
        assert_eq!(cz_index(&rot_path(2, -PI, 32)).unwrap(), -1);
        assert_eq!(cz_index(&rot_path(2, PI, 32).inverse()).unwrap(), -1);
        assert_eq!(cz_index(&rot_path(4, PI, 32)).unwrap(), 2);
    }

    #[test]
    fn rotation_family() {
        for theta in [0.1, 0.25, 0.5, 0.75, 0.99, 1.01, 1.5, 2.3, 3.7, -0.4, -1.5, -2.2] {
            let p = rot_path(2, TAU * theta, 256);
            let want = 2 * theta.floor() as i64 + 1;
            assert_eq!(cz_index(&p).unwrap(), want, "theta = {theta}");
        }
    }

    #[test]
    fn hyperbolic_straight_path_has_index_zero() {
        let p = SymplecticPath::from_fn(2, 16, |t| DMatrix::from_diagonal(&DVector::from_vec(vec![2f64.powf(t), 2f64.powf(-t)]))).unwrap();
        assert_eq!(cz_index(&p).unwrap(), 0);
        let r = parity_check(&p, 2).unwrap();
        assert!(r.consistent && r.sign_det == -1);
    }

    #[test]
    fn degenerate_and_invalid_paths() {
        assert!(matches!(cz_index(&rot_path(2, TAU, 32)), Err(SpectralError::Degenerate(_))));
        let bad = SymplecticPath::new(vec![0.0, 1.0], vec![DMatrix::identity(2, 2), DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0])]);
        assert!(matches!(bad, Err(SpectralError::Validation(_))));
        let shifted = SymplecticPath::new(vec![0.0, 1.0], vec![rotation(2, 1e-6), rotation(2, 0.1)]);
        assert!(shifted.is_err());
        assert!(matches!(cz_index(&rot_path(2, 3.0 * PI, 1)), Err(SpectralError::Sampling(_))));
    }

    #[test]
    fn maslov_examples() {
        let one = SymplecticPath::from_fn(4, 64, |t| direct_sum(&rotation(2, TAU * t), &DMatrix::identity(2, 2))).unwrap();
        assert_eq!(maslov_index(&one).unwrap(), 1);
        let two = SymplecticPath::from_fn(4, 64, |t| direct_sum(&rotation(2, 2.0 * TAU * t), &DMatrix::identity(2, 2))).unwrap();
        assert_eq!(maslov_index(&two).unwrap(), 2);
        let constant = SymplecticPath::from_fn(2, 8, |_| DMatrix::identity(2, 2)).unwrap();
        assert_eq!(maslov_index(&constant).unwrap(), 0);
        assert!(maslov_index(&rot_path(2, PI, 16)).is_err());
    }

    #[test]
    fn parity_examples() {
        let r = parity_check(&rot_path(2, PI, 32), 2).unwrap();
        assert_eq!((r.cz, r.parity_bit, r.sign_det, r.consistent), (1, 0, 1, true));
        let r = parity_check(&rot_path(2, 3.0 * PI, 64), 2).unwrap();
        assert_eq!((r.cz, r.sign_det, r.consistent), (3, 1, true));
        assert!(parity_check(&rot_path(2, PI, 32), 3).is_err());
    }

    #[test]
    fn json_is_row_major() {
        let p = rot_path(2, PI, 2);
        let v: serde_json::Value = serde_json::to_value(&p).unwrap();
        let mid = v["matrices"][1].as_array().unwrap();
        assert!((mid[1].as_f64().unwrap() + 1.0).abs() < 1e-15, "row-major (0,1) entry is -sin");
        assert_eq!(v["nondegenerate_endpoint"], true);
        let back: SymplecticPath = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn krein_signature_of_rotations() {
        let d = rotation_function(&rotation(2, 0.3)).unwrap();
        assert_eq!(d.clusters.len(), 1);
        assert_eq!(d.clusters[0].1, 1);
        let d = rotation_function(&rotation(2, -0.3)).unwrap();
        assert_eq!(d.clusters[0].1, -1);
        let d = rotation_function(&rotation(4, 0.3)).unwrap();
        assert_eq!(d.clusters, vec![(d.clusters[0].0, 2)]);
        let d = rotation_function(&direct_sum(&rotation(2, 0.3), &rotation(2, -0.3))).unwrap();
        assert_eq!(d.clusters[0].1, 0);
    }
}
