//! The ellipsoid `w1 |z1|^2 + w2 |z2|^2 = 1` in `C^2` with the restriction of
//! `lambda0 = 1/2 sum (x dy - y dx)`.

use super::index::{cz_index, parity_check, SymplecticPath};
use super::orbit::{is_bad_orbit, is_nondegenerate, return_map, PeriodicOrbitRecord};
use super::SpectralError;
use crate::linalg::{matrix_to_rows, omega};
use nalgebra::{DMatrix, Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    pub weights: [f64; 2],
}

fn omega4() -> Matrix4<f64> {
    Matrix4::from_iterator(omega(4).iter().copied())
}

impl Ellipsoid {
    pub fn new(w1: f64, w2: f64) -> Result<Self, SpectralError> {
        if !(w1 > 0.0 && w2 > 0.0) {
            return Err(SpectralError::Validation(format!("weights must be positive, got ({w1}, {w2})")));
        }
        Ok(Self { weights: [w1, w2] })
    }

    fn validate(&self) -> Result<(), SpectralError> {
        Self::new(self.weights[0], self.weights[1]).map(|_| ())
    }

    fn w(&self, i: usize) -> f64 {
        self.weights[i / 2]
    }

    pub fn hamiltonian(&self, p: &Vector4<f64>) -> f64 {
        (0..4).map(|i| self.w(i) * p[i] * p[i]).sum()
    }

    pub fn gradient(&self, p: &Vector4<f64>) -> Vector4<f64> {
        Vector4::from_fn(|i, _| 2.0 * self.w(i) * p[i])
    }

    /// Coefficients of `lambda0` at `p`.
    pub fn liouville(&self, p: &Vector4<f64>) -> Vector4<f64> {
        Vector4::new(-0.5 * p[1], 0.5 * p[0], -0.5 * p[3], 0.5 * p[2])
    }

    /// `d lambda0(u, v)`.
    pub fn dlambda(u: &Vector4<f64>, v: &Vector4<f64>) -> f64 {
        (u.transpose() * omega4() * v)[0]
    }

    /// Linear vector field whose restriction is the Reeb field: `z_j -> 2 w_j i z_j`.
    pub fn generator(&self) -> Matrix4<f64> {
        let mut a = Matrix4::zeros();
        for b in 0..2 {
            a[(2 * b + 1, 2 * b)] = 2.0 * self.weights[b];
            a[(2 * b, 2 * b + 1)] = -2.0 * self.weights[b];
        }
        a
    }

    pub fn reeb(&self, p: &Vector4<f64>) -> Vector4<f64> {
        self.generator() * p
    }

    /// Orthonormal basis of the tangent space `ker dH` at `p`, as columns.
    pub fn tangent_basis(&self, p: &Vector4<f64>) -> [Vector4<f64>; 3] {
        let n = self.gradient(p).normalize();
        let skip = (0..4).max_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs())).expect("non-empty");
        let mut cols = vec![n];
        cols.extend((0..4).filter(|&i| i != skip).map(|i| Vector4::from_fn(|r, _| if r == i { 1.0 } else { 0.0 })));
        let q = Matrix4::from_columns(&cols).qr().q();
        [q.column(1).into(), q.column(2).into(), q.column(3).into()]
    }

    /// Reeb field from the kernel of `d lambda0` on the tangent space, normalized by `lambda0`.
    pub fn reeb_from_kernel(&self, p: &Vector4<f64>) -> Vector4<f64> {
        let b = self.tangent_basis(p);
        let w = |i: usize, j: usize| Self::dlambda(&b[i], &b[j]);
        // kernel of the antisymmetric 3x3 matrix with upper entries (w01, w02, w12)
        let k = b[0] * w(1, 2) - b[1] * w(0, 2) + b[2] * w(0, 1);
        k / self.liouville(p).dot(&k)
    }

    /// Orthonormal basis `(e1, e2)` of the contact plane with `d lambda0(e1, e2) > 0`.
    pub fn xi_basis(&self, p: &Vector4<f64>) -> [Vector4<f64>; 2] {
        let n = self.gradient(p).normalize();
        let l = self.liouville(p);
        let l = (l - n * n.dot(&l)).normalize();
        let b = self.tangent_basis(p);
        let mut xi: Vec<Vector4<f64>> = Vec::new();
        for v in b {
            let mut u = v - l * l.dot(&v);
            for e in &xi {
                u -= e * e.dot(&u);
            }
            if u.norm() > 1e-6 && xi.len() < 2 {
                xi.push(u.normalize());
            }
        }
        let (e1, e2) = (xi[0], xi[1]);
        if Self::dlambda(&e1, &e2) > 0.0 {
            [e1, e2]
        } else {
            [e2, e1]
        }
    }

    /// A point on the ellipsoid from a random direction.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Vector4<f64> {
        loop {
            let v = Vector4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let h = self.hamiltonian(&v);
            if h > 1e-3 {
                return v / h.sqrt();
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactResiduals {
    pub points: usize,
    /// `|lambda(R) - 1|`.
    pub max_lambda: f64,
    /// `|d lambda(R, v)|` over a tangent basis.
    pub max_dlambda: f64,
    /// `|dH(R)| / |grad H|`.
    pub max_tangency: f64,
    /// `|(L_R lambda)(v)|` over a tangent basis.
    pub max_lie: f64,
    /// Largest difference between the closed-form field and the kernel construction.
    pub max_kernel_gap: f64,
}

impl ContactResiduals {
    pub fn max(&self) -> f64 {
        [self.max_lambda, self.max_dlambda, self.max_tangency, self.max_lie, self.max_kernel_gap].into_iter().fold(0.0, f64::max)
    }
}

/// Evaluates the Reeb identities at `points` random points of the ellipsoid.
pub fn model_contact_check(model: &Ellipsoid, points: usize, seed: u64) -> Result<ContactResiduals, SpectralError> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = ContactResiduals { points, max_lambda: 0.0, max_dlambda: 0.0, max_tangency: 0.0, max_lie: 0.0, max_kernel_gap: 0.0 };
    for _ in 0..points {
        let p = model.sample_point(&mut rng);
        let reeb = model.reeb(&p);
        let grad = model.gradient(&p);
        r.max_lambda = r.max_lambda.max((model.liouville(&p).dot(&reeb) - 1.0).abs());
        r.max_tangency = r.max_tangency.max(grad.dot(&reeb).abs() / grad.norm());
        // lambda(R) extends off the ellipsoid as H, so d(lambda(R)) = dH
        for v in model.tangent_basis(&p) {
            let dl = Ellipsoid::dlambda(&reeb, &v);
            r.max_dlambda = r.max_dlambda.max(dl.abs());
            r.max_lie = r.max_lie.max((dl + grad.dot(&v)).abs());
        }
        r.max_kernel_gap = r.max_kernel_gap.max((model.reeb_from_kernel(&p) - reeb).amax());
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PhiProfile {
    /// `amplitude * tanh(rate * s)`.
    Tanh { amplitude: f64, rate: f64 },
    Constant { value: f64 },
}

impl Default for PhiProfile {
    fn default() -> Self {
        Self::Tanh { amplitude: 0.5, rate: 1.0 }
    }
}

impl PhiProfile {
    pub fn value(&self, s: f64) -> f64 {
        match *self {
            Self::Tanh { amplitude, rate } => amplitude * (rate * s).tanh(),
            Self::Constant { value } => value,
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match *self {
            Self::Tanh { amplitude, rate } => amplitude * rate / (rate * s).cosh().powi(2),
            Self::Constant { .. } => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QReport {
    pub samples: usize,
    pub min_q: f64,
    /// Samples with `Q > 0`.
    pub positive: usize,
    /// Largest gap between the direct evaluation and the split formula.
    pub max_formula_gap: f64,
}

/// Evaluates `Omega_phi(v, J~ v)` on the symplectization of the ellipsoid at random
/// `(s, q, v)`, with `J` on the contact plane rotating the `xi_basis` frame.
pub fn q_phi_check(model: &Ellipsoid, phi: &PhiProfile, samples: usize, seed: u64) -> Result<QReport, SpectralError> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = QReport { samples, min_q: f64::INFINITY, positive: 0, max_formula_gap: 0.0 };
    for _ in 0..samples {
        let s = rng.gen_range(-3.0..3.0);
        let p = model.sample_point(&mut rng);
        let (h, k, a, b): (f64, f64, f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let q = q_value(model, phi, s, &p, h, k, a, b);
        let [e1, e2] = model.xi_basis(&p);
        let (delta, jdelta) = (e1 * a + e2 * b, e2 * a - e1 * b);
        let formula = (1.0 + phi.value(s)) * Ellipsoid::dlambda(&delta, &jdelta) + phi.derivative(s) * (h * h + k * k);
        rep.max_formula_gap = rep.max_formula_gap.max((q - formula).abs());
        rep.min_q = rep.min_q.min(q);
        rep.positive += usize::from(q > 0.0);
    }
    Ok(rep)
}

/// `Omega_phi(v, J~ v)` for `v = (h, k R + a e1 + b e2)`, evaluated from the ambient
/// vectors without using the splitting.
#[allow(clippy::too_many_arguments)]
pub(crate) fn q_value(model: &Ellipsoid, phi: &PhiProfile, s: f64, p: &Vector4<f64>, h: f64, k: f64, a: f64, b: f64) -> f64 {
    let reeb = model.reeb(p);
    let [e1, e2] = model.xi_basis(p);
    let x = reeb * k + e1 * a + e2 * b;
    // J~ (h, k R + D) = (-k, h R + J D)
    let lam = model.liouville(p);
    let k_of_x = lam.dot(&x);
    let delta = x - reeb * k_of_x;
    let jdelta = e2 * e1.dot(&delta) - e1 * e2.dot(&delta);
    let (h2, x2) = (-k_of_x, reeb * h + jdelta);
    (1.0 + phi.value(s)) * Ellipsoid::dlambda(&x, &x2) + phi.derivative(s) * (h * lam.dot(&x2) - h2 * k_of_x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitCheckSpec {
    pub weights: [f64; 2],
    #[serde(default = "default_covers")]
    pub max_cover: u32,
}

fn default_covers() -> u32 {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub covering: u32,
    pub period: f64,
    pub nondegenerate: bool,
    pub cz: Option<i64>,
    pub parity: Option<u8>,
    pub bad: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpleOrbitReport {
    pub label: String,
    pub measured_period: f64,
    /// Linearized return map on the contact plane, in the `xi_basis` frame.
    pub return_map: Vec<Vec<f64>>,
    pub covers: Vec<CoverReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitCheckReport {
    pub weights: [f64; 2],
    pub orbits: Vec<SimpleOrbitReport>,
}

fn rk4_step(a: &Matrix4<f64>, x: &Vector4<f64>, h: f64) -> Vector4<f64> {
    let k1 = a * x;
    let k2 = a * (x + k1 * (0.5 * h));
    let k3 = a * (x + k2 * (0.5 * h));
    let k4 = a * (x + k3 * h);
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// First return time of the Reeb flow to the starting point on the circle `z_other = 0`,
/// from the unwrapped angle of the moving coordinate.
fn measure_period(model: &Ellipsoid, start: &Vector4<f64>, plane: usize) -> f64 {
    let a = model.generator();
    let speed = 2.0 * model.weights[plane];
    let h = TAU / speed / 4096.0;
    let angle = |x: &Vector4<f64>| x[2 * plane + 1].atan2(x[2 * plane]);
    let (mut x, mut t, mut total) = (*start, 0.0, 0.0);
    loop {
        let next = rk4_step(&a, &x, h);
        let step = (angle(&next) - angle(&x) + 3.0 * std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
        if total + step >= TAU {
            // secant on a single fractional step from the last state
            let residual = |tau: f64| {
                let y = rk4_step(&a, &x, tau);
                total + (angle(&y) - angle(&x) + 3.0 * std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI - TAU
            };
            let (mut lo, mut hi) = (0.0, h);
            let (mut flo, mut fhi) = (residual(lo), residual(hi));
            for _ in 0..60 {
                let mid = hi - fhi * (hi - lo) / (fhi - flo);
                let fm = residual(mid);
                if fm.abs() < 1e-15 {
                    return t + mid;
                }
                (lo, flo, hi, fhi) = (hi, fhi, mid, fm);
            }
            return t + hi;
        }
        total += step;
        x = next;
        t += h;
    }
}

/// Measures the two simple Reeb orbits `z2 = 0` and `z1 = 0`, their linearized return
/// maps on the contact plane, and index data of their covers.
pub fn orbit_check(spec: &OrbitCheckSpec) -> Result<OrbitCheckReport, SpectralError> {
    let model = Ellipsoid::new(spec.weights[0], spec.weights[1])?;
    let gen4 = model.generator();
    let gen = DMatrix::from_iterator(4, 4, gen4.iter().copied());
    let mut orbits = Vec::new();
    for plane in 0..2 {
        let mut start = Vector4::zeros();
        start[2 * plane] = 1.0 / model.weights[plane].sqrt();
        let period = measure_period(&model, &start, plane);
        let flow = return_map(4, &|_| gen.clone(), period, None)?;
        let xi = model.xi_basis(&start);
        let basis = DMatrix::from_fn(4, 2, |i, j| xi[j][i]);
        let restrict = |m: &DMatrix<f64>| basis.transpose() * m * &basis;
        let simple = restrict(&flow.matrix);
        let label = format!("z{}-circle", plane + 1);
        let other = model.weights[1 - plane];
        let mut covers = Vec::new();
        for k in 1..=spec.max_cover {
            let total = period * k as f64;
            let nondegenerate = is_nondegenerate(&simple, k);
            let rotation = 2.0 * other * total;
            let samples = 64 + 16 * (rotation / std::f64::consts::PI).ceil() as usize;
            let path = SymplecticPath::from_fn(2, samples, |t| restrict(&(&gen * (t * total)).exp()))?;
            let parity = parity_check(&path, 2).ok();
            let cz = if nondegenerate { cz_index(&path).ok() } else { None };
            let record = PeriodicOrbitRecord { label: label.clone(), period: total, covering: k, return_map: path.endpoint().clone() };
            covers.push(CoverReport {
                covering: k,
                period: total,
                nondegenerate,
                cz,
                parity: parity.map(|p| p.parity_bit),
                bad: is_bad_orbit(&record, &simple).ok(),
            });
        }
        orbits.push(SimpleOrbitReport { label, measured_period: period, return_map: matrix_to_rows(&simple), covers });
    }
    Ok(OrbitCheckReport { weights: spec.weights, orbits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::j0;
    use std::f64::consts::PI;

    fn check_generator_is_hamiltonian(model: &Ellipsoid) -> f64 {
        let a = DMatrix::from_iterator(4, 4, model.generator().iter().copied());
        let s = j0(4) * a;
        (&s - s.transpose()).amax()
    }

    #[test]
    fn reeb_identities_hold_on_round_and_irrational_ellipsoids() {
        for w in [[1.0, 1.0], [1.0, 2f64.sqrt()], [0.7, 3.1]] {
            let m = Ellipsoid::new(w[0], w[1]).unwrap();
            let r = model_contact_check(&m, 200, 5).unwrap();
            assert!(r.max() < 1e-12, "{w:?}: {r:?}");
        }
        assert!(Ellipsoid::new(0.0, 1.0).is_err());
        assert_eq!(check_generator_is_hamiltonian(&Ellipsoid::new(1.0, 2.0).unwrap()), 0.0);
    }

    #[test]
    fn q_positive_for_increasing_profile() {
        let m = Ellipsoid::new(1.0, 2f64.sqrt()).unwrap();
        let r = q_phi_check(&m, &PhiProfile::default(), 300, 9).unwrap();
        assert_eq!(r.positive, 300);
        assert!(r.max_formula_gap < 1e-12, "{r:?}");
    }

    #[test]
    fn q_vanishes_on_symplectization_directions_for_constant_profile() {
        let m = Ellipsoid::new(1.0, 1.5).unwrap();
        let phi = PhiProfile::Constant { value: 0.2 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let p = m.sample_point(&mut rng);
            assert!(q_value(&m, &phi, 0.3, &p, 0.7, -0.4, 0.0, 0.0).abs() < 1e-13);
            assert!(q_value(&m, &phi, 0.3, &p, 0.7, -0.4, 0.5, 0.1) > 0.0);
        }
        let r = q_phi_check(&m, &phi, 100, 2).unwrap();
        assert!(r.min_q >= 0.0);
    }

    #[test]
    fn measured_periods_match_closed_form() {
        let spec = OrbitCheckSpec { weights: [1.0, 2f64.sqrt()], max_cover: 3 };
        let rep = orbit_check(&spec).unwrap();
        for (o, w) in rep.orbits.iter().zip(spec.weights) {
            assert!((o.measured_period - PI / w).abs() < 1e-10, "{} vs {}", o.measured_period, PI / w);
        }
        // the z2 = 0 circle rotates the contact plane by 2 pi sqrt2 per period
        let first = &rep.orbits[0];
        for c in &first.covers {
            let want = 2 * (c.covering as f64 * 2f64.sqrt()).floor() as i64 + 1;
            assert_eq!(c.cz, Some(want));
            assert_eq!(c.bad, Some(false));
            assert!(c.nondegenerate);
        }
    }

    #[test]
    fn round_sphere_orbits_are_degenerate() {
        let rep = orbit_check(&OrbitCheckSpec { weights: [1.0, 1.0], max_cover: 2 }).unwrap();
        assert!(rep.orbits.iter().all(|o| o.covers.iter().all(|c| !c.nondegenerate && c.cz.is_none())));
    }
}
