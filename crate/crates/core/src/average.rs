//! Euler numbers of oriented rank-2 bundles over surfaces, recovered by averaging signed
//! zero counts of perturbed sections over a cube of parameters weighted by a product bump.
//!
//! The sphere is covered by two oriented stereographic charts; the torus by its flat chart.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, TAU};
use std::fmt;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

/// Zeros with `|det|` of the chart Jacobian below this are near-degenerate.
pub const DEGENERATE_DET: f64 = 1e-6;
/// Largest fraction of degenerate samples `averaged_euler` tolerates.
pub const MAX_DEGENERATE_RATE: f64 = 0.05;
pub const MIN_SAMPLES: usize = 100;
/// Rank threshold of the submersion check.
pub const RANK_TOL: f64 = 1e-6;

const QUADRATURE_PANELS: usize = 4000;
const NEWTON_TOL: f64 = 1e-12;
const NEWTON_ITERS: usize = 80;
const STALL_RESIDUAL: f64 = 1e-6;
const FD_STEP: f64 = 1e-6;
const SAME_ZERO: f64 = 1e-7;
const SPHERE_GRID: usize = 41;
const SPHERE_CHART_RADIUS: f64 = 1.3;
const TORUS_GRID: usize = 48;
const FLAT_GRID: usize = 41;
const BUMP_WIDTH: f64 = 0.7;
const PERTURBATION_SEED: u64 = 0x5EED_CAFE;
const DEFAULT_AMPLITUDE: f64 = 0.35;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AverageError {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("near-degenerate zero at {point:?} (|det| = {det:.3e})")]
    Degenerate { point: Vec<f64>, det: f64 },
    #[error("{degenerate} of {samples} samples have near-degenerate zeros, above the 5% limit")]
    TooDegenerate { degenerate: usize, samples: usize },
}

/// The normalized bump `c exp(-1/(1 - s^2))` on `(-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpWeight {
    normalization: f64,
}

impl Default for BumpWeight {
    fn default() -> Self {
        Self::new()
    }
}

impl BumpWeight {
    pub fn new() -> Self {
        static NORMALIZATION: OnceLock<f64> = OnceLock::new();
        let normalization = *NORMALIZATION.get_or_init(|| {
            // The integrand is flat to all orders at both ends, so the trapezoid rule
            // converges faster than any power of the panel width.
            let h = 2.0 / QUADRATURE_PANELS as f64;
            let total = neumaier_sum((1..QUADRATURE_PANELS).map(|i| Self::shape(-1.0 + i as f64 * h) * h));
            1.0 / total
        });
        Self { normalization }
    }

    fn shape(s: f64) -> f64 {
        if s.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - s * s)).exp()
        }
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.normalization * Self::shape(s)
    }

    /// Rejection sampling against the uniform density on `(-1, 1)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let s: f64 = rng.gen_range(-1.0..1.0);
            if rng.gen::<f64>() < Self::shape(s) * E {
                return s;
            }
        }
    }
}

/// Product of `n` bump weights on the parameter cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauForm {
    pub n: usize,
    bump: BumpWeight,
}

impl TauForm {
    pub fn new(n: usize) -> Self {
        Self { n, bump: BumpWeight::new() }
    }

    pub fn density(&self, s: &[f64]) -> f64 {
        s.iter().map(|x| self.bump.eval(*x)).product()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.n).map(|_| self.bump.sample(rng)).collect()
    }
}

/// Compensated summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Base {
    Sphere,
    Torus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bundle {
    Tangent,
    Trivial,
}

/// The unperturbed section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BaseSection {
    /// `e_z x p` on the tangent bundle of the sphere; zeros at the poles.
    Rotation,
    /// `(x, y)` in the trivial bundle over the sphere.
    Height,
    /// `(sin a, sin b)` on the torus.
    Waves,
    Constant { value: [f64; 2] },
}

/// A bump-shaped section `amplitude * bump(center) * direction`.
///
/// On the sphere `center` is a point of the sphere and `direction` an ambient vector
/// (projected to the tangent plane) or a fiber vector; on the torus both are pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub center: Vec<f64>,
    pub direction: Vec<f64>,
    pub amplitude: f64,
}

/// A rank-2 bundle over a surface with a section and a linear family of perturbations
/// `f + sum_j s_j sigma_j` over the parameter cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleModel {
    pub base: Base,
    pub bundle: Bundle,
    pub section: BaseSection,
    #[serde(default)]
    pub perturbations: Vec<Perturbation>,
    #[serde(default)]
    pub reverse_fiber: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    /// Stereographic from the south pole; owns `z >= 0`.
    North,
    /// Stereographic from the north pole, reflected to keep orientation; owns `z < 0`.
    South,
    Flat,
}

impl BundleModel {
    /// Tangent bundle of the sphere with the rotation field.
    pub fn ts2(n: usize) -> Self {
        Self::new(Base::Sphere, Bundle::Tangent, BaseSection::Rotation).with_generic_perturbations(n, DEFAULT_AMPLITUDE)
    }

    /// Trivial bundle over the sphere with the section `(x, y)`.
    pub fn trivial_s2(n: usize) -> Self {
        Self::new(Base::Sphere, Bundle::Trivial, BaseSection::Height).with_generic_perturbations(n, DEFAULT_AMPLITUDE)
    }

    pub fn torus(n: usize) -> Self {
        Self::new(Base::Torus, Bundle::Tangent, BaseSection::Waves).with_generic_perturbations(n, DEFAULT_AMPLITUDE)
    }

    /// `ts2`, `trivial-s2` or `t2`.
    pub fn preset(name: &str, n: usize) -> Result<Self, AverageError> {
        match name {
            "ts2" => Ok(Self::ts2(n)),
            "trivial-s2" | "trivial" => Ok(Self::trivial_s2(n)),
            "t2" | "torus" => Ok(Self::torus(n)),
            other => Err(AverageError::Validation(format!("unknown model `{other}` (expected ts2, trivial-s2 or t2)"))),
        }
    }

    pub fn new(base: Base, bundle: Bundle, section: BaseSection) -> Self {
        Self { base, bundle, section, perturbations: Vec::new(), reverse_fiber: false }
    }

    /// Replaces the perturbations by `n` fixed generic bump sections. Perturbation `j`
    /// does not depend on `n`.
    pub fn with_generic_perturbations(mut self, n: usize, amplitude: f64) -> Self {
        self.perturbations = (0..n).map(|j| self.generic_perturbation(j, amplitude)).collect();
        self
    }

    fn generic_perturbation(&self, j: usize, amplitude: f64) -> Perturbation {
        let mut rng = ChaCha8Rng::seed_from_u64(PERTURBATION_SEED + j as u64);
        let mut uniform = |k: usize| -> Vec<f64> { (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect() };
        match self.base {
            Base::Sphere => {
                let center = loop {
                    let c = uniform(3);
                    let r = norm3(&c);
                    if r > 0.1 && r <= 1.0 {
                        break c.iter().map(|x| x / r).collect();
                    }
                };
                let direction = uniform(if self.bundle == Bundle::Tangent { 3 } else { 2 });
                Perturbation { center, direction, amplitude }
            }
            Base::Torus => {
                let center = uniform(2).iter().map(|x| (x + 1.0) * std::f64::consts::PI).collect();
                Perturbation { center, direction: uniform(2), amplitude }
            }
        }
    }

    /// Appends `extra` parameters whose sections vanish identically.
    pub fn enriched(mut self, extra: usize) -> Self {
        let (c, d) = match (self.base, self.bundle) {
            (Base::Sphere, Bundle::Tangent) => (vec![0.0, 0.0, 1.0], vec![0.0; 3]),
            (Base::Sphere, Bundle::Trivial) => (vec![0.0, 0.0, 1.0], vec![0.0; 2]),
            (Base::Torus, _) => (vec![0.0; 2], vec![0.0; 2]),
        };
        self.perturbations.extend((0..extra).map(|_| Perturbation { center: c.clone(), direction: d.clone(), amplitude: 0.0 }));
        self
    }

    /// The same bundle with the opposite fiber orientation.
    pub fn reversed(mut self) -> Self {
        self.reverse_fiber = !self.reverse_fiber;
        self
    }

    pub fn params(&self) -> usize {
        self.perturbations.len()
    }

    pub fn validate(&self) -> Result<(), AverageError> {
        let bad = |m: &str| Err(AverageError::Validation(m.to_string()));
        match (self.section, self.base, self.bundle) {
            (BaseSection::Rotation, Base::Sphere, Bundle::Tangent) => {}
            (BaseSection::Rotation, _, _) => return bad("section `rotation` needs the tangent bundle of the sphere"),
            (BaseSection::Height, Base::Sphere, Bundle::Trivial) => {}
            (BaseSection::Height, _, _) => return bad("section `height` needs the trivial bundle over the sphere"),
            (BaseSection::Waves, Base::Torus, _) => {}
            (BaseSection::Waves, _, _) => return bad("section `waves` needs the torus"),
            (BaseSection::Constant { .. }, Base::Sphere, Bundle::Tangent) => {
                return bad("a constant section of the sphere's tangent bundle does not exist")
            }
            (BaseSection::Constant { value }, _, _) => {
                if value.iter().any(|x| !x.is_finite()) {
                    return bad("constant section must be finite");
                }
            }
        }
        let (nc, nd) = match (self.base, self.bundle) {
            (Base::Sphere, Bundle::Tangent) => (3, 3),
            (Base::Sphere, Bundle::Trivial) => (3, 2),
            (Base::Torus, _) => (2, 2),
        };
        for (j, p) in self.perturbations.iter().enumerate() {
            if p.center.len() != nc || p.direction.len() != nd {
                return Err(AverageError::Validation(format!(
                    "perturbations[{j}]: expected center of length {nc} and direction of length {nd}"
                )));
            }
            if !p.amplitude.is_finite() || p.center.iter().chain(&p.direction).any(|x| !x.is_finite()) {
                return Err(AverageError::Validation(format!("perturbations[{j}]: non-finite entry")));
            }
        }
        Ok(())
    }

    fn check_params(&self, s: &[f64]) -> Result<(), AverageError> {
        if s.len() != self.params() {
            return Err(AverageError::Validation(format!("expected {} parameters, got {}", self.params(), s.len())));
        }
        if s.iter().any(|x| !(x.abs() <= 1.0)) {
            return Err(AverageError::Validation("parameters must lie in [-1, 1]".into()));
        }
        Ok(())
    }

    /// The perturbed section in chart coordinates.
    pub fn local(&self, chart: Chart, s: &[f64], x: [f64; 2]) -> [f64; 2] {
        let w = match self.base {
            Base::Sphere => {
                let (p, du, dv) = sphere_chart(chart, x);
                match self.bundle {
                    Bundle::Tangent => {
                        let mut v = match self.section {
                            BaseSection::Rotation => [-p[1], p[0], 0.0],
                            _ => [0.0; 3],
                        };
                        for (sj, pert) in s.iter().zip(&self.perturbations) {
                            let b = sj * pert.amplitude * sphere_bump(&pert.center, &p);
                            for k in 0..3 {
                                v[k] += b * pert.direction[k];
                            }
                        }
                        // the chart is conformal; dotting with the frame drops any normal part
                        let scale = dot3(&du, &du);
                        [dot3(&du, &v) / scale, dot3(&dv, &v) / scale]
                    }
                    Bundle::Trivial => {
                        let mut v = match self.section {
                            BaseSection::Height => [p[0], p[1]],
                            BaseSection::Constant { value } => value,
                            _ => [0.0; 2],
                        };
                        for (sj, pert) in s.iter().zip(&self.perturbations) {
                            let b = sj * pert.amplitude * sphere_bump(&pert.center, &p);
                            v[0] += b * pert.direction[0];
                            v[1] += b * pert.direction[1];
                        }
                        v
                    }
                }
            }
            Base::Torus => {
                let mut v = match self.section {
                    BaseSection::Waves => [x[0].sin(), x[1].sin()],
                    BaseSection::Constant { value } => value,
                    _ => [0.0; 2],
                };
                for (sj, pert) in s.iter().zip(&self.perturbations) {
                    let bump = ((x[0] - pert.center[0]).cos() + (x[1] - pert.center[1]).cos() - 2.0) / (BUMP_WIDTH * BUMP_WIDTH);
                    let b = sj * pert.amplitude * bump.exp();
                    v[0] += b * pert.direction[0];
                    v[1] += b * pert.direction[1];
                }
                v
            }
        };
        if self.reverse_fiber {
            [w[1], w[0]]
        } else {
            w
        }
    }
}

fn dot3(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: &[f64]) -> f64 {
    dot3(a, a).sqrt()
}

fn sphere_bump(center: &[f64], p: &[f64; 3]) -> f64 {
    let d2 = (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2) + (p[2] - center[2]).powi(2);
    (-d2 / (BUMP_WIDTH * BUMP_WIDTH)).exp()
}

/// Point and coordinate frame of an oriented stereographic chart.
pub fn sphere_chart(chart: Chart, x: [f64; 2]) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let north = |u: f64, v: f64| {
        let d = 1.0 + u * u + v * v;
        let d2 = d * d;
        let p = [2.0 * u / d, 2.0 * v / d, (2.0 - d) / d];
        let du = [(2.0 * d - 4.0 * u * u) / d2, -4.0 * u * v / d2, -4.0 * u / d2];
        let dv = [-4.0 * u * v / d2, (2.0 * d - 4.0 * v * v) / d2, -4.0 * v / d2];
        (p, du, dv)
    };
    match chart {
        Chart::South => {
            let (p, du, dv) = north(x[0], -x[1]);
            ([p[0], p[1], -p[2]], [du[0], du[1], -du[2]], [-dv[0], -dv[1], dv[2]])
        }
        _ => north(x[0], x[1]),
    }
}

/// A transverse zero of a section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    /// Ambient point on the sphere, or angles on the torus.
    pub point: Vec<f64>,
    pub chart: Chart,
    pub coords: [f64; 2],
    /// Jacobian determinant in the oriented chart.
    pub det: f64,
}

fn jacobian(f: &dyn Fn([f64; 2]) -> [f64; 2], x: [f64; 2]) -> Matrix2<f64> {
    let mut j = Matrix2::zeros();
    for k in 0..2 {
        let (mut a, mut b) = (x, x);
        a[k] += FD_STEP;
        b[k] -= FD_STEP;
        let (fa, fb) = (f(a), f(b));
        j[(0, k)] = (fa[0] - fb[0]) / (2.0 * FD_STEP);
        j[(1, k)] = (fa[1] - fb[1]) / (2.0 * FD_STEP);
    }
    j
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Damped Newton. Returns the last iterate when the residual is below the stall level.
fn newton(f: &dyn Fn([f64; 2]) -> [f64; 2], x0: [f64; 2]) -> Option<[f64; 2]> {
    let mut x = x0;
    let mut fx = f(x);
    for _ in 0..NEWTON_ITERS {
        let r = norm2(fx);
        if r < NEWTON_TOL {
            return Some(x);
        }
        let Some(inv) = jacobian(f, x).try_inverse() else { break };
        let step = -(inv * Vector2::new(fx[0], fx[1]));
        let mut lambda = 1.0;
        loop {
            let xn = [x[0] + lambda * step[0], x[1] + lambda * step[1]];
            let fnew = f(xn);
            if norm2(fnew) < (1.0 - 1e-4 * lambda) * r {
                x = xn;
                fx = fnew;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-8 {
                return (r < STALL_RESIDUAL).then_some(x);
            }
        }
    }
    (norm2(fx) < STALL_RESIDUAL).then_some(x)
}

/// Newton from every grid node where `|f|` is a local minimum.
fn scan(f: &dyn Fn([f64; 2]) -> [f64; 2], lo: [f64; 2], hi: [f64; 2], grid: usize, periodic: bool) -> Vec<[f64; 2]> {
    let denom = if periodic { grid } else { grid - 1 } as f64;
    let node = |i: usize, j: usize| [lo[0] + (hi[0] - lo[0]) * i as f64 / denom, lo[1] + (hi[1] - lo[1]) * j as f64 / denom];
    let values: Vec<f64> = (0..grid * grid).map(|k| norm2(f(node(k / grid, k % grid)))).collect();
    let mut starts = Vec::new();
    for i in 0..grid {
        for j in 0..grid {
            let v = values[i * grid + j];
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (mut a, mut b) = (i as i64 + di, j as i64 + dj);
                    if periodic {
                        a = a.rem_euclid(grid as i64);
                        b = b.rem_euclid(grid as i64);
                    } else if a < 0 || b < 0 || a >= grid as i64 || b >= grid as i64 {
                        continue;
                    }
                    if values[a as usize * grid + b as usize] < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                starts.push(node(i, j));
            }
        }
    }
    starts.into_iter().filter_map(|x| newton(f, x)).collect()
}

fn push_unique(found: &mut Vec<Zero>, zero: Zero, distance: impl Fn(&[f64], &[f64]) -> f64) {
    if found.iter().all(|z| distance(&z.point, &zero.point) > SAME_ZERO) {
        found.push(zero);
    }
}

/// All zeros of the perturbed section at parameter `s`, including near-degenerate ones.
pub fn find_zeros(model: &BundleModel, s: &[f64]) -> Result<Vec<Zero>, AverageError> {
    model.validate()?;
    model.check_params(s)?;
    let mut found = Vec::new();
    match model.base {
        Base::Sphere => {
            let euclid = |a: &[f64], b: &[f64]| norm3(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]]);
            for chart in [Chart::North, Chart::South] {
                let f = |x: [f64; 2]| model.local(chart, s, x);
                let r = SPHERE_CHART_RADIUS;
                for x in scan(&f, [-r, -r], [r, r], SPHERE_GRID, false) {
                    let (p, _, _) = sphere_chart(chart, x);
                    let owner = if p[2] >= 0.0 { Chart::North } else { Chart::South };
                    if owner != chart {
                        continue;
                    }
                    let det = jacobian(&f, x).determinant();
                    push_unique(&mut found, Zero { point: p.to_vec(), chart, coords: x, det }, euclid);
                }
            }
        }
        Base::Torus => {
            let wrapped = |a: f64, b: f64| {
                let d = (a - b).rem_euclid(TAU);
                d.min(TAU - d)
            };
            let periodic = |a: &[f64], b: &[f64]| wrapped(a[0], b[0]).hypot(wrapped(a[1], b[1]));
            let f = |x: [f64; 2]| model.local(Chart::Flat, s, x);
            for x in scan(&f, [0.0, 0.0], [TAU, TAU], TORUS_GRID, true) {
                let det = jacobian(&f, x).determinant();
                let point = vec![x[0].rem_euclid(TAU), x[1].rem_euclid(TAU)];
                push_unique(&mut found, Zero { point, chart: Chart::Flat, coords: x, det }, periodic);
            }
        }
    }
    Ok(found)
}

/// Zeros counted with the sign of the chart Jacobian determinant.
pub fn signed_zero_count(model: &BundleModel, s: &[f64]) -> Result<i64, AverageError> {
    let zeros = find_zeros(model, s)?;
    if let Some(z) = zeros.iter().find(|z| z.det.abs() < DEGENERATE_DET) {
        return Err(AverageError::Degenerate { point: z.point.clone(), det: z.det.abs() });
    }
    Ok(zeros.iter().map(|z| z.det.signum() as i64).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub degenerate_rate: f64,
    pub samples: usize,
    pub degenerate: usize,
    pub parameters: usize,
}

impl fmt::Display for EulerEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4} +/- {:.4} ({} samples, {} degenerate)", self.estimate, self.stderr, self.samples, self.degenerate)
    }
}

/// Monte Carlo mean of `signed_zero_count` over parameters drawn from the product bump
/// density. Sample `i` uses the generator seeded with `seed + i`.
pub fn averaged_euler(model: &BundleModel, samples: usize, seed: u64) -> Result<EulerEstimate, AverageError> {
    model.validate()?;
    if samples < MIN_SAMPLES {
        return Err(AverageError::Validation(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    let tau = TauForm::new(model.params());
    let counts: Vec<Option<i64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let s = tau.sample(&mut rng);
            match signed_zero_count(model, &s) {
                Ok(c) => Ok(Some(c)),
                Err(AverageError::Degenerate { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, _>>()?;
    let good: Vec<f64> = counts.iter().flatten().map(|c| *c as f64).collect();
    let degenerate = samples - good.len();
    if degenerate as f64 > MAX_DEGENERATE_RATE * samples as f64 {
        return Err(AverageError::TooDegenerate { degenerate, samples });
    }
    let n = good.len() as f64;
    let estimate = neumaier_sum(good.iter().copied()) / n;
    let stderr = if good.len() > 1 {
        let var = neumaier_sum(good.iter().map(|c| (c - estimate).powi(2))) / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(EulerEstimate {
        estimate,
        stderr,
        degenerate_rate: degenerate as f64 / samples as f64,
        samples,
        degenerate,
        parameters: model.params(),
    })
}

/// A family of maps `(s, t, m) -> R^2` over the parameter cube, `[0, 1]` and a box in the plane.
pub trait SectionFamily: Sync {
    fn params(&self) -> usize;
    fn domain(&self) -> ([f64; 2], [f64; 2]);
    fn eval(&self, s: &[f64], t: f64, m: [f64; 2]) -> [f64; 2];
}

type FamilyMap = dyn Fn(&[f64], f64, [f64; 2]) -> [f64; 2] + Send + Sync;

#[derive(Clone)]
pub struct HomotopyFamily {
    params: usize,
    lower: [f64; 2],
    upper: [f64; 2],
    map: Arc<FamilyMap>,
}

impl fmt::Debug for HomotopyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomotopyFamily").field("params", &self.params).field("lower", &self.lower).field("upper", &self.upper).finish()
    }
}

impl HomotopyFamily {
    pub fn new(
        params: usize,
        lower: [f64; 2],
        upper: [f64; 2],
        map: impl Fn(&[f64], f64, [f64; 2]) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        Self { params, lower, upper, map: Arc::new(map) }
    }

    /// Adds `extra` parameters entering through fixed generic bump sections.
    pub fn enriched(self, extra: usize, amplitude: f64) -> Self {
        let (lo, hi) = (self.lower, self.upper);
        let width = 0.5 * (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
        let bumps: Vec<([f64; 2], [f64; 2])> = (0..extra)
            .map(|j| {
                let mut rng = ChaCha8Rng::seed_from_u64(PERTURBATION_SEED ^ (j as u64 + 1));
                let c = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
                let d = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                (c, d)
            })
            .collect();
        let inner = self.map.clone();
        let base = self.params;
        Self::new(base + extra, lo, hi, move |s, t, m| {
            let mut v = inner(&s[..base], t, m);
            for (sj, (c, d)) in s[base..].iter().zip(&bumps) {
                let b = sj * amplitude * (-((m[0] - c[0]).powi(2) + (m[1] - c[1]).powi(2)) / (width * width)).exp();
                v[0] += b * d[0];
                v[1] += b * d[1];
            }
            v
        })
    }
}

impl SectionFamily for HomotopyFamily {
    fn params(&self) -> usize {
        self.params
    }

    fn domain(&self) -> ([f64; 2], [f64; 2]) {
        (self.lower, self.upper)
    }

    fn eval(&self, s: &[f64], t: f64, m: [f64; 2]) -> [f64; 2] {
        (self.map)(s, t, m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Submersive,
    NotSubmersive,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmersionSample {
    pub s: Vec<f64>,
    pub t: f64,
    pub m: [f64; 2],
    /// Norm of the `t` covector restricted to the tangent space of the zero set.
    pub margin: f64,
    pub smallest_singular_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmersionReport {
    pub verdict: Verdict,
    pub zeros_checked: usize,
    pub failures: Vec<SubmersionSample>,
    pub inconclusive: Vec<SubmersionSample>,
    pub min_margin: Option<f64>,
}

/// Checks, at every zero of `m -> F(s, t, m)` for the given parameters and `t` slices,
/// that `dt` does not vanish on the kernel of the full differential of `F`.
pub fn submersion_check(family: &dyn SectionFamily, slices: &[f64], params: &[Vec<f64>]) -> Result<SubmersionReport, AverageError> {
    let n = family.params();
    if let Some(t) = slices.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(AverageError::Validation(format!("slice t = {t} outside [0, 1]")));
    }
    if let Some(s) = params.iter().find(|s| s.len() != n || s.iter().any(|x| !(x.abs() <= 1.0))) {
        return Err(AverageError::Validation(format!("parameter point {s:?} is not in the {n}-cube")));
    }
    let (lo, hi) = family.domain();
    let mut report = SubmersionReport { verdict: Verdict::Submersive, zeros_checked: 0, failures: vec![], inconclusive: vec![], min_margin: None };
    for s in params {
        for &t in slices {
            let f = |m: [f64; 2]| family.eval(s, t, m);
            let mut zeros: Vec<[f64; 2]> = Vec::new();
            for m in scan(&f, lo, hi, FLAT_GRID, false) {
                let inside = (0..2).all(|k| m[k] >= lo[k] && m[k] <= hi[k]);
                if inside && zeros.iter().all(|z| (z[0] - m[0]).hypot(z[1] - m[1]) > SAME_ZERO) {
                    zeros.push(m);
                }
            }
            for m in zeros {
                let sample = differential_sample(family, s, t, m);
                report.zeros_checked += 1;
                if sample.smallest_singular_value < RANK_TOL {
                    report.inconclusive.push(sample);
                } else {
                    report.min_margin = Some(report.min_margin.map_or(sample.margin, |x: f64| x.min(sample.margin)));
                    if sample.margin < RANK_TOL {
                        report.failures.push(sample);
                    }
                }
            }
        }
    }
    report.verdict = if !report.failures.is_empty() {
        Verdict::NotSubmersive
    } else if !report.inconclusive.is_empty() {
        Verdict::Inconclusive
    } else {
        Verdict::Submersive
    };
    Ok(report)
}

/// Variables ordered `(m1, m2, t, s_1, ..., s_n)`.
fn differential_sample(family: &dyn SectionFamily, s: &[f64], t: f64, m: [f64; 2]) -> SubmersionSample {
    let n = s.len();
    let mut point: Vec<f64> = vec![m[0], m[1], t];
    point.extend_from_slice(s);
    let eval = |p: &[f64]| family.eval(&p[3..], p[2], [p[0], p[1]]);
    let mut df = DMatrix::<f64>::zeros(2, n + 3);
    for k in 0..n + 3 {
        let (mut a, mut b) = (point.clone(), point.clone());
        a[k] += FD_STEP;
        b[k] -= FD_STEP;
        let (fa, fb) = (eval(&a), eval(&b));
        df[(0, k)] = (fa[0] - fb[0]) / (2.0 * FD_STEP);
        df[(1, k)] = (fa[1] - fb[1]) / (2.0 * FD_STEP);
    }
    let sv = df.clone().svd(false, false).singular_values;
    let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let mut et = DVector::<f64>::zeros(n + 3);
    et[2] = 1.0;
    let margin = match (&df * df.transpose()).try_inverse() {
        Some(gram_inv) => (&et - df.transpose() * (gram_inv * (&df * &et))).norm(),
        None => 0.0,
    };
    SubmersionSample { s: s.to_vec(), t, m, margin, smallest_singular_value: smallest }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_normalized_and_symmetric() {
        let b = BumpWeight::new();
        // independent quadrature: midpoint rule after s = tanh(x), which removes the endpoints
        let (lo, hi, n) = (-4.0f64, 4.0f64, 200_000);
        let h = (hi - lo) / n as f64;
        let total: f64 = (0..n)
            .map(|i| {
                let x = lo + (i as f64 + 0.5) * h;
                b.eval(x.tanh()) / x.cosh().powi(2) * h
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-10, "{total}");
        for s in [0.0, 0.1, 0.5, 0.9, 0.999] {
            assert_eq!(b.eval(s), b.eval(-s));
        }
        assert_eq!(b.eval(1.0), 0.0);
        assert_eq!(b.eval(-1.5), 0.0);
    }

    #[test]
    fn bump_sampling_matches_density() {
        let b = BumpWeight::new();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<f64> = (0..20_000).map(|_| b.sample(&mut rng)).collect();
        assert!(xs.iter().all(|x| x.abs() < 1.0));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.02);
        let inside = xs.iter().filter(|x| x.abs() < 0.5).count() as f64 / xs.len() as f64;
        let h = 1e-4;
        let want: f64 = (0..10_000).map(|i| b.eval(-0.5 + (i as f64 + 0.5) * h) * h).sum();
        assert!((inside - want).abs() < 0.02, "{inside} vs {want}");
    }

    #[test]
    fn tau_form_factorizes() {
        let tau = TauForm::new(3);
        let b = BumpWeight::new();
        let s = [0.1, -0.4, 0.7];
        assert!((tau.density(&s) - b.eval(0.1) * b.eval(-0.4) * b.eval(0.7)).abs() < 1e-15);
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        assert_eq!(neumaier_sum([1.0, 1e100, 1.0, -1e100]), 2.0);
    }

    #[test]
    fn charts_are_oriented_and_conformal() {
        for chart in [Chart::North, Chart::South] {
            for x in [[0.0, 0.0], [0.3, -0.7], [-1.1, 0.4]] {
                let (p, du, dv) = sphere_chart(chart, x);
                assert!((norm3(&p) - 1.0).abs() < 1e-14);
                let n = [du[1] * dv[2] - du[2] * dv[1], du[2] * dv[0] - du[0] * dv[2], du[0] * dv[1] - du[1] * dv[0]];
                assert!(dot3(&n, &p) > 0.0, "{chart:?} reverses orientation at {x:?}");
                assert!((dot3(&du, &du) - dot3(&dv, &dv)).abs() < 1e-14 && dot3(&du, &dv).abs() < 1e-14);
                // frame against finite differences of the point map
                let h = 1e-6;
                let (pa, _, _) = sphere_chart(chart, [x[0] + h, x[1]]);
                let (pb, _, _) = sphere_chart(chart, [x[0] - h, x[1]]);
                for k in 0..3 {
                    assert!(((pa[k] - pb[k]) / (2.0 * h) - du[k]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn rotation_field_has_two_positive_zeros_at_the_poles() {
        let model = BundleModel::ts2(0);
        let zeros = find_zeros(&model, &[]).unwrap();
        assert_eq!(zeros.len(), 2);
        for z in &zeros {
            assert!((z.point[2].abs() - 1.0).abs() < 1e-9, "{:?}", z.point);
            assert!(z.det > 0.0);
        }
        assert_eq!(signed_zero_count(&model, &[]).unwrap(), 2);
        assert_eq!(signed_zero_count(&model.clone().reversed(), &[]).unwrap(), -2);
    }

    #[test]
    fn trivial_bundle_counts() {
        let constant = BundleModel::new(Base::Sphere, Bundle::Trivial, BaseSection::Constant { value: [1.0, 0.5] });
        assert!(find_zeros(&constant, &[]).unwrap().is_empty());
        let height = BundleModel::trivial_s2(0);
        let zeros = find_zeros(&height, &[]).unwrap();
        assert_eq!(zeros.len(), 2);
        assert_eq!(zeros.iter().map(|z| z.det.signum()).sum::<f64>(), 0.0);
        assert_eq!(signed_zero_count(&BundleModel::torus(0), &[]).unwrap(), 0);
        assert_eq!(find_zeros(&BundleModel::torus(0), &[]).unwrap().len(), 4);
    }

    #[test]
    fn count_agrees_with_boundary_winding() {
        // zeros inside the unit disk of the north chart against the winding of the section
        // along its boundary circle
        let model = BundleModel::ts2(3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let s: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let zeros = find_zeros(&model, &s).unwrap();
            let inside: f64 = zeros.iter().filter(|z| z.chart == Chart::North).map(|z| z.det.signum()).sum();
            let steps = 4000;
            let mut winding = 0.0;
            let angle = |k: usize| {
                let a = TAU * k as f64 / steps as f64;
                let w = model.local(Chart::North, &s, [a.cos(), a.sin()]);
                w[1].atan2(w[0])
            };
            for k in 0..steps {
                let mut d = angle(k + 1) - angle(k);
                d -= TAU * (d / TAU).round();
                winding += d;
            }
            assert_eq!((winding / TAU).round(), inside, "s = {s:?}");
        }
    }

    #[test]
    fn parameters_are_validated() {
        let model = BundleModel::ts2(2);
        assert!(matches!(signed_zero_count(&model, &[0.0]), Err(AverageError::Validation(_))));
        assert!(matches!(signed_zero_count(&model, &[0.0, 1.5]), Err(AverageError::Validation(_))));
        let bad = BundleModel::new(Base::Torus, Bundle::Tangent, BaseSection::Rotation);
        assert!(bad.validate().is_err());
        assert!(BundleModel::preset("klein", 2).is_err());
        assert!(averaged_euler(&model, 10, 0).is_err());
    }

    #[test]
    fn averages_are_deterministic() {
        let model = BundleModel::ts2(2);
        let a = averaged_euler(&model, 200, 42).unwrap();
        let b = averaged_euler(&model, 200, 42).unwrap();
        assert_eq!(a, b);
        assert!((a.estimate - 2.0).abs() < 0.1);
    }

    #[test]
    fn model_json_round_trip() {
        let model = BundleModel::trivial_s2(2).reversed();
        let back: BundleModel = serde_json::from_str(&serde_json::to_string(&model).unwrap()).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn linear_family_margin_matches_hand_computation() {
        // F = m - s t v with v = (1, 0): at s = t = 1/2 the t covector restricted to the
        // zero set has norm sqrt(5/6)
        let family = HomotopyFamily::new(1, [-2.0, -2.0], [2.0, 2.0], |s, t, m| [m[0] - s[0] * t, m[1]]);
        let rep = submersion_check(&family, &[0.5], &[vec![0.5]]).unwrap();
        assert_eq!(rep.verdict, Verdict::Submersive);
        assert_eq!(rep.zeros_checked, 1);
        assert!((rep.min_margin.unwrap() - (5.0f64 / 6.0).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn time_independent_family_is_submersive() {
        let family = HomotopyFamily::new(0, [-2.0, -2.0], [2.0, 2.0], |_, _, m| [m[0] * m[0] - 1.0, m[1]]);
        let rep = submersion_check(&family, &[0.0, 0.3, 1.0], &[vec![]]).unwrap();
        assert_eq!(rep.verdict, Verdict::Submersive);
        assert_eq!(rep.zeros_checked, 6);
        assert!((rep.min_margin.unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn empty_zero_set_is_vacuous() {
        let family = HomotopyFamily::new(0, [-1.0, -1.0], [1.0, 1.0], |_, _, _| [1.0, 0.0]);
        let rep = submersion_check(&family, &[0.5], &[vec![]]).unwrap();
        assert_eq!((rep.verdict, rep.zeros_checked), (Verdict::Submersive, 0));
    }

    #[test]
    fn birth_death_needs_an_extra_parameter() {
        let family = HomotopyFamily::new(0, [-2.0, -2.0], [2.0, 2.0], |_, t, m| [m[0] * m[0] - (t - 0.5), m[1]]);
        let rep = submersion_check(&family, &[0.5], &[vec![]]).unwrap();
        assert_eq!(rep.verdict, Verdict::NotSubmersive);
        let generic = submersion_check(&family, &[0.8], &[vec![]]).unwrap();
        assert_eq!((generic.verdict, generic.zeros_checked), (Verdict::Submersive, 2));
        let enriched = family.enriched(1, 0.5);
        let rep = submersion_check(&enriched, &[0.5], &[vec![0.0]]).unwrap();
        assert_eq!(rep.verdict, Verdict::Submersive, "{rep:?}");
    }

    #[test]
    fn submersion_inputs_are_validated() {
        let family = HomotopyFamily::new(1, [-1.0, -1.0], [1.0, 1.0], |_, _, m| m);
        assert!(submersion_check(&family, &[1.5], &[vec![0.0]]).is_err());
        assert!(submersion_check(&family, &[0.5], &[vec![]]).is_err());
    }
}
