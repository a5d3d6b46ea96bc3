use super::oracle::align_around_zero;
use super::SpectralError;
use crate::linalg::{asymmetry, from_complex, j0, jacobi_eigenvalues, matrix_from_rows};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

pub const DEFAULT_MODES: usize = 64;
/// Weight used when no orbit constrains the choice.
pub const EMPTY_WEIGHT: f64 = PI;
const SYMMETRY_TOL: f64 = 1e-9;
const CHECK_SAMPLES: usize = 64;
const SAFETY: f64 = 0.9;
const ZERO_EIGEN_TOL: f64 = 1e-9;

type Evaluator = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// A loop `t -> B(t)` of real `2m x 2m` matrices with `-J0 B(t)` symmetric.
#[derive(Clone)]
pub struct CoefficientLoop {
    dim: usize,
    eval: Evaluator,
}

impl fmt::Debug for CoefficientLoop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientLoop").field("dim", &self.dim).field("at_zero", &(self.eval)(0.0)).finish()
    }
}

impl CoefficientLoop {
    pub fn new(dim: usize, eval: impl Fn(f64) -> DMatrix<f64> + Send + Sync + 'static) -> Result<Self, SpectralError> {
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(SpectralError::Shape(format!("fiber dimension must be even and positive, got {dim}")));
        }
        let l = Self { dim, eval: Arc::new(eval) };
        for j in 0..CHECK_SAMPLES {
            l.checked_symmetric_part(j as f64 / CHECK_SAMPLES as f64)?;
        }
        Ok(l)
    }

    pub fn constant(b: DMatrix<f64>) -> Result<Self, SpectralError> {
        let dim = b.nrows();
        if b.ncols() != dim {
            return Err(SpectralError::Shape("coefficient must be square".into()));
        }
        Self::new(dim, move |_| b.clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, t: f64) -> DMatrix<f64> {
        (self.eval)(t)
    }

    /// `J0 B(t)`, validated symmetric and then symmetrized exactly.
    pub fn checked_symmetric_part(&self, t: f64) -> Result<DMatrix<f64>, SpectralError> {
        let b = self.at(t);
        if b.shape() != (self.dim, self.dim) {
            return Err(SpectralError::Shape(format!("B({t}) has shape {:?}, expected {}x{}", b.shape(), self.dim, self.dim)));
        }
        let s = j0(self.dim) * b;
        let asym = asymmetry(&s);
        if !(asym <= SYMMETRY_TOL * s.amax().max(1.0)) {
            return Err(SpectralError::Validation(format!("-J0 B(t) is not symmetric at t = {t} (defect {asym:.3e})")));
        }
        let n = self.dim;
        Ok(DMatrix::from_fn(n, n, |a, b| 0.5 * (s[(a, b)] + s[(b, a)])))
    }
}

/// JSON description of a coefficient loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LoopSpec {
    Constant {
        matrix: Vec<Vec<f64>>,
    },
    /// `B(t) = constant + sum_k cos[k-1] cos(2 pi k t) + sin[k-1] sin(2 pi k t)`.
    Fourier {
        constant: Vec<Vec<f64>>,
        #[serde(default)]
        cos: Vec<Vec<Vec<f64>>>,
        #[serde(default)]
        sin: Vec<Vec<Vec<f64>>>,
    },
}

impl LoopSpec {
    pub fn build(&self) -> Result<CoefficientLoop, SpectralError> {
        let parse = |rows: &Vec<Vec<f64>>| matrix_from_rows(rows).map_err(SpectralError::Shape);
        match self {
            Self::Constant { matrix } => CoefficientLoop::constant(parse(matrix)?),
            Self::Fourier { constant, cos, sin } => {
                let c0 = parse(constant)?;
                let dim = c0.nrows();
                let cs = cos.iter().map(parse).collect::<Result<Vec<_>, _>>()?;
                let ss = sin.iter().map(parse).collect::<Result<Vec<_>, _>>()?;
                if cs.iter().chain(&ss).any(|m| m.shape() != c0.shape()) {
                    return Err(SpectralError::Shape("all Fourier coefficients need the shape of the constant term".into()));
                }
                CoefficientLoop::new(dim, move |t| {
                    let mut b = c0.clone();
                    for (k, m) in cs.iter().enumerate() {
                        b += m * (TAU * (k + 1) as f64 * t).cos();
                    }
                    for (k, m) in ss.iter().enumerate() {
                        b += m * (TAU * (k + 1) as f64 * t).sin();
                    }
                    b
                })
            }
        }
    }
}

/// The operator `h -> -J0 h' + J0 B h` on loops in `R^{2m}`, truncated to Fourier modes `|k| <= modes`.
#[derive(Debug, Clone)]
pub struct AsymptoticOperator {
    pub coefficient: CoefficientLoop,
    modes: usize,
}

impl AsymptoticOperator {
    pub fn new(coefficient: CoefficientLoop, modes: usize) -> Result<Self, SpectralError> {
        if modes == 0 {
            return Err(SpectralError::Validation("at least one Fourier mode is needed".into()));
        }
        Ok(Self { coefficient, modes })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn with_modes(&self, modes: usize) -> Result<Self, SpectralError> {
        Self::new(self.coefficient.clone(), modes)
    }

    pub fn dim(&self) -> usize {
        self.coefficient.dim()
    }

    /// Galerkin matrix in the real basis `{1, sqrt2 cos 2 pi k t, sqrt2 sin 2 pi k t}` per
    /// component, with index `basis * dim + component`. Exactly symmetric.
    pub fn galerkin_matrix(&self) -> Result<DMatrix<f64>, SpectralError> {
        let (dim, k_max) = (self.dim(), self.modes);
        let nb = 2 * k_max + 1;
        let nodes = 8 * k_max + 128;
        let mut phi = vec![0.0; nb * nodes];
        let mut sym = Vec::with_capacity(nodes);
        for j in 0..nodes {
            let t = j as f64 / nodes as f64;
            phi[j] = 1.0;
            for k in 1..=k_max {
                let (s, c) = (TAU * k as f64 * t).sin_cos();
                phi[(2 * k - 1) * nodes + j] = std::f64::consts::SQRT_2 * c;
                phi[2 * k * nodes + j] = std::f64::consts::SQRT_2 * s;
            }
            sym.push(self.coefficient.checked_symmetric_part(t)?);
        }
        let flat: Vec<f64> = sym.iter().flat_map(|s| s.iter().copied().collect::<Vec<_>>()).collect();
        let omega = -j0(dim);
        let n = dim * nb;
        let mut m = DMatrix::zeros(n, n);
        let mut acc = vec![0.0; dim * dim];
        for p in 0..nb {
            for q in p..nb {
                acc.iter_mut().for_each(|x| *x = 0.0);
                for j in 0..nodes {
                    let w = phi[p * nodes + j] * phi[q * nodes + j];
                    let s = &flat[j * dim * dim..(j + 1) * dim * dim];
                    for (x, y) in acc.iter_mut().zip(s) {
                        *x += w * y;
                    }
                }
                let d = derivative_entry(p, q);
                for a in 0..dim {
                    for b in 0..dim {
                        // column-major node matrices: entry (a, b) sits at b * dim + a
                        let v = omega[(a, b)] * d + acc[b * dim + a] / nodes as f64;
                        m[(p * dim + a, q * dim + b)] = v;
                        m[(q * dim + b, p * dim + a)] = v;
                    }
                }
            }
        }
        assert_eq!(asymmetry(&m), 0.0, "Galerkin matrix must be exactly symmetric");
        Ok(m)
    }
}

/// `<phi_p, phi_q'>` in the real Fourier basis.
fn derivative_entry(p: usize, q: usize) -> f64 {
    if p == 0 || q == 0 || p.div_ceil(2) != q.div_ceil(2) || p == q {
        return 0.0;
    }
    let k = p.div_ceil(2) as f64;
    if p % 2 == 1 {
        TAU * k
    } else {
        -TAU * k
    }
}

/// JSON description of an operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub coefficient: LoopSpec,
    #[serde(default = "default_modes")]
    pub modes: usize,
}

fn default_modes() -> usize {
    DEFAULT_MODES
}

impl OperatorSpec {
    pub fn build(&self) -> Result<AsymptoticOperator, SpectralError> {
        AsymptoticOperator::new(self.coefficient.build()?, self.modes)
    }
}

/// Sorted eigenvalues of the Galerkin truncation.
pub fn spectrum(op: &AsymptoticOperator) -> Result<Vec<f64>, SpectralError> {
    Ok(jacobi_eigenvalues(&op.galerkin_matrix()?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGap {
    pub lower: f64,
    pub upper: f64,
    pub degenerate: bool,
}

impl SpectralGap {
    pub fn from_spectrum(eigs: &[f64]) -> Self {
        if eigs.iter().any(|l| l.abs() < ZERO_EIGEN_TOL) {
            return Self { lower: 0.0, upper: 0.0, degenerate: true };
        }
        let lower = eigs.iter().copied().filter(|l| *l < 0.0).fold(f64::NEG_INFINITY, f64::max);
        let upper = eigs.iter().copied().filter(|l| *l > 0.0).fold(f64::INFINITY, f64::min);
        Self { lower, upper, degenerate: false }
    }

    /// Distance from zero to the spectrum.
    pub fn radius(&self) -> f64 {
        (-self.lower).min(self.upper)
    }

    /// The radius capped at `2 pi`, a value in `(0, 2 pi]` for non-degenerate gaps.
    pub fn capped_radius(&self) -> f64 {
        self.radius().min(TAU)
    }
}

pub fn spectral_gap(op: &AsymptoticOperator) -> Result<SpectralGap, SpectralError> {
    Ok(SpectralGap::from_spectrum(&spectrum(op)?))
}

/// Admissible weight strictly inside the gap and below `2 pi`.
pub fn weight_of_gap(gap: &SpectralGap) -> Result<f64, SpectralError> {
    if gap.degenerate {
        return Err(SpectralError::Degenerate("0 lies in the spectrum; the orbit is not non-degenerate".into()));
    }
    Ok(SAFETY * gap.capped_radius())
}

pub fn weight_selector(gaps: &BTreeMap<String, SpectralGap>) -> Result<BTreeMap<String, f64>, SpectralError> {
    gaps.iter()
        .map(|(k, g)| weight_of_gap(g).map(|d| (k.clone(), d)).map_err(|e| SpectralError::Degenerate(format!("orbit `{k}`: {e}"))))
        .collect()
}

/// `count` strictly increasing weights starting at `start`, all below `bound`.
pub fn weight_sequence(start: f64, bound: f64, count: usize) -> Result<Vec<f64>, SpectralError> {
    if !(0.0 < start && start < bound) {
        return Err(SpectralError::Validation(format!("need 0 < {start} < {bound}")));
    }
    Ok((0..count).map(|i| start + (bound - start) * i as f64 / count as f64).collect())
}

#[derive(Debug, Clone)]
pub enum UnitaryFactor {
    Constant(DMatrix<Complex64>),
    /// `V diag(exp(2 pi i k_j t)) V^*`.
    Winding { basis: DMatrix<Complex64>, windings: Vec<i64> },
    /// `exp(sin(2 pi n t) A)` with `A` anti-Hermitian.
    Breathing { generator: DMatrix<Complex64>, frequency: i64 },
}

/// A loop of unitary matrices given as a pointwise product of simple factors.
#[derive(Debug, Clone)]
pub struct UnitaryLoop {
    size: usize,
    factors: Vec<UnitaryFactor>,
}

const UNITARY_TOL: f64 = 1e-9;

fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - DMatrix::<Complex64>::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl UnitaryLoop {
    pub fn new(size: usize, factors: Vec<UnitaryFactor>) -> Result<Self, SpectralError> {
        for f in &factors {
            let (m, check) = match f {
                UnitaryFactor::Constant(v) => (v, true),
                UnitaryFactor::Winding { basis, windings } => {
                    if windings.len() != size {
                        return Err(SpectralError::Shape(format!("{} windings for size {size}", windings.len())));
                    }
                    (basis, true)
                }
                UnitaryFactor::Breathing { generator, .. } => {
                    let herm = (generator + generator.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
                    if herm > UNITARY_TOL {
                        return Err(SpectralError::Validation(format!("breathing generator not anti-Hermitian (defect {herm:.3e})")));
                    }
                    (generator, false)
                }
            };
            if m.shape() != (size, size) {
                return Err(SpectralError::Shape(format!("factor of shape {:?}, expected {size}x{size}", m.shape())));
            }
            if check && unitarity_defect(m) > UNITARY_TOL {
                return Err(SpectralError::Validation(format!("factor is not unitary (defect {:.3e})", unitarity_defect(m))));
            }
        }
        Ok(Self { size, factors })
    }

    pub fn identity(size: usize) -> Self {
        Self { size, factors: vec![] }
    }

    /// Constant multiplication by `e^{i angle}`.
    pub fn rotation(size: usize, angle: f64) -> Self {
        let u = DMatrix::identity(size, size) * Complex64::from_polar(1.0, angle);
        Self { size, factors: vec![UnitaryFactor::Constant(u)] }
    }

    /// `t -> e^{2 pi i k t} Id`.
    pub fn winding(size: usize, k: i64) -> Self {
        Self { size, factors: vec![UnitaryFactor::Winding { basis: DMatrix::identity(size, size), windings: vec![k; size] }] }
    }

    /// Product of a random constant unitary, a winding factor in a random basis with
    /// windings in `-2..=2`, and a breathing factor of frequency 1 or 2.
    pub fn random<R: Rng>(size: usize, rng: &mut R) -> Self {
        let constant = random_unitary(size, rng);
        let basis = random_unitary(size, rng);
        let windings = (0..size).map(|_| rng.gen_range(-2..=2)).collect();
        let x = random_complex(size, rng);
        let generator = (&x - x.adjoint()) * Complex64::new(0.35, 0.0);
        let frequency = rng.gen_range(1..=2);
        Self::new(
            size,
            vec![
                UnitaryFactor::Constant(constant),
                UnitaryFactor::Winding { basis, windings },
                UnitaryFactor::Breathing { generator, frequency },
            ],
        )
        .expect("random factors are unitary")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Total winding of the complex determinant.
    pub fn winding_number(&self) -> i64 {
        self.factors.iter().map(|f| if let UnitaryFactor::Winding { windings, .. } = f { windings.iter().sum() } else { 0 }).sum()
    }

    /// `(U(t), U'(t))`.
    pub fn at(&self, t: f64) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
        let n = self.size;
        let mut u = DMatrix::<Complex64>::identity(n, n);
        let mut du = DMatrix::<Complex64>::zeros(n, n);
        for f in &self.factors {
            let (v, dv) = factor_at(f, t);
            du = &du * &v + &u * &dv;
            u = &u * &v;
        }
        (u, du)
    }

    /// Real `2n x 2n` forms of `(U(t), U'(t))`.
    pub fn real_at(&self, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let (u, du) = self.at(t);
        (from_complex(&u), from_complex(&du))
    }
}

fn factor_at(f: &UnitaryFactor, t: f64) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    match f {
        UnitaryFactor::Constant(v) => (v.clone(), DMatrix::zeros(v.nrows(), v.ncols())),
        UnitaryFactor::Winding { basis, windings } => {
            let n = basis.nrows();
            let phase: Vec<Complex64> = windings.iter().map(|&k| Complex64::from_polar(1.0, TAU * k as f64 * t)).collect();
            let d = DMatrix::from_fn(n, n, |i, j| if i == j { phase[i] } else { Complex64::new(0.0, 0.0) });
            let dd = DMatrix::from_fn(n, n, |i, j| if i == j { phase[i] * Complex64::new(0.0, TAU * windings[i] as f64) } else { Complex64::new(0.0, 0.0) });
            (basis * d * basis.adjoint(), basis * dd * basis.adjoint())
        }
        UnitaryFactor::Breathing { generator, frequency } => {
            let w = TAU * *frequency as f64;
            let e = (generator * Complex64::new((w * t).sin(), 0.0)).exp();
            let de = generator * &e * Complex64::new(w * (w * t).cos(), 0.0);
            (e, de)
        }
    }
}

fn random_complex<R: Rng>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Unitary factor of a random complex matrix.
pub(crate) fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    random_complex(n, rng).qr().q()
}

/// Operator with coefficient `U' U^{-1} + U B U^{-1}`, unitarily equivalent to `op` through `U`.
pub fn conjugate(op: &AsymptoticOperator, u: &UnitaryLoop) -> Result<AsymptoticOperator, SpectralError> {
    if 2 * u.size() != op.dim() {
        return Err(SpectralError::Shape(format!("unitary loop of size {} on a fiber of dimension {}", u.size(), op.dim())));
    }
    for j in 0..CHECK_SAMPLES {
        let (v, _) = u.at(j as f64 / CHECK_SAMPLES as f64);
        let d = unitarity_defect(&v);
        if d > UNITARY_TOL {
            return Err(SpectralError::Validation(format!("U(t) is not unitary (defect {d:.3e})")));
        }
    }
    let base = op.coefficient.clone();
    let u = u.clone();
    let coefficient = CoefficientLoop::new(op.dim(), move |t| {
        let (v, dv) = u.real_at(t);
        let vt = v.transpose();
        &dv * &vt + &v * base.at(t) * &vt
    })?;
    AsymptoticOperator::new(coefficient, op.modes())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugationReport {
    pub compared: usize,
    pub max_difference: f64,
    pub holds: bool,
}

/// Compares the eigenvalues of `op` and its conjugate that lie within half the
/// truncation band, paired by rank from the first non-negative eigenvalue.
pub fn conjugation_invariance_check(op: &AsymptoticOperator, u: &UnitaryLoop, tol: f64) -> Result<ConjugationReport, SpectralError> {
    let a = spectrum(op)?;
    let b = spectrum(&conjugate(op, u)?)?;
    let window = op.dim() * op.modes() / 2;
    let pairs = align_around_zero(&a, &b, window);
    let max_difference = pairs.iter().map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(ConjugationReport { compared: pairs.len(), max_difference, holds: max_difference <= tol })
}
