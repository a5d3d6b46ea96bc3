//! Gluing calculus: profiles, gluing parameters, glued necks and their charts, the
//! cutoff ramp, gluing of sampled maps, middle-loop averages and neck weights.
//!
//! Angles are fractions of a full turn, reduced into `[0, 1)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::f64::consts::{E, TAU};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GlueError {
    #[error("{profile:?} profile is undefined at r = {r}")]
    ProfileDomain { profile: GluingProfile, r: f64 },
    #[error("cannot invert {profile:?} profile at R = {value}")]
    InverseDomain { profile: GluingProfile, value: f64 },
    #[error("gluing parameter modulus {0} outside [0, 1)")]
    Modulus(f64),
    #[error("gluing parameter is zero: the node is not glued")]
    Unglued,
    #[error("moduli differ: {0} vs {1}")]
    ModuliDiffer(f64, f64),
    #[error("sampled map: {0}")]
    Grid(String),
    #[error("neck weight: {0}")]
    Weight(String),
    #[error("cannot parse gluing parameter `{0}` (expected modulus@angle)")]
    Parse(String),
}

/// Reduce an angle measured in turns into `[0, 1)`.
pub fn reduce_turns(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Circular distance between two angles in turns.
pub fn turn_distance(a: f64, b: f64) -> f64 {
    let d = reduce_turns(a - b);
    d.min(1.0 - d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GluingProfile {
    /// `r -> e^{1/r} - e` on `(0, 1]`.
    Exponential,
    /// `r -> -ln(r) / 2pi` on `(0, 1)`.
    Classical,
}

impl GluingProfile {
    pub fn eval(self, r: f64) -> Result<f64, GlueError> {
        let out = match self {
            Self::Exponential if r > 0.0 && r <= 1.0 => E * (1.0 / r - 1.0).exp_m1(),
            Self::Classical if r > 0.0 && r < 1.0 => -r.ln() / TAU,
            _ => return Err(GlueError::ProfileDomain { profile: self, r }),
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(GlueError::ProfileDomain { profile: self, r })
        }
    }

    pub fn invert(self, value: f64) -> Result<f64, GlueError> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(GlueError::InverseDomain { profile: self, value });
        }
        let r = match self {
            Self::Exponential => 1.0 / (1.0 + (value / E).ln_1p()),
            Self::Classical => (-TAU * value).exp(),
        };
        if r > 0.0 && !(self == Self::Classical && r >= 1.0) {
            Ok(r)
        } else {
            Err(GlueError::InverseDomain { profile: self, value })
        }
    }
}

impl FromStr for GluingProfile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exp" | "exponential" => Ok(Self::Exponential),
            "classical" | "log" => Ok(Self::Classical),
            other => Err(format!("unknown profile `{other}` (use exp or classical)")),
        }
    }
}

/// A gluing parameter `a = |a| e^{2 pi i angle}`.
///
/// The modulus may be anything in `[0, 1)`; the stricter bound `|a| < 1/4` used for
/// building parameters is checked by [`GluingParameter::is_small`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParameterRepr", into = "ParameterRepr")]
pub struct GluingParameter {
    modulus: f64,
    angle: f64,
}

impl GluingParameter {
    pub const SMALL: f64 = 0.25;

    pub fn new(modulus: f64, angle: f64) -> Result<Self, GlueError> {
        if !(0.0..1.0).contains(&modulus) || !angle.is_finite() {
            return Err(GlueError::Modulus(modulus));
        }
        Ok(Self { modulus, angle: if modulus == 0.0 { 0.0 } else { reduce_turns(angle) } })
    }

    pub fn zero() -> Self {
        Self { modulus: 0.0, angle: 0.0 }
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn is_zero(&self) -> bool {
        self.modulus == 0.0
    }

    pub fn is_small(&self) -> bool {
        self.modulus < Self::SMALL
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.modulus, TAU * self.angle)
    }
}

#[derive(Serialize, Deserialize)]
struct ParameterRepr {
    modulus: f64,
    #[serde(default)]
    angle: f64,
}

impl TryFrom<ParameterRepr> for GluingParameter {
    type Error = GlueError;
    fn try_from(r: ParameterRepr) -> Result<Self, GlueError> {
        Self::new(r.modulus, r.angle)
    }
}

impl From<GluingParameter> for ParameterRepr {
    fn from(a: GluingParameter) -> Self {
        Self { modulus: a.modulus, angle: a.angle }
    }
}

impl fmt::Display for GluingParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.modulus, self.angle)
    }
}

impl FromStr for GluingParameter {
    type Err = GlueError;
    fn from_str(s: &str) -> Result<Self, GlueError> {
        let bad = || GlueError::Parse(s.to_string());
        let (m, a) = s.split_once('@').unwrap_or((s, "0"));
        let m: f64 = m.trim().parse().map_err(|_| bad())?;
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        Self::new(m, a)
    }
}

/// The finite cylinder `[0, R] x S^1` obtained by gluing two disks.
///
/// Positive coordinates `(s, t)` live on the x-side, negative coordinates
/// `(s', t') in [-R, 0] x S^1` on the y-side, related by `s = s' + R`, `t = t' + angle`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GluedNeck {
    pub modulus: f64,
    pub angle: f64,
    pub length: f64,
}

impl GluedNeck {
    pub fn to_negative(&self, s: f64, t: f64) -> (f64, f64) {
        (s - self.length, reduce_turns(t - self.angle))
    }

    pub fn to_positive(&self, s_neg: f64, t_neg: f64) -> (f64, f64) {
        (s_neg + self.length, reduce_turns(t_neg + self.angle))
    }

    /// Positive polar coordinates centred at y, written in terms of the x-side ones.
    pub fn to_y_positive(&self, s: f64, t: f64) -> (f64, f64) {
        (self.length - s, reduce_turns(self.angle - t))
    }
}

pub fn glue_neck(a: GluingParameter, p: GluingProfile) -> Result<GluedNeck, GlueError> {
    if a.is_zero() {
        return Err(GlueError::Unglued);
    }
    Ok(GluedNeck { modulus: a.modulus, angle: a.angle, length: p.eval(a.modulus)? })
}

/// Nonzero complex number stored as `(ln|z|, arg z in turns)`; survives moduli such as
/// `e^{-2 pi R}` for large `R` that underflow in `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPolar {
    pub ln_abs: f64,
    pub turns: f64,
}

impl LogPolar {
    pub fn mul(self, o: Self) -> Self {
        Self { ln_abs: self.ln_abs + o.ln_abs, turns: reduce_turns(self.turns + o.turns) }
    }

    pub fn recip(self) -> Self {
        Self { ln_abs: -self.ln_abs, turns: reduce_turns(-self.turns) }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.ln_abs.exp(), TAU * self.turns)
    }
}

/// Transition `z -> z'` between the two disk coordinates on the glued neck of `a`,
/// solving `e^{2 pi i angle} z z' = e^{-2 pi R}`.
pub fn neck_transition(a: GluingParameter, p: GluingProfile, z: LogPolar) -> Result<LogPolar, GlueError> {
    let neck = glue_neck(a, p)?;
    let c = LogPolar { ln_abs: -TAU * neck.length, turns: reduce_turns(-neck.angle) };
    Ok(c.mul(z.recip()))
}

/// Outcome of comparing the transition of `a` with the rotated transition of `a'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationIdentityReport {
    pub rotation: f64,
    pub max_log_modulus_error: f64,
    pub max_angle_error: f64,
    /// Relative error of a direct complex evaluation, when the neck is short enough
    /// for the moduli to be representable.
    pub max_direct_error: Option<f64>,
    pub holds: bool,
}

/// Checks that the `a`-transition equals the `a'`-transition followed by rotation of
/// the y-disk through `angle(a') - angle(a)`, on an annulus grid of `n x n` points.
pub fn neck_rotation_identity_check(
    a: GluingParameter,
    a2: GluingParameter,
    p: GluingProfile,
    n: usize,
) -> Result<RotationIdentityReport, GlueError> {
    if a.modulus != a2.modulus {
        return Err(GlueError::ModuliDiffer(a.modulus, a2.modulus));
    }
    let neck = glue_neck(a, p)?;
    let theta = reduce_turns(a2.angle - a.angle);
    let rot = LogPolar { ln_abs: 0.0, turns: theta };
    let direct = TAU * neck.length < 600.0;
    let (mut e_mod, mut e_ang, mut e_dir) = (0.0f64, 0.0f64, 0.0f64);
    let n = n.max(2);
    for i in 0..n {
        let ln_abs = -TAU * neck.length * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let z = LogPolar { ln_abs, turns: j as f64 / n as f64 };
            let lhs = neck_transition(a, p, z)?;
            let rhs = rot.mul(neck_transition(a2, p, z)?);
            e_mod = e_mod.max((lhs.ln_abs - rhs.ln_abs).abs());
            e_ang = e_ang.max(turn_distance(lhs.turns, rhs.turns));
            if direct {
                // complex division squares its divisor, so magnitudes are split off first
                let zc = z.to_complex();
                let size = (-TAU * neck.length).exp() / zc.norm();
                let unit_z = zc / zc.norm();
                let l = size / (a.to_complex() / a.modulus * unit_z);
                let r = Complex64::from_polar(1.0, TAU * theta) * size / (a2.to_complex() / a2.modulus * unit_z);
                e_dir = e_dir.max((l - r).norm() / l.norm());
            }
        }
    }
    let tol = 1e-12;
    let holds = e_mod <= tol * (1.0 + TAU * neck.length) && e_ang <= tol && (!direct || e_dir <= tol);
    Ok(RotationIdentityReport {
        rotation: theta,
        max_log_modulus_error: e_mod,
        max_angle_error: e_ang,
        max_direct_error: direct.then_some(e_dir),
        holds,
    })
}

/// Smooth ramp with `beta = 1` on `(-inf, -1]`, `0` on `[1, inf)`, strictly decreasing
/// in between and `beta(s) + beta(-s) = 1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cutoff;

impl Cutoff {
    fn psi(x: f64) -> f64 {
        if x > 0.0 {
            (-1.0 / x).exp()
        } else {
            0.0
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s > 0.0 {
            // For s > 0 the mirror value lies in [1/2, 1], so the subtraction is exact
            // and the symmetry identity holds without rounding.
            return 1.0 - self.eval(-s);
        }
        let (a, b) = (Self::psi(1.0 - s), Self::psi(1.0 + s));
        a / (a + b)
    }
}

pub fn cutoff_eval(s: f64) -> f64 {
    Cutoff.eval(s)
}

/// Values of a map `[s0, s1] x S^1 -> R^N` on a uniform grid: `r_samples` rows in `s`
/// (both ends included), `t_samples` columns at `t = j / t_samples`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledNeckMap {
    pub r_samples: usize,
    pub t_samples: usize,
    pub target_dim: usize,
    pub values: Vec<f64>,
}

impl SampledNeckMap {
    pub const DEFAULT_R_SAMPLES: usize = 128;
    pub const DEFAULT_T_SAMPLES: usize = 64;

    pub fn from_fn(r_samples: usize, t_samples: usize, target_dim: usize, window: (f64, f64), f: impl Fn(f64, f64) -> Vec<f64>) -> Self {
        let mut values = Vec::with_capacity(r_samples * t_samples * target_dim);
        for i in 0..r_samples {
            let s = window.0 + (window.1 - window.0) * i as f64 / (r_samples - 1) as f64;
            for j in 0..t_samples {
                let v = f(s, j as f64 / t_samples as f64);
                assert_eq!(v.len(), target_dim);
                values.extend(v);
            }
        }
        Self { r_samples, t_samples, target_dim, values }
    }

    pub fn validate(&self) -> Result<(), GlueError> {
        if self.r_samples < 2 || self.t_samples < 2 || self.target_dim == 0 {
            return Err(GlueError::Grid("grid sizes must be at least 2 and target_dim positive".into()));
        }
        if self.values.len() != self.r_samples * self.t_samples * self.target_dim {
            return Err(GlueError::Grid(format!(
                "values has length {}, expected {}",
                self.values.len(),
                self.r_samples * self.t_samples * self.target_dim
            )));
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(GlueError::Grid(format!("values[{i}] is not finite")));
        }
        Ok(())
    }

    pub fn at(&self, i: usize, j: usize) -> &[f64] {
        let o = (i * self.t_samples + j) * self.target_dim;
        &self.values[o..o + self.target_dim]
    }

    /// Row `i` interpolated linearly and periodically at angle `t`.
    pub fn row_at(&self, i: usize, t: f64) -> Vec<f64> {
        let x = reduce_turns(t) * self.t_samples as f64;
        let j = (x.floor() as usize).min(self.t_samples - 1);
        let w = x - j as f64;
        let (a, b) = (self.at(i, j), self.at(i, (j + 1) % self.t_samples));
        if w == 0.0 {
            return a.to_vec();
        }
        a.iter().zip(b).map(|(u, v)| (1.0 - w) * u + w * v).collect()
    }

    /// Bilinear interpolation at fractional row index `x` in `[0, r_samples - 1]`.
    pub fn interp(&self, x: f64, t: f64) -> Vec<f64> {
        let i = (x.floor().max(0.0) as usize).min(self.r_samples - 2);
        let w = x - i as f64;
        let lo = self.row_at(i, t);
        if w == 0.0 {
            return lo;
        }
        let hi = self.row_at(i + 1, t);
        lo.iter().zip(&hi).map(|(u, v)| (1.0 - w) * u + w * v).collect()
    }

    fn same_shape(&self, o: &Self) -> bool {
        self.r_samples == o.r_samples && self.t_samples == o.t_samples && self.target_dim == o.target_dim
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PlusGlued {
    /// `a = 0`: the pair is returned untouched.
    Unglued { plus: SampledNeckMap, minus: SampledNeckMap },
    /// The glued map on `[0, R] x S^1`.
    Glued { neck: GluedNeck, map: SampledNeckMap },
}

/// Glues `u_plus` (sampled on `[0, R] x S^1`) and `u_minus` (sampled on `[-R, 0] x S^1`)
/// with the cutoff: `beta(|s| - R/2) u+(s, t) + beta(|s'| - R/2) u-(s', t')`.
pub fn plus_glue(
    u_plus: &SampledNeckMap,
    u_minus: &SampledNeckMap,
    a: GluingParameter,
    p: GluingProfile,
    beta: Cutoff,
) -> Result<PlusGlued, GlueError> {
    u_plus.validate()?;
    u_minus.validate()?;
    if !u_plus.same_shape(u_minus) {
        return Err(GlueError::Grid("u+ and u- must share grid sizes and target dimension".into()));
    }
    if a.is_zero() {
        return Ok(PlusGlued::Unglued { plus: u_plus.clone(), minus: u_minus.clone() });
    }
    let neck = glue_neck(a, p)?;
    let r = neck.length;
    let n = u_plus.r_samples;
    let mut values = Vec::with_capacity(u_plus.values.len());
    for i in 0..n {
        // Row i of u- sits at s' = s - R on the same uniform grid.
        let s = r * i as f64 / (n - 1) as f64;
        let s_neg = r * (n - 1 - i) as f64 / (n - 1) as f64;
        let (wp, wm) = (beta.eval(s.abs() - r / 2.0), beta.eval(s_neg - r / 2.0));
        for j in 0..u_plus.t_samples {
            let t = j as f64 / u_plus.t_samples as f64;
            let up = u_plus.at(i, j);
            let um = u_minus.row_at(i, t - neck.angle);
            values.extend(up.iter().zip(&um).map(|(x, y)| wp * x + wm * y));
        }
    }
    Ok(PlusGlued::Glued { neck, map: SampledNeckMap { values, ..u_plus.clone() } })
}

fn mean_loop(u: &SampledNeckMap, x: f64, t_of: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut acc = vec![0.0; u.target_dim];
    for j in 0..u.t_samples {
        let v = u.interp(x, t_of(j as f64 / u.t_samples as f64));
        for (a, b) in acc.iter_mut().zip(v) {
            *a += b;
        }
    }
    acc.iter().map(|a| a / u.t_samples as f64).collect()
}

/// Trapezoidal average of `u` (sampled on `[0, R] x S^1` in x-side coordinates) over
/// the middle loop `s = R/2`. For `a = 0` the value at the node is returned.
pub fn middle_loop_average(
    u: &SampledNeckMap,
    a: GluingParameter,
    p: GluingProfile,
    node_value: Option<&[f64]>,
) -> Result<Vec<f64>, GlueError> {
    if a.is_zero() {
        return node_value.map(<[f64]>::to_vec).ok_or(GlueError::Unglued);
    }
    u.validate()?;
    glue_neck(a, p)?;
    Ok(mean_loop(u, 0.5 * (u.r_samples - 1) as f64, |t| t))
}

/// The same average computed by walking the middle loop in the y-side positive chart.
pub fn middle_loop_average_from_y(u: &SampledNeckMap, a: GluingParameter, p: GluingProfile) -> Result<Vec<f64>, GlueError> {
    u.validate()?;
    let neck = glue_neck(a, p)?;
    let x = 0.5 * (u.r_samples - 1) as f64;
    Ok(mean_loop(u, x, |t_y| neck.to_y_positive(neck.length / 2.0, t_y).1))
}

/// Extended positive real; `Infinite` is an explicit marker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn min(self, o: Self) -> Self {
        match (self, o) {
            (Self::Infinite, x) | (x, Self::Infinite) => x,
            (Self::Finite(a), Self::Finite(b)) => Self::Finite(a.min(b)),
        }
    }

    pub fn max(self, o: Self) -> Self {
        match (self, o) {
            (Self::Infinite, _) | (_, Self::Infinite) => Self::Infinite,
            (Self::Finite(a), Self::Finite(b)) => Self::Finite(a.max(b)),
        }
    }

    /// Product of positive extended reals.
    pub fn mul(self, o: Self) -> Self {
        match (self, o) {
            (Self::Finite(a), Self::Finite(b)) => Self::Finite(a * b),
            _ => Self::Infinite,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(x) => Some(x),
            Self::Infinite => None,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        match (self, o) {
            (Self::Infinite, Self::Infinite) => Some(Ordering::Equal),
            (Self::Infinite, _) => Some(Ordering::Greater),
            (_, Self::Infinite) => Some(Ordering::Less),
            (Self::Finite(a), Self::Finite(b)) => a.partial_cmp(b),
        }
    }
}

/// Region of a glued domain on which a weight is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    Core,
    UngluedTrivialCylinder,
    UngluedNodalDisk,
    GluedNodalNeck,
    /// Disk around a puncture on the bottom or top boundary of the building.
    ExteriorPuncture,
    UngluedPuncturePair,
    GluedPuncturePair,
    /// Maximal chain made only of glued trivial cylinders.
    ChainOfTrivialCylinders,
    /// Chain capped by a disk around a negative puncture, in negative coordinates.
    ChainNegativePuncture,
    /// Chain capped by a disk around a positive puncture.
    ChainPositivePuncture,
    /// Chain joining two non-trivial components.
    ChainBridge,
}

impl FromStr for RegionKind {
    type Err = GlueError;
    fn from_str(s: &str) -> Result<Self, GlueError> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| GlueError::Weight(format!("unknown region kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeckWeightConfig {
    pub kind: RegionKind,
    #[serde(default)]
    pub s: f64,
    /// Neck length `R`; required for the glued kinds.
    #[serde(default)]
    pub length: Option<f64>,
    pub delta: f64,
}

pub fn neck_weight(c: &NeckWeightConfig) -> Result<ExtReal, GlueError> {
    use RegionKind::*;
    if !(c.delta > 0.0) {
        return Err(GlueError::Weight(format!("delta must be positive, got {}", c.delta)));
    }
    let exp = |x: f64| ExtReal::Finite((c.delta * x).exp());
    let glued = || -> Result<ExtReal, GlueError> {
        let r = c.length.ok_or_else(|| GlueError::Weight(format!("{:?} needs the neck length", c.kind)))?;
        if !(0.0..=r).contains(&c.s) {
            return Err(GlueError::Weight(format!("s = {} outside [0, {r}]", c.s)));
        }
        Ok(exp(c.s).min(exp(r - c.s)))
    };
    match c.kind {
        Core => Ok(ExtReal::Finite(1.0)),
        UngluedTrivialCylinder | ChainOfTrivialCylinders => Ok(ExtReal::Infinite),
        UngluedNodalDisk | ExteriorPuncture | UngluedPuncturePair | ChainPositivePuncture => Ok(exp(c.s)),
        ChainNegativePuncture => Ok(exp(c.s.abs())),
        GluedNodalNeck | GluedPuncturePair | ChainBridge => glued(),
    }
}

/// Default grid resolution used to check rotation identities.
pub const ROTATION_GRID: usize = 24;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_examples() {
        let ex = GluingProfile::Exponential;
        assert_eq!(ex.eval(1.0).unwrap(), 0.0);
        assert!((ex.eval(0.5).unwrap() - 4.670774270471604).abs() < 1e-13);
        let cl = GluingProfile::Classical;
        assert!((cl.eval((-TAU).exp()).unwrap() - 1.0).abs() < 1e-15);
        assert!(ex.eval(0.0).is_err());
        assert!(ex.eval(1.5).is_err());
        assert!(cl.eval(1.0).is_err());
    }

    #[test]
    fn profiles_are_strictly_decreasing() {
        for p in [GluingProfile::Exponential, GluingProfile::Classical] {
            let vals: Vec<f64> = (1..99).map(|i| p.eval(i as f64 / 100.0).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn neck_examples() {
        let ex = GluingProfile::Exponential;
        let n = glue_neck(GluingParameter::new(0.5, 0.0).unwrap(), ex).unwrap();
        assert!((n.length - (E * E - E)).abs() < 1e-13);
        assert_eq!(n.to_positive(-1.0, 0.25), (n.length - 1.0, 0.25));
        let n = glue_neck(GluingParameter::new(0.5, 1.0 / 3.0).unwrap(), ex).unwrap();
        let (s, t) = n.to_positive(-2.0, 0.0);
        assert!((s - (n.length - 2.0)).abs() < 1e-15);
        assert!((t - 1.0 / 3.0).abs() < 1e-15);
        let (s2, t2) = n.to_negative(s, t);
        assert!((s2 + 2.0).abs() < 1e-14 && turn_distance(t2, 0.0) < 1e-15);
        assert_eq!(glue_neck(GluingParameter::zero(), ex), Err(GlueError::Unglued));
    }

    #[test]
    fn parameter_parsing() {
        let a: GluingParameter = "0.5@0.3333".parse().unwrap();
        assert_eq!(a.modulus(), 0.5);
        assert!(!a.is_small());
        let b: GluingParameter = "0.1@1.25".parse().unwrap();
        assert_eq!(b.angle(), 0.25);
        assert!("x@1".parse::<GluingParameter>().is_err());
        assert!("1.5@0".parse::<GluingParameter>().is_err());
    }

    #[test]
    fn rotation_identity_examples() {
        let ex = GluingProfile::Exponential;
        let a = GluingParameter::new(0.3, 0.1).unwrap();
        assert!(neck_rotation_identity_check(a, a, ex, 16).unwrap().holds);
        let half = GluingParameter::new(0.3, 0.6).unwrap();
        let rep = neck_rotation_identity_check(a, half, ex, 16).unwrap();
        assert!(rep.holds);
        assert!((rep.rotation - 0.5).abs() < 1e-15);
        // a half-turn of the y-disk negates the transition
        let z = LogPolar { ln_abs: -1.0, turns: 0.2 };
        let u = neck_transition(a, ex, z).unwrap().to_complex();
        let v = neck_transition(half, ex, z).unwrap().to_complex();
        assert!((u + v).norm() < 1e-12 * u.norm());
        let other = GluingParameter::new(0.2, 0.1).unwrap();
        assert!(matches!(neck_rotation_identity_check(a, other, ex, 4), Err(GlueError::ModuliDiffer(..))));
    }

    #[test]
    fn rotation_identity_on_long_necks() {
        for modulus in [0.22, 0.2424281155657315, 0.249] {
            let (a, b) = (GluingParameter::new(modulus, 0.52).unwrap(), GluingParameter::new(modulus, 0.98).unwrap());
            let rep = neck_rotation_identity_check(a, b, GluingProfile::Exponential, 12).unwrap();
            assert!(rep.holds, "{rep:?}");
        }
    }

    #[test]
    fn cutoff_examples() {
        assert_eq!(cutoff_eval(-1.0), 1.0);
        assert_eq!(cutoff_eval(0.0), 0.5);
        assert_eq!(cutoff_eval(2.0), 0.0);
        assert_eq!(cutoff_eval(1.0), 0.0);
        // Near the ends 1 - beta falls below f64 resolution, so strictness is only
        // observable on the inner part of the ramp.
        let v: Vec<f64> = (-99..100).map(|i| cutoff_eval(i as f64 / 100.0)).collect();
        assert!(v.windows(2).all(|w| w[0] >= w[1]));
        let inner: Vec<f64> = (-80..81).map(|i| cutoff_eval(i as f64 / 100.0)).collect();
        assert!(inner.windows(2).all(|w| w[0] > w[1]));
    }

    fn constant(c: f64, n: usize) -> SampledNeckMap {
        SampledNeckMap::from_fn(n, 16, 2, (0.0, 1.0), |_, _| vec![c, -c])
    }

    #[test]
    fn plus_glue_of_constants_is_constant() {
        let a = GluingParameter::new(0.2, 0.37).unwrap();
        let u = constant(3.0, 33);
        let PlusGlued::Glued { map, .. } = plus_glue(&u, &u, a, GluingProfile::Exponential, Cutoff).unwrap() else {
            panic!("expected glued output");
        };
        for (x, y) in map.values.iter().zip(&u.values) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn plus_glue_zero_parameter_keeps_pair() {
        let (u, v) = (constant(1.0, 8), constant(2.0, 8));
        let out = plus_glue(&u, &v, GluingParameter::zero(), GluingProfile::Classical, Cutoff).unwrap();
        assert_eq!(out, PlusGlued::Unglued { plus: u, minus: v });
    }

    #[test]
    fn plus_glue_rejects_mismatched_grids() {
        let err = plus_glue(&constant(1.0, 8), &constant(1.0, 9), GluingParameter::new(0.1, 0.0).unwrap(), GluingProfile::Classical, Cutoff);
        assert!(matches!(err, Err(GlueError::Grid(_))));
    }

    #[test]
    fn middle_loop_examples() {
        let a = GluingParameter::new(0.2, 0.3).unwrap();
        let ex = GluingProfile::Exponential;
        assert_eq!(middle_loop_average(&constant(2.5, 9), a, ex, None).unwrap(), vec![2.5, -2.5]);
        let r = ex.eval(0.2).unwrap();
        let u = SampledNeckMap::from_fn(65, 64, 1, (0.0, r), |_, t| vec![(TAU * t).sin()]);
        let avg = middle_loop_average(&u, a, ex, None).unwrap();
        assert!(avg[0].abs() < 1e-10);
        assert_eq!(middle_loop_average(&u, GluingParameter::zero(), ex, Some(&[7.0])).unwrap(), vec![7.0]);
        assert_eq!(middle_loop_average(&u, GluingParameter::zero(), ex, None), Err(GlueError::Unglued));
    }

    #[test]
    fn weight_examples() {
        let cfg = |kind, s, length| NeckWeightConfig { kind, s, length, delta: 0.5 };
        assert_eq!(neck_weight(&cfg(RegionKind::Core, 3.0, None)).unwrap(), ExtReal::Finite(1.0));
        assert_eq!(neck_weight(&cfg(RegionKind::UngluedTrivialCylinder, 3.0, None)).unwrap(), ExtReal::Infinite);
        let w = neck_weight(&cfg(RegionKind::GluedNodalNeck, 5.0, Some(10.0))).unwrap();
        assert!((w.finite().unwrap() - (0.5f64 * 5.0).exp()).abs() < 1e-12);
        assert!(neck_weight(&cfg(RegionKind::GluedNodalNeck, 5.0, None)).is_err());
        assert!("no-such-region".parse::<RegionKind>().is_err());
        assert_eq!("chain-bridge".parse::<RegionKind>().unwrap(), RegionKind::ChainBridge);
    }

    #[test]
    fn ext_real_arithmetic() {
        let (one, inf) = (ExtReal::Finite(1.0), ExtReal::Infinite);
        assert_eq!(one.min(inf), one);
        assert_eq!(inf.mul(one), inf);
        assert!(inf > one);
        assert_eq!(one.max(inf), inf);
    }
}
