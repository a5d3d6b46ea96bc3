//! Moduli-class bookkeeping: kinds, grading laws, the induction order, multisection
//! weights with exact rational arithmetic, and the graded bracket on class functions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("invalid component counts ({total} total, {nontrivial} nontrivial)")]
    Counts { total: usize, nontrivial: usize },
    #[error("class `{0}` is declared twice")]
    Duplicate(String),
    #[error("class `{class}` refers to unknown class `{target}`")]
    Dangling { class: String, target: String },
    #[error("class `{0}`: {1}")]
    Malformed(String, String),
    #[error("class `{class}` has no {field}")]
    MissingField { class: String, field: &'static str },
    #[error("face precedence has a cycle through `{0}`")]
    Cycle(String),
    #[error("weights must lie in [0, 1] and sum to 1, got sum {0}")]
    NotNormalized(String),
    #[error("fiber arithmetic undefined: {0}")]
    Fiber(String),
    #[error("cannot parse rational `{0}`")]
    Rational(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassKind {
    Parent,
    Descendant,
    UnionParent,
    UnionDescendant,
}

impl ClassKind {
    /// Position within one level of the induction: p < d < up < ud.
    pub fn rank(self) -> u8 {
        self as u8
    }

    pub fn is_union(self) -> bool {
        matches!(self, Self::UnionParent | Self::UnionDescendant)
    }
}

/// Kind of a class from the number of domain components and of non-trivial ones.
pub fn classify(total: usize, nontrivial: usize) -> Result<ClassKind, ClassifyError> {
    match (total, nontrivial) {
        (t, n) if n == 0 || n > t => Err(ClassifyError::Counts { total: t, nontrivial: n }),
        (1, 1) => Ok(ClassKind::Parent),
        (_, 1) => Ok(ClassKind::Descendant),
        (t, n) if n == t => Ok(ClassKind::UnionParent),
        _ => Ok(ClassKind::UnionDescendant),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn bit(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuliClass {
    pub id: String,
    pub kind: ClassKind,
    /// Complexity: the largest degeneracy occurring in the class.
    #[serde(default)]
    pub dbar: Option<u32>,
    /// Grading, at least -1 (-1 meaning the class misses the solution set).
    #[serde(default)]
    pub dj: Option<i64>,
    /// Constituent parent classes of a union class.
    #[serde(default)]
    pub children: Vec<String>,
    /// Ordered pairs `(a', a'')` of classes forming the faces.
    #[serde(default)]
    pub faces: Vec<[String; 2]>,
    /// Parent (resp. union-parent) of a descendant (resp. union-descendant).
    #[serde(default)]
    pub parent: Option<String>,
    /// Fredholm index.
    #[serde(default)]
    pub index: Option<i64>,
    #[serde(default)]
    pub grading: Option<Parity>,
}

impl ModuliClass {
    pub fn new(id: impl Into<String>, kind: ClassKind) -> Self {
        Self { id: id.into(), kind, dbar: None, dj: None, children: vec![], faces: vec![], parent: None, index: None, grading: None }
    }

    /// Declared parity, else the one implied by the index: odd exactly when the
    /// index is even.
    pub fn parity(&self) -> Option<Parity> {
        self.grading.or(self.index.map(|i| if i.rem_euclid(2) == 0 { Parity::Odd } else { Parity::Even }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Universe {
    pub classes: Vec<ModuliClass>,
}

impl Universe {
    pub fn validate(&self) -> Result<BTreeMap<&str, &ModuliClass>, ClassifyError> {
        let mut map = BTreeMap::new();
        for c in &self.classes {
            if map.insert(c.id.as_str(), c).is_some() {
                return Err(ClassifyError::Duplicate(c.id.clone()));
            }
        }
        let dangling = |c: &ModuliClass, t: &str| ClassifyError::Dangling { class: c.id.clone(), target: t.to_string() };
        let bad = |c: &ModuliClass, m: &str| ClassifyError::Malformed(c.id.clone(), m.to_string());
        for c in &self.classes {
            for t in c.faces.iter().flatten().chain(&c.children).chain(&c.parent) {
                if !map.contains_key(t.as_str()) {
                    return Err(dangling(c, t));
                }
            }
            if matches!(c.dj, Some(d) if d < -1) {
                return Err(bad(c, "d^J below -1"));
            }
            match c.kind {
                ClassKind::UnionParent if c.children.len() < 2 => return Err(bad(c, "a union needs at least two children")),
                ClassKind::UnionParent if c.children.iter().any(|ch| map[ch.as_str()].kind != ClassKind::Parent) => {
                    return Err(bad(c, "children of a union must be parents"))
                }
                ClassKind::Descendant | ClassKind::UnionDescendant => {
                    let want = if c.kind == ClassKind::Descendant { ClassKind::Parent } else { ClassKind::UnionParent };
                    match &c.parent {
                        Some(p) if map[p.as_str()].kind == want => {}
                        _ => return Err(bad(c, "descendant classes need a parent of the matching kind")),
                    }
                }
                _ => {}
            }
        }
        Ok(map)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawViolation {
    /// 1: descendant equals parent; 2: face inequality; 3: union sum; 4: union descendant.
    pub law: u8,
    pub class: String,
    pub detail: String,
}

/// Checks the four grading laws and returns every violation found.
pub fn check_dj_laws(u: &Universe) -> Result<Vec<LawViolation>, ClassifyError> {
    let map = u.validate()?;
    let dj = |id: &str| map[id].dj.ok_or_else(|| ClassifyError::MissingField { class: id.to_string(), field: "dj" });
    let mut out = Vec::new();
    for c in &u.classes {
        let d = dj(&c.id)?;
        match c.kind {
            ClassKind::Descendant | ClassKind::UnionDescendant => {
                let p = c.parent.as_deref().expect("validated");
                let dp = dj(p)?;
                if d != dp {
                    let law = if c.kind == ClassKind::Descendant { 1 } else { 4 };
                    out.push(LawViolation { law, class: c.id.clone(), detail: format!("d^J = {d} but parent `{p}` has {dp}") });
                }
            }
            ClassKind::UnionParent => {
                let sum: i64 = c.children.iter().map(|ch| dj(ch).map(|x| x + 1)).sum::<Result<i64, _>>()?;
                if d + 1 != sum {
                    out.push(LawViolation { law: 3, class: c.id.clone(), detail: format!("d^J + 1 = {} but children give {sum}", d + 1) });
                }
            }
            ClassKind::Parent => {}
        }
        for [a1, a2] in &c.faces {
            let (d1, d2) = (dj(a1)?, dj(a2)?);
            if d < 1 + d1 + d2 {
                out.push(LawViolation {
                    law: 2,
                    class: c.id.clone(),
                    detail: format!("face ({a1}, {a2}): {d} < 1 + {d1} + {d2}"),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleMode {
    /// Levels by complexity `dbar`.
    #[default]
    Contact,
    /// Levels by `d^J`.
    Dj,
}

impl std::str::FromStr for ScheduleMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "contact" => Ok(Self::Contact),
            "dj" => Ok(Self::Dj),
            o => Err(format!("unknown schedule mode `{o}` (use contact or dj)")),
        }
    }
}

/// Order in which classes are treated: ascending `(level, kind rank, id)`, except that
/// both classes of a face always precede the class carrying it. When the key order
/// already respects faces the two coincide.
pub fn induction_schedule(u: &Universe, mode: ScheduleMode) -> Result<Vec<String>, ClassifyError> {
    let map = u.validate()?;
    let mut keys = BTreeMap::new();
    for c in &u.classes {
        let level = match mode {
            ScheduleMode::Contact => c.dbar.map(i64::from).ok_or(ClassifyError::MissingField { class: c.id.clone(), field: "dbar" })?,
            ScheduleMode::Dj => c.dj.ok_or(ClassifyError::MissingField { class: c.id.clone(), field: "dj" })?,
        };
        keys.insert(c.id.as_str(), (level, c.kind.rank(), c.id.as_str()));
    }
    let mut pending: BTreeMap<&str, usize> = map.keys().map(|k| (*k, 0)).collect();
    let mut after: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for c in &u.classes {
        let before: BTreeSet<&str> = c.faces.iter().flatten().map(String::as_str).collect();
        for b in before {
            *pending.get_mut(c.id.as_str()).expect("known") += 1;
            after.entry(b).or_default().push(c.id.as_str());
        }
    }
    let mut ready: BinaryHeap<Reverse<(i64, u8, &str)>> =
        pending.iter().filter(|(_, n)| **n == 0).map(|(id, _)| Reverse(keys[id])).collect();
    let mut order = Vec::with_capacity(u.classes.len());
    while let Some(Reverse((_, _, id))) = ready.pop() {
        order.push(id.to_string());
        for next in after.get(id).into_iter().flatten() {
            let n = pending.get_mut(next).expect("known");
            *n -= 1;
            if *n == 0 {
                ready.push(Reverse(keys[next]));
            }
        }
    }
    if order.len() < u.classes.len() {
        let stuck = pending.iter().find(|(id, n)| **n > 0 && !order.iter().any(|o| o == *id)).map(|(id, _)| *id).unwrap_or("");
        return Err(ClassifyError::Cycle(stuck.to_string()));
    }
    Ok(order)
}

/// True when every face class precedes its carrier in `order`.
pub fn respects_faces(u: &Universe, order: &[String]) -> bool {
    let pos: BTreeMap<&str, usize> = order.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    u.classes.iter().all(|c| c.faces.iter().flatten().all(|f| pos[f.as_str()] < pos[c.id.as_str()]))
}

pub fn parse_rational(s: &str) -> Result<BigRational, ClassifyError> {
    let t = s.trim();
    let r = match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| ClassifyError::Rational(s.into()))?;
            let d: BigInt = d.trim().parse().map_err(|_| ClassifyError::Rational(s.into()))?;
            if d.is_zero() {
                return Err(ClassifyError::Rational(s.into()));
            }
            BigRational::new(n, d)
        }
        None => BigRational::from_integer(t.parse().map_err(|_| ClassifyError::Rational(s.into()))?),
    };
    Ok(r)
}

/// Serde adapter writing rationals as `"p/q"` strings and reading strings or integers.
pub mod rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) => parse_rational(&s).map_err(de::Error::custom),
            serde_json::Value::Number(n) if n.is_i64() => Ok(BigRational::from_integer(n.as_i64().expect("checked").into())),
            other => Err(de::Error::custom(format!("expected a rational string, got {other}"))),
        }
    }
}

/// Element of `Q^d`, written in JSON as an array of rationals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FiberVector(pub Vec<BigRational>);

impl FiberVector {
    pub fn from_ints(v: &[i64]) -> Self {
        Self(v.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }
}

impl Serialize for FiberVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.iter().map(|r| r.to_string()).collect::<Vec<_>>().serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiberVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<serde_json::Value>::deserialize(d)?;
        raw.into_iter()
            .map(|v| rational_serde::deserialize(v).map_err(de::Error::custom))
            .collect::<Result<_, _>>()
            .map(FiberVector)
    }
}

/// Commutative monoid structure on fiber elements, with an optional scalar action.
pub trait FiberMonoid {
    type Elem: Ord + Clone;
    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem, ClassifyError>;
    fn scale(&self, beta: &BigRational, e: &Self::Elem) -> Result<Self::Elem, ClassifyError>;
}

/// Vector semantics on `Q^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VectorFibers {
    pub dim: usize,
}

impl FiberMonoid for VectorFibers {
    type Elem = FiberVector;

    fn zero(&self) -> FiberVector {
        FiberVector(vec![BigRational::zero(); self.dim])
    }

    fn add(&self, a: &FiberVector, b: &FiberVector) -> Result<FiberVector, ClassifyError> {
        if a.0.len() != self.dim || b.0.len() != self.dim {
            return Err(ClassifyError::Fiber(format!("expected vectors of length {}", self.dim)));
        }
        Ok(FiberVector(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect()))
    }

    fn scale(&self, beta: &BigRational, e: &FiberVector) -> Result<FiberVector, ClassifyError> {
        Ok(FiberVector(e.0.iter().map(|x| beta * x).collect()))
    }
}

/// Opaque ids with an explicit addition table and optional scalar table.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TableFibers {
    pub zero: String,
    /// Entries `[a, b, a + b]`; commutativity is assumed.
    #[serde(default)]
    pub add: Vec<[String; 3]>,
    /// Entries `[beta, e, beta e]` with `beta` a rational string.
    #[serde(default)]
    pub scale: Vec<[String; 3]>,
}

impl FiberMonoid for TableFibers {
    type Elem = String;

    fn zero(&self) -> String {
        self.zero.clone()
    }

    fn add(&self, a: &String, b: &String) -> Result<String, ClassifyError> {
        if *a == self.zero {
            return Ok(b.clone());
        }
        if *b == self.zero {
            return Ok(a.clone());
        }
        self.add
            .iter()
            .find(|[x, y, _]| (x == a && y == b) || (x == b && y == a))
            .map(|e| e[2].clone())
            .ok_or_else(|| ClassifyError::Fiber(format!("{a} + {b} is not in the table")))
    }

    fn scale(&self, beta: &BigRational, e: &String) -> Result<String, ClassifyError> {
        if beta.is_one() || *e == self.zero {
            return Ok(e.clone());
        }
        for [b, x, y] in &self.scale {
            if x == e && parse_rational(b)? == *beta {
                return Ok(y.clone());
            }
        }
        Err(ClassifyError::Fiber(format!("{beta} * {e} leaves the declared fiber set")))
    }
}

/// Finitely supported rational weights summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multisection<E: Ord> {
    weights: BTreeMap<E, BigRational>,
    flagged: BTreeSet<E>,
}

impl<E: Ord + Clone> Multisection<E> {
    pub fn new(entries: impl IntoIterator<Item = (E, BigRational)>) -> Result<Self, ClassifyError> {
        Self::with_flags(entries, [])
    }

    /// `flagged` lists elements that are nonzero on a trivial cylinder component.
    pub fn with_flags(entries: impl IntoIterator<Item = (E, BigRational)>, flagged: impl IntoIterator<Item = E>) -> Result<Self, ClassifyError> {
        let mut weights: BTreeMap<E, BigRational> = BTreeMap::new();
        for (e, w) in entries {
            if w.is_negative() || w > BigRational::one() {
                return Err(ClassifyError::NotNormalized(format!("entry weight {w}")));
            }
            *weights.entry(e).or_insert_with(BigRational::zero) += w;
        }
        weights.retain(|_, w| !w.is_zero());
        let total: BigRational = weights.values().sum();
        if !total.is_one() {
            return Err(ClassifyError::NotNormalized(total.to_string()));
        }
        let flagged = flagged.into_iter().filter(|e| weights.contains_key(e)).collect();
        Ok(Self { weights, flagged })
    }

    /// All weight on `zero`.
    pub fn trivial(zero: E) -> Self {
        Self { weights: BTreeMap::from([(zero, BigRational::one())]), flagged: BTreeSet::new() }
    }

    pub fn weight(&self, e: &E) -> BigRational {
        self.weights.get(e).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn weights(&self) -> &BTreeMap<E, BigRational> {
        &self.weights
    }

    pub fn is_flagged(&self, e: &E) -> bool {
        self.flagged.contains(e)
    }

    pub fn total(&self) -> BigRational {
        self.weights.values().sum()
    }
}

#[derive(Serialize, Deserialize)]
struct WeightEntry<E> {
    element: E,
    #[serde(with = "rational_serde")]
    weight: BigRational,
    #[serde(default)]
    nonzero_on_trivial_cylinder: bool,
}

#[derive(Serialize, Deserialize)]
struct MultisectionRepr<E> {
    weights: Vec<WeightEntry<E>>,
}

impl<E: Ord + Clone + Serialize> Serialize for Multisection<E> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MultisectionRepr {
            weights: self
                .weights
                .iter()
                .map(|(e, w)| WeightEntry { element: e.clone(), weight: w.clone(), nonzero_on_trivial_cylinder: self.flagged.contains(e) })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, E: Ord + Clone + Deserialize<'de>> Deserialize<'de> for Multisection<E> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = MultisectionRepr::<E>::deserialize(d)?;
        let flagged: Vec<E> = repr.weights.iter().filter(|w| w.nonzero_on_trivial_cylinder).map(|w| w.element.clone()).collect();
        Multisection::with_flags(repr.weights.into_iter().map(|w| (w.element, w.weight)), flagged).map_err(de::Error::custom)
    }
}

/// Weight of a composite element: zero when it is nonzero on a trivial cylinder,
/// otherwise the product of the component weights.
pub fn compatibility_eval(parts: &[BigRational], trivial_flag: bool) -> BigRational {
    if trivial_flag {
        return BigRational::zero();
    }
    parts.iter().fold(BigRational::one(), |acc, w| acc * w)
}

/// Convolution: the weight of `e` is the sum of `l(e') r(e'')` over `e' + e'' = e`.
pub fn convolution<M: FiberMonoid>(m: &M, l: &Multisection<M::Elem>, r: &Multisection<M::Elem>) -> Result<Multisection<M::Elem>, ClassifyError> {
    let mut out: BTreeMap<M::Elem, BigRational> = BTreeMap::new();
    let mut flagged = BTreeSet::new();
    for (a, wa) in &l.weights {
        for (b, wb) in &r.weights {
            let e = m.add(a, b)?;
            if l.is_flagged(a) || r.is_flagged(b) {
                flagged.insert(e.clone());
            }
            *out.entry(e).or_insert_with(BigRational::zero) += wa * wb;
        }
    }
    Multisection::with_flags(out, flagged)
}

/// Rescaling: the weight of `e` becomes the old weight of `e / beta`; `beta = 0`
/// gives the trivial multisection.
pub fn rescale<M: FiberMonoid>(m: &M, beta: &BigRational, l: &Multisection<M::Elem>) -> Result<Multisection<M::Elem>, ClassifyError> {
    if beta.is_zero() {
        return Ok(Multisection::trivial(m.zero()));
    }
    let mut out = Vec::new();
    let mut flagged = Vec::new();
    for (e, w) in &l.weights {
        let image = m.scale(beta, e)?;
        if l.is_flagged(e) {
            flagged.push(image.clone());
        }
        out.push((image, w.clone()));
    }
    Multisection::with_flags(out, flagged)
}

/// Rational function on class ids with finite support.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GradedFunction {
    #[serde(with = "rational_map")]
    pub values: BTreeMap<String, BigRational>,
}

mod rational_map {
    use super::*;

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, BigRational>, s: S) -> Result<S::Ok, S::Error> {
        m.iter().map(|(k, v)| (k.clone(), v.to_string())).collect::<BTreeMap<_, _>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, BigRational>, D::Error> {
        BTreeMap::<String, serde_json::Value>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| rational_serde::deserialize(v).map(|r| (k, r)).map_err(de::Error::custom))
            .collect()
    }
}

impl GradedFunction {
    pub fn get(&self, id: &str) -> BigRational {
        self.values.get(id).cloned().unwrap_or_else(BigRational::zero)
    }

    fn prune(mut self) -> Self {
        self.values.retain(|_, v| !v.is_zero());
        self
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut v = self.values.clone();
        for (k, x) in &o.values {
            *v.entry(k.clone()).or_insert_with(BigRational::zero) += x;
        }
        Self { values: v }.prune()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self { values: self.values.iter().map(|(k, v)| (k.clone(), v * c)).collect() }.prune()
    }

    /// Even and odd parts with respect to the class parities of `u`.
    pub fn split(&self, u: &Universe) -> Result<[Self; 2], ClassifyError> {
        let map = u.validate()?;
        let mut parts = [Self::default(), Self::default()];
        for (k, v) in &self.values {
            let c = map.get(k.as_str()).ok_or_else(|| ClassifyError::Dangling { class: "<function>".into(), target: k.clone() })?;
            let p = c.parity().ok_or(ClassifyError::MissingField { class: k.clone(), field: "grading or index" })?;
            parts[p.bit() as usize].values.insert(k.clone(), v.clone());
        }
        Ok(parts.map(Self::prune))
    }
}

fn bracket_homogeneous(g: &GradedFunction, f: &GradedFunction, sign: &BigRational, u: &Universe) -> GradedFunction {
    let mut out = BTreeMap::new();
    for c in &u.classes {
        let mut acc = BigRational::zero();
        for [a1, a2] in &c.faces {
            acc += g.get(a1) * f.get(a2) + sign * f.get(a1) * g.get(a2);
        }
        if !acc.is_zero() {
            out.insert(c.id.clone(), acc);
        }
    }
    GradedFunction { values: out }
}

/// `[g, f]_a = sum over faces (a', a'') of g(a') f(a'') + (-1)^{|g||f|} f(a') g(a'')`,
/// extended bilinearly over the even and odd parts.
pub fn super_commutator(g: &GradedFunction, f: &GradedFunction, u: &Universe) -> Result<GradedFunction, ClassifyError> {
    u.validate()?;
    let (gs, fs) = (g.split(u)?, f.split(u)?);
    let mut out = GradedFunction::default();
    for (i, gi) in gs.iter().enumerate() {
        for (j, fj) in fs.iter().enumerate() {
            let sign = if i * j == 1 { -BigRational::one() } else { BigRational::one() };
            out = out.add(&bracket_homogeneous(gi, fj, &sign, u));
        }
    }
    Ok(out)
}

/// `[g, f] - sum_{i,j} (-1)^{ij} [f_j, g_i]` over the homogeneous parts; identically
/// zero by graded commutativity.
pub fn graded_commutativity_defect(g: &GradedFunction, f: &GradedFunction, u: &Universe) -> Result<GradedFunction, ClassifyError> {
    let lhs = super_commutator(g, f, u)?;
    let (gs, fs) = (g.split(u)?, f.split(u)?);
    let mut rhs = GradedFunction::default();
    for (i, gi) in gs.iter().enumerate() {
        for (j, fj) in fs.iter().enumerate() {
            let sign = if i * j == 1 { -BigRational::one() } else { BigRational::one() };
            rhs = rhs.add(&super_commutator(fj, gi, u)?.scale(&sign));
        }
    }
    Ok(lhs.add(&rhs.scale(&-BigRational::one())))
}
