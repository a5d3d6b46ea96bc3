//! Buildings: stacked floors of punctured nodal surfaces joined along interfaces,
//! their total gluing parameters, glued buildings, faces, interface shifts and
//! anchor constraints.
//!
//! Floors are numbered `0..=k`; interface `i` (for `1 <= i <= k`) joins the positive
//! punctures of floor `i - 1` to the negative punctures of floor `i` and is stored at
//! `interfaces[i - 1]`.

use crate::glue::{GlueError, GluingParameter, GluingProfile};
use crate::surface::{Component, NodalPair, NodalSurface, SpecialPoint, SurfaceError};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildingError {
    #[error("floor {floor}: {source}")]
    Surface { floor: usize, source: SurfaceError },
    #[error("invalid building: {0}")]
    Invalid(String),
    #[error("gluing parameter does not fit the building: {0}")]
    Shape(String),
    #[error("interface {0} mixes zero and nonzero gluing parameters")]
    Inadmissible(usize),
    #[error("outside the admissible region: {0}")]
    Region(String),
    #[error("anchor data: {0}")]
    Anchor(String),
    #[error(transparent)]
    Glue(#[from] GlueError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, BuildingError> {
    Err(BuildingError::Invalid(msg.into()))
}

/// Periodic orbit a puncture is asymptotic to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Asymptotic {
    pub orbit: String,
    pub period: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Floor {
    pub surface: NodalSurface,
    /// Components flagged as trivial cylinders.
    #[serde(default)]
    pub trivial_cylinders: Vec<String>,
    /// Asymptotic orbit of every puncture of this floor.
    #[serde(default)]
    pub asymptotics: BTreeMap<String, Asymptotic>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfacePair {
    /// Positive puncture of the lower floor.
    pub lower: String,
    /// Negative puncture of the upper floor it is matched with.
    pub upper: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Interface {
    pub pairs: Vec<InterfacePair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Building {
    pub floors: Vec<Floor>,
    #[serde(default)]
    pub interfaces: Vec<Interface>,
}

impl Building {
    pub fn validate(&self) -> Result<(), BuildingError> {
        if self.floors.is_empty() {
            return invalid("a building needs at least one floor");
        }
        if self.interfaces.len() + 1 != self.floors.len() {
            return invalid(format!("{} floors need {} interfaces, found {}", self.floors.len(), self.floors.len() - 1, self.interfaces.len()));
        }
        let mut comps = BTreeSet::new();
        let mut points = BTreeSet::new();
        for (i, f) in self.floors.iter().enumerate() {
            f.surface.validate().map_err(|source| BuildingError::Surface { floor: i, source })?;
            for c in &f.surface.components {
                if !comps.insert(c.id.as_str()) {
                    return invalid(format!("component `{}` appears on two floors", c.id));
                }
            }
            for p in f.surface.all_points() {
                if !points.insert(p.id.as_str()) {
                    return invalid(format!("point `{}` appears on two floors", p.id));
                }
            }
            let own: BTreeSet<&str> = f.surface.components.iter().map(|c| c.id.as_str()).collect();
            if let Some(t) = f.trivial_cylinders.iter().find(|t| !own.contains(t.as_str())) {
                return invalid(format!("floor {i}: trivial cylinder `{t}` is not a component"));
            }
            let punctures: BTreeSet<&str> =
                f.surface.punctures_pos.iter().chain(&f.surface.punctures_neg).map(|p| p.id.as_str()).collect();
            for p in &punctures {
                match f.asymptotics.get(*p) {
                    None => return invalid(format!("floor {i}: puncture `{p}` has no asymptotic orbit")),
                    Some(a) if !(a.period > 0.0 && a.period.is_finite()) => {
                        return invalid(format!("floor {i}: puncture `{p}` has period {}", a.period))
                    }
                    _ => {}
                }
            }
            if let Some(k) = f.asymptotics.keys().find(|k| !punctures.contains(k.as_str())) {
                return invalid(format!("floor {i}: asymptotic data for non-puncture `{k}`"));
            }
        }
        for (idx, iface) in self.interfaces.iter().enumerate() {
            let (lo, up) = (&self.floors[idx], &self.floors[idx + 1]);
            let mut lower: BTreeSet<&str> = lo.surface.punctures_pos.iter().map(|p| p.id.as_str()).collect();
            let mut upper: BTreeSet<&str> = up.surface.punctures_neg.iter().map(|p| p.id.as_str()).collect();
            for pair in &iface.pairs {
                if !lower.remove(pair.lower.as_str()) {
                    return invalid(format!("interface {}: `{}` is not an unused positive puncture of floor {idx}", idx + 1, pair.lower));
                }
                if !upper.remove(pair.upper.as_str()) {
                    return invalid(format!("interface {}: `{}` is not an unused negative puncture of floor {}", idx + 1, pair.upper, idx + 1));
                }
                let (a, b) = (&lo.asymptotics[&pair.lower], &up.asymptotics[&pair.upper]);
                if a.orbit != b.orbit {
                    return invalid(format!("interface {}: orbit `{}` matched with `{}`", idx + 1, a.orbit, b.orbit));
                }
                if (a.period - b.period).abs() > 1e-12 * a.period {
                    return invalid(format!("interface {}: periods {} and {} differ", idx + 1, a.period, b.period));
                }
            }
            if !lower.is_empty() || !upper.is_empty() {
                return invalid(format!("interface {} is not a bijection", idx + 1));
            }
        }
        Ok(())
    }

    /// Number of floors minus one.
    pub fn degeneracy(&self) -> usize {
        self.floors.len() - 1
    }

    fn period_of(&self, floor: usize, point: &str) -> Option<f64> {
        self.floors.get(floor)?.asymptotics.get(point).map(|a| a.period)
    }
}

pub fn degeneracy(b: &Building) -> Result<usize, BuildingError> {
    b.validate()?;
    Ok(b.degeneracy())
}

/// Splitting of a building at one interface into the floors below and above it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub interface: usize,
    pub lower: Building,
    pub upper: Building,
}

/// All splittings, one per interface.
pub fn faces(b: &Building) -> Result<Vec<Face>, BuildingError> {
    b.validate()?;
    Ok((1..b.floors.len())
        .map(|i| Face {
            interface: i,
            lower: Building { floors: b.floors[..i].to_vec(), interfaces: b.interfaces[..i - 1].to_vec() },
            upper: Building { floors: b.floors[i..].to_vec(), interfaces: b.interfaces[i..].to_vec() },
        })
        .collect())
}

pub fn face_count(b: &Building) -> Result<usize, BuildingError> {
    Ok(faces(b)?.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeParameter {
    pub pair: [String; 2],
    pub a: GluingParameter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceParameter {
    /// The lower puncture of the interface pair.
    pub lower: String,
    pub a: GluingParameter,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TotalGluingParameter {
    pub floors: Vec<Vec<NodeParameter>>,
    pub interfaces: Vec<Vec<InterfaceParameter>>,
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl TotalGluingParameter {
    /// The zero parameter for `b`.
    pub fn zero(b: &Building) -> Self {
        Self {
            floors: b
                .floors
                .iter()
                .map(|f| {
                    f.surface
                        .nodal_pairs
                        .iter()
                        .map(|p| NodeParameter { pair: [p.0.id.clone(), p.1.id.clone()], a: GluingParameter::zero() })
                        .collect()
                })
                .collect(),
            interfaces: b
                .interfaces
                .iter()
                .map(|i| i.pairs.iter().map(|p| InterfaceParameter { lower: p.lower.clone(), a: GluingParameter::zero() }).collect())
                .collect(),
        }
    }

    /// Checks that entries match the building's nodal pairs and interface pairs exactly
    /// and that every modulus is below 1/4.
    pub fn check_shape(&self, b: &Building) -> Result<(), BuildingError> {
        let shape = |m: String| Err(BuildingError::Shape(m));
        if self.floors.len() != b.floors.len() || self.interfaces.len() != b.interfaces.len() {
            return shape("floor or interface count differs from the building".into());
        }
        for (i, (params, floor)) in self.floors.iter().zip(&b.floors).enumerate() {
            let want: BTreeSet<_> = floor.surface.nodal_pairs.iter().map(NodalPair::key).collect();
            let got: BTreeSet<_> = params.iter().map(|p| pair_key(&p.pair[0], &p.pair[1])).collect();
            if want != got || got.len() != params.len() {
                return shape(format!("floor {i}: parameters do not match the nodal pairs"));
            }
        }
        for (i, (params, iface)) in self.interfaces.iter().zip(&b.interfaces).enumerate() {
            let want: BTreeSet<&str> = iface.pairs.iter().map(|p| p.lower.as_str()).collect();
            let got: BTreeSet<&str> = params.iter().map(|p| p.lower.as_str()).collect();
            if want != got || got.len() != params.len() {
                return shape(format!("interface {}: parameters do not match the interface pairs", i + 1));
            }
        }
        let all = self.floors.iter().flatten().map(|p| p.a).chain(self.interfaces.iter().flatten().map(|p| p.a));
        if let Some(a) = all.into_iter().find(|a| !a.is_small()) {
            return shape(format!("modulus {} is not below 1/4", a.modulus()));
        }
        Ok(())
    }

    fn node_map(&self, floor: usize) -> BTreeMap<(String, String), GluingParameter> {
        self.floors[floor].iter().map(|p| (pair_key(&p.pair[0], &p.pair[1]), p.a)).collect()
    }

    fn interface_zero(&self, i: usize) -> bool {
        self.interfaces[i - 1].iter().all(|p| p.a.is_zero())
    }

    /// Entries sorted by key, so that equal parameters compare equal.
    pub fn canonical(mut self) -> Self {
        for f in &mut self.floors {
            for p in f.iter_mut() {
                p.pair.sort();
            }
            f.sort_by(|x, y| x.pair.cmp(&y.pair));
        }
        for i in &mut self.interfaces {
            i.sort_by(|x, y| x.lower.cmp(&y.lower));
        }
        self
    }
}

/// Every interface is either identically zero or nowhere zero.
pub fn is_admissible(b: &Building, p: &TotalGluingParameter) -> Result<bool, BuildingError> {
    b.validate()?;
    p.check_shape(b)?;
    Ok(p.interfaces.iter().all(|i| i.iter().all(|x| x.a.is_zero()) || i.iter().all(|x| !x.a.is_zero())))
}

/// Indices `i` (1-based) of the interfaces whose parameters vanish identically.
pub fn nontrivial_interfaces(b: &Building, p: &TotalGluingParameter) -> Result<Vec<usize>, BuildingError> {
    if !is_admissible(b, p)? {
        let bad = (1..=p.interfaces.len())
            .find(|&i| {
                let v = &p.interfaces[i - 1];
                v.iter().any(|x| x.a.is_zero()) && v.iter().any(|x| !x.a.is_zero())
            })
            .unwrap_or(0);
        return Err(BuildingError::Inadmissible(bad));
    }
    Ok((1..=p.interfaces.len()).filter(|&i| p.interface_zero(i)).collect())
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Glues every nonzero nodal pair and every nonzero interface.
///
/// Floor `e` of the result merges the original floors between consecutive vanishing
/// interfaces. Merged components are named by joining their ids with `+`; their genus
/// is `sum g + #glued pairs - #components + 1`. A merged component is a trivial
/// cylinder exactly when all its pieces are.
pub fn glue_building(b: &Building, p: &TotalGluingParameter) -> Result<Building, BuildingError> {
    let cuts = nontrivial_interfaces(b, p)?;
    let k = b.degeneracy();
    let mut starts = vec![0];
    starts.extend(&cuts);
    let mut floors = Vec::with_capacity(starts.len());
    for (e, &lo) in starts.iter().enumerate() {
        let hi = starts.get(e + 1).map_or(k, |&s| s - 1);
        floors.push(glue_block(b, p, lo, hi));
    }
    let interfaces = cuts.iter().map(|&i| b.interfaces[i - 1].clone()).collect();
    Ok(Building { floors, interfaces })
}

fn glue_block(b: &Building, p: &TotalGluingParameter, lo: usize, hi: usize) -> Floor {
    let block = &b.floors[lo..=hi];
    let comps: Vec<&Component> = block.iter().flat_map(|f| &f.surface.components).collect();
    let index: BTreeMap<&str, usize> = comps.iter().enumerate().map(|(i, c)| (c.id.as_str(), i)).collect();
    let carrier: BTreeMap<&str, &str> = block
        .iter()
        .flat_map(|f| f.surface.all_points())
        .map(|pt| (pt.id.as_str(), pt.component.as_str()))
        .collect();
    let mut uf = UnionFind((0..comps.len()).collect());
    let mut glued_edges: Vec<usize> = Vec::new();
    let mut surviving = Vec::new();
    for (off, f) in block.iter().enumerate() {
        let params = p.node_map(lo + off);
        for pair in &f.surface.nodal_pairs {
            let (a, c) = (index[pair.0.component.as_str()], index[pair.1.component.as_str()]);
            if params[&pair.key()].is_zero() {
                surviving.push(pair);
            } else {
                uf.union(a, c);
                glued_edges.push(a);
            }
        }
    }
    for i in lo + 1..=hi {
        for pair in &b.interfaces[i - 1].pairs {
            let (a, c) = (index[carrier[pair.lower.as_str()]], index[carrier[pair.upper.as_str()]]);
            uf.union(a, c);
            glued_edges.push(a);
        }
    }

    let trivial: BTreeSet<&str> = block.iter().flat_map(|f| f.trivial_cylinders.iter().map(String::as_str)).collect();
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..comps.len() {
        members.entry(uf.find(i)).or_default().push(i);
    }
    let mut edges_per_root: BTreeMap<usize, i64> = BTreeMap::new();
    for a in glued_edges {
        *edges_per_root.entry(uf.find(a)).or_default() += 1;
    }
    let mut name = BTreeMap::new();
    let mut components = Vec::new();
    for i in 0..comps.len() {
        let root = uf.find(i);
        if name.contains_key(&root) {
            continue;
        }
        let m = &members[&root];
        let id = m.iter().map(|&j| comps[j].id.as_str()).collect::<Vec<_>>().join("+");
        let genus_sum: i64 = m.iter().map(|&j| comps[j].genus as i64).sum();
        let genus = genus_sum + edges_per_root.get(&root).copied().unwrap_or(0) - m.len() as i64 + 1;
        components.push(Component { id: id.clone(), genus: genus as u32 });
        name.insert(root, id);
    }
    let mut rename = |c: &str| -> String { name[&uf.find(index[c])].clone() };
    let moved = |pt: &SpecialPoint, rename: &mut dyn FnMut(&str) -> String| SpecialPoint::new(pt.id.clone(), rename(&pt.component));

    let marked = block.iter().flat_map(|f| &f.surface.marked).map(|pt| moved(pt, &mut rename)).collect();
    let nodal_pairs = surviving
        .iter()
        .map(|pair| NodalPair(moved(&pair.0, &mut rename), moved(&pair.1, &mut rename)))
        .collect();
    let punctures_neg: Vec<SpecialPoint> = block[0].surface.punctures_neg.iter().map(|pt| moved(pt, &mut rename)).collect();
    let punctures_pos: Vec<SpecialPoint> = block[hi - lo].surface.punctures_pos.iter().map(|pt| moved(pt, &mut rename)).collect();

    let mut trivial_cylinders: Vec<String> = Vec::new();
    for t in block.iter().flat_map(|f| &f.trivial_cylinders) {
        let root = uf.find(index[t.as_str()]);
        let all_trivial = members[&root].iter().all(|&j| trivial.contains(comps[j].id.as_str()));
        let id = name[&root].clone();
        if all_trivial && !trivial_cylinders.contains(&id) {
            trivial_cylinders.push(id);
        }
    }
    let kept: BTreeSet<&str> = punctures_neg.iter().chain(&punctures_pos).map(|pt| pt.id.as_str()).collect();
    let asymptotics = block
        .iter()
        .flat_map(|f| &f.asymptotics)
        .filter(|(k, _)| kept.contains(k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    Floor {
        surface: NodalSurface { components, marked, nodal_pairs, punctures_pos, punctures_neg },
        trivial_cylinders,
        asymptotics,
    }
}

/// Interface gluing parameter from the shift formula
/// `T phi(|a|) = phi(r) + c_high - c_low`, where `c_low` belongs to the lower puncture
/// and `c_high` to the upper one. `r = 0` gives `a = 0`; the angle is passed through.
pub fn interface_gluing_parameter(
    r: f64,
    c_low: f64,
    c_high: f64,
    period: f64,
    profile: GluingProfile,
    angle: f64,
) -> Result<GluingParameter, BuildingError> {
    if !(period > 0.0) {
        return Err(BuildingError::Region(format!("period must be positive, got {period}")));
    }
    if r == 0.0 {
        return Ok(GluingParameter::zero());
    }
    let shifted = profile.eval(r)? + c_high - c_low;
    if !(shifted > 0.0) {
        return Err(BuildingError::Region(format!("phi(r) + c_high - c_low = {shifted} is not positive")));
    }
    let modulus = profile.invert(shifted / period).map_err(|e| BuildingError::Region(e.to_string()))?;
    if !(modulus > 0.0 && modulus < GluingParameter::SMALL) {
        return Err(BuildingError::Region(format!("|a| = {modulus} is not in (0, 1/4)")));
    }
    Ok(GluingParameter::new(modulus, angle)?)
}

/// Asymptotic constants `c^z` per puncture.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    pub values: BTreeMap<String, f64>,
}

/// `r = 0`, or for every pair `(z, b(z))` of interface `i` both
/// `phi(r) - c^z + c^{b(z)} > 0` and `phi^{-1}((...) / T_z)` lies in `(0, 1/4)`.
pub fn admissible_region_check(
    b: &Building,
    r: f64,
    constants: &AsymptoticConstants,
    interface: usize,
    profile: GluingProfile,
) -> Result<bool, BuildingError> {
    b.validate()?;
    if interface == 0 || interface > b.interfaces.len() {
        return invalid(format!("no interface {interface}"));
    }
    if r == 0.0 {
        return Ok(true);
    }
    let phi = profile.eval(r)?;
    for pair in &b.interfaces[interface - 1].pairs {
        let c = |id: &str| {
            constants.values.get(id).copied().ok_or_else(|| BuildingError::Invalid(format!("no asymptotic constant for `{id}`")))
        };
        let (c_low, c_high) = (c(&pair.lower)?, c(&pair.upper)?);
        let period = b.period_of(interface - 1, &pair.lower).expect("validated");
        let x = phi - c_low + c_high;
        if !(x > 0.0) {
            return Ok(false);
        }
        match profile.invert(x / period) {
            Ok(m) if m > 0.0 && m < GluingParameter::SMALL => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub point: String,
    pub value: f64,
}

/// Anchor sets with their real coordinates, one list per floor.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnchorData {
    pub floors: Vec<Vec<Anchor>>,
}

pub fn anchor_average(data: &AnchorData, floor: usize) -> Result<f64, BuildingError> {
    let set = data.floors.get(floor).ok_or_else(|| BuildingError::Anchor(format!("no floor {floor}")))?;
    if set.is_empty() {
        return Err(BuildingError::Anchor(format!("anchor set of floor {floor} is empty")));
    }
    Ok(set.iter().map(|a| a.value).sum::<f64>() / set.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorReport {
    pub averages: Vec<f64>,
    pub violations: Vec<String>,
}

impl AnchorReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Tolerance for the vanishing of averages at block starts.
pub const ANCHOR_ZERO_TOL: f64 = 1e-12;

/// Averages vanish at the first floor of each glued block, and strictly increase
/// inside a block: `av_{i-1} < av_i` for `i_e < i < i_{e+1}`.
pub fn check_anchor_constraints(data: &AnchorData, nontrivial: &[usize]) -> Result<AnchorReport, BuildingError> {
    let k = data.floors.len().checked_sub(1).ok_or_else(|| BuildingError::Anchor("no floors".into()))?;
    if nontrivial.windows(2).any(|w| w[0] >= w[1]) || nontrivial.iter().any(|&i| i == 0 || i > k) {
        return Err(BuildingError::Anchor(format!("interface list {nontrivial:?} is not increasing within 1..={k}")));
    }
    let averages = (0..=k).map(|i| anchor_average(data, i)).collect::<Result<Vec<_>, _>>()?;
    let mut starts = vec![0];
    starts.extend_from_slice(nontrivial);
    let mut violations = Vec::new();
    for (e, &s) in starts.iter().enumerate() {
        if averages[s].abs() > ANCHOR_ZERO_TOL {
            violations.push(format!("average on floor {s} is {} instead of 0", averages[s]));
        }
        let end = starts.get(e + 1).copied().unwrap_or(k + 1);
        for i in s + 1..end {
            if !(averages[i - 1] < averages[i]) {
                violations.push(format!("averages on floors {} and {i} are not increasing ({} >= {})", i - 1, averages[i - 1], averages[i]));
            }
        }
    }
    Ok(AnchorReport { averages, violations })
}

/// Relabelling of points, used to transport gluing parameters along symmetries.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PointPermutation {
    pub points: BTreeMap<String, String>,
}

impl PointPermutation {
    fn image<'a>(&'a self, p: &'a str) -> &'a str {
        self.points.get(p).map_or(p, String::as_str)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let keys: BTreeSet<&String> = self.points.keys().chain(other.points.keys()).collect();
        Self { points: keys.into_iter().map(|k| (k.clone(), self.image(other.image(k)).to_string())).collect() }
    }
}

/// `g_* a`: the parameter of a pair is moved to the image pair.
pub fn push_forward(p: &TotalGluingParameter, g: &PointPermutation) -> TotalGluingParameter {
    TotalGluingParameter {
        floors: p
            .floors
            .iter()
            .map(|f| {
                f.iter()
                    .map(|n| NodeParameter { pair: [g.image(&n.pair[0]).to_string(), g.image(&n.pair[1]).to_string()], a: n.a })
                    .collect()
            })
            .collect(),
        interfaces: p
            .interfaces
            .iter()
            .map(|i| i.iter().map(|n| InterfaceParameter { lower: g.image(&n.lower).to_string(), a: n.a }).collect())
            .collect(),
    }
    .canonical()
}
