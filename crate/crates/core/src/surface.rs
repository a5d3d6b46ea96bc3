//! Nodal surface combinatorics: stability, arithmetic genus, deformation dimension,
//! nodal-type graphs and their isomorphisms, automorphisms and small disk structures.
//!
//! Points and components are identified by opaque string ids only.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("duplicate component id `{0}`")]
    DuplicateComponent(String),
    #[error("point id `{0}` used more than once")]
    DuplicatePoint(String),
    #[error("point `{point}` references unknown component `{component}`")]
    UnknownComponent { point: String, component: String },
    #[error("surface is unstable: component(s) {0:?} fail 2g + #special >= 3")]
    Unstable(Vec<String>),
    #[error("graph edge references unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("automorphism data is not a bijection: {0}")]
    NotBijective(String),
    #[error("small disk structure: {0}")]
    DiskStructure(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub id: String,
    pub genus: u32,
}

/// A point together with the component carrying it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpecialPoint {
    pub id: String,
    pub component: String,
}

impl SpecialPoint {
    pub fn new(id: impl Into<String>, component: impl Into<String>) -> Self {
        Self { id: id.into(), component: component.into() }
    }
}

/// Unordered pair; stored as a two-element array in JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodalPair(pub SpecialPoint, pub SpecialPoint);

impl NodalPair {
    pub fn ids(&self) -> [&str; 2] {
        [&self.0.id, &self.1.id]
    }

    /// Order-independent key, smaller id first.
    pub fn key(&self) -> (String, String) {
        let (a, b) = (self.0.id.clone(), self.1.id.clone());
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodalSurface {
    pub components: Vec<Component>,
    #[serde(default)]
    pub marked: Vec<SpecialPoint>,
    #[serde(default)]
    pub nodal_pairs: Vec<NodalPair>,
    #[serde(default)]
    pub punctures_pos: Vec<SpecialPoint>,
    #[serde(default)]
    pub punctures_neg: Vec<SpecialPoint>,
}

/// Which points count as special when testing stability or counting marked points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// Marked and nodal points only.
    #[default]
    Plain,
    /// Punctures are absorbed into the marked points.
    DmData,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentStability {
    pub component: String,
    pub genus: u32,
    pub special_points: usize,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub components: Vec<ComponentStability>,
    pub stable: bool,
}

impl NodalSurface {
    pub fn validate(&self) -> Result<(), SurfaceError> {
        let mut comps = BTreeSet::new();
        for c in &self.components {
            if !comps.insert(c.id.as_str()) {
                return Err(SurfaceError::DuplicateComponent(c.id.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for p in self.all_points() {
            if !comps.contains(p.component.as_str()) {
                return Err(SurfaceError::UnknownComponent {
                    point: p.id.clone(),
                    component: p.component.clone(),
                });
            }
            // Distinct ids also give x != y inside a pair, disjoint pairs and M ∩ |D| = ∅.
            if !seen.insert(p.id.as_str()) {
                return Err(SurfaceError::DuplicatePoint(p.id.clone()));
            }
        }
        Ok(())
    }

    pub fn all_points(&self) -> impl Iterator<Item = &SpecialPoint> {
        self.marked
            .iter()
            .chain(self.nodal_pairs.iter().flat_map(|p| [&p.0, &p.1]))
            .chain(self.punctures_pos.iter())
            .chain(self.punctures_neg.iter())
    }

    fn marked_like(&self, conv: Convention) -> impl Iterator<Item = &SpecialPoint> {
        let punctures: &[SpecialPoint] = if conv == Convention::DmData { &self.punctures_pos } else { &[] };
        let negs: &[SpecialPoint] = if conv == Convention::DmData { &self.punctures_neg } else { &[] };
        self.marked.iter().chain(punctures).chain(negs)
    }

    /// Number of marked points under the given convention.
    pub fn marked_count(&self, conv: Convention) -> usize {
        self.marked_like(conv).count()
    }
}

/// Stability with punctures counted as special points.
pub fn check_stability(s: &NodalSurface) -> Result<StabilityReport, SurfaceError> {
    check_stability_with(s, Convention::DmData)
}

pub fn check_stability_with(s: &NodalSurface, conv: Convention) -> Result<StabilityReport, SurfaceError> {
    s.validate()?;
    let mut counts: BTreeMap<&str, usize> = s.components.iter().map(|c| (c.id.as_str(), 0)).collect();
    let nodal = s.nodal_pairs.iter().flat_map(|p| [&p.0, &p.1]);
    for p in s.marked_like(conv).chain(nodal) {
        *counts.get_mut(p.component.as_str()).expect("validated") += 1;
    }
    let components: Vec<_> = s
        .components
        .iter()
        .map(|c| {
            let k = counts[c.id.as_str()];
            ComponentStability {
                component: c.id.clone(),
                genus: c.genus,
                special_points: k,
                stable: 2 * c.genus as usize + k >= 3,
            }
        })
        .collect();
    let stable = components.iter().all(|c| c.stable);
    Ok(StabilityReport { components, stable })
}

/// `1 + #D + sum_C (g(C) - 1)`.
pub fn arithmetic_genus(s: &NodalSurface) -> Result<i64, SurfaceError> {
    s.validate()?;
    let sum: i64 = s.components.iter().map(|c| c.genus as i64 - 1).sum();
    Ok(1 + s.nodal_pairs.len() as i64 + sum)
}

/// Complex dimension `3 g_a - 3 + #M - #D` of the deformation space; requires stability
/// under the same convention used to count marked points.
pub fn deformation_dimension(s: &NodalSurface, conv: Convention) -> Result<i64, SurfaceError> {
    let report = check_stability_with(s, conv)?;
    if !report.stable {
        let bad = report.components.into_iter().filter(|c| !c.stable).map(|c| c.component).collect();
        return Err(SurfaceError::Unstable(bad));
    }
    let ga = arithmetic_genus(s)?;
    Ok(3 * ga - 3 + s.marked_count(conv) as i64 - s.nodal_pairs.len() as i64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: String,
    pub genus: u32,
    pub marked: u32,
}

/// Vertex-decorated multigraph; loops allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoratedGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<[String; 2]>,
}

impl DecoratedGraph {
    pub fn validate(&self) -> Result<(), SurfaceError> {
        let mut ids = BTreeSet::new();
        for v in &self.vertices {
            if !ids.insert(v.id.as_str()) {
                return Err(SurfaceError::DuplicateVertex(v.id.clone()));
            }
        }
        for e in self.edges.iter().flatten() {
            if !ids.contains(e.as_str()) {
                return Err(SurfaceError::UnknownVertex(e.clone()));
            }
        }
        Ok(())
    }

    /// Edge number `e(v)`; a loop contributes 2.
    pub fn edge_number(&self, v: &str) -> u32 {
        self.edges.iter().flatten().filter(|x| x.as_str() == v).count() as u32
    }

    /// `2g(v) + m(v) + e(v) >= 3` at every vertex.
    pub fn is_stable(&self) -> bool {
        self.vertices.iter().all(|v| 2 * v.genus + v.marked + self.edge_number(&v.id) >= 3)
    }

    fn index(&self) -> BTreeMap<&str, usize> {
        self.vertices.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect()
    }

    /// Symmetric edge-multiplicity matrix; loops on the diagonal counted once each.
    fn adjacency(&self) -> Vec<Vec<u32>> {
        let idx = self.index();
        let n = self.vertices.len();
        let mut a = vec![vec![0u32; n]; n];
        for [x, y] in &self.edges {
            let (i, j) = (idx[x.as_str()], idx[y.as_str()]);
            a[i][j] += 1;
            if i != j {
                a[j][i] += 1;
            }
        }
        a
    }
}

pub fn nodal_type(s: &NodalSurface, conv: Convention) -> Result<DecoratedGraph, SurfaceError> {
    s.validate()?;
    let vertices = s
        .components
        .iter()
        .map(|c| Vertex {
            id: c.id.clone(),
            genus: c.genus,
            marked: s.marked_like(conv).filter(|p| p.component == c.id).count() as u32,
        })
        .collect();
    let edges = s.nodal_pairs.iter().map(|p| [p.0.component.clone(), p.1.component.clone()]).collect();
    Ok(DecoratedGraph { vertices, edges })
}

/// Label- and multiplicity-preserving vertex bijection `g1 -> g2`, if one exists.
///
/// Vertices are bucketed by `(genus, marked, edge number, loops)`; ties are resolved by
/// backtracking with incremental adjacency checks.
pub fn graphs_isomorphic(g1: &DecoratedGraph, g2: &DecoratedGraph) -> Result<Option<BTreeMap<String, String>>, SurfaceError> {
    g1.validate()?;
    g2.validate()?;
    let n = g1.vertices.len();
    if n != g2.vertices.len() || g1.edges.len() != g2.edges.len() {
        return Ok(None);
    }
    let (a1, a2) = (g1.adjacency(), g2.adjacency());
    let sig = |g: &DecoratedGraph, a: &Vec<Vec<u32>>, i: usize| {
        let v = &g.vertices[i];
        (v.genus, v.marked, g.edge_number(&v.id), a[i][i])
    };
    let s1: Vec<_> = (0..n).map(|i| sig(g1, &a1, i)).collect();
    let s2: Vec<_> = (0..n).map(|i| sig(g2, &a2, i)).collect();
    let (mut c1, mut c2) = (s1.clone(), s2.clone());
    c1.sort();
    c2.sort();
    if c1 != c2 {
        return Ok(None);
    }
    // Visit rare signatures first to prune early.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (s1.iter().filter(|s| **s == s1[i]).count(), s1[i], i));

    fn extend(
        k: usize,
        order: &[usize],
        s1: &[(u32, u32, u32, u32)],
        s2: &[(u32, u32, u32, u32)],
        a1: &[Vec<u32>],
        a2: &[Vec<u32>],
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let i = order[k];
        for j in 0..s2.len() {
            if used[j] || s2[j] != s1[i] {
                continue;
            }
            let consistent = order[..k].iter().all(|&p| {
                let q = map[p].expect("assigned");
                a1[i][p] == a2[j][q]
            });
            if !consistent {
                continue;
            }
            map[i] = Some(j);
            used[j] = true;
            if extend(k + 1, order, s1, s2, a1, a2, map, used) {
                return true;
            }
            map[i] = None;
            used[j] = false;
        }
        false
    }

    let mut map = vec![None; n];
    let mut used = vec![false; n];
    if !extend(0, &order, &s1, &s2, &a1, &a2, &mut map, &mut used) {
        return Ok(None);
    }
    Ok(Some(
        (0..n)
            .map(|i| (g1.vertices[i].id.clone(), g2.vertices[map[i].expect("complete")].id.clone()))
            .collect(),
    ))
}

/// Component and point permutations of a single surface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceAutomorphism {
    pub components: BTreeMap<String, String>,
    pub points: BTreeMap<String, String>,
}

impl SurfaceAutomorphism {
    pub fn identity(s: &NodalSurface) -> Self {
        Self {
            components: s.components.iter().map(|c| (c.id.clone(), c.id.clone())).collect(),
            points: s.all_points().map(|p| (p.id.clone(), p.id.clone())).collect(),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self, SurfaceError> {
        let chain = |outer: &BTreeMap<String, String>, inner: &BTreeMap<String, String>| {
            inner
                .iter()
                .map(|(k, v)| {
                    outer
                        .get(v)
                        .map(|w| (k.clone(), w.clone()))
                        .ok_or_else(|| SurfaceError::NotBijective(format!("`{v}` has no image")))
                })
                .collect::<Result<BTreeMap<_, _>, _>>()
        };
        Ok(Self { components: chain(&self.components, &other.components)?, points: chain(&self.points, &other.points)? })
    }

    pub fn inverse(&self) -> Result<Self, SurfaceError> {
        let flip = |m: &BTreeMap<String, String>| {
            let mut out = BTreeMap::new();
            for (k, v) in m {
                if out.insert(v.clone(), k.clone()).is_some() {
                    return Err(SurfaceError::NotBijective(format!("`{v}` hit twice")));
                }
            }
            Ok(out)
        };
        Ok(Self { components: flip(&self.components)?, points: flip(&self.points)? })
    }

    pub fn apply_point(&self, p: &str) -> Option<&str> {
        self.points.get(p).map(String::as_str)
    }
}

fn check_bijection(map: &BTreeMap<String, String>, domain: &BTreeSet<&str>, what: &str) -> Result<(), SurfaceError> {
    let keys: BTreeSet<&str> = map.keys().map(String::as_str).collect();
    let values: BTreeSet<&str> = map.values().map(String::as_str).collect();
    if keys != *domain || values != *domain || values.len() != map.len() {
        return Err(SurfaceError::NotBijective(format!("{what} map is not a permutation of the {what} ids")));
    }
    Ok(())
}

/// True iff `phi` preserves genera, incidences, marked points, nodal pairs and signed
/// punctures. Errors when the maps are not permutations of the surface's ids.
pub fn validate_automorphism(s: &NodalSurface, phi: &SurfaceAutomorphism) -> Result<bool, SurfaceError> {
    s.validate()?;
    let comps: BTreeSet<&str> = s.components.iter().map(|c| c.id.as_str()).collect();
    let pts: BTreeSet<&str> = s.all_points().map(|p| p.id.as_str()).collect();
    check_bijection(&phi.components, &comps, "component")?;
    check_bijection(&phi.points, &pts, "point")?;

    let genus: BTreeMap<&str, u32> = s.components.iter().map(|c| (c.id.as_str(), c.genus)).collect();
    if genus.iter().any(|(c, g)| genus[phi.components[*c].as_str()] != *g) {
        return Ok(false);
    }
    let carrier: BTreeMap<&str, &str> = s.all_points().map(|p| (p.id.as_str(), p.component.as_str())).collect();
    if carrier.iter().any(|(p, c)| carrier[phi.points[*p].as_str()] != phi.components[*c]) {
        return Ok(false);
    }
    let preserves = |set: &[SpecialPoint]| {
        let ids: BTreeSet<&str> = set.iter().map(|p| p.id.as_str()).collect();
        ids.iter().all(|p| ids.contains(phi.points[*p].as_str()))
    };
    if !preserves(&s.marked) || !preserves(&s.punctures_pos) || !preserves(&s.punctures_neg) {
        return Ok(false);
    }
    let pairs: BTreeSet<(String, String)> = s.nodal_pairs.iter().map(NodalPair::key).collect();
    let ok = s.nodal_pairs.iter().all(|pair| {
        let [x, y] = pair.ids();
        let image = NodalPair(
            SpecialPoint::new(phi.points[x].clone(), ""),
            SpecialPoint::new(phi.points[y].clone(), ""),
        );
        pairs.contains(&image.key())
    });
    Ok(ok)
}

/// Orbit of a point under the group generated by `generators`, sorted.
pub fn orbit_of(point: &str, generators: &[SurfaceAutomorphism]) -> Result<Vec<String>, SurfaceError> {
    let mut seen = BTreeSet::from([point.to_string()]);
    let mut queue = VecDeque::from([point.to_string()]);
    while let Some(p) = queue.pop_front() {
        for g in generators {
            let q = g
                .apply_point(&p)
                .ok_or_else(|| SurfaceError::NotBijective(format!("point `{p}` has no image")))?;
            if seen.insert(q.to_string()) {
                queue.push_back(q.to_string());
            }
        }
    }
    Ok(seen.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disk {
    pub id: String,
    /// The nodal point the disk is centred at.
    pub center: String,
    /// Orbit label; disks in one group orbit share it.
    #[serde(default)]
    pub orbit: Option<String>,
}

/// Declared small disk structure: one disk per nodal point, plus declared facts about
/// overlaps and about which special points lie inside which disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmallDiskStructureSpec {
    pub disks: Vec<Disk>,
    #[serde(default)]
    pub overlaps: Vec<[String; 2]>,
    #[serde(default)]
    pub contains: Vec<[String; 2]>,
}

pub fn validate_disk_structure(
    s: &NodalSurface,
    d: &SmallDiskStructureSpec,
    group: &[SurfaceAutomorphism],
) -> Result<(), SurfaceError> {
    s.validate()?;
    let err = |m: String| Err(SurfaceError::DiskStructure(m));
    let nodal: BTreeSet<&str> = s.nodal_pairs.iter().flat_map(|p| p.ids()).collect();
    let mut by_center: BTreeMap<&str, &Disk> = BTreeMap::new();
    let mut ids = BTreeSet::new();
    for disk in &d.disks {
        if !ids.insert(disk.id.as_str()) {
            return err(format!("duplicate disk id `{}`", disk.id));
        }
        if !nodal.contains(disk.center.as_str()) {
            return err(format!("disk `{}` is not centred at a nodal point", disk.id));
        }
        if by_center.insert(disk.center.as_str(), disk).is_some() {
            return err(format!("nodal point `{}` carries two disks", disk.center));
        }
    }
    if let Some(p) = nodal.iter().find(|p| !by_center.contains_key(*p)) {
        return err(format!("nodal point `{p}` has no disk"));
    }
    if let Some([a, b]) = d.overlaps.first() {
        return err(format!("disks `{a}` and `{b}` are declared to overlap"));
    }
    let special: BTreeSet<&str> = s.all_points().map(|p| p.id.as_str()).collect();
    for [disk, point] in &d.contains {
        if !ids.contains(disk.as_str()) {
            return err(format!("unknown disk `{disk}`"));
        }
        if special.contains(point.as_str()) {
            return err(format!("disk `{disk}` contains special point `{point}`"));
        }
    }
    for g in group {
        if !validate_automorphism(s, g)? {
            return err("group element is not an automorphism".into());
        }
        for disk in &d.disks {
            let image = by_center[g.points[&disk.center].as_str()];
            if image.orbit != disk.orbit {
                return err(format!("disk `{}` is mapped to disk `{}` with a different orbit label", disk.id, image.id));
            }
        }
    }
    Ok(())
}
