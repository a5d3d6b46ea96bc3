#![allow(dead_code)]

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sft_core::building::{Asymptotic, Building, Floor, Interface, InterfacePair};
use sft_core::classify::{ClassKind, FiberVector, GradedFunction, ModuliClass, Multisection, Universe};
use sft_core::linalg::j0;
use sft_core::spectral::{SymplecticPath, UnitaryLoop};
use sft_core::surface::{Component, NodalPair, NodalSurface, SpecialPoint};
use std::collections::BTreeMap;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize, amplitude: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-amplitude..amplitude));
    (&a + a.transpose()) * 0.5
}

/// `t -> exp(t J0 S)` for a random symmetric `S`, resampled until the endpoint is
/// nondegenerate.
pub fn random_symplectic_path<R: Rng>(rng: &mut R, pairs: usize, samples: usize) -> SymplecticPath {
    let dim = 2 * pairs;
    loop {
        let scale = rng.gen_range(0.5..4.0);
        let generator = j0(dim) * random_symmetric(rng, dim, 1.0) * scale;
        let path = SymplecticPath::from_fn(dim, samples, |t| (&generator * t).exp()).expect("exponentials are symplectic");
        if path.nondegenerate_endpoint() {
            return path;
        }
    }
}

/// Real form of `t -> U(t) U(0)^*`, a loop of symplectic matrices based at the identity.
pub fn unitary_loop_path(u: &UnitaryLoop, samples: usize) -> SymplecticPath {
    let base = u.real_at(0.0).0.transpose();
    SymplecticPath::from_fn(2 * u.size(), samples, |t| u.real_at(t).0 * &base).expect("unitary loops are symplectic")
}

pub fn rotation_path(dim: usize, total_angle: f64, samples: usize) -> SymplecticPath {
    SymplecticPath::from_fn(dim, samples, |t| {
        let (s, c) = (total_angle * t).sin_cos();
        let mut m = DMatrix::identity(dim, dim);
        m[(0, 0)] = c;
        m[(0, 1)] = -s;
        m[(1, 0)] = s;
        m[(1, 1)] = c;
        m
    })
    .unwrap()
}

fn point(id: String, component: &str) -> SpecialPoint {
    SpecialPoint::new(id, component)
}

/// A valid building with 1 to 5 floors, random components, nodes, interfaces and
/// exterior punctures.
pub fn random_building<R: Rng>(rng: &mut R) -> Building {
    let levels = rng.gen_range(1..=5);
    let crossings: Vec<Vec<Asymptotic>> = (0..levels - 1)
        .map(|i| {
            (0..rng.gen_range(1..=2))
                .map(|j| Asymptotic { orbit: format!("g{i}_{j}"), period: rng.gen_range(0.5..3.0) })
                .collect()
        })
        .collect();
    let mut floors = Vec::new();
    for f in 0..levels {
        let comps: Vec<String> = (0..rng.gen_range(1..=3)).map(|c| format!("f{f}c{c}")).collect();
        let pick = |rng: &mut R| comps[rng.gen_range(0..comps.len())].clone();
        let mut s = NodalSurface {
            components: comps.iter().map(|id| Component { id: id.clone(), genus: rng.gen_range(0..=1) }).collect(),
            marked: vec![],
            nodal_pairs: vec![],
            punctures_pos: vec![],
            punctures_neg: vec![],
        };
        for k in 0..rng.gen_range(0..=3) {
            let c = pick(rng);
            s.marked.push(point(format!("f{f}m{k}"), &c));
        }
        for k in 0..rng.gen_range(0..=2) {
            let (a, b) = (pick(rng), pick(rng));
            s.nodal_pairs.push(NodalPair(point(format!("f{f}x{k}"), &a), point(format!("f{f}y{k}"), &b)));
        }
        let mut asymptotics = BTreeMap::new();
        if f + 1 < levels {
            for (j, a) in crossings[f].iter().enumerate() {
                let id = format!("f{f}p{j}");
                s.punctures_pos.push(point(id.clone(), &pick(rng)));
                asymptotics.insert(id, a.clone());
            }
        } else {
            for j in 0..rng.gen_range(0..=1) {
                let id = format!("f{f}top{j}");
                s.punctures_pos.push(point(id.clone(), &pick(rng)));
                asymptotics.insert(id, Asymptotic { orbit: format!("top{j}"), period: 1.0 });
            }
        }
        if f > 0 {
            for (j, a) in crossings[f - 1].iter().enumerate() {
                let id = format!("f{f}q{j}");
                s.punctures_neg.push(point(id.clone(), &pick(rng)));
                asymptotics.insert(id, a.clone());
            }
        } else {
            for j in 0..rng.gen_range(0..=1) {
                let id = format!("f{f}bottom{j}");
                s.punctures_neg.push(point(id.clone(), &pick(rng)));
                asymptotics.insert(id, Asymptotic { orbit: format!("bottom{j}"), period: 1.0 });
            }
        }
        let trivial_cylinders = comps.iter().filter(|_| rng.gen_bool(0.15)).cloned().collect();
        floors.push(Floor { surface: s, trivial_cylinders, asymptotics });
    }
    let interfaces = (0..levels - 1)
        .map(|i| Interface {
            pairs: (0..crossings[i].len()).map(|j| InterfacePair { lower: format!("f{i}p{j}"), upper: format!("f{}q{j}", i + 1) }).collect(),
        })
        .collect();
    Building { floors, interfaces }
}

fn class(id: String, kind: ClassKind, dj: i64, dbar: u32, index: i64) -> ModuliClass {
    ModuliClass { dj: Some(dj), dbar: Some(dbar), index: Some(index), ..ModuliClass::new(id, kind) }
}

/// A universe satisfying all boundary laws in which every parent has a descendant and
/// every union-parent a union-descendant, so that shifting any single grading breaks a
/// law.
pub fn random_universe<R: Rng>(rng: &mut R) -> Universe {
    let mut classes: Vec<ModuliClass> = Vec::new();
    let parents = rng.gen_range(2..=6);
    for i in 0..parents {
        let dj = if i == 0 { rng.gen_range(0..=3) } else { rng.gen_range(-1..=3) };
        let mut c = class(format!("P{i}"), ClassKind::Parent, dj, rng.gen_range(0..=3), rng.gen_range(-3..=3));
        for _ in 0..2 {
            if i < 1 || !rng.gen_bool(0.6) {
                continue;
            }
            let (a, b) = (rng.gen_range(0..i), rng.gen_range(0..i));
            let (da, db) = (classes[a].dj.unwrap(), classes[b].dj.unwrap());
            if dj >= 1 + da + db {
                c.faces.push([classes[a].id.clone(), classes[b].id.clone()]);
            }
        }
        classes.push(c);
    }
    let unions = rng.gen_range(0..=2);
    for u in 0..unions {
        let mut ids: Vec<usize> = (0..parents).collect();
        ids.shuffle(rng);
        let children: Vec<usize> = ids[..rng.gen_range(2..=parents.min(3))].to_vec();
        let dj = children.iter().map(|&c| classes[c].dj.unwrap() + 1).sum::<i64>() - 1;
        let mut c = class(format!("U{u}"), ClassKind::UnionParent, dj, rng.gen_range(0..=3), rng.gen_range(-3..=3));
        c.children = children.iter().map(|&i| classes[i].id.clone()).collect();
        classes.push(c);
    }
    let base: Vec<ModuliClass> = classes.clone();
    for p in &base {
        let kind = match p.kind {
            ClassKind::Parent => ClassKind::Descendant,
            _ => ClassKind::UnionDescendant,
        };
        let prefix = if kind == ClassKind::Descendant { "D" } else { "UD" };
        let mut d = class(format!("{prefix}{}", p.id), kind, p.dj.unwrap(), rng.gen_range(0..=3), rng.gen_range(-3..=3));
        d.parent = Some(p.id.clone());
        classes.push(d);
    }
    classes.shuffle(rng);
    Universe { classes }
}

pub fn small_rational<R: Rng>(rng: &mut R) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(-6..=6)), BigInt::from(rng.gen_range(1..=5)))
}

pub fn random_graded_function<R: Rng>(rng: &mut R, u: &Universe) -> GradedFunction {
    let mut values = BTreeMap::new();
    for c in &u.classes {
        if rng.gen_bool(0.7) {
            values.insert(c.id.clone(), small_rational(rng));
        }
    }
    GradedFunction { values }
}

/// A multisection over `Q^dim` with 1 to 4 elements and positive weights.
pub fn random_multisection<R: Rng>(rng: &mut R, dim: usize) -> Multisection<FiberVector> {
    let n = rng.gen_range(1..=4);
    let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
    let total: i64 = raw.iter().sum();
    let mut entries: BTreeMap<FiberVector, BigRational> = BTreeMap::new();
    for w in raw {
        let e = FiberVector::from_ints(&(0..dim).map(|_| rng.gen_range(-3..=3)).collect::<Vec<_>>());
        *entries.entry(e).or_insert_with(|| BigRational::from_integer(0.into())) += BigRational::new(w.into(), total.into());
    }
    Multisection::new(entries).expect("weights sum to one")
}
