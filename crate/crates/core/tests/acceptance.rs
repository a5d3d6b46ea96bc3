//! Acceptance suite. Runs without the libtest harness so that every criterion prints
//! one PASS/FAIL line; the process fails when any criterion fails.

mod common;

use common::*;
use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use sft_core::average::{averaged_euler, BundleModel};
use sft_core::building::{face_count, glue_building, TotalGluingParameter};
use sft_core::classify::{
    check_dj_laws, compatibility_eval, ClassKind, convolution, graded_commutativity_defect, induction_schedule, rescale, respects_faces, ScheduleMode,
    VectorFibers,
};
use sft_core::glue::{cutoff_eval, neck_rotation_identity_check, plus_glue, Cutoff, GluingParameter, GluingProfile, PlusGlued, SampledNeckMap};
use sft_core::spectral::{
    conjugation_invariance_check, cz_index, maslov_index, model_contact_check, parity_check, q_phi_check, richardson_smallest, smallest_magnitude,
    spectral_gap, spectrum, AsymptoticOperator, CoefficientLoop, Ellipsoid, PhiProfile, SpectralError, SymplecticPath, UnitaryLoop,
};
use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn criterion(number: usize, title: &str, limit: Option<Duration>, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(body));
    let elapsed = start.elapsed();
    let (mut pass, mut detail) = match result {
        Ok(o) => (o.pass, o.detail),
        Err(e) => {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    if let Some(limit) = limit {
        detail.push_str(&format!("; {:.2} s (limit {} s)", elapsed.as_secs_f64(), limit.as_secs()));
        if elapsed > limit {
            pass = false;
        }
    } else {
        detail.push_str(&format!("; {:.2} s", elapsed.as_secs_f64()));
    }
    println!("{} [{number:2}] {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

/// Axiom checks on one random case; `Ok` holds the violated identities.
fn cz_case(seed: u64, samples: usize) -> Result<Vec<String>, SpectralError> {
    let mut r = rng(1000 + seed);
    let pairs = r.gen_range(1..=2);
    let psi = random_symplectic_path(&mut r, pairs, samples);
    let phi = random_symplectic_path(&mut r, 1, samples);
    let lp = unitary_loop_path(&UnitaryLoop::random(pairs, &mut r), samples);
    let mut bad = Vec::new();
    let c = cz_index(&psi)?;
    let inv = cz_index(&psi.inverse())?;
    if inv != -c {
        bad.push(format!("inverse {inv} vs {c}"));
    }
    let sum = cz_index(&psi.direct_sum(&phi)?)?;
    let cphi = cz_index(&phi)?;
    if sum != c + cphi {
        bad.push(format!("direct sum {sum} vs {c} + {cphi}"));
    }
    let mu = maslov_index(&lp)?;
    let shifted = cz_index(&lp.product(&psi)?)?;
    if shifted != c + 2 * mu {
        bad.push(format!("loop shift {shifted} vs {c} + 2*{mu}"));
    }
    Ok(bad)
}

fn cz_axioms() -> Outcome {
    let halfturn = rotation_path(2, PI, 64);
    let normalization = cz_index(&halfturn).unwrap_or(i64::MIN);
    let failures: Vec<String> = (0..200u64)
        .into_par_iter()
        .filter_map(|seed| {
            // paths whose rotation function moves too fast are resampled more finely
            let mut samples = 256;
            let result = loop {
                match cz_case(seed, samples) {
                    Err(SpectralError::Sampling(_)) if samples < 4096 => samples *= 4,
                    other => break other,
                }
            };
            match result {
                Ok(bad) if bad.is_empty() => None,
                Ok(bad) => Some(format!("seed {seed}: {}", bad.join(", "))),
                Err(e) => Some(format!("seed {seed}: {e}")),
            }
        })
        .collect();
    check(
        normalization == 1 && failures.is_empty(),
        format!("CZ(half turn) = {normalization}; 200 random cases, {} failures{}", failures.len(), first(&failures)),
    )
}

fn first(v: &[String]) -> String {
    v.first().map(|s| format!(" (first: {s})")).unwrap_or_default()
}

fn maslov_normalization() -> Outcome {
    let samples = 256;
    let full_turn = rotation_path(2, TAU, samples);
    let id = SymplecticPath::from_fn(2, samples, |_| DMatrix::identity(2, 2)).unwrap();
    let normalized = maslov_index(&full_turn.direct_sum(&id).unwrap()).unwrap_or(i64::MIN);
    let mut failures = Vec::new();
    for seed in 0..50u64 {
        let mut r = rng(2000 + seed);
        let size = r.gen_range(1..=2);
        let (u1, u2) = (UnitaryLoop::random(size, &mut r), UnitaryLoop::random(size, &mut r));
        let (p1, p2) = (unitary_loop_path(&u1, samples), unitary_loop_path(&u2, samples));
        let got = (maslov_index(&p1), maslov_index(&p2), maslov_index(&p1.product(&p2).unwrap()));
        match got {
            (Ok(a), Ok(b), Ok(ab)) if ab == a + b && a == u1.winding_number() && b == u2.winding_number() => {}
            other => failures.push(format!("seed {seed}: {other:?}")),
        }
    }
    check(
        normalized == 1 && failures.is_empty(),
        format!("mu(e^(2 pi i t) + Id) = {normalized}; 50 loop pairs, {} failures{}", failures.len(), first(&failures)),
    )
}

fn spectral_closed_form() -> Outcome {
    let coefficient = CoefficientLoop::constant(sft_core::linalg::j0(2)).unwrap();
    let op = AsymptoticOperator::new(coefficient.clone(), 64).unwrap();
    let eig = spectrum(&op).unwrap();
    let mut want: Vec<f64> = (-32i64..=32).flat_map(|k| [TAU * k as f64 - 1.0; 2]).collect();
    want.sort_by(f64::total_cmp);
    let lo = want[0] - 1.0;
    let band: Vec<f64> = eig.iter().copied().filter(|x| *x > lo && *x < want[want.len() - 1] + 1.0).collect();
    let closed = if band.len() == want.len() { band.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) } else { f64::INFINITY };
    let gap = spectral_gap(&op).unwrap();
    let gap_err = (gap.lower + 1.0).abs().max((gap.upper - (TAU - 1.0)).abs());
    let galerkin = smallest_magnitude(&eig, 10);
    let fd = richardson_smallest(&coefficient, 10).unwrap();
    let oracle = galerkin.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check(
        closed <= 1e-8 && gap_err <= 1e-8 && oracle <= 1e-4 && !gap.degenerate,
        format!(
            "{} eigenvalues vs 2 pi k - 1: max err {closed:.2e} (tol 1e-8); gap ({:.10}, {:.10}) err {gap_err:.2e} (tol 1e-8); \
             Galerkin vs finite differences on 10 smallest: {oracle:.2e} (tol 1e-4)",
            band.len(),
            gap.lower,
            gap.upper
        ),
    )
}

fn conjugation_invariance() -> Outcome {
    // S(t) = S0 + S1 cos 2 pi t + S2 sin 2 pi t on R^4, B = -J0 S
    let mut r = rng(4000);
    let s: Vec<DMatrix<f64>> = (0..3).map(|_| random_symmetric(&mut r, 4, 1.0)).collect();
    let j = sft_core::linalg::j0(4);
    let coefficient = CoefficientLoop::new(4, move |t| {
        let (sn, cs) = (TAU * t).sin_cos();
        -(&j * (&s[0] + &s[1] * cs + &s[2] * sn))
    })
    .unwrap();
    let op = AsymptoticOperator::new(coefficient, 32).unwrap();
    let reports: Vec<_> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let u = UnitaryLoop::random(2, &mut rng(4100 + seed));
            conjugation_invariance_check(&op, &u, 1e-7)
        })
        .collect();
    let mut worst = 0.0f64;
    let mut compared = usize::MAX;
    let mut failures = Vec::new();
    for (seed, rep) in reports.iter().enumerate() {
        match rep {
            Ok(r) => {
                worst = worst.max(r.max_difference);
                compared = compared.min(r.compared);
                if !r.holds {
                    failures.push(format!("seed {seed}: {:.2e}", r.max_difference));
                }
            }
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    check(
        failures.is_empty(),
        format!("20 unitary loops, >= {compared} eigenvalues each, max |difference| {worst:.2e} (tol 1e-7){}", first(&failures)),
    )
}

fn parity_relation() -> Outcome {
    let failures: Vec<String> = (0..100u64)
        .into_par_iter()
        .filter_map(|seed| {
            let mut r = rng(5000 + seed);
            let pairs = r.gen_range(1..=3);
            let path = random_symplectic_path(&mut r, pairs, 256);
            match parity_check(&path, pairs + 1) {
                Ok(rep) if rep.consistent => None,
                Ok(rep) => Some(format!("seed {seed}: {rep:?}")),
                Err(e) => Some(format!("seed {seed}: {e}")),
            }
        })
        .collect();
    check(failures.is_empty(), format!("100 nondegenerate paths, {} failures{}", failures.len(), first(&failures)))
}

fn gluing_identities() -> Outcome {
    let mut r = rng(6000);
    let partition = (0..10_000)
        .map(|_| {
            let s: f64 = r.gen_range(-3.0..3.0);
            (cutoff_eval(s) + cutoff_eval(-s) - 1.0).abs()
        })
        .fold(0.0, f64::max);
    // plus-glue on the outer core bands
    let (rs, ts, dim) = (129, 16, 2);
    let plus = SampledNeckMap::from_fn(rs, ts, dim, (0.0, 1.0), |s, t| vec![(TAU * t).cos() + s, s * s]);
    let minus = SampledNeckMap::from_fn(rs, ts, dim, (-1.0, 0.0), |s, t| vec![(TAU * t).sin() - s, 3.0 + s]);
    let mut band_mismatch = 0usize;
    let mut band_rows = 0usize;
    for (modulus, angle) in [(0.2, 0.0), (0.1, 0.37), (0.05, 0.8)] {
        let a = GluingParameter::new(modulus, angle).unwrap();
        let Ok(PlusGlued::Glued { neck, map }) = plus_glue(&plus, &minus, a, GluingProfile::Exponential, Cutoff) else {
            return check(false, "plus_glue did not glue");
        };
        let len = neck.length;
        for i in 0..rs {
            let s = len * i as f64 / (rs - 1) as f64;
            let outer_plus = s <= len / 2.0 - 1.0;
            let outer_minus = s >= len / 2.0 + 1.0;
            if !(outer_plus || outer_minus) {
                continue;
            }
            band_rows += 1;
            for jt in 0..ts {
                let want = if outer_plus { plus.at(i, jt).to_vec() } else { minus.row_at(i, jt as f64 / ts as f64 - neck.angle) };
                if map.at(i, jt) != want.as_slice() {
                    band_mismatch += 1;
                }
            }
        }
    }
    let mut rotation_failures = 0;
    let mut round_trip = 0.0f64;
    for _ in 0..100 {
        let m = r.gen_range(0.01..0.25);
        let (a, a2) = (GluingParameter::new(m, r.gen_range(0.0..1.0)).unwrap(), GluingParameter::new(m, r.gen_range(0.0..1.0)).unwrap());
        match neck_rotation_identity_check(a, a2, GluingProfile::Exponential, 12) {
            Ok(rep) if rep.holds => {}
            _ => rotation_failures += 1,
        }
        for p in [GluingProfile::Exponential, GluingProfile::Classical] {
            let x: f64 = r.gen_range(0.01..0.99);
            let back = p.invert(p.eval(x).unwrap()).unwrap();
            round_trip = round_trip.max((back - x).abs());
        }
    }
    check(
        partition <= f64::EPSILON && band_mismatch == 0 && band_rows > 0 && rotation_failures == 0 && round_trip <= 1e-12,
        format!(
            "partition of unity max err {partition:.1e} on 1e4 points; {band_rows} core-band rows, {band_mismatch} inexact entries; \
             rotation identity failures {rotation_failures}/100 (tol 1e-12); profile round trip {round_trip:.1e} (tol 1e-12)"
        ),
    )
}

fn combinatorial_laws() -> Outcome {
    let mut face_mismatch = 0;
    let mut identity_failures = 0;
    for seed in 0..500u64 {
        let b = random_building(&mut rng(7000 + seed));
        if face_count(&b).ok() != Some(b.degeneracy()) {
            face_mismatch += 1;
        }
        match glue_building(&b, &TotalGluingParameter::zero(&b)) {
            Ok(g) if g == b => {}
            _ => identity_failures += 1,
        }
    }
    let (mut law_failures, mut undetected, mut mutations, mut schedule_failures) = (0, 0, 0, 0);
    for seed in 0..100u64 {
        let mut r = rng(7700 + seed);
        let u = random_universe(&mut r);
        if !check_dj_laws(&u).map(|v| v.is_empty()).unwrap_or(false) {
            law_failures += 1;
        }
        for mode in [ScheduleMode::Contact, ScheduleMode::Dj] {
            match induction_schedule(&u, mode) {
                Ok(order) if respects_faces(&u, &order) && order.len() == u.classes.len() => {}
                _ => schedule_failures += 1,
            }
        }
        // a face whose grading exceeds its parent's breaks the boundary law
        if let Some(i) = u.classes.iter().position(|c| c.kind == ClassKind::Parent) {
            let top = u.classes.iter().filter(|c| c.kind == ClassKind::Parent).map(|c| (c.dj.unwrap(), c.id.clone())).max().unwrap();
            let mut m = u.clone();
            m.classes[i].faces.push([top.1.clone(), top.1]);
            mutations += 1;
            if check_dj_laws(&m).map(|v| v.is_empty()).unwrap_or(true) {
                undetected += 1;
            }
        }
        for (i, c) in u.classes.iter().enumerate() {
            for shift in [-1i64, 1] {
                let new = c.dj.unwrap() + shift;
                if new < -1 {
                    continue;
                }
                let mut m = u.clone();
                m.classes[i].dj = Some(new);
                mutations += 1;
                if check_dj_laws(&m).map(|v| v.is_empty()).unwrap_or(true) {
                    undetected += 1;
                }
            }
        }
    }
    check(
        face_mismatch == 0 && identity_failures == 0 && law_failures == 0 && undetected == 0 && schedule_failures == 0,
        format!(
            "500 buildings: face/degeneracy mismatches {face_mismatch}, zero-glue non-identities {identity_failures}; \
             100 universes: law failures {law_failures}, undetected mutations {undetected}/{mutations}, schedule failures {schedule_failures}"
        ),
    )
}

fn multisection_algebra() -> Outcome {
    let fibers = VectorFibers { dim: 2 };
    let mut bad_totals = 0;
    let mut steps = 0;
    for seed in 0..100u64 {
        let mut r = rng(8000 + seed);
        let mut current = random_multisection(&mut r, 2);
        for _ in 0..r.gen_range(1..=6) {
            current = if r.gen_bool(0.5) {
                convolution(&fibers, &current, &random_multisection(&mut r, 2)).unwrap()
            } else {
                let beta = if r.gen_bool(0.1) { BigRational::zero() } else { small_rational(&mut r) };
                rescale(&fibers, &beta, &current).unwrap()
            };
            steps += 1;
            if current.total() != BigRational::one() {
                bad_totals += 1;
            }
        }
    }
    let mut r = rng(8500);
    let mut multiplicative = true;
    for _ in 0..100 {
        let a: Vec<BigRational> = (0..r.gen_range(0..4)).map(|_| small_rational(&mut r)).collect();
        let b: Vec<BigRational> = (0..r.gen_range(0..4)).map(|_| small_rational(&mut r)).collect();
        let joined: Vec<BigRational> = a.iter().chain(&b).cloned().collect();
        multiplicative &= compatibility_eval(&joined, false) == compatibility_eval(&a, false) * compatibility_eval(&b, false);
        multiplicative &= compatibility_eval(&joined, true).is_zero();
    }
    let mut defects = 0;
    for seed in 0..100u64 {
        let mut r = rng(8600 + seed);
        let u = random_universe(&mut r);
        let (g, f) = (random_graded_function(&mut r, &u), random_graded_function(&mut r, &u));
        match graded_commutativity_defect(&g, &f, &u) {
            Ok(d) if d.values.values().all(|x| x.is_zero()) => {}
            _ => defects += 1,
        }
    }
    check(
        bad_totals == 0 && multiplicative && defects == 0,
        format!(
            "100 chains ({steps} operations): totals != 1 in {bad_totals}; compatibility multiplicative: {multiplicative}; \
             graded commutativity defects {defects}/100"
        ),
    )
}

fn euler_averaging() -> Outcome {
    let ts2 = averaged_euler(&BundleModel::ts2(2), 10_000, 42);
    let again = averaged_euler(&BundleModel::ts2(2), 10_000, 42);
    let trivial = averaged_euler(&BundleModel::trivial_s2(2), 10_000, 42);
    match (ts2, again, trivial) {
        (Ok(a), Ok(b), Ok(t)) => check(
            (a.estimate - 2.0).abs() <= 0.1 && (t.estimate).abs() <= 0.1 && a == b,
            format!(
                "TS2: {} (target 2 +/- 0.1); trivial: {} (target 0 +/- 0.1); repeat bit-identical: {}",
                a,
                t,
                a.estimate.to_bits() == b.estimate.to_bits()
            ),
        ),
        (a, b, t) => check(false, format!("errors: {:?} {:?} {:?}", a.err(), b.err(), t.err())),
    }
}

fn model_contact() -> Outcome {
    let model = Ellipsoid::new(1.0, 2f64.sqrt()).unwrap();
    let res = model_contact_check(&model, 1000, 10);
    let q = q_phi_check(&model, &PhiProfile::default(), 1000, 11);
    match (res, q) {
        (Ok(c), Ok(q)) => check(
            c.max_lambda < 1e-12 && c.max_dlambda < 1e-12 && q.positive == q.samples && q.min_q > 0.0,
            format!(
                "{} points: |lambda(R) - 1| <= {:.1e}, |dlambda(R, .)| <= {:.1e} (tol 1e-12); Q^phi on {} vectors: min {:.3e}, positive on {}",
                c.points, c.max_lambda, c.max_dlambda, q.samples, q.min_q, q.positive
            ),
        ),
        (c, q) => check(false, format!("errors: {:?} {:?}", c.err(), q.err())),
    }
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "CZ axiom suite", Some(secs(10)), cz_axioms),
        criterion(2, "Maslov normalization and homomorphism", None, maslov_normalization),
        criterion(3, "spectral closed form", Some(secs(30)), spectral_closed_form),
        criterion(4, "conjugation invariance", None, conjugation_invariance),
        criterion(5, "parity relation", None, parity_relation),
        criterion(6, "gluing identities", None, gluing_identities),
        criterion(7, "combinatorial laws", None, combinatorial_laws),
        criterion(8, "multisection algebra", None, multisection_algebra),
        criterion(9, "Euler-number averaging", Some(secs(60)), euler_averaging),
        criterion(10, "model contact identities", None, model_contact),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
