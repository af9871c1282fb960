//! Invariant suites run by `qho check`.
//!
//! Every suite draws from its own ChaCha stream of the run seed, so the
//! report for a suite does not depend on which other suites were selected.

use std::f64::consts::TAU;
use std::num::NonZeroU32;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::coherent::{
    annihilation_eigen_residual, coherent_coeffs, coherent_norm_tail_bound, coherent_overlap, displacement_apply,
    DisplacementParam,
};
use crate::divisor::{
    divisor_match, equivariant_divisor, from_local_coeffs, local_coeffs, local_coeffs_from_divisor, majorana_stars,
    RootConfig,
};
use crate::dynamics::{continuity_residual, evolve_state, period, zn_orbit, DEFAULT_FD_STEP};
use crate::fock::{
    apply_annihilation, apply_creation, hamiltonian_apply, inner_product, mc_inner_product, number_apply,
    Bidegree, HoloPoly, PhasePoint, PhysicalConstants, SectionState, Slot,
};
use crate::geometry::{
    angles, blowdown, blowup_lift, cocycle_residual, from_orbifold, gauge_fix_fiber, hopf_project, lens_point,
    on_point_equal, sector_index, to_orbifold, wrap_pi, zn_canonicalize, zn_element, BlowupPoint, Chart,
    ChartPoint, FiberBasis,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: u64,
    pub max_residual: f64,
    pub pass: bool,
}

struct Outcome {
    cases: u64,
    max_residual: f64,
    tol: f64,
}

type Suite = fn(&mut ChaCha8Rng, usize) -> Outcome;

const SUITES: &[(&str, Suite)] = &[
    ("orthonormality", orthonormality),
    ("mc_orthonormality", mc_orthonormality),
    ("ccr", ccr),
    ("number", number),
    ("adjointness", adjointness),
    ("spectrum", spectrum),
    ("evolution", evolution),
    ("energy", energy),
    ("hopf_invariance", hopf_invariance),
    ("cocycle", cocycle),
    ("lens_transition", lens_transition),
    ("gauge_orbit", gauge_orbit),
    ("biholomorphism", biholomorphism),
    ("canonicalization", canonicalization),
    ("zn_period", zn_period),
    ("blowup", blowup),
    ("divisor_degree", divisor_degree),
    ("divisor_equivariant", divisor_equivariant),
    ("divisor_rotation", divisor_rotation),
    ("divisor_reconstruction", divisor_reconstruction),
    ("continuity", continuity),
    ("coherent_closed_form", coherent_closed_form),
    ("coherent_eigen", coherent_eigen),
    ("coherent_norm", coherent_norm),
    ("coherent_overlap", coherent_overlap_suite),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|(name, _)| *name).collect()
}

/// Runs every suite whose name contains `filter` (all when `None`).
/// `mc_samples` sets the Monte-Carlo sample count per pair.
pub fn run_checks(filter: Option<&str>, seed: u64, mc_samples: usize) -> Vec<SuiteReport> {
    SUITES
        .iter()
        .enumerate()
        .filter(|(_, (name, _))| filter.map_or(true, |f| name.contains(f)))
        .map(|(i, (name, suite))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let o = suite(&mut rng, mc_samples);
            SuiteReport {
                suite: name.to_string(),
                cases: o.cases,
                max_residual: o.max_residual,
                pass: o.max_residual <= o.tol,
            }
        })
        .collect()
}

struct Tracker {
    cases: u64,
    worst: f64,
}

impl Tracker {
    fn new() -> Self {
        Tracker { cases: 0, worst: 0.0 }
    }

    fn record(&mut self, r: f64) {
        self.cases += 1;
        // NaN must fail the suite
        self.worst = if r.is_nan() { f64::INFINITY } else { self.worst.max(r) };
    }

    fn done(self, tol: f64) -> Outcome {
        Outcome { cases: self.cases, max_residual: self.worst, tol }
    }
}

fn cnormal(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn point(rng: &mut ChaCha8Rng) -> PhasePoint {
    PhasePoint::new(cnormal(rng), cnormal(rng))
}

fn nz(n: u32) -> NonZeroU32 {
    NonZeroU32::new(n).expect("n >= 1")
}

fn random_state(rng: &mut ChaCha8Rng, top: u32, nmax: u32, terms: usize) -> HoloPoly {
    let mut p = HoloPoly::zero(nmax);
    for _ in 0..terms {
        let n = rng.gen_range(0..=top);
        let m = rng.gen_range(0..=n);
        let d = Bidegree::new(n, m).expect("m <= n");
        p.set(d, p.amplitude(d) + cnormal(rng)).expect("n <= nmax");
    }
    p
}

fn random_grade(rng: &mut ChaCha8Rng, n: u32, nmax: u32) -> HoloPoly {
    let a: Vec<Complex64> = (0..=n).map(|_| cnormal(rng)).collect();
    from_local_coeffs(&a, nmax).expect("n <= nmax")
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

fn orthonormality(_: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    let basis: Vec<Bidegree> = Bidegree::all_up_to(8).collect();
    for &a in &basis {
        for &b in &basis {
            let p = HoloPoly::basis(a.n(), a.m(), 8).expect("in range");
            let q = HoloPoly::basis(b.n(), b.m(), 8).expect("in range");
            let want = if a == b { 1.0 } else { 0.0 };
            t.record((inner_product(&p, &q) - want).norm());
        }
    }
    t.done(1e-12)
}

/// Residual is `|estimate - exact| / stderr`.
fn mc_orthonormality(rng: &mut ChaCha8Rng, samples: usize) -> Outcome {
    let mut t = Tracker::new();
    for k in 0..20 {
        let pick = |rng: &mut ChaCha8Rng| {
            let n = rng.gen_range(0..=8);
            Bidegree::new(n, rng.gen_range(0..=n)).expect("m <= n")
        };
        let a = pick(rng);
        // every fourth pair is diagonal so that norms are exercised too
        let b = if k % 4 == 0 { a } else { pick(rng) };
        let p = HoloPoly::basis(a.n(), a.m(), 8).expect("in range");
        let q = HoloPoly::basis(b.n(), b.m(), 8).expect("in range");
        let mc = mc_inner_product(&p, &q, samples, rng.gen()).expect("samples >= 1");
        let dev = (mc.estimate - inner_product(&p, &q)).norm();
        t.record(if dev <= 1e-12 { 0.0 } else { dev / mc.stderr });
    }
    t.done(3.0)
}

fn ccr(_: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    let nmax = 32;
    for d in Bidegree::all_up_to(nmax - 1) {
        let psi = HoloPoly::basis(d.n(), d.m(), nmax).expect("in range");
        for a in Slot::BOTH {
            for b in Slot::BOTH {
                let ab = apply_annihilation(a, &apply_creation(b, &psi).expect("headroom"));
                let lowered = apply_annihilation(a, &psi);
                // lowering first leaves grade n - 1, which always has headroom
                let ba = apply_creation(b, &lowered).expect("headroom");
                let comm = &ab - &ba;
                let want = if a == b { psi.clone() } else { HoloPoly::zero(nmax) };
                t.record(comm.max_abs_diff(&want));
            }
        }
    }
    t.done(1e-12)
}

fn number(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    for _ in 0..200 {
        let p = random_state(rng, 9, 10, 6);
        let mut sum = HoloPoly::zero(10);
        for a in Slot::BOTH {
            sum = &sum + &apply_creation(a, &apply_annihilation(a, &p)).expect("headroom");
        }
        t.record(number_apply(&p).max_abs_diff(&sum) / p.norm().max(1e-300));
    }
    t.done(1e-12)
}

fn adjointness(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    for _ in 0..200 {
        let p = random_state(rng, 7, 8, 6);
        let q = random_state(rng, 7, 8, 6);
        for a in Slot::BOTH {
            let lhs = inner_product(&apply_creation(a, &p).expect("headroom"), &q);
            let rhs = inner_product(&p, &apply_annihilation(a, &q));
            t.record((lhs - rhs).norm() / (p.norm() * q.norm() * 10.0));
        }
    }
    t.done(1e-12)
}

fn spectrum(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    for _ in 0..5 {
        let k = PhysicalConstants::new(rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0)).expect("positive");
        for d in Bidegree::all_up_to(10) {
            let s = SectionState::new(HoloPoly::basis(d.n(), d.m(), 10).expect("in range"), rng.gen_range(0.0..TAU), k);
            let h = hamiltonian_apply(&s);
            let e = k.quantum() * (d.n() as f64 + 1.0);
            t.record(h.poly.max_abs_diff(&s.poly.scaled(Complex64::new(e, 0.0))) / e);
            t.record((h.theta() - s.theta()).abs());
            let nn = number_apply(&s.poly).amplitude(d);
            t.record((nn - Complex64::new(d.n() as f64, 0.0)).norm());
        }
    }
    t.done(0.0)
}

fn evolution(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    for _ in 0..100 {
        let k = PhysicalConstants::new(1.0, rng.gen_range(0.2..3.0)).expect("positive");
        let p = SectionState::new(random_state(rng, 8, 8, 5), rng.gen_range(0.0..TAU), k);
        let q = SectionState::new(random_state(rng, 8, 8, 5), 0.0, k);
        let (t1, t2) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let pt = evolve_state(&p, t1);
        let qt = evolve_state(&q, t1);
        let scale = p.poly.norm() * q.poly.norm();
        t.record((inner_product(&pt.poly, &qt.poly) - inner_product(&p.poly, &q.poly)).norm() / scale);

        let twice = evolve_state(&pt, t2);
        let once = evolve_state(&p, t1 + t2);
        t.record(twice.poly.max_abs_diff(&once.poly) / p.poly.norm());
        t.record(wrap_pi(twice.theta() - once.theta()).abs());

        let full = evolve_state(&p, period(nz(1), &k));
        t.record(full.poly.max_abs_diff(&p.poly) / p.poly.norm());
        t.record(wrap_pi(full.theta() - p.theta()).abs());

        let n = rng.gen_range(1..=8);
        let pure = SectionState::new(random_grade(rng, n, 8), 0.0, k);
        let back = evolve_state(&pure, period(nz(n), &k));
        t.record(back.poly.max_abs_diff(&pure.poly) / pure.poly.norm());
    }
    t.done(1e-12)
}

fn energy(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    for _ in 0..100 {
        let k = PhysicalConstants::new(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)).expect("positive");
        let p = SectionState::new(random_state(rng, 8, 8, 5), 0.0, k);
        let e0 = inner_product(&p.poly, &hamiltonian_apply(&p).poly);
        for _ in 0..5 {
            let pt = evolve_state(&p, rng.gen_range(-10.0..10.0));
            let e = inner_product(&pt.poly, &hamiltonian_apply(&pt).poly);
            t.record((e - e0).norm() / e0.norm());
        }
    }
    t.done(1e-12)
}

fn hopf_invariance(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    for _ in 0..10_000 {
        let z = point(rng);
        let base = hopf_project(&z).expect("off origin");
        let rotated = hopf_project(&z.scaled(Complex64::from_polar(1.0, rng.gen_range(0.0..TAU)))).expect("off origin");
        t.record(base.chordal_distance(&rotated));
        let n = nz(rng.gen_range(1..=10));
        let shifted = hopf_project(&z.scaled(zn_element(n, rng.gen_range(-20..20)))).expect("off origin");
        t.record(base.chordal_distance(&shifted));
    }
    t.done(1e-12)
}

fn cocycle(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    for _ in 0..10_000 {
        let z = point(rng);
        let psi = cnormal(rng);
        let n = rng.gen_range(0..=10);
        let r = cocycle_residual(&z, psi, n).expect("both components nonzero");
        let scale = gauge_fix_fiber(&z, psi, n, Chart::U0, FiberBasis::Holomorphic).expect("z0 nonzero").norm();
        t.record(r / scale);
    }
    t.done(1e-12)
}

fn lens_transition(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    for _ in 0..10_000 {
        let z = point(rng);
        let psi = cnormal(rng);
        let n = nz(rng.gen_range(1..=10));
        let a = lens_point(&z, psi, n, Chart::U0).expect("valid");
        let b = lens_point(&z, psi, n, Chart::U1).expect("valid");
        let chi = angles(&z).expect("off origin").chi;
        let ratio = Complex64::from_polar(1.0, a.fiber_phase - b.fiber_phase);
        t.record((ratio - Complex64::from_polar(1.0, chi * n.get() as f64)).norm());
    }
    t.done(1e-10)
}

/// Residual is 0 when `on_point_equal` holds and 1 otherwise.
fn gauge_orbit(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    for _ in 0..10_000 {
        let z = point(rng);
        let psi = cnormal(rng);
        let n = rng.gen_range(0..=6);
        let lambda = Complex64::from_polar(10f64.powf(rng.gen_range(-3.0..3.0)), rng.gen_range(0.0..TAU));
        let moved = z.scaled(lambda);
        let same = on_point_equal((&z, psi), (&moved, psi * lambda.powu(n)), n).expect("valid points");
        t.record(if same { 0.0 } else { 1.0 });
    }
    t.done(0.0)
}

fn biholomorphism(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    for _ in 0..10_000 {
        let z = point(rng);
        let psi = cnormal(rng);
        let n = nz(rng.gen_range(1..=6));
        let rep = to_orbifold(&z, psi, n).expect("valid");
        let (zt, one) = from_orbifold(&rep);
        let ok = on_point_equal((&zt, one), (&z, psi), n.get()).expect("valid points");
        t.record(if ok { 0.0 } else { 1.0 });
        let again = to_orbifold(&zt, one, n).expect("valid");
        t.record(again.distance(&rep) / rep.ztilde().norm());
    }
    t.done(1e-10)
}

fn canonicalization(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    for _ in 0..10_000 {
        let z = point(rng);
        let n = nz(rng.gen_range(1..=8));
        let (rep, _) = zn_canonicalize(&z, n).expect("off origin");
        let phi = angles(&rep.ztilde()).expect("off origin").phi;
        t.record(sector_index(phi, n) as f64);
        let (shifted, _) = zn_canonicalize(&z.scaled(zn_element(n, rng.gen_range(0..16))), n).expect("off origin");
        t.record(shifted.distance(&rep) / z.norm());
        let (twice, l) = zn_canonicalize(&rep.ztilde(), n).expect("off origin");
        t.record(twice.distance(&rep) + l as f64);
    }
    t.done(1e-12)
}

fn zn_period(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    for _ in 0..1_000 {
        let z = point(rng);
        let n = nz(rng.gen_range(1..=8));
        let k = PhysicalConstants::new(1.0, rng.gen_range(0.2..3.0)).expect("positive");
        let time = rng.gen_range(0.0..20.0);
        let a = zn_orbit(&z, n, &k, time).expect("off origin");
        let b = zn_orbit(&z, n, &k, time + period(n, &k)).expect("off origin");
        t.record(a.distance(&b) / z.norm());
    }
    t.done(1e-10)
}

fn blowup(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    for _ in 0..10_000 {
        let z = point(rng);
        let back = blowdown(&blowup_lift(&z).expect("off origin"));
        t.record(back.distance(&z) / z.norm());
    }
    for k in 0..100 {
        let coord = Complex64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..TAU));
        let chart = if k % 2 == 0 { Chart::U0 } else { Chart::U1 };
        let b = BlowupPoint { direction: ChartPoint::new(chart, coord), scale: Complex64::new(0.0, 0.0) };
        t.record(blowdown(&b).norm());
    }
    t.done(1e-12)
}

fn divisor_degree(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    let cfg = RootConfig::default();
    for _ in 0..500 {
        let n = rng.gen_range(0..=12);
        let p = random_grade(rng, n, 12);
        let d = majorana_stars(&p, n, &cfg).map(|d| d.degree());
        t.record(match d {
            Ok(deg) => (deg as f64 - n as f64).abs(),
            Err(_) => f64::INFINITY,
        });
    }
    t.done(0.0)
}

fn divisor_equivariant(_: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    let cfg = RootConfig::default();
    for n in 0..=10 {
        for m in 0..=n {
            let stars = majorana_stars(&HoloPoly::basis(n, m, 10).expect("in range"), n, &cfg).expect("nonzero");
            let ok = divisor_match(&stars, &equivariant_divisor(n, m).expect("m <= n"), 1e-8);
            t.record(if ok { 0.0 } else { 1.0 });
        }
    }
    t.done(0.0)
}

fn divisor_rotation(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    let cfg = RootConfig::default();
    let k = PhysicalConstants::default();
    for _ in 0..200 {
        let n = rng.gen_range(1..=10);
        let s = SectionState::new(random_grade(rng, n, 10), 0.0, k);
        let before = majorana_stars(&s.poly, n, &cfg).expect("nonzero");
        let after = majorana_stars(&evolve_state(&s, rng.gen_range(0.0..10.0)).poly, n, &cfg).expect("nonzero");
        t.record(if divisor_match(&before, &after, cfg.cluster_eps()) { 0.0 } else { 1.0 });
    }
    t.done(0.0)
}

fn divisor_reconstruction(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    let cfg = RootConfig::default();
    for _ in 0..200 {
        let n = rng.gen_range(1..=10);
        let p = random_grade(rng, n, n);
        let a = local_coeffs(&p, n).expect("single grade");
        let stars = majorana_stars(&p, n, &cfg).expect("nonzero");
        let rebuilt = local_coeffs_from_divisor(&stars, n, a[n as usize]).expect("degree n");
        let again = majorana_stars(&from_local_coeffs(&rebuilt, n).expect("n <= nmax"), n, &cfg).expect("nonzero");
        t.record(if divisor_match(&stars, &again, cfg.cluster_eps()) { 0.0 } else { 1.0 });
    }
    t.done(0.0)
}

fn continuity(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    let k = PhysicalConstants::default();
    let axis: Vec<f64> = (0..5).map(|i| -1.5 + 0.75 * i as f64).collect();
    let mut grid = Vec::new();
    for &a in &axis {
        for &b in &axis {
            for &c in &axis {
                for &d in &axis {
                    grid.push(PhasePoint::from_parts(a, b, c, d));
                }
            }
        }
    }
    let mut states = vec![SectionState::ground(k, 4)];
    for d in Bidegree::all_up_to(3) {
        states.push(SectionState::new(HoloPoly::basis(d.n(), d.m(), 4).expect("in range"), 0.0, k));
    }
    for _ in 0..10 {
        let s = SectionState::new(random_state(rng, 4, 4, 4), 0.0, k);
        for i in 0..5 {
            states.push(evolve_state(&s, 0.7 * i as f64));
        }
    }
    for s in &states {
        for z in &grid {
            t.record(continuity_residual(s, z, DEFAULT_FD_STEP).expect("positive step"));
        }
    }
    t.done(1e-5)
}

fn random_b(rng: &mut ChaCha8Rng, max_norm: f64) -> DisplacementParam {
    let b = DisplacementParam::new(cnormal(rng), cnormal(rng));
    let r = max_norm * rng.gen_range(0.0f64..1.0).sqrt();
    let s = r / b.norm();
    DisplacementParam::new(b.b0 * s, b.b1 * s)
}

fn coherent_closed_form(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    let vac = HoloPoly::basis(0, 0, 40).expect("in range");
    for _ in 0..6 {
        let b = random_b(rng, 1.0);
        let d = displacement_apply(&b, &vac).expect("converges");
        t.record(d.max_abs_diff(&coherent_coeffs(&b, 40)));
    }
    t.done(1e-10)
}

fn coherent_eigen(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    for _ in 0..50 {
        t.record(annihilation_eigen_residual(&random_b(rng, 2.0), 40).expect("nmax >= 1"));
    }
    t.done(1e-10)
}

/// Residual is the excess over the series tail bound.
fn coherent_norm(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    for _ in 0..50 {
        let b = random_b(rng, 2.0);
        let nmax = rng.gen_range(4..=40);
        let p = coherent_coeffs(&b, nmax);
        let deficit = 1.0 - p.norm_sqr();
        let bound = coherent_norm_tail_bound(&b, nmax);
        t.record((deficit - bound).max(-deficit).max(0.0));
    }
    for _ in 0..5 {
        let b = random_b(rng, 1.0);
        let p = random_state(rng, 5, 40, 5);
        let moved = displacement_apply(&b, &p).expect("converges");
        t.record((moved.norm_sqr() - p.norm_sqr()).abs() / p.norm_sqr());
    }
    t.done(1e-12)
}

fn coherent_overlap_suite(rng: &mut ChaCha8Rng, _: usize) -> Outcome {
    let mut t = Tracker::new();
    for _ in 0..50 {
        let (b, c) = (random_b(rng, 1.5), random_b(rng, 1.5));
        let series = inner_product(&coherent_coeffs(&b, 40), &coherent_coeffs(&c, 40));
        t.record(rel(series, coherent_overlap(&b, &c)));
    }
    t.done(1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_selects_by_substring() {
        let r = run_checks(Some("cocycle"), 0, 1000);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].suite, "cocycle");
        assert!(r[0].pass);
    }

    #[test]
    fn default_run_passes_and_ignores_the_filter() {
        let all = run_checks(None, 0, 100_000);
        assert_eq!(all.len(), SUITES.len());
        for s in &all {
            assert!(s.pass, "suite {} failed with residual {}", s.suite, s.max_residual);
        }
        let alone = run_checks(Some("number"), 0, 100_000);
        assert_eq!(all.iter().find(|r| r.suite == "number"), alone.first());
    }
}
