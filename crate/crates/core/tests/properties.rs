use std::f64::consts::TAU;
use std::num::NonZeroU32;

use num_complex::Complex64;
use oscillator_geometry::coherent::{coherent_coeffs, displacement_apply, DisplacementParam};
use oscillator_geometry::divisor::{divisor_match, from_local_coeffs, majorana_stars, RootConfig};
use oscillator_geometry::dynamics::{evolve_state, period, zn_orbit};
use oscillator_geometry::fock::{
    apply_annihilation, apply_creation, inner_product, number_apply, Bidegree, HoloPoly, PhasePoint,
    PhysicalConstants, SectionState, Slot,
};
use oscillator_geometry::geometry::{
    angles, blowdown, blowup_lift, from_orbifold, hopf_project, on_point_equal, sector_index, to_orbifold,
    zn_canonicalize, zn_element,
};
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn point() -> impl Strategy<Value = PhasePoint> {
    (complex(), complex())
        .prop_filter("away from the origin", |(a, b)| a.norm() + b.norm() > 1e-3)
        .prop_map(|(a, b)| PhasePoint::new(a, b))
}

/// Sparse state with every grade strictly below `nmax`.
fn state(nmax: u32) -> impl Strategy<Value = HoloPoly> {
    prop::collection::vec((0..nmax, 0..nmax, complex()), 1..8).prop_map(move |terms| {
        let mut p = HoloPoly::zero(nmax);
        for (n, m, a) in terms {
            let d = Bidegree::new(n, m % (n + 1)).unwrap();
            p.set(d, p.amplitude(d) + a).unwrap();
        }
        p
    })
}

fn nz(n: u32) -> NonZeroU32 {
    NonZeroU32::new(n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn commutator_is_the_identity(p in state(12)) {
        for a in Slot::BOTH {
            for b in Slot::BOTH {
                let ab = apply_annihilation(a, &apply_creation(b, &p).unwrap());
                let ba = apply_creation(b, &apply_annihilation(a, &p)).unwrap();
                let want = if a == b { p.clone() } else { HoloPoly::zero(12) };
                prop_assert!((&ab - &ba).max_abs_diff(&want) <= 1e-12 * (1.0 + p.norm()) * 12.0);
            }
        }
    }

    #[test]
    fn creation_is_adjoint_to_annihilation(p in state(10), q in state(10)) {
        for a in Slot::BOTH {
            let lhs = inner_product(&apply_creation(a, &p).unwrap(), &q);
            let rhs = inner_product(&p, &apply_annihilation(a, &q));
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + p.norm() * q.norm()) * 10.0);
        }
    }

    #[test]
    fn number_operator_is_sum_of_products(p in state(10)) {
        let mut sum = HoloPoly::zero(10);
        for a in Slot::BOTH {
            sum = &sum + &apply_creation(a, &apply_annihilation(a, &p)).unwrap();
        }
        prop_assert!(number_apply(&p).max_abs_diff(&sum) <= 1e-12 * (1.0 + p.norm()) * 10.0);
    }

    #[test]
    fn evolution_group_law(p in state(8), t1 in -20.0..20.0f64, t2 in -20.0..20.0f64, theta in 0.0..TAU) {
        let s = SectionState::new(p, theta, PhysicalConstants::new(1.3, 0.7).unwrap());
        let twice = evolve_state(&evolve_state(&s, t1), t2);
        let once = evolve_state(&s, t1 + t2);
        prop_assert!(twice.poly.max_abs_diff(&once.poly) <= 1e-12 * (1.0 + s.poly.norm()));
        let dth = (twice.theta() - once.theta()).abs();
        prop_assert!(dth.min(TAU - dth) <= 1e-12);
    }

    #[test]
    fn canonical_sector_and_shift_invariance(z in point(), n in 1u32..9, l in -20i64..20) {
        let (rep, _) = zn_canonicalize(&z, nz(n)).unwrap();
        prop_assert_eq!(sector_index(angles(&rep.ztilde()).unwrap().phi, nz(n)), 0);
        let (shifted, _) = zn_canonicalize(&z.scaled(zn_element(nz(n), l)), nz(n)).unwrap();
        prop_assert!(shifted.distance(&rep) <= 1e-12 * z.norm());
    }

    #[test]
    fn orbifold_round_trip(z in point(), psi in complex(), n in 1u32..7) {
        prop_assume!(psi.norm() > 1e-6);
        let rep = to_orbifold(&z, psi, nz(n)).unwrap();
        let (zt, one) = from_orbifold(&rep);
        prop_assert!(on_point_equal((&zt, one), (&z, psi), n).unwrap());
        prop_assert!(to_orbifold(&zt, one, nz(n)).unwrap().distance(&rep) <= 1e-12 * rep.ztilde().norm());
    }

    #[test]
    fn gauge_orbits_are_single_points(z in point(), psi in complex(), n in 0u32..7, r in -3.0..3.0f64, a in 0.0..TAU) {
        let lambda = Complex64::from_polar(10f64.powf(r), a);
        prop_assert!(on_point_equal((&z, psi), (&z.scaled(lambda), psi * lambda.powu(n)), n).unwrap());
    }

    #[test]
    fn hopf_projection_ignores_the_flow(z in point(), t in -50.0..50.0f64) {
        let k = PhysicalConstants::default();
        let moved = oscillator_geometry::dynamics::classical_orbit(&z, &k, t);
        prop_assert!(hopf_project(&z).unwrap().chordal_distance(&hopf_project(&moved).unwrap()) <= 1e-12);
    }

    #[test]
    fn blowdown_inverts_the_lift(z in point()) {
        prop_assert!(blowdown(&blowup_lift(&z).unwrap()).distance(&z) <= 1e-12 * z.norm());
    }

    #[test]
    fn zn_orbit_is_periodic(z in point(), n in 1u32..9, t in 0.0..30.0f64) {
        let k = PhysicalConstants::new(1.0, 1.7).unwrap();
        let a = zn_orbit(&z, nz(n), &k, t).unwrap();
        let b = zn_orbit(&z, nz(n), &k, t + period(nz(n), &k)).unwrap();
        prop_assert!(a.distance(&b) <= 1e-10 * z.norm());
    }

    #[test]
    fn stars_ignore_the_evolution_phase(a in prop::collection::vec(complex(), 2..10), t in 0.0..10.0f64) {
        prop_assume!(a.iter().any(|c| c.norm() > 1e-3));
        let n = (a.len() - 1) as u32;
        let s = SectionState::new(from_local_coeffs(&a, n).unwrap(), 0.0, PhysicalConstants::default());
        let cfg = RootConfig::default();
        let before = majorana_stars(&s.poly, n, &cfg).unwrap();
        let after = majorana_stars(&evolve_state(&s, t).poly, n, &cfg).unwrap();
        prop_assert_eq!(before.degree(), n);
        prop_assert!(divisor_match(&before, &after, cfg.cluster_eps()));
    }

    #[test]
    fn displacement_preserves_norm(p in state(4), b0 in complex(), b1 in complex()) {
        let b = DisplacementParam::new(b0 * 0.35, b1 * 0.35);
        let q = displacement_apply(&b, &p.with_nmax(40).unwrap()).unwrap();
        prop_assert!((q.norm_sqr() - p.norm_sqr()).abs() <= 1e-12 * p.norm_sqr().max(1e-300));
    }
}

#[test]
fn displaced_vacuum_is_coherent() {
    let b = DisplacementParam::new(Complex64::new(0.7, -0.2), Complex64::new(-0.1, 0.6));
    let vac = HoloPoly::basis(0, 0, 40).unwrap();
    let d = displacement_apply(&b, &vac).unwrap();
    assert!(d.max_abs_diff(&coherent_coeffs(&b, 40)) <= 1e-10);
}
