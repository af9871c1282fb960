//! Time evolution: classical and `Z_n` orbits, the vacuum fiber rotation,
//! exact section evolution and the charge continuity diagnostic.

use std::f64::consts::{PI, TAU};
use std::num::NonZeroU32;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    apply_annihilation, normalize_angle, number_apply, poly_eval, PhasePoint, PhysicalConstants,
    SectionState, Slot,
};
use crate::geometry::{zn_canonicalize, OrbifoldRep};

/// Default finite-difference step for [`continuity_residual`].
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Residual above which the divergence is re-estimated by Richardson
/// extrapolation.
const RICHARDSON_TRIGGER: f64 = 1e-7;

fn phase(angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, angle)
}

/// `e^{iωt} z`.
pub fn classical_orbit(z: &PhasePoint, consts: &PhysicalConstants, t: f64) -> PhasePoint {
    z.scaled(phase(consts.omega() * t))
}

/// Canonical representative of the `Z_n`-invariant motion at time `t`.
pub fn zn_orbit(z: &PhasePoint, n: NonZeroU32, consts: &PhysicalConstants, t: f64) -> Result<OrbifoldRep> {
    Ok(zn_canonicalize(&classical_orbit(z, consts, t), n)?.0)
}

/// `T_n = 2π/(nω)`.
pub fn period(n: NonZeroU32, consts: &PhysicalConstants) -> f64 {
    TAU / (consts.omega() * n.get() as f64)
}

/// Vacuum phase after time `t`: `θ0 - ωt` in `[0, 2π)`.
pub fn fiber_rotation(theta0: f64, consts: &PhysicalConstants, t: f64) -> f64 {
    normalize_angle(theta0 - consts.omega() * t)
}

/// Grade `n` picks up `e^{-iωnt}`; the vacuum phase rotates separately.
pub fn evolve_state(s: &SectionState, t: f64) -> SectionState {
    let w = s.consts.omega();
    let poly = s.poly.map_grades(|n| phase(-w * n as f64 * t));
    SectionState::new(poly, fiber_rotation(s.theta(), &s.consts, t), s.consts)
}

/// `(ψ_n e^{-iωnt}, θ0 - ωt)` for a point of `O(n)_H ⊗ O(0)_v`.
pub fn extended_point_orbit(
    psi_n: Complex64,
    theta0: f64,
    n: u32,
    consts: &PhysicalConstants,
    t: f64,
) -> (Complex64, f64) {
    let w = consts.omega();
    (psi_n * phase(-w * n as f64 * t), fiber_rotation(theta0, consts, t))
}

/// Charge density and current at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeCurrent {
    pub rho: f64,
    /// `j_α`
    pub j: [Complex64; 2],
    /// `j_ᾱ = conj(j_α)`
    pub j_bar: [Complex64; 2],
}

/// `ρ_v = |Ψ|²` and `j_α = iω Ψ ∇_{z̄_α} Ψ̄`, where the charge −1 derivative of
/// `Ψ̄` leaves `conj(∂_α ψ)` times the vacuum factor. Polynomial derivatives
/// come from the coefficients.
pub fn charge_current(s: &SectionState, z: &PhasePoint) -> ChargeCurrent {
    let weight = (-z.norm_sqr()).exp() / (PI * PI);
    let psi = poly_eval(&s.poly, z);
    let iw = Complex64::new(0.0, s.consts.omega());
    let mut j = [Complex64::new(0.0, 0.0); 2];
    for slot in Slot::BOTH {
        let d = poly_eval(&apply_annihilation(slot, &s.poly), z);
        j[slot.index()] = iw * weight * psi * d.conj();
    }
    ChargeCurrent { rho: weight * psi.norm_sqr(), j, j_bar: [j[0].conj(), j[1].conj()] }
}

/// `∂_t ρ_v` from the exact evolution: `(2ω e^{-|z|²}/π²) Im(ψ̄ N̂ψ)`.
pub fn density_rate(s: &SectionState, z: &PhasePoint) -> f64 {
    let weight = (-z.norm_sqr()).exp() / (PI * PI);
    let psi = poly_eval(&s.poly, z);
    let npsi = poly_eval(&number_apply(&s.poly), z);
    2.0 * s.consts.omega() * weight * (psi.conj() * npsi).im
}

fn shifted(z: &PhasePoint, slot: Slot, d: Complex64) -> PhasePoint {
    match slot {
        Slot::Zero => PhasePoint::new(z.z0 + d, z.z1),
        Slot::One => PhasePoint::new(z.z0, z.z1 + d),
    }
}

/// `Σ_α ∂_{z_α} j_α + ∂_{z̄_α} j_ᾱ` by central differences of step `h`.
fn divergence(s: &SectionState, z: &PhasePoint, h: f64) -> f64 {
    let mut div = Complex64::new(0.0, 0.0);
    for slot in Slot::BOTH {
        let k = slot.index();
        let at = |d: Complex64| charge_current(s, &shifted(z, slot, d));
        let (xp, xm) = (at(Complex64::new(h, 0.0)), at(Complex64::new(-h, 0.0)));
        let (yp, ym) = (at(Complex64::new(0.0, h)), at(Complex64::new(0.0, -h)));
        let dx = |f: fn(&ChargeCurrent, usize) -> Complex64| (f(&xp, k) - f(&xm, k)) / (2.0 * h);
        let dy = |f: fn(&ChargeCurrent, usize) -> Complex64| (f(&yp, k) - f(&ym, k)) / (2.0 * h);
        let j: fn(&ChargeCurrent, usize) -> Complex64 = |c, k| c.j[k];
        let jb: fn(&ChargeCurrent, usize) -> Complex64 = |c, k| c.j_bar[k];
        let i = Complex64::new(0.0, 1.0);
        // ∂_z = (∂_x - i∂_y)/2, ∂_z̄ = (∂_x + i∂_y)/2
        div += 0.5 * (dx(j) - i * dy(j)) + 0.5 * (dx(jb) + i * dy(jb));
    }
    div.re
}

/// `|∂_t ρ_v + ∂_{z_α} j_α + ∂_{z̄_α} j_ᾱ|` at `z`.
pub fn continuity_residual(s: &SectionState, z: &PhasePoint, fd_step: f64) -> Result<f64> {
    if !(fd_step > 0.0 && fd_step.is_finite()) {
        return Err(Error::InvalidArgument(format!("fd_step must be positive, got {fd_step}")));
    }
    let rate = density_rate(s, z);
    let coarse = divergence(s, z, fd_step);
    let r = (rate + coarse).abs();
    if r <= RICHARDSON_TRIGGER {
        return Ok(r);
    }
    let fine = divergence(s, z, 0.5 * fd_step);
    Ok((rate + (4.0 * fine - coarse) / 3.0).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitKind {
    Classical,
    Zn,
    Fiber,
    Extended,
}

impl OrbitKind {
    pub fn name(self) -> &'static str {
        match self {
            OrbitKind::Classical => "classical",
            OrbitKind::Zn => "zn",
            OrbitKind::Fiber => "fiber",
            OrbitKind::Extended => "extended",
        }
    }
}

/// Initial data for [`sample_trajectory`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitParams {
    pub z: PhasePoint,
    pub n: u32,
    pub psi: Complex64,
    pub theta0: f64,
    pub consts: PhysicalConstants,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSample {
    pub t: f64,
    pub z: PhasePoint,
    pub psi: Option<Complex64>,
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub n: u32,
    pub omega: f64,
    pub kind: OrbitKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<OrbitSample>,
    pub meta: TrajectoryMeta,
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if let Some(t) = t_grid.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid(format!("non-finite time {t}")));
    }
    if let Some(w) = t_grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(format!("times not strictly increasing at {} -> {}", w[0], w[1])));
    }
    Ok(())
}

fn sample_at(kind: OrbitKind, p: &OrbitParams, t: f64) -> Result<OrbitSample> {
    let sample = |z, psi, theta| OrbitSample { t, z, psi, theta };
    Ok(match kind {
        OrbitKind::Classical => sample(classical_orbit(&p.z, &p.consts, t), None, None),
        OrbitKind::Zn => {
            let n = NonZeroU32::new(p.n)
                .ok_or_else(|| Error::InvalidArgument("zn orbit needs n >= 1".into()))?;
            sample(zn_orbit(&p.z, n, &p.consts, t)?.ztilde(), None, None)
        }
        OrbitKind::Fiber => sample(p.z, None, Some(fiber_rotation(p.theta0, &p.consts, t))),
        OrbitKind::Extended => {
            let (psi, theta) = extended_point_orbit(p.psi, p.theta0, p.n, &p.consts, t);
            sample(p.z, Some(psi), Some(theta))
        }
    })
}

/// Evaluates the orbit of `kind` on a strictly increasing grid. Samples are
/// computed in parallel and returned in grid order.
pub fn sample_trajectory(kind: OrbitKind, params: &OrbitParams, t_grid: &[f64]) -> Result<Trajectory> {
    check_grid(t_grid)?;
    let samples = t_grid.par_iter().map(|&t| sample_at(kind, params, t)).collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        samples,
        meta: TrajectoryMeta { n: params.n, omega: params.consts.omega(), kind },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{hamiltonian_apply, inner_product, section_eval, HoloPoly};
    use crate::geometry::{angles, hopf_project};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn nz(n: u32) -> NonZeroU32 {
        NonZeroU32::new(n).unwrap()
    }

    fn unit() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn state(terms: &[(u32, u32, Complex64)], nmax: u32) -> SectionState {
        let mut p = HoloPoly::zero(nmax);
        for &(n, m, a) in terms {
            p.set(crate::fock::Bidegree::new(n, m).unwrap(), a).unwrap();
        }
        SectionState::new(p, 0.0, unit())
    }

    #[test]
    fn classical_orbit_examples() {
        let z = PhasePoint::new(c(0.3, 1.0), c(-0.5, 0.2));
        let k = unit();
        assert_eq!(classical_orbit(&z, &k, 0.0), z);
        assert!(classical_orbit(&z, &k, TAU).distance(&z) < 1e-15);
        assert!(classical_orbit(&z, &k, PI).distance(&z.scaled(c(-1.0, 0.0))) < 1e-15);
    }

    #[test]
    fn period_examples() {
        assert_eq!(period(nz(1), &unit()), TAU);
        assert!((period(nz(3), &unit()) - TAU / 3.0).abs() < 1e-15);
        let k = PhysicalConstants::new(1.0, TAU).unwrap();
        assert!((period(nz(2), &k) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zn_orbit_examples() {
        let z = PhasePoint::new(c(0.3, 1.0), c(-0.5, 0.2));
        let k = unit();
        assert_eq!(zn_orbit(&z, nz(1), &k, 0.7).unwrap().ztilde(), classical_orbit(&z, &k, 0.7));

        let a = zn_orbit(&z, nz(3), &k, 0.0).unwrap();
        let b = zn_orbit(&z, nz(3), &k, period(nz(3), &k)).unwrap();
        assert!(a.distance(&b) < 1e-10);

        let r = zn_orbit(&PhasePoint::new(c(1.0, 0.0), c(0.0, 0.0)), nz(2), &k, PI / 4.0).unwrap();
        assert!((angles(&r.ztilde()).unwrap().phi - PI / 4.0).abs() < 1e-15);
        assert!(matches!(zn_orbit(&PhasePoint::origin(), nz(2), &k, 1.0), Err(Error::NearOrigin { .. })));
    }

    #[test]
    fn fiber_rotation_examples() {
        let k = unit();
        assert_eq!(fiber_rotation(1.25, &k, 0.0), 1.25);
        assert!((fiber_rotation(1.25, &k, TAU) - 1.25).abs() < 1e-14);
        assert!((fiber_rotation(0.0, &k, PI / 2.0) - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn evolve_examples() {
        let s = state(&[(0, 0, c(0.5, 0.0)), (2, 1, c(0.0, 0.7)), (3, 3, c(-0.2, 0.1))], 6);
        assert_eq!(evolve_state(&s, 0.0), s);

        let pure = state(&[(3, 1, c(1.0, 0.0))], 6);
        let k = unit();
        let back = evolve_state(&pure, period(nz(3), &k));
        assert!(back.poly.max_abs_diff(&pure.poly) < 1e-12);
        assert!((back.theta() - (TAU - TAU / 3.0)).abs() < 1e-12);

        let psi10 = state(&[(1, 0, c(1.0, 0.0))], 4);
        let later = evolve_state(&psi10, PI);
        for z in [PhasePoint::new(c(0.4, 0.1), c(-0.3, 0.9)), PhasePoint::new(c(1.0, 0.0), c(0.0, 0.0))] {
            assert!((section_eval(&later, &z) - section_eval(&psi10, &z)).norm() < 1e-15);
        }
    }

    #[test]
    fn evolution_is_unitary_and_conserves_energy() {
        let p = state(&[(0, 0, c(0.5, 0.1)), (2, 1, c(0.0, 0.7)), (4, 0, c(-0.2, 0.1))], 6);
        let q = state(&[(2, 1, c(0.3, -0.4)), (4, 0, c(1.0, 0.0))], 6);
        let e0 = inner_product(&p.poly, &hamiltonian_apply(&p).poly);
        for t in [0.3, 1.7, 12.0] {
            let (pt, qt) = (evolve_state(&p, t), evolve_state(&q, t));
            assert!((inner_product(&pt.poly, &qt.poly) - inner_product(&p.poly, &q.poly)).norm() < 1e-12);
            assert!((inner_product(&pt.poly, &hamiltonian_apply(&pt).poly) - e0).norm() < 1e-12);
        }
    }

    #[test]
    fn extended_orbit_examples() {
        let k = unit();
        let psi = c(0.6, -0.8);
        let (p, th) = extended_point_orbit(psi, 0.3, 0, &k, 1.1);
        assert_eq!(p, psi);
        assert!((th - normalize_angle(0.3 - 1.1)).abs() < 1e-15);

        let (p, th) = extended_point_orbit(psi, 0.3, 2, &k, period(nz(2), &k));
        assert!((p - psi).norm() < 1e-14);
        assert!((th - normalize_angle(0.3 - PI)).abs() < 1e-14);

        for n in 0..6 {
            let (p, th) = extended_point_orbit(psi, 0.3, n, &k, TAU);
            assert!((p - psi).norm() < 1e-13);
            assert!((th - 0.3).abs() < 1e-13);
        }
    }

    #[test]
    fn ground_state_current() {
        let s = SectionState::ground(unit(), 4);
        let z = PhasePoint::new(c(0.7, -0.2), c(0.1, 0.5));
        let cc = charge_current(&s, &z);
        assert!((cc.rho - (-z.norm_sqr()).exp() / (PI * PI)).abs() < 1e-16);
        assert_eq!(cc.j, [c(0.0, 0.0); 2]);
        assert_eq!(continuity_residual(&s, &z, 1e-4).unwrap(), 0.0);
    }

    #[test]
    fn current_conjugation_and_positivity() {
        let s = state(&[(0, 0, c(1.0, 0.0)), (1, 0, c(0.5, 0.5)), (2, 2, c(0.0, -0.3))], 4);
        let z = PhasePoint::new(c(-0.4, 0.3), c(1.2, 0.5));
        let cc = charge_current(&s, &z);
        assert!(cc.rho >= 0.0);
        for k in 0..2 {
            assert_eq!(cc.j_bar[k], cc.j[k].conj());
        }
    }

    #[test]
    fn continuity_on_eigenstates_and_superpositions() {
        let z = PhasePoint::new(c(0.5, -0.3), c(-0.8, 0.6));
        let eigen = state(&[(3, 1, c(1.0, 0.0))], 4);
        assert!(density_rate(&eigen, &z).abs() < 1e-16);
        assert!(continuity_residual(&eigen, &z, 1e-4).unwrap() < 1e-6);

        let sup = state(&[(0, 0, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))], 4);
        for t in [0.0, 0.4, 1.3, 2.9] {
            let st = evolve_state(&sup, t);
            assert!(continuity_residual(&st, &z, 1e-4).unwrap() < 1e-5);
        }
        assert!(continuity_residual(&sup, &z, 0.0).is_err());
    }

    #[test]
    fn trajectory_examples() {
        let p = OrbitParams {
            z: PhasePoint::new(c(1.0, 0.0), c(0.3, 0.1)),
            n: 2,
            psi: c(1.0, 0.0),
            theta0: 0.0,
            consts: unit(),
        };
        let empty = sample_trajectory(OrbitKind::Classical, &p, &[]).unwrap();
        assert!(empty.samples.is_empty());

        let one = sample_trajectory(OrbitKind::Classical, &p, &[0.0]).unwrap();
        assert_eq!(one.samples[0].z, p.z);

        let zn = sample_trajectory(OrbitKind::Zn, &p, &[0.0, period(nz(2), &p.consts)]).unwrap();
        assert!(zn.samples[0].z.distance(&zn.samples[1].z) < 1e-10);

        let fib = sample_trajectory(OrbitKind::Fiber, &p, &[0.0, 0.5, 1.0]).unwrap();
        assert!(fib.samples.iter().all(|s| s.z == p.z && s.theta.is_some()));

        assert!(matches!(sample_trajectory(OrbitKind::Classical, &p, &[0.0, 0.0]), Err(Error::InvalidGrid(_))));
        assert!(matches!(sample_trajectory(OrbitKind::Classical, &p, &[1.0, 0.5]), Err(Error::InvalidGrid(_))));
        let zero_n = OrbitParams { n: 0, ..p };
        assert!(sample_trajectory(OrbitKind::Zn, &zero_n, &[0.0]).is_err());
    }

    #[test]
    fn extended_orbit_keeps_the_base_fixed() {
        let p = OrbitParams {
            z: PhasePoint::new(c(0.2, 0.9), c(-0.4, 0.1)),
            n: 0,
            psi: c(2.0, 0.0),
            theta0: 1.0,
            consts: unit(),
        };
        let grid: Vec<f64> = (0..20).map(|i| i as f64 * 0.37).collect();
        let tr = sample_trajectory(OrbitKind::Extended, &p, &grid).unwrap();
        let base = hopf_project(&p.z).unwrap();
        for s in &tr.samples {
            assert_eq!(hopf_project(&s.z).unwrap(), base);
            assert_eq!(s.psi, Some(c(2.0, 0.0)));
        }
    }
}
