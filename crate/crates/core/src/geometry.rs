//! Charts on CP¹, the Hopf map, `Z_n` quotients and the blow-up of C² at 0.
//!
//! CP¹ is covered by `U0 = {z0 ≠ 0}` with coordinate `z = z1/z0` and
//! `U1 = {z1 ≠ 0}` with coordinate `w = z0/z1`. A point `(z, ψ_n)` of
//! `Y_n = (C²∖{0}) × C_(n)` is identified with `(λz, λⁿψ_n)` for every
//! `λ ∈ C*`; fixing the gauge on a chart or choosing `λ = ψ_n^{-1/n}` gives the
//! two descriptions related by [`to_orbifold`] and [`from_orbifold`].

use std::f64::consts::{PI, TAU};
use std::num::NonZeroU32;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{normalize_angle, PhasePoint};

/// Relative tolerance used by [`on_point_equal`].
pub const POINT_EQUAL_TOL: f64 = 1e-10;

/// Half-width, in units of one sector, of the band around a sector boundary
/// that is identified with the boundary itself.
pub const SECTOR_SNAP: f64 = 1e-9;

/// Radius below which a point counts as the origin of C².
pub fn origin_tolerance(z: &PhasePoint) -> f64 {
    (1e-12 * (1.0 + z.norm())).max(1e-300)
}

pub fn is_near_origin(z: &PhasePoint) -> bool {
    z.norm() <= origin_tolerance(z)
}

fn require_off_origin(z: &PhasePoint) -> Result<()> {
    if is_near_origin(z) {
        Err(Error::NearOrigin { norm: z.norm() })
    } else {
        Ok(())
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let y = normalize_angle(x);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    U0,
    U1,
}

impl Chart {
    pub fn other(self) -> Chart {
        match self {
            Chart::U0 => Chart::U1,
            Chart::U1 => Chart::U0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Chart::U0 => "U0",
            Chart::U1 => "U1",
        }
    }
}

/// A point of CP¹ in one of the two standard charts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: Chart,
    pub coord: Complex64,
}

impl ChartPoint {
    pub fn new(chart: Chart, coord: Complex64) -> Self {
        ChartPoint { chart, coord }
    }

    /// `P0 = [1:0]`.
    pub fn p0() -> Self {
        ChartPoint::new(Chart::U0, Complex64::new(0.0, 0.0))
    }

    /// `P∞ = [0:1]`.
    pub fn p_inf() -> Self {
        ChartPoint::new(Chart::U1, Complex64::new(0.0, 0.0))
    }

    /// Homogeneous representative `(1, z)` or `(w, 1)`.
    pub fn homogeneous(&self) -> PhasePoint {
        let one = Complex64::new(1.0, 0.0);
        match self.chart {
            Chart::U0 => PhasePoint::new(one, self.coord),
            Chart::U1 => PhasePoint::new(self.coord, one),
        }
    }

    /// Point on the unit sphere; `P0` maps to the north pole `(0, 0, 1)`.
    pub fn to_sphere(&self) -> [f64; 3] {
        let h = self.homogeneous();
        let cross = h.z0.conj() * h.z1;
        let den = h.norm_sqr();
        [2.0 * cross.re / den, 2.0 * cross.im / den, (h.z0.norm_sqr() - h.z1.norm_sqr()) / den]
    }

    /// Euclidean distance between the images on the unit sphere.
    pub fn chordal_distance(&self, other: &ChartPoint) -> f64 {
        let (a, b) = (self.to_sphere(), other.to_sphere());
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }

    /// The same point expressed in `chart`.
    pub fn in_chart(&self, chart: Chart) -> Result<ChartPoint> {
        if chart == self.chart {
            Ok(*self)
        } else {
            chart_transition(self)
        }
    }
}

/// Hopf projection `C²∖{0} → CP¹`, using the chart whose defining component
/// has the larger modulus.
pub fn hopf_project(z: &PhasePoint) -> Result<ChartPoint> {
    require_off_origin(z)?;
    if z.z0.norm() >= z.z1.norm() {
        Ok(ChartPoint::new(Chart::U0, z.z1 / z.z0))
    } else {
        Ok(ChartPoint::new(Chart::U1, z.z0 / z.z1))
    }
}

/// `w = 1/z` between the charts.
pub fn chart_transition(p: &ChartPoint) -> Result<ChartPoint> {
    if p.coord.norm() == 0.0 {
        return Err(Error::ChartPole);
    }
    Ok(ChartPoint::new(p.chart.other(), p.coord.inv()))
}

/// Polar data of a point of C²∖{0}.
///
/// `phi0`, `phi1` are the phases of the components in `[0, 2π)`; a vanishing
/// component reports phase 0 and clears its `*_defined` flag. `chi` is the
/// relative phase `phi1 - phi0` wrapped into `(-π, π]`, and `phi` is the fiber
/// angle `phi0 + chi/2` in `[0, 2π)`; it equals `(phi0 + phi1)/2` modulo π.
/// When one component vanishes `chi = 0` and `phi` is the phase of the other.
/// With this branch `phi` advances by exactly `α` under `z ↦ e^{iα} z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Angles {
    pub rho: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub phi: f64,
    pub chi: f64,
    pub phi0_defined: bool,
    pub phi1_defined: bool,
}

pub fn angles(z: &PhasePoint) -> Result<Angles> {
    require_off_origin(z)?;
    let d0 = z.z0.norm() > 0.0;
    let d1 = z.z1.norm() > 0.0;
    let phi0 = if d0 { normalize_angle(z.z0.arg()) } else { 0.0 };
    let phi1 = if d1 { normalize_angle(z.z1.arg()) } else { 0.0 };
    let (phi, chi) = match (d0, d1) {
        (true, true) => {
            let chi = wrap_pi(phi1 - phi0);
            (normalize_angle(phi0 + 0.5 * chi), chi)
        }
        (true, false) => (phi0, 0.0),
        _ => (phi1, 0.0),
    };
    Ok(Angles { rho: z.norm(), phi0, phi1, phi, chi, phi0_defined: d0, phi1_defined: d1 })
}

/// `ζ^l = exp(2πi (l mod n)/n)`.
pub fn zn_element(n: NonZeroU32, l: i64) -> Complex64 {
    let n = n.get() as i64;
    let k = l.rem_euclid(n);
    match (k * 4).checked_rem(n) {
        // exact values on the real and imaginary axes
        Some(0) => match 4 * k / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        },
        _ => Complex64::from_polar(1.0, TAU * k as f64 / n as f64),
    }
}

/// Index of the `2π/n` sector containing `phi`. Angles within
/// [`SECTOR_SNAP`] of a boundary are assigned to the sector that starts there.
pub fn sector_index(phi: f64, n: NonZeroU32) -> u32 {
    let n = n.get() as i64;
    let x = normalize_angle(phi) * n as f64 / TAU;
    let r = x.round();
    let k = if (x - r).abs() < SECTOR_SNAP { r as i64 } else { x.floor() as i64 };
    k.rem_euclid(n) as u32
}

/// Canonical representative of a point of `(C²∖{0})/Z_n`: the fiber angle
/// lies in the first sector `[0, 2π/n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbifoldRep {
    n: NonZeroU32,
    ztilde: PhasePoint,
}

impl OrbifoldRep {
    pub fn n(&self) -> NonZeroU32 {
        self.n
    }

    pub fn ztilde(&self) -> PhasePoint {
        self.ztilde
    }

    /// Distance between representatives in C²; only meaningful for equal `n`.
    pub fn distance(&self, other: &OrbifoldRep) -> f64 {
        self.ztilde.distance(&other.ztilde)
    }
}

/// Moves `z` into the first sector by a `Z_n` rotation `ζ^l`, returning the
/// representative and `l ∈ {0..n-1}`.
pub fn zn_canonicalize(z: &PhasePoint, n: NonZeroU32) -> Result<(OrbifoldRep, u32)> {
    let a = angles(z)?;
    let k = sector_index(a.phi, n);
    let l = (n.get() - k) % n.get();
    let ztilde = if l == 0 { *z } else { z.scaled(zn_element(n, l as i64)) };
    Ok((OrbifoldRep { n, ztilde }, l))
}

/// Frame used to fix the `C*` gauge on a chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FiberBasis {
    /// `λ = z0^{-1}` (resp. `z1^{-1}`).
    Holomorphic,
    /// `λ = (z̄_a/z_a)^{1/2} ρ^{-1}`: the fiber coordinate carries
    /// `ρ^{-n} e^{-iφ_a n}`.
    Unitary,
}

fn chart_component(z: &PhasePoint, chart: Chart) -> Result<Complex64> {
    let c = match chart {
        Chart::U0 => z.z0,
        Chart::U1 => z.z1,
    };
    if c.norm() == 0.0 {
        Err(Error::ChartPole)
    } else {
        Ok(c)
    }
}

/// Fiber coordinate of `(z, ψ_n)` after fixing the gauge on `chart`.
pub fn gauge_fix_fiber(
    z: &PhasePoint,
    psi_n: Complex64,
    n: u32,
    chart: Chart,
    basis: FiberBasis,
) -> Result<Complex64> {
    let c = chart_component(z, chart)?;
    Ok(match basis {
        FiberBasis::Holomorphic => psi_n / c.powu(n),
        FiberBasis::Unitary => {
            let phase = (c.conj() / c.norm()).powu(n);
            psi_n * phase * z.norm().powi(-(n as i32))
        }
    })
}

/// `|ψ z0^{-n} - zⁿ (ψ z1^{-n})|` with `z = z1/z0`; zero up to rounding.
pub fn cocycle_residual(z: &PhasePoint, psi_n: Complex64, n: u32) -> Result<f64> {
    let u0 = gauge_fix_fiber(z, psi_n, n, Chart::U0, FiberBasis::Holomorphic)?;
    let u1 = gauge_fix_fiber(z, psi_n, n, Chart::U1, FiberBasis::Holomorphic)?;
    let ratio = z.z1 / z.z0;
    Ok((u0 - ratio.powu(n) * u1).norm())
}

/// Orientation of the circle bundle: `L(n,1)` or `L(-n,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Positive,
    Negative,
}

/// A point of the lens space `L(±n, 1)`: base point on a chart and the phase
/// of the unit fiber coordinate (already multiplied by `n`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LensPoint {
    pub n: NonZeroU32,
    pub base: ChartPoint,
    pub fiber_phase: f64,
    pub orientation: Orientation,
}

pub fn lens_point(z: &PhasePoint, psi_n: Complex64, n: NonZeroU32, chart: Chart) -> Result<LensPoint> {
    lens_point_oriented(z, psi_n, n, chart, Orientation::Positive)
}

/// Unit fiber phase `arg((ψ/|ψ|) e^{-iφ_a n})` on chart `a`; the negative
/// orientation uses the inverse coordinate and so reports the negated phase.
pub fn lens_point_oriented(
    z: &PhasePoint,
    psi_n: Complex64,
    n: NonZeroU32,
    chart: Chart,
    orientation: Orientation,
) -> Result<LensPoint> {
    if psi_n.norm() == 0.0 {
        return Err(Error::ZeroSection);
    }
    let c = chart_component(z, chart)?;
    let base = match chart {
        Chart::U0 => ChartPoint::new(Chart::U0, z.z1 / z.z0),
        Chart::U1 => ChartPoint::new(Chart::U1, z.z0 / z.z1),
    };
    let unit = (psi_n / psi_n.norm()) * (c.conj() / c.norm()).powu(n.get());
    let phase = match orientation {
        Orientation::Positive => unit.arg(),
        Orientation::Negative => -unit.arg(),
    };
    Ok(LensPoint { n, base, fiber_phase: normalize_angle(phase), orientation })
}

/// `(z, ψ_n) ↦ ψ_n^{-1/n} z` (principal root), then canonicalized.
pub fn to_orbifold(z: &PhasePoint, psi_n: Complex64, n: NonZeroU32) -> Result<OrbifoldRep> {
    require_off_origin(z)?;
    if psi_n.norm() == 0.0 {
        return Err(Error::ZeroSection);
    }
    let lambda = psi_n.powf(-1.0 / n.get() as f64);
    Ok(zn_canonicalize(&z.scaled(lambda), n)?.0)
}

/// Inverse of [`to_orbifold`]: the representative with unit fiber coordinate.
pub fn from_orbifold(rep: &OrbifoldRep) -> (PhasePoint, Complex64) {
    (rep.ztilde, Complex64::new(1.0, 0.0))
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm())
}

/// Whether two points of `Y_n` lie on the same `C*` orbit: equal Hopf images
/// and equal holomorphic gauge-fixed fibers, both within
/// [`POINT_EQUAL_TOL`] relative.
pub fn on_point_equal(
    a: (&PhasePoint, Complex64),
    b: (&PhasePoint, Complex64),
    n: u32,
) -> Result<bool> {
    let pa = hopf_project(a.0)?;
    let pb = hopf_project(b.0)?;
    let pb = match pb.in_chart(pa.chart) {
        Ok(p) => p,
        Err(Error::ChartPole) => return Ok(false),
        Err(e) => return Err(e),
    };
    if (pa.coord - pb.coord).norm() > POINT_EQUAL_TOL * (1.0 + pa.coord.norm()) {
        return Ok(false);
    }
    let fa = gauge_fix_fiber(a.0, a.1, n, pa.chart, FiberBasis::Holomorphic)?;
    let fb = match gauge_fix_fiber(b.0, b.1, n, pa.chart, FiberBasis::Holomorphic) {
        Ok(f) => f,
        Err(Error::ChartPole) => return Ok(false),
        Err(e) => return Err(e),
    };
    Ok(close(fa, fb, POINT_EQUAL_TOL))
}

/// A point of the blow-up `O(-1)`: a direction in CP¹ and the tautological
/// fiber coordinate `ψ_{-1}`. `scale = 0` is the exceptional divisor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupPoint {
    pub direction: ChartPoint,
    pub scale: Complex64,
}

/// Lifts `z ≠ 0` to the blow-up, taking the chart-defining component of `z`
/// as the fiber coordinate.
pub fn blowup_lift(z: &PhasePoint) -> Result<BlowupPoint> {
    let direction = hopf_project(z)?;
    let scale = match direction.chart {
        Chart::U0 => z.z0,
        Chart::U1 => z.z1,
    };
    Ok(BlowupPoint { direction, scale })
}

/// The blow-down map `O(-1) → C²`.
pub fn blowdown(b: &BlowupPoint) -> PhasePoint {
    b.direction.homogeneous().scaled(b.scale)
}
