//! Truncated Bargmann–Fock state space over C².
//!
//! States are holomorphic polynomials expanded in the orthonormal monomials
//! `ψ_nm = z0^(n-m) z1^m / sqrt((n-m)! m!)`. The Gaussian vacuum factor
//! `(1/π) e^{-|z|²/2} e^{iθ}` is kept outside the coefficients and only
//! enters through [`section_eval`], so the Bargmann inner product is plain
//! coefficient algebra.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest degree evaluated with the direct sqrt-factorial table.
/// Above it monomials are accumulated in log space.
pub const DIRECT_DEGREE_LIMIT: u32 = 150;

/// Samples drawn per independently seeded Monte-Carlo chunk.
pub const MC_CHUNK_SIZE: usize = 4096;

const LN_FACTORIAL_TABLE_LEN: usize = 1024;

fn sqrt_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut fact = 1.0_f64;
        let mut out = Vec::with_capacity(DIRECT_DEGREE_LIMIT as usize + 1);
        out.push(1.0);
        for k in 1..=DIRECT_DEGREE_LIMIT {
            fact *= k as f64;
            out.push(fact.sqrt());
        }
        out
    })
}

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut acc = 0.0_f64;
        let mut out = Vec::with_capacity(LN_FACTORIAL_TABLE_LEN);
        out.push(0.0);
        for k in 1..LN_FACTORIAL_TABLE_LEN {
            acc += (k as f64).ln();
            out.push(acc);
        }
        out
    })
}

/// `ln(k!)`, tabulated for small `k` and accumulated beyond the table.
pub fn ln_factorial(k: u32) -> f64 {
    let table = ln_factorial_table();
    let k = k as usize;
    if k < table.len() {
        return table[k];
    }
    let mut acc = table[table.len() - 1];
    for i in table.len()..=k {
        acc += (i as f64).ln();
    }
    acc
}

/// `sqrt(k!)`. Overflows to infinity for very large `k`.
pub fn sqrt_factorial(k: u32) -> f64 {
    if k <= DIRECT_DEGREE_LIMIT {
        sqrt_factorial_table()[k as usize]
    } else {
        (0.5 * ln_factorial(k)).exp()
    }
}

/// Which of the two complex coordinates an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    Zero,
    One,
}

impl Slot {
    pub const BOTH: [Slot; 2] = [Slot::Zero, Slot::One];

    pub fn index(self) -> usize {
        match self {
            Slot::Zero => 0,
            Slot::One => 1,
        }
    }
}

impl TryFrom<u8> for Slot {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Slot::Zero),
            1 => Ok(Slot::One),
            _ => Err(Error::InvalidArgument(format!("slot must be 0 or 1, got {v}"))),
        }
    }
}

/// Index `(n, m)` of the basis monomial `ψ_nm`; `n` is the total degree and
/// `m` the power of `z1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Bidegree {
    n: u32,
    m: u32,
}

impl Bidegree {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if m > n {
            return Err(Error::Range(format!("bidegree requires m <= n, got ({n}, {m})")));
        }
        Ok(Bidegree { n, m })
    }

    pub fn n(self) -> u32 {
        self.n
    }

    pub fn m(self) -> u32 {
        self.m
    }

    /// Power of `z0`.
    pub fn k0(self) -> u32 {
        self.n - self.m
    }

    /// `sqrt((n-m)! m!)`, the normalization dividing the monomial.
    pub fn norm_factor(self) -> f64 {
        sqrt_factorial(self.k0()) * sqrt_factorial(self.m)
    }

    /// All bidegrees with total degree at most `nmax`, in lexicographic order.
    pub fn all_up_to(nmax: u32) -> impl Iterator<Item = Bidegree> {
        (0..=nmax).flat_map(|n| (0..=n).map(move |m| Bidegree { n, m }))
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n, self.m)
    }
}

/// A point `(z0, z1)` of phase space in dimensionless coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub z0: Complex64,
    pub z1: Complex64,
}

impl PhasePoint {
    pub fn new(z0: Complex64, z1: Complex64) -> Self {
        PhasePoint { z0, z1 }
    }

    pub fn origin() -> Self {
        PhasePoint::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn from_parts(re0: f64, im0: f64, re1: f64, im1: f64) -> Self {
        PhasePoint::new(Complex64::new(re0, im0), Complex64::new(re1, im1))
    }

    pub fn get(&self, slot: Slot) -> Complex64 {
        match slot {
            Slot::Zero => self.z0,
            Slot::One => self.z1,
        }
    }

    /// `|z|² = |z0|² + |z1|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.z0.norm_sqr() + self.z1.norm_sqr()
    }

    /// Radial coordinate `ρ = |z|`.
    pub fn norm(&self) -> f64 {
        self.z0.norm().hypot(self.z1.norm())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        PhasePoint::new(c * self.z0, c * self.z1)
    }

    pub fn distance(&self, other: &PhasePoint) -> f64 {
        (self.z0 - other.z0).norm().hypot((self.z1 - other.z1).norm())
    }
}

/// `ħ` and `ω`; both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    hbar: f64,
    omega: f64,
}

impl PhysicalConstants {
    pub fn new(hbar: f64, omega: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidArgument(format!("hbar must be positive, got {hbar}")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
        }
        Ok(PhysicalConstants { hbar, omega })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `ħω`, the zero-point energy and level spacing.
    pub fn quantum(&self) -> f64 {
        self.hbar * self.omega
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants { hbar: 1.0, omega: 1.0 }
    }
}

/// Truncated holomorphic polynomial: amplitudes on bidegrees `n <= nmax`.
/// Missing entries are zero; zero amplitudes are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoloPoly {
    coeffs: BTreeMap<Bidegree, Complex64>,
    nmax: u32,
}

impl HoloPoly {
    pub fn zero(nmax: u32) -> Self {
        HoloPoly { coeffs: BTreeMap::new(), nmax }
    }

    /// The unit-amplitude basis state `ψ_nm`.
    pub fn basis(n: u32, m: u32, nmax: u32) -> Result<Self> {
        let mut p = HoloPoly::zero(nmax);
        p.set(Bidegree::new(n, m)?, Complex64::new(1.0, 0.0))?;
        Ok(p)
    }

    pub fn from_terms<I>(nmax: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Bidegree, Complex64)>,
    {
        let mut p = HoloPoly::zero(nmax);
        for (deg, amp) in terms {
            let sum = p.amplitude(deg) + amp;
            p.set(deg, sum)?;
        }
        Ok(p)
    }

    /// Overwrites one amplitude. Fails if the bidegree lies above `nmax`.
    pub fn set(&mut self, deg: Bidegree, amp: Complex64) -> Result<()> {
        if deg.n > self.nmax {
            return Err(Error::Range(format!(
                "bidegree {deg} exceeds truncation nmax = {}",
                self.nmax
            )));
        }
        if amp == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&deg);
        } else {
            self.coeffs.insert(deg, amp);
        }
        Ok(())
    }

    pub fn amplitude(&self, deg: Bidegree) -> Complex64 {
        self.coeffs.get(&deg).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Bidegree, Complex64)> + '_ {
        self.coeffs.iter().map(|(d, a)| (*d, *a))
    }

    pub fn nmax(&self) -> u32 {
        self.nmax
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest grade carrying a stored amplitude.
    pub fn top_grade(&self) -> Option<u32> {
        self.coeffs.keys().map(|d| d.n).max()
    }

    /// Distinct grades present, ascending.
    pub fn grades(&self) -> Vec<u32> {
        let mut g: Vec<u32> = self.coeffs.keys().map(|d| d.n).collect();
        g.dedup();
        g
    }

    /// Same amplitudes under a different truncation. Fails if an amplitude
    /// would fall outside the new bound.
    pub fn with_nmax(&self, nmax: u32) -> Result<Self> {
        if let Some(top) = self.top_grade() {
            if top > nmax {
                return Err(Error::Range(format!(
                    "grade {top} does not fit under nmax = {nmax}"
                )));
            }
        }
        Ok(HoloPoly { coeffs: self.coeffs.clone(), nmax })
    }

    /// Drops amplitudes with modulus at or below `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        HoloPoly {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(_, a)| a.norm() > tol)
                .map(|(d, a)| (*d, *a))
                .collect(),
            nmax: self.nmax,
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = HoloPoly::zero(self.nmax);
        for (d, a) in self.terms() {
            out.set(d, a * c).expect("bidegree already within nmax");
        }
        out
    }

    /// `Σ |amplitude|²`, the Bargmann norm squared.
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.values().map(|a| a.norm_sqr()).fold(0.0, |s, x| s + x)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest coefficientwise deviation from `other`.
    pub fn max_abs_diff(&self, other: &HoloPoly) -> f64 {
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .map(|d| (self.amplitude(*d) - other.amplitude(*d)).norm())
            .fold(0.0, f64::max)
    }

    /// `Σ_m |amplitude(n, m)|²` for one grade.
    pub fn grade_weight(&self, n: u32) -> f64 {
        self.terms().filter(|(d, _)| d.n == n).map(|(_, a)| a.norm_sqr()).fold(0.0, |s, x| s + x)
    }

    /// Multiplies every grade-`n` amplitude by `f(n)`.
    pub fn map_grades<F>(&self, f: F) -> Self
    where
        F: Fn(u32) -> Complex64,
    {
        let mut out = HoloPoly::zero(self.nmax);
        for (d, a) in self.terms() {
            out.set(d, a * f(d.n)).expect("bidegree already within nmax");
        }
        out
    }

    fn accumulate(&mut self, deg: Bidegree, amp: Complex64) {
        let entry = self.coeffs.entry(deg).or_default();
        *entry += amp;
        if *entry == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&deg);
        }
    }
}

impl Add for &HoloPoly {
    type Output = HoloPoly;

    fn add(self, rhs: &HoloPoly) -> HoloPoly {
        let mut out = HoloPoly { coeffs: self.coeffs.clone(), nmax: self.nmax.max(rhs.nmax) };
        for (d, a) in rhs.terms() {
            out.accumulate(d, a);
        }
        out
    }
}

impl Sub for &HoloPoly {
    type Output = HoloPoly;

    fn sub(self, rhs: &HoloPoly) -> HoloPoly {
        let mut out = HoloPoly { coeffs: self.coeffs.clone(), nmax: self.nmax.max(rhs.nmax) };
        for (d, a) in rhs.terms() {
            out.accumulate(d, -a);
        }
        out
    }
}

impl Mul<Complex64> for &HoloPoly {
    type Output = HoloPoly;

    fn mul(self, rhs: Complex64) -> HoloPoly {
        self.scaled(rhs)
    }
}

/// Normalizes an angle into `[0, 2π)`.
pub fn normalize_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A section `Ψ = ψ · ψ_0^v` of the quantum bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionState {
    pub poly: HoloPoly,
    theta: f64,
    pub consts: PhysicalConstants,
}

impl SectionState {
    pub fn new(poly: HoloPoly, theta: f64, consts: PhysicalConstants) -> Self {
        SectionState { poly, theta: normalize_angle(theta), consts }
    }

    /// The vacuum `ψ_0^v` itself (`ψ = 1`, `θ = 0`).
    pub fn ground(consts: PhysicalConstants, nmax: u32) -> Self {
        let poly = HoloPoly::basis(0, 0, nmax).expect("grade 0 always fits");
        SectionState::new(poly, 0.0, consts)
    }

    /// Vacuum phase in `[0, 2π)`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        SectionState::new(self.poly.clone(), theta, self.consts)
    }

    pub fn with_poly(&self, poly: HoloPoly) -> Self {
        SectionState::new(poly, self.theta, self.consts)
    }
}

/// `z0^(n-m) z1^m / sqrt((n-m)! m!)` with `0^0 = 1`.
pub fn monomial_eval(deg: Bidegree, z: &PhasePoint) -> Complex64 {
    let (k0, k1) = (deg.k0(), deg.m);
    if deg.n <= DIRECT_DEGREE_LIMIT {
        return z.z0.powu(k0) * z.z1.powu(k1) / deg.norm_factor();
    }
    if (k0 > 0 && z.z0.norm() == 0.0) || (k1 > 0 && z.z1.norm() == 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    let log_mag = |w: Complex64, k: u32| if k == 0 { 0.0 } else { k as f64 * w.norm().ln() };
    let log_phase = |w: Complex64, k: u32| if k == 0 { 0.0 } else { k as f64 * w.arg() };
    let ln_abs = log_mag(z.z0, k0) + log_mag(z.z1, k1) - 0.5 * (ln_factorial(k0) + ln_factorial(k1));
    Complex64::from_polar(ln_abs.exp(), log_phase(z.z0, k0) + log_phase(z.z1, k1))
}

/// `ψ(z) = Σ c_nm ψ_nm(z)`.
pub fn poly_eval(p: &HoloPoly, z: &PhasePoint) -> Complex64 {
    p.terms().map(|(d, a)| a * monomial_eval(d, z)).sum()
}

/// The vacuum factor `(1/π) e^{-|z|²/2} e^{iθ}`.
pub fn vacuum_factor(theta: f64, z: &PhasePoint) -> Complex64 {
    Complex64::from_polar((-0.5 * z.norm_sqr()).exp() / PI, theta)
}

/// `Ψ(z) = ψ(z) · (1/π) e^{-|z|²/2} e^{iθ}`.
pub fn section_eval(s: &SectionState, z: &PhasePoint) -> Complex64 {
    poly_eval(&s.poly, z) * vacuum_factor(s.theta, z)
}

/// Bargmann inner product `⟨p, q⟩`, conjugate-linear in `p`.
pub fn inner_product(p: &HoloPoly, q: &HoloPoly) -> Complex64 {
    p.terms().map(|(d, a)| a.conj() * q.amplitude(d)).sum()
}

/// Monte-Carlo estimate of an inner product with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: Complex64,
    /// Standard error of the complex mean, `sqrt(Σ|x - mean|² / (N (N-1)))`.
    /// NaN for a single sample.
    pub stderr: f64,
    pub samples: usize,
}

#[derive(Clone, Copy)]
struct ChunkStats {
    count: usize,
    mean: Complex64,
    m2: f64,
}

impl ChunkStats {
    fn merge(self, other: ChunkStats) -> ChunkStats {
        if self.count == 0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        ChunkStats {
            count,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta.norm_sqr() * self.count as f64 * w,
        }
    }
}

/// Estimates `(1/π²) ∫ conj(p) q e^{-|z|²} d⁴z` by sampling each real and
/// imaginary coordinate from `N(0, 1/2)`.
///
/// Samples are drawn in chunks of [`MC_CHUNK_SIZE`]; chunk `c` uses a ChaCha8
/// stream seeded by `(seed, c)`, and chunk statistics are merged in chunk
/// order, so the result does not depend on the number of worker threads.
pub fn mc_inner_product(p: &HoloPoly, q: &HoloPoly, samples: usize, seed: u64) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let chunks = samples.div_ceil(MC_CHUNK_SIZE);
    let sigma = std::f64::consts::FRAC_1_SQRT_2;
    let stats: Vec<ChunkStats> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK_SIZE.min(samples - c * MC_CHUNK_SIZE);
            let mut draw = || -> f64 {
                let x: f64 = StandardNormal.sample(&mut rng);
                sigma * x
            };
            let mut stats = ChunkStats { count: 0, mean: Complex64::default(), m2: 0.0 };
            for _ in 0..count {
                let z = PhasePoint::from_parts(draw(), draw(), draw(), draw());
                let x = poly_eval(p, &z).conj() * poly_eval(q, &z);
                stats.count += 1;
                let delta = x - stats.mean;
                stats.mean += delta / stats.count as f64;
                stats.m2 += delta.re * (x - stats.mean).re + delta.im * (x - stats.mean).im;
            }
            stats
        })
        .collect();
    let total = stats
        .into_iter()
        .fold(ChunkStats { count: 0, mean: Complex64::default(), m2: 0.0 }, ChunkStats::merge);
    let stderr = if total.count > 1 {
        (total.m2.max(0.0) / ((total.count - 1) as f64 * total.count as f64)).sqrt()
    } else {
        f64::NAN
    };
    Ok(McEstimate { estimate: total.mean, stderr, samples })
}

/// `a^α = ∂/∂z_α` in the `ψ_nm` basis.
pub fn apply_annihilation(slot: Slot, p: &HoloPoly) -> HoloPoly {
    let mut out = HoloPoly::zero(p.nmax);
    for (d, a) in p.terms() {
        match slot {
            Slot::Zero if d.k0() > 0 => {
                out.accumulate(Bidegree { n: d.n - 1, m: d.m }, a * (d.k0() as f64).sqrt());
            }
            Slot::One if d.m > 0 => {
                out.accumulate(Bidegree { n: d.n - 1, m: d.m - 1 }, a * (d.m as f64).sqrt());
            }
            _ => {}
        }
    }
    out
}

fn raise(slot: Slot, p: &HoloPoly, out: &mut HoloPoly) {
    for (d, a) in p.terms() {
        if d.n >= out.nmax {
            continue;
        }
        match slot {
            Slot::Zero => {
                out.accumulate(Bidegree { n: d.n + 1, m: d.m }, a * ((d.k0() + 1) as f64).sqrt())
            }
            Slot::One => {
                out.accumulate(Bidegree { n: d.n + 1, m: d.m + 1 }, a * ((d.m + 1) as f64).sqrt())
            }
        }
    }
}

/// `a†_β = z_β ·` in the `ψ_nm` basis. Refuses to push amplitude past `nmax`.
pub fn apply_creation(slot: Slot, p: &HoloPoly) -> Result<HoloPoly> {
    if let Some(top) = p.top_grade() {
        if top >= p.nmax {
            return Err(Error::TruncationOverflow { grade: top, nmax: p.nmax });
        }
    }
    let mut out = HoloPoly::zero(p.nmax);
    raise(slot, p, &mut out);
    Ok(out)
}

/// Creation operator compressed onto the truncated space: amplitude that
/// would leave grade `nmax` is discarded. Only the operator exponential uses
/// this; everything else goes through [`apply_creation`].
pub(crate) fn apply_creation_compressed(slot: Slot, p: &HoloPoly) -> HoloPoly {
    let mut out = HoloPoly::zero(p.nmax);
    raise(slot, p, &mut out);
    out
}

/// `N̂ = z_α ∂_{z_α}`: scales grade `n` by `n`.
pub fn number_apply(p: &HoloPoly) -> HoloPoly {
    p.map_grades(|n| Complex64::new(n as f64, 0.0))
}

/// `ĤΨ = ħω (z∂ + 1) ψ · ψ_0^v`: scales grade `n` by `ħω(n+1)`, keeps `θ`.
pub fn hamiltonian_apply(s: &SectionState) -> SectionState {
    let q = s.consts.quantum();
    s.with_poly(s.poly.map_grades(|n| Complex64::new(q * (n as f64 + 1.0), 0.0)))
}

/// Keeps only the amplitudes of total degree `n`.
pub fn grade_project(p: &HoloPoly, n: u32) -> HoloPoly {
    HoloPoly {
        coeffs: p.coeffs.iter().filter(|(d, _)| d.n == n).map(|(d, a)| (*d, *a)).collect(),
        nmax: p.nmax,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basis(n: u32, m: u32) -> HoloPoly {
        HoloPoly::basis(n, m, 8).unwrap()
    }

    #[test]
    fn bidegree_rejects_m_above_n() {
        assert!(Bidegree::new(2, 3).is_err());
        assert!(Bidegree::new(3, 3).is_ok());
    }

    #[test]
    fn monomial_examples() {
        let z = PhasePoint::from_parts(0.3, -1.2, 2.0, 0.5);
        assert_eq!(monomial_eval(Bidegree::new(0, 0).unwrap(), &z), c(1.0, 0.0));
        let e = PhasePoint::from_parts(1.0, 0.0, 0.0, 0.0);
        assert_eq!(monomial_eval(Bidegree::new(1, 0).unwrap(), &e), c(1.0, 0.0));
        let v = monomial_eval(Bidegree::new(2, 2).unwrap(), &PhasePoint::from_parts(0.0, 0.0, 2.0, 0.0));
        assert!((v - c(2.0 * 2f64.sqrt(), 0.0)).norm() < 1e-14);
        // 0^0 = 1 at the origin
        let o = PhasePoint::origin();
        assert_eq!(monomial_eval(Bidegree::new(0, 0).unwrap(), &o), c(1.0, 0.0));
        assert_eq!(monomial_eval(Bidegree::new(1, 1).unwrap(), &o), c(0.0, 0.0));
    }

    #[test]
    fn log_space_monomial_matches_direct_formula_at_the_switch() {
        // degree 151 goes through log space; compare with a direct product
        let z = PhasePoint::from_parts(0.9, 0.2, -0.4, 0.7);
        let deg = Bidegree::new(151, 60).unwrap();
        let log_space = monomial_eval(deg, &z);
        let mut direct = c(1.0, 0.0);
        for k in 1..=91u32 {
            direct *= z.z0 / (k as f64).sqrt();
        }
        for k in 1..=60u32 {
            direct *= z.z1 / (k as f64).sqrt();
        }
        assert!((log_space - direct).norm() <= 1e-10 * direct.norm());
    }

    #[test]
    fn poly_eval_examples() {
        let z = PhasePoint::from_parts(2.0, 0.0, 3.0, 0.0);
        assert_eq!(poly_eval(&HoloPoly::zero(4), &z), c(0.0, 0.0));
        assert_eq!(poly_eval(&basis(0, 0), &z), c(1.0, 0.0));
        let p = &basis(1, 0) + &basis(1, 1);
        assert!((poly_eval(&p, &z) - c(5.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn section_eval_examples() {
        let consts = PhysicalConstants::default();
        let ground = SectionState::ground(consts, 4);
        assert!((section_eval(&ground, &PhasePoint::origin()) - c(1.0 / PI, 0.0)).norm() < 1e-15);

        let s = SectionState::new(basis(1, 0), 0.0, consts);
        let v = section_eval(&s, &PhasePoint::from_parts(1.0, 0.0, 0.0, 0.0));
        assert!((v - c((-0.5f64).exp() / PI, 0.0)).norm() < 1e-15);

        // Gaussian decay dominates the polynomial growth
        let far = section_eval(&s, &PhasePoint::from_parts(30.0, 0.0, 0.0, 0.0));
        assert!(far.norm() < 1e-190);
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(inner_product(&basis(2, 1), &basis(2, 1)), c(1.0, 0.0));
        assert_eq!(inner_product(&basis(1, 0), &basis(0, 0)), c(0.0, 0.0));
        assert_eq!(inner_product(&basis(1, 0), &basis(1, 1)), c(0.0, 0.0));
        let p = &basis(0, 0).scaled(c(2.0, 0.0)) + &basis(1, 1).scaled(c(0.0, 1.0));
        assert_eq!(inner_product(&p, &basis(1, 1)), c(0.0, -1.0));
    }

    #[test]
    fn mc_inner_product_rejects_zero_samples() {
        assert!(matches!(
            mc_inner_product(&basis(0, 0), &basis(0, 0), 0, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn mc_inner_product_matches_closed_form() {
        let n = 200_000;
        let cases = [(basis(0, 0), basis(0, 0)), (basis(1, 0), basis(1, 1)), (basis(2, 2), basis(2, 2))];
        for (p, q) in cases {
            let est = mc_inner_product(&p, &q, n, 7).unwrap();
            let exact = inner_product(&p, &q);
            assert!(
                (est.estimate - exact).norm() <= 3.0 * est.stderr + 1e-15,
                "{p:?} {q:?}: {est:?} vs {exact}"
            );
        }
    }

    #[test]
    fn mc_inner_product_is_deterministic_across_thread_counts() {
        let p = &basis(1, 0) + &basis(2, 1);
        let q = &basis(1, 0) + &basis(0, 0);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| mc_inner_product(&p, &q, 50_000, 3).unwrap());
        let b = four.install(|| mc_inner_product(&p, &q, 50_000, 3).unwrap());
        assert_eq!(a.estimate.re.to_bits(), b.estimate.re.to_bits());
        assert_eq!(a.estimate.im.to_bits(), b.estimate.im.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn ladder_examples() {
        assert!(apply_annihilation(Slot::Zero, &basis(0, 0)).is_empty());
        assert_eq!(apply_annihilation(Slot::Zero, &basis(1, 0)), basis(0, 0));
        let lowered = apply_annihilation(Slot::One, &basis(2, 2));
        assert!(lowered.max_abs_diff(&basis(1, 1).scaled(c(2f64.sqrt(), 0.0))) < 1e-15);

        assert_eq!(apply_creation(Slot::Zero, &basis(0, 0)).unwrap(), basis(1, 0));
        let raised = apply_creation(Slot::Zero, &basis(1, 0)).unwrap();
        assert!(raised.max_abs_diff(&basis(2, 0).scaled(c(2f64.sqrt(), 0.0))) < 1e-15);
        assert_eq!(apply_creation(Slot::One, &basis(1, 0)).unwrap(), basis(2, 1));
    }

    #[test]
    fn creation_refuses_to_truncate() {
        let top = HoloPoly::basis(3, 1, 3).unwrap();
        assert_eq!(
            apply_creation(Slot::One, &top),
            Err(Error::TruncationOverflow { grade: 3, nmax: 3 })
        );
        // zero amplitudes at the top are not stored, so they do not block
        let mut p = HoloPoly::basis(1, 0, 3).unwrap();
        p.set(Bidegree::new(3, 0).unwrap(), c(0.0, 0.0)).unwrap();
        assert!(apply_creation(Slot::Zero, &p).is_ok());
    }

    #[test]
    fn number_and_hamiltonian_examples() {
        assert!(number_apply(&basis(0, 0)).is_empty());
        assert_eq!(number_apply(&basis(3, 1)), basis(3, 1).scaled(c(3.0, 0.0)));
        let p = &basis(1, 0) + &basis(2, 2);
        let expected = &basis(1, 0) + &basis(2, 2).scaled(c(2.0, 0.0));
        assert_eq!(number_apply(&p), expected);

        let consts = PhysicalConstants::new(2.0, 3.0).unwrap();
        let s = SectionState::new(basis(1, 0), 0.4, consts);
        let h = hamiltonian_apply(&s);
        assert_eq!(h.poly, basis(1, 0).scaled(c(12.0, 0.0)));
        assert_eq!(h.theta(), s.theta());

        let ground = SectionState::ground(PhysicalConstants::default(), 2);
        assert_eq!(hamiltonian_apply(&ground).poly, ground.poly);
    }

    #[test]
    fn grade_projection_partitions() {
        let p = &(&basis(1, 0) + &basis(2, 2)) + &basis(2, 0).scaled(c(0.0, 3.0));
        assert_eq!(grade_project(&basis(1, 0), 1), basis(1, 0));
        let two = grade_project(&p, 2);
        assert_eq!(grade_project(&two, 2), two);
        assert_eq!(two.grades(), vec![2]);
        let mut sum = HoloPoly::zero(8);
        for n in 0..=8 {
            sum = &sum + &grade_project(&p, n);
        }
        assert_eq!(sum, p);
    }

    #[test]
    fn set_rejects_degree_above_nmax() {
        let mut p = HoloPoly::zero(2);
        assert!(p.set(Bidegree::new(3, 0).unwrap(), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn theta_is_normalized() {
        let s = SectionState::new(HoloPoly::zero(1), -0.5, PhysicalConstants::default());
        assert!((s.theta() - (TAU - 0.5)).abs() < 1e-15);
        assert_eq!(normalize_angle(TAU), 0.0);
        assert_eq!(normalize_angle(-1e-300), 0.0);
    }

    #[test]
    fn constants_must_be_positive() {
        assert!(PhysicalConstants::new(0.0, 1.0).is_err());
        assert!(PhysicalConstants::new(1.0, -1.0).is_err());
        assert!(PhysicalConstants::new(f64::NAN, 1.0).is_err());
    }
}
