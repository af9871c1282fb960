//! Coherent states and the displacement operator on the truncated space.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    apply_annihilation, apply_creation, apply_creation_compressed, grade_project, ln_factorial, Bidegree,
    HoloPoly, SectionState, Slot,
};

/// Largest fraction of the squared norm allowed in the top grade after a
/// displacement before the result is rejected as truncated.
pub const DISPLACEMENT_OVERFLOW: f64 = 1e-8;

/// Fraction of the squared norm within [`MARGIN_GRADES`] of `nmax` above
/// which [`truncation_margin`] warns.
pub const MARGIN_WARN: f64 = 1e-12;
pub const MARGIN_GRADES: u32 = 3;

const MAX_TAYLOR_TERMS: usize = 80;

/// The pair `b = (b_0, b_1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacementParam {
    pub b0: Complex64,
    pub b1: Complex64,
}

impl DisplacementParam {
    pub fn new(b0: Complex64, b1: Complex64) -> Self {
        DisplacementParam { b0, b1 }
    }

    pub fn zero() -> Self {
        DisplacementParam::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn get(&self, slot: Slot) -> Complex64 {
        match slot {
            Slot::Zero => self.b0,
            Slot::One => self.b1,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.b0.norm_sqr() + self.b1.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

impl std::ops::Neg for DisplacementParam {
    type Output = DisplacementParam;

    fn neg(self) -> DisplacementParam {
        DisplacementParam::new(-self.b0, -self.b1)
    }
}

/// Coefficients of `e^{-|b|²/2} e^{b̄·z}` up to grade `nmax`.
pub fn coherent_coeffs(b: &DisplacementParam, nmax: u32) -> HoloPoly {
    let pre = (-0.5 * b.norm_sqr()).exp();
    let (c0, c1) = (b.b0.conj(), b.b1.conj());
    let mut p = HoloPoly::zero(nmax);
    for d in Bidegree::all_up_to(nmax) {
        let scale = (-0.5 * (ln_factorial(d.k0()) + ln_factorial(d.m()))).exp();
        let amp = c0.powu(d.k0()) * c1.powu(d.m()) * (pre * scale);
        p.set(d, amp).expect("bidegree within nmax");
    }
    p
}

/// `⟨Ψ(b), Ψ(c)⟩ = exp(-|b|²/2 - |c|²/2 + b_α c̄_α)`.
pub fn coherent_overlap(b: &DisplacementParam, c: &DisplacementParam) -> Complex64 {
    let cross = b.b0 * c.b0.conj() + b.b1 * c.b1.conj();
    (cross - 0.5 * (b.norm_sqr() + c.norm_sqr())).exp()
}

/// Upper bound `|b|^{2(nmax+1)}/(nmax+1)!` on `1 - ‖Ψ(b)‖²` at truncation `nmax`.
pub fn coherent_norm_tail_bound(b: &DisplacementParam, nmax: u32) -> f64 {
    let k = nmax + 1;
    if b.norm_sqr() == 0.0 {
        return 0.0;
    }
    (k as f64 * b.norm_sqr().ln() - ln_factorial(k)).exp()
}

/// `G·p = b̄_α a†_α p - b_α a^α p`, with creation compressed onto the
/// truncated space so that `G` stays anti-Hermitian there.
fn generator(b: &DisplacementParam, p: &HoloPoly) -> HoloPoly {
    let mut out = HoloPoly::zero(p.nmax());
    for slot in Slot::BOTH {
        let bs = b.get(slot);
        if bs == Complex64::new(0.0, 0.0) {
            continue;
        }
        out = &out + &apply_creation_compressed(slot, p).scaled(bs.conj());
        out = &out - &apply_annihilation(slot, p).scaled(bs);
    }
    out
}

/// `e^{G/2^s} p` by a Taylor series, stopped once a term is negligible.
fn taylor_step(b: &DisplacementParam, p: &HoloPoly) -> Result<HoloPoly> {
    let scale = p.norm();
    let mut sum = p.clone();
    let mut term = p.clone();
    for k in 1..=MAX_TAYLOR_TERMS {
        term = generator(b, &term).scaled(Complex64::new(1.0 / k as f64, 0.0));
        sum = &sum + &term;
        if term.norm() <= 1e-18 * scale {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence { iters: MAX_TAYLOR_TERMS })
}

/// `D(b) p = exp(b̄_α a†_α - b_α a^α) p` on the truncated space, by scaling
/// and squaring.
pub fn displacement_apply(b: &DisplacementParam, p: &HoloPoly) -> Result<HoloPoly> {
    if p.is_empty() || b.norm_sqr() == 0.0 {
        return Ok(p.clone());
    }
    // ‖a^α‖, ‖a†_α‖ ≤ sqrt(nmax) on the truncated space
    let bound = 2.0 * (b.b0.norm() + b.b1.norm()) * (p.nmax().max(1) as f64).sqrt();
    let squarings = (bound / 0.5).log2().ceil().max(0.0) as i32;
    let small = DisplacementParam::new(b.b0 * 0.5f64.powi(squarings), b.b1 * 0.5f64.powi(squarings));
    let mut out = p.clone();
    for _ in 0..(1u64 << squarings) {
        out = taylor_step(&small, &out)?;
    }
    let total = out.norm_sqr();
    if total > 0.0 && out.grade_weight(out.nmax()) > DISPLACEMENT_OVERFLOW * total {
        return Err(Error::TruncationOverflow { grade: out.nmax(), nmax: out.nmax() });
    }
    Ok(out)
}

/// `max_α ‖a^α Ψ(b) - b̄_α Ψ(b)‖` over grades `≤ nmax - 1`.
pub fn annihilation_eigen_residual(b: &DisplacementParam, nmax: u32) -> Result<f64> {
    if nmax == 0 {
        return Err(Error::InvalidArgument("nmax must be at least 1".into()));
    }
    let psi = coherent_coeffs(b, nmax);
    let mut worst: f64 = 0.0;
    for slot in Slot::BOTH {
        let diff = &apply_annihilation(slot, &psi) - &psi.scaled(b.get(slot).conj());
        let kept: f64 = (0..nmax).map(|n| grade_project(&diff, n).norm_sqr()).fold(0.0, |s, x| s + x);
        worst = worst.max(kept.sqrt());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LadderDirection {
    Lower,
    Raise,
}

/// `∇_{z_α}` lowers by `a^α`; `∇_{z̄_α}` raises by `-a†_α`. `θ` is kept.
pub fn ladder_map(s: &SectionState, direction: LadderDirection, slot: Slot) -> Result<SectionState> {
    let poly = match direction {
        LadderDirection::Lower => apply_annihilation(slot, &s.poly),
        LadderDirection::Raise => apply_creation(slot, &s.poly)?.scaled(Complex64::new(-1.0, 0.0)),
    };
    Ok(s.with_poly(poly))
}

/// How much of a state sits close to its truncation degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationMargin {
    /// Fraction of `‖p‖²` in the top [`MARGIN_GRADES`] grades.
    pub near_top_fraction: f64,
    pub warn: bool,
}

pub fn truncation_margin(p: &HoloPoly) -> TruncationMargin {
    let total = p.norm_sqr();
    let start = p.nmax().saturating_sub(MARGIN_GRADES - 1);
    let near: f64 = (start..=p.nmax()).map(|n| p.grade_weight(n)).fold(0.0, |s, x| s + x);
    let near_top_fraction = if total > 0.0 { near / total } else { 0.0 };
    TruncationMargin { near_top_fraction, warn: near_top_fraction > MARGIN_WARN }
}
