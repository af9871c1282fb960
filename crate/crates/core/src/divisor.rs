//! Majorana stars: zeros of a grade-`n` state's local section on CP¹,
//! counted with multiplicity and including the point at infinity.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ln_factorial, Bidegree, HoloPoly};
use crate::geometry::{Chart, ChartPoint};

/// Coefficients below this fraction of the largest one count as zero when
/// the polynomial degree is determined.
pub const LEADING_UNDERFLOW: f64 = 1e-14;

/// `1/sqrt((n-m)! m!)`
fn local_scale(n: u32, m: u32) -> f64 {
    (-0.5 * (ln_factorial(n - m) + ln_factorial(m))).exp()
}

/// U0 coefficients `a_m = b_nm / sqrt((n-m)! m!)`, `m = 0..=n`, of a state
/// supported on grade `n`.
pub fn local_coeffs(p: &HoloPoly, n: u32) -> Result<Vec<Complex64>> {
    if p.terms().any(|(d, _)| d.n() != n) {
        return Err(Error::MixedGrade { grade: n });
    }
    Ok((0..=n)
        .map(|m| p.amplitude(Bidegree::new(n, m).expect("m <= n")) * local_scale(n, m))
        .collect())
}

/// Inverse of [`local_coeffs`]: the grade `a.len() - 1` state with these
/// U0 coefficients.
pub fn from_local_coeffs(a: &[Complex64], nmax: u32) -> Result<HoloPoly> {
    let n = match a.len() {
        0 => return Err(Error::InvalidArgument("no coefficients given".into())),
        len => (len - 1) as u32,
    };
    if n > nmax {
        return Err(Error::Range(format!("grade {n} exceeds nmax = {nmax}")));
    }
    HoloPoly::from_terms(
        nmax,
        a.iter().enumerate().map(|(m, &c)| (Bidegree::new(n, m as u32).expect("m <= n"), c / local_scale(n, m as u32))),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootConfig {
    max_iters: usize,
    tol: f64,
    cluster_eps: f64,
}

impl RootConfig {
    pub fn new(max_iters: usize, tol: f64, cluster_eps: f64) -> Result<Self> {
        if max_iters == 0 || !(tol > 0.0) || !(cluster_eps > 0.0) {
            return Err(Error::InvalidArgument("root finder settings must be positive".into()));
        }
        Ok(RootConfig { max_iters, tol, cluster_eps })
    }

    pub fn max_iters(&self) -> usize {
        self.max_iters
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn cluster_eps(&self) -> f64 {
        self.cluster_eps
    }
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig { max_iters: 500, tol: 1e-12, cluster_eps: 1e-7 }
    }
}

/// An effective divisor on CP¹.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divisor {
    points: Vec<(ChartPoint, u32)>,
}

impl Divisor {
    pub fn empty() -> Self {
        Divisor { points: Vec::new() }
    }

    pub fn new(points: Vec<(ChartPoint, u32)>) -> Result<Self> {
        if points.iter().any(|&(_, k)| k == 0) {
            return Err(Error::InvalidArgument("divisor multiplicities must be positive".into()));
        }
        Ok(Divisor { points })
    }

    pub fn points(&self) -> &[(ChartPoint, u32)] {
        &self.points
    }

    pub fn degree(&self) -> u32 {
        self.points.iter().map(|&(_, k)| k).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn divisor_degree(d: &Divisor) -> u32 {
    d.degree()
}

/// `m·P0 + (n-m)·P∞`.
pub fn equivariant_divisor(n: u32, m: u32) -> Result<Divisor> {
    if m > n {
        return Err(Error::Range(format!("m = {m} exceeds n = {n}")));
    }
    let points = [(ChartPoint::p0(), m), (ChartPoint::p_inf(), n - m)]
        .into_iter()
        .filter(|&(_, k)| k > 0)
        .collect();
    Ok(Divisor { points })
}

/// Whether `a` and `b` pair up point by point, multiplicities expanded, with
/// every pair within chordal distance `eps`.
pub fn divisor_match(a: &Divisor, b: &Divisor, eps: f64) -> bool {
    let expand = |d: &Divisor| -> Vec<ChartPoint> {
        d.points.iter().flat_map(|&(p, k)| std::iter::repeat(p).take(k as usize)).collect()
    };
    let (xs, ys) = (expand(a), expand(b));
    if xs.len() != ys.len() {
        return false;
    }
    let adj: Vec<Vec<usize>> = xs
        .iter()
        .map(|x| (0..ys.len()).filter(|&j| x.chordal_distance(&ys[j]) <= eps).collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; ys.len()];
    (0..xs.len()).all(|i| {
        let mut seen = vec![false; ys.len()];
        augment(i, &adj, &mut owner, &mut seen)
    })
}

fn augment(i: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &j in &adj[i] {
        if seen[j] {
            continue;
        }
        seen[j] = true;
        if owner[j].map_or(true, |k| augment(k, adj, owner, seen)) {
            owner[j] = Some(i);
            return true;
        }
    }
    false
}

/// `(p(z), p'(z))` by Horner's rule, coefficients in ascending order.
fn horner(a: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in a.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// `Σ |a_m| |z|^m`, the scale of rounding error in `p(z)`.
fn horner_abs(a: &[Complex64], r: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

/// All roots of `Σ a_m z^m` (`a` ascending, leading coefficient nonzero) by
/// Aberth–Ehrlich iteration.
pub fn aberth_roots(a: &[Complex64], cfg: &RootConfig) -> Result<Vec<Complex64>> {
    let d = a.len().saturating_sub(1);
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = a[d];
    let cauchy = 1.0 + a[..d].iter().map(|c| (c / lead).norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let r = cauchy * (0.5 + 0.5 * (k as f64 + 0.5) / d as f64);
            Complex64::from_polar(r, TAU * k as f64 / d as f64 + 0.4)
        })
        .collect();
    let mut done = vec![false; d];
    for _ in 0..cfg.max_iters {
        for i in 0..d {
            let (p, dp) = horner(a, z[i]);
            if p.norm() <= 4.0 * f64::EPSILON * horner_abs(a, z[i].norm()) {
                done[i] = true;
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..d).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                continue;
            }
            z[i] -= step;
            done[i] = step.norm() <= cfg.tol * z[i].norm().max(1.0);
        }
        if done.iter().all(|&x| x) {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence { iters: cfg.max_iters })
}

fn chart_point(root: Complex64) -> ChartPoint {
    if root.norm() <= 1.0 {
        ChartPoint::new(Chart::U0, root)
    } else {
        ChartPoint::new(Chart::U1, root.inv())
    }
}

/// Orders points from the north pole `P0` southwards, then by longitude.
fn sphere_order(a: &ChartPoint, b: &ChartPoint) -> Ordering {
    let (sa, sb) = (a.to_sphere(), b.to_sphere());
    sb[2]
        .total_cmp(&sa[2])
        .then(sa[1].atan2(sa[0]).total_cmp(&sb[1].atan2(sb[0])))
}

/// Stars of a grade-`n` state: zeros of its U0 polynomial plus
/// `n - deg` stars at `P∞`, merged into clusters of radius `cluster_eps`.
pub fn majorana_stars(p: &HoloPoly, n: u32, cfg: &RootConfig) -> Result<Divisor> {
    let a = local_coeffs(p, n)?;
    let amax = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if amax == 0.0 {
        return Err(Error::ZeroState);
    }
    let floor = LEADING_UNDERFLOW * amax;
    let deg = a.iter().rposition(|c| c.norm() >= floor).expect("some coefficient is maximal");
    let low = a.iter().position(|c| c.norm() != 0.0).expect("state is nonzero");

    let mut clusters: Vec<(ChartPoint, u32)> = Vec::new();
    let mut add = |p: ChartPoint, k: u32| {
        if k == 0 {
            return;
        }
        match clusters.iter_mut().find(|(q, _)| q.chordal_distance(&p) <= cfg.cluster_eps) {
            Some(entry) => entry.1 += k,
            None => clusters.push((p, k)),
        }
    };
    add(ChartPoint::p0(), low as u32);
    add(ChartPoint::p_inf(), n - deg as u32);
    if deg > low {
        for root in aberth_roots(&a[low..=deg], cfg)? {
            add(chart_point(root), 1);
        }
    }
    clusters.sort_by(|x, y| sphere_order(&x.0, &y.0));
    Ok(Divisor { points: clusters })
}

/// U0 coefficients of `lead · Π (z - r)` over the finite stars of `d`,
/// padded with zeros up to grade `n` for the stars at `P∞`.
pub fn local_coeffs_from_divisor(d: &Divisor, n: u32, lead: Complex64) -> Result<Vec<Complex64>> {
    if d.degree() != n {
        return Err(Error::InvalidArgument(format!("divisor has degree {}, expected {n}", d.degree())));
    }
    let mut a = vec![lead];
    for &(p, k) in &d.points {
        let root = match p.chart {
            Chart::U0 => p.coord,
            Chart::U1 if p.coord.norm() == 0.0 => continue,
            Chart::U1 => p.coord.inv(),
        };
        for _ in 0..k {
            let mut next = vec![Complex64::new(0.0, 0.0); a.len() + 1];
            for (i, &x) in a.iter().enumerate() {
                next[i + 1] += x;
                next[i] -= x * root;
            }
            a = next;
        }
    }
    a.resize(n as usize + 1, Complex64::new(0.0, 0.0));
    Ok(a)
}
