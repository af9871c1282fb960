//! Parsers for state specs, points and time grids.
//!
//! State specs come in two forms:
//!
//! * `nm:<n>,<m>[,<re>,<im>]` terms joined by `+`, each adding
//!   `(re + i im)·ψ_nm` (amplitude 1 when omitted);
//! * `grade:<n>:<a0>,<a1>,...,<an>`, the U0 coefficients of `Σ a_m z^m`,
//!   each a complex literal such as `1`, `-0.5`, `2i` or `1-3i`.
//!
//! Time grids are a comma list of times or `start:stop:count` (inclusive).
//! A time may carry the suffix `T`, meaning that many periods of the run.

use std::str::FromStr;

use num_complex::Complex64;

use crate::divisor::from_local_coeffs;
use crate::error::{Error, Result};
use crate::fock::{Bidegree, HoloPoly, PhasePoint};

fn perr(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

/// Splits `s` at `sep`, yielding each trimmed piece with its byte offset in
/// the original text (`base` is the offset of `s` itself).
fn pieces(s: &str, base: usize, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, ch) in s.char_indices().chain(std::iter::once((s.len(), sep))) {
        if ch == sep {
            let raw = &s[start..i];
            let lead = raw.len() - raw.trim_start().len();
            out.push((base + start + lead, raw.trim()));
            start = i + ch.len_utf8();
        }
    }
    out
}

fn number(pos: usize, text: &str) -> Result<f64> {
    let x = f64::from_str(text).map_err(|_| perr(pos, format!("expected a number, found '{text}'")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(perr(pos, format!("number must be finite, found '{text}'")))
    }
}

fn integer(pos: usize, text: &str) -> Result<u32> {
    u32::from_str(text).map_err(|_| perr(pos, format!("expected a non-negative integer, found '{text}'")))
}

/// A comma list of exactly `len` finite numbers.
pub fn parse_numbers(text: &str, len: usize) -> Result<Vec<f64>> {
    let items = pieces(text, 0, ',');
    if items.len() != len {
        return Err(perr(0, format!("expected {len} comma-separated numbers, found {}", items.len())));
    }
    items.into_iter().map(|(p, t)| number(p, t)).collect()
}

/// `re0,im0,re1,im1`.
pub fn parse_point(text: &str) -> Result<PhasePoint> {
    let v = parse_numbers(text, 4)?;
    Ok(PhasePoint::from_parts(v[0], v[1], v[2], v[3]))
}

/// `re,im`.
pub fn parse_complex_pair(text: &str) -> Result<Complex64> {
    let v = parse_numbers(text, 2)?;
    Ok(Complex64::new(v[0], v[1]))
}

pub fn parse_state(spec: &str, nmax: u32) -> Result<HoloPoly> {
    let lead = spec.len() - spec.trim_start().len();
    let body = spec.trim_start();
    if let Some(rest) = body.strip_prefix("grade:") {
        parse_grade(rest, lead + "grade:".len(), nmax)
    } else if body.starts_with("nm:") {
        parse_terms(spec, nmax)
    } else {
        Err(perr(lead, "expected 'nm:<n>,<m>[,re,im]' terms or 'grade:<n>:<coefficients>'"))
    }
}

fn parse_terms(spec: &str, nmax: u32) -> Result<HoloPoly> {
    // '+' separates terms only when a new 'nm:' follows; elsewhere it may
    // belong to an exponent such as 1e+5
    let mut starts = vec![0];
    for (i, ch) in spec.char_indices() {
        if ch == '+' && spec[i + 1..].trim_start().starts_with("nm:") {
            starts.push(i + 1);
        }
    }
    let mut bounds: Vec<(usize, usize)> = starts.windows(2).map(|w| (w[0], w[1] - 1)).collect();
    bounds.push((*starts.last().expect("at least one start"), spec.len()));

    let mut total = HoloPoly::zero(nmax);
    for (from, to) in bounds {
        let raw = &spec[from..to];
        let pos = from + raw.len() - raw.trim_start().len();
        let fields_text = raw
            .trim()
            .strip_prefix("nm:")
            .ok_or_else(|| perr(pos, "each term must start with 'nm:'"))?;
        let fields = pieces(fields_text, pos + 3, ',');
        if fields.len() != 2 && fields.len() != 4 {
            return Err(perr(pos, format!("a term takes 2 or 4 fields, found {}", fields.len())));
        }
        let n = integer(fields[0].0, fields[0].1)?;
        let m = integer(fields[1].0, fields[1].1)?;
        let deg = Bidegree::new(n, m).map_err(|e| perr(fields[1].0, e.to_string()))?;
        if n > nmax {
            return Err(perr(fields[0].0, format!("grade {n} exceeds nmax = {nmax}")));
        }
        let amp = if fields.len() == 4 {
            Complex64::new(number(fields[2].0, fields[2].1)?, number(fields[3].0, fields[3].1)?)
        } else {
            Complex64::new(1.0, 0.0)
        };
        let term = HoloPoly::basis(deg.n(), deg.m(), nmax)?.scaled(amp);
        total = &total + &term;
    }
    Ok(total)
}

fn parse_grade(rest: &str, base: usize, nmax: u32) -> Result<HoloPoly> {
    let colon = rest.find(':').ok_or_else(|| perr(base, "expected 'grade:<n>:<coefficients>'"))?;
    let n_text = &rest[..colon];
    let n = integer(base, n_text.trim())?;
    if n > nmax {
        return Err(perr(base, format!("grade {n} exceeds nmax = {nmax}")));
    }
    let coeffs = pieces(&rest[colon + 1..], base + colon + 1, ',');
    if coeffs.len() != n as usize + 1 {
        return Err(perr(
            base + colon + 1,
            format!("grade {n} takes {} coefficients, found {}", n + 1, coeffs.len()),
        ));
    }
    let a = coeffs
        .into_iter()
        .map(|(p, t)| {
            let z = Complex64::from_str(t).map_err(|_| perr(p, format!("expected a complex number, found '{t}'")))?;
            if z.is_finite() {
                Ok(z)
            } else {
                Err(perr(p, format!("coefficient must be finite, found '{t}'")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    from_local_coeffs(&a, nmax)
}

fn time(pos: usize, text: &str, period: Option<f64>) -> Result<f64> {
    match text.strip_suffix('T') {
        Some(k) => {
            let t = period.ok_or_else(|| perr(pos, "'T' needs a period; this command has none"))?;
            let k = if k.is_empty() { 1.0 } else { number(pos, k)? };
            Ok(k * t)
        }
        None => number(pos, text),
    }
}

/// Comma list or `start:stop:count`; an empty spec is the empty grid.
pub fn parse_grid(spec: &str, period: Option<f64>) -> Result<Vec<f64>> {
    if spec.trim().is_empty() {
        return Ok(Vec::new());
    }
    if spec.contains(':') {
        let parts = pieces(spec, 0, ':');
        if parts.len() != 3 {
            return Err(perr(0, "expected 'start:stop:count'"));
        }
        let start = time(parts[0].0, parts[0].1, period)?;
        let stop = time(parts[1].0, parts[1].1, period)?;
        let count = integer(parts[2].0, parts[2].1)?;
        return Ok(match count {
            0 => Vec::new(),
            1 => vec![start],
            _ => {
                let last = (count - 1) as f64;
                (0..count)
                    .map(|i| if i == count - 1 { stop } else { start + (stop - start) * (i as f64 / last) })
                    .collect()
            }
        });
    }
    pieces(spec, 0, ',').into_iter().map(|(p, t)| time(p, t, period)).collect()
}
