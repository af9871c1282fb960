//! The `qho` command line: argument model, command runners and exit codes.

pub mod check;
pub mod parse;
pub mod table;

use std::num::NonZeroU32;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::coherent::{coherent_coeffs, truncation_margin, DisplacementParam};
use crate::divisor::{majorana_stars, RootConfig};
use crate::dynamics::{evolve_state, period, sample_trajectory, OrbitKind, OrbitParams};
use crate::error::Error;
use crate::fock::{
    apply_annihilation, grade_project, inner_product, mc_inner_product, section_eval, HoloPoly,
    PhysicalConstants, SectionState, Slot,
};
use crate::geometry::angles;

use self::parse::{parse_complex_pair, parse_grid, parse_numbers, parse_point, parse_state};
use self::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "qho", version, about = "Geometry of the two-dimensional harmonic oscillator")]
pub struct Cli {
    #[command(flatten)]
    pub globals: Globals,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Globals {
    /// Angular frequency ω
    #[arg(long, global = true, default_value_t = 1.0)]
    pub omega: f64,
    /// Reduced Planck constant ħ
    #[arg(long, global = true, default_value_t = 1.0)]
    pub hbar: f64,
    /// Truncation degree of the state space
    #[arg(long, global = true, default_value_t = 32)]
    pub nmax: u32,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Monte-Carlo sample count
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Output format; `check` defaults to json, everything else to csv
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Evaluate a section at points of C²
    Eval(EvalArgs),
    /// Sample an orbit on a time grid
    Orbit(OrbitArgs),
    /// Majorana stars of a single-grade state
    Stars(StarsArgs),
    /// Grade occupations of a coherent state under evolution
    Coherent(CoherentArgs),
    /// Run the invariant suites
    Check(CheckArgs),
    /// Monte-Carlo estimate of an inner product
    Integrate(IntegrateArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub state: String,
    /// Point `re0,im0,re1,im1`; repeat for several points
    #[arg(long = "z", allow_hyphen_values = true)]
    pub z: Vec<String>,
    /// Vacuum phase θ
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Classical,
    Zn,
    Fiber,
    Extended,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OrbitArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Initial point `re0,im0,re1,im1`
    #[arg(long = "z", allow_hyphen_values = true)]
    pub z: String,
    /// Level n; also sets the period `T` used in the grid
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Fiber value `re,im` for the extended orbit
    #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
    pub psi: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    /// Times: `t1,t2,...` or `start:stop:count`; `T` is the period of level n
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub t: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StarsArgs {
    #[arg(long)]
    pub state: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoherentArgs {
    /// Displacement `re0,im0,re1,im1`
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub t: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CheckArgs {
    /// Run only suites whose name contains this text
    #[arg(long)]
    pub filter: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IntegrateArgs {
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub q: String,
}

pub const DEFAULT_CHECK_SAMPLES: usize = 100_000;
pub const DEFAULT_INTEGRATE_SAMPLES: usize = 100_000;

/// Failure of a command, with its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Lib(e) => match e {
                Error::Parse { .. }
                | Error::InvalidArgument(_)
                | Error::MixedGrade { .. }
                | Error::Range(_)
                | Error::InvalidGrid(_) => 2,
                Error::NearOrigin { .. }
                | Error::ChartPole
                | Error::ZeroSection
                | Error::ZeroState
                | Error::TruncationOverflow { .. } => 3,
                Error::NoConvergence { .. } => 4,
            },
        }
    }
}

/// Rendered output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub table: Table,
    /// 0 unless a check suite failed.
    pub status: i32,
}

fn consts(g: &Globals) -> Result<PhysicalConstants, Error> {
    PhysicalConstants::new(g.hbar, g.omega)
}

fn arg_err(what: &str, e: Error) -> Error {
    match e {
        Error::Parse { pos, msg } => Error::Parse { pos, msg: format!("--{what}: {msg}") },
        other => other,
    }
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let g = &cli.globals;
    let k = consts(g)?;
    let (table, status, default_format) = match &cli.command {
        Command::Eval(a) => (cmd_eval(a, g, k)?, 0, Format::Csv),
        Command::Orbit(a) => (cmd_orbit(a, k)?, 0, Format::Csv),
        Command::Stars(a) => (cmd_stars(a, g)?, 0, Format::Csv),
        Command::Coherent(a) => (cmd_coherent(a, g, k)?, 0, Format::Csv),
        Command::Check(a) => {
            let t = cmd_check(a, g);
            let failed = t.rows().iter().any(|r| r[3] != Cell::Bool(true));
            (t, i32::from(failed), Format::Json)
        }
        Command::Integrate(a) => (cmd_integrate(a, g)?, 0, Format::Csv),
    };
    let text = match g.format.unwrap_or(default_format) {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(&meta(cli)),
    };
    Ok(Output { text, table, status })
}

/// The command line echoed into JSON output.
pub fn meta(cli: &Cli) -> Value {
    let mut v = serde_json::to_value(&cli.command).expect("arguments serialize");
    let g = serde_json::to_value(&cli.globals).expect("arguments serialize");
    if let (Value::Object(m), Value::Object(gm)) = (&mut v, g) {
        m.extend(gm);
    }
    v
}

pub fn cmd_eval(a: &EvalArgs, g: &Globals, k: PhysicalConstants) -> Result<Table, Error> {
    let poly = parse_state(&a.state, g.nmax).map_err(|e| arg_err("state", e))?;
    let s = SectionState::new(poly, a.theta, k);
    let mut t = Table::new(&["re_z0", "im_z0", "re_z1", "im_z1", "re_psi", "im_psi", "abs2"]);
    for text in &a.z {
        let z = parse_point(text).map_err(|e| arg_err("z", e))?;
        let v = section_eval(&s, &z);
        t.push(vec![
            z.z0.re.into(),
            z.z0.im.into(),
            z.z1.re.into(),
            z.z1.im.into(),
            v.re.into(),
            v.im.into(),
            v.norm_sqr().into(),
        ]);
    }
    Ok(t)
}

pub fn cmd_orbit(a: &OrbitArgs, k: PhysicalConstants) -> Result<Table, Error> {
    let z = parse_point(&a.z).map_err(|e| arg_err("z", e))?;
    let psi = parse_complex_pair(&a.psi).map_err(|e| arg_err("psi", e))?;
    let kind = match a.kind {
        KindArg::Classical => OrbitKind::Classical,
        KindArg::Zn => OrbitKind::Zn,
        KindArg::Fiber => OrbitKind::Fiber,
        KindArg::Extended => OrbitKind::Extended,
    };
    let t_period = NonZeroU32::new(a.n).map(|n| period(n, &k)).unwrap_or_else(|| period(NonZeroU32::MIN, &k));
    let grid = parse_grid(&a.t, Some(t_period)).map_err(|e| arg_err("t", e))?;
    let params = OrbitParams { z, n: a.n, psi, theta0: a.theta, consts: k };
    let traj = sample_trajectory(kind, &params, &grid)?;

    let mut header = vec!["t", "re_z0", "im_z0", "re_z1", "im_z1", "phi"];
    match kind {
        OrbitKind::Fiber => header.push("theta"),
        OrbitKind::Extended => header.extend(["re_psi", "im_psi", "theta"]),
        _ => {}
    }
    let mut t = Table::new(&header);
    for s in &traj.samples {
        let phi = angles(&s.z)?.phi;
        let mut row: Vec<Cell> =
            vec![s.t.into(), s.z.z0.re.into(), s.z.z0.im.into(), s.z.z1.re.into(), s.z.z1.im.into(), phi.into()];
        if let Some(p) = s.psi {
            row.extend([p.re.into(), p.im.into()]);
        }
        if let Some(th) = s.theta {
            row.push(th.into());
        }
        t.push(row);
    }
    Ok(t)
}

pub fn cmd_stars(a: &StarsArgs, g: &Globals) -> Result<Table, Error> {
    let poly = parse_state(&a.state, g.nmax).map_err(|e| arg_err("state", e))?;
    let grades = poly.grades();
    let n = match grades.as_slice() {
        [] => return Err(Error::ZeroState),
        [n] => *n,
        _ => return Err(Error::MixedGrade { grade: grades[0] }),
    };
    let d = majorana_stars(&poly, n, &RootConfig::default())?;
    let mut t = Table::new(&["chart", "re_coord", "im_coord", "multiplicity", "x", "y", "z"]);
    for &(p, mult) in d.points() {
        let s = p.to_sphere();
        t.push(vec![
            p.chart.name().into(),
            p.coord.re.into(),
            p.coord.im.into(),
            mult.into(),
            s[0].into(),
            s[1].into(),
            s[2].into(),
        ]);
    }
    Ok(t)
}

pub fn cmd_coherent(a: &CoherentArgs, g: &Globals, k: PhysicalConstants) -> Result<Table, Error> {
    if g.nmax == 0 {
        return Err(Error::InvalidArgument("coherent needs --nmax >= 1".into()));
    }
    let v = parse_numbers(&a.b, 4).map_err(|e| arg_err("b", e))?;
    let b = DisplacementParam::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]));
    let grid = parse_grid(&a.t, Some(period(NonZeroU32::MIN, &k))).map_err(|e| arg_err("t", e))?;
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(format!("times not strictly increasing at {} -> {}", w[0], w[1])));
    }
    let s = SectionState::new(coherent_coeffs(&b, g.nmax), 0.0, k);
    if truncation_margin(&s.poly).warn {
        eprintln!("warning: state has noticeable weight within 3 grades of nmax = {}", g.nmax);
    }
    let mut t = Table::new(&["t", "n", "occupation", "eigen_residual"]);
    for &time in &grid {
        let st = evolve_state(&s, time);
        // the evolved state is again coherent, with b̄ rotated by e^{-iωt}
        let rot = Complex64::from_polar(1.0, -k.omega() * time);
        let mut residual: f64 = 0.0;
        for slot in Slot::BOTH {
            let eig = match slot {
                Slot::Zero => b.b0.conj(),
                Slot::One => b.b1.conj(),
            } * rot;
            let diff = &apply_annihilation(slot, &st.poly) - &st.poly.scaled(eig);
            let kept: f64 = (0..g.nmax).map(|n| grade_project(&diff, n).norm_sqr()).fold(0.0, |s, x| s + x);
            residual = residual.max(kept.sqrt());
        }
        for n in 0..=g.nmax {
            t.push(vec![time.into(), n.into(), st.poly.grade_weight(n).into(), residual.into()]);
        }
    }
    Ok(t)
}

pub fn cmd_check(a: &CheckArgs, g: &Globals) -> Table {
    let samples = g.samples.unwrap_or(DEFAULT_CHECK_SAMPLES).max(1);
    let reports = check::run_checks(a.filter.as_deref(), g.seed, samples);
    let mut t = Table::new(&["suite", "cases", "max_residual", "pass"]);
    for r in reports {
        t.push(vec![r.suite.as_str().into(), r.cases.into(), r.max_residual.into(), r.pass.into()]);
    }
    t
}

pub fn cmd_integrate(a: &IntegrateArgs, g: &Globals) -> Result<Table, Error> {
    let p: HoloPoly = parse_state(&a.p, g.nmax).map_err(|e| arg_err("p", e))?;
    let q: HoloPoly = parse_state(&a.q, g.nmax).map_err(|e| arg_err("q", e))?;
    let samples = g.samples.unwrap_or(DEFAULT_INTEGRATE_SAMPLES);
    let mc = mc_inner_product(&p, &q, samples, g.seed)?;
    let exact = inner_product(&p, &q);
    let mut t = Table::new(&["re_estimate", "im_estimate", "stderr", "samples", "re_exact", "im_exact"]);
    t.push(vec![
        mc.estimate.re.into(),
        mc.estimate.im.into(),
        mc.stderr.into(),
        (mc.samples as u64).into(),
        exact.re.into(),
        exact.im.into(),
    ]);
    Ok(t)
}
