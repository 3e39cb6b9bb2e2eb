//! The verification harness: named suites of independent checks, run in
//! parallel and assembled in a fixed order into a [`VerifyReport`].
//!
//! Every check compares a library computation against an oracle computed
//! by a different route (closed form vs recursion, forward transform vs
//! symbolic transform, residue vs contour vs collocation, transform-domain
//! identity vs time-domain samples). Errors raised by a check become
//! failed entries; a suite never aborts.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fracops::classical::{caputo_reals, prop1_check, rl_derivative_reals};
use crate::fracops::propositions::{
    verify_proposition, CheckEntry, CheckMode, PropositionId, Scenario, Status, REALS_TOL, SYMBOLIC_TOL,
    TIME_DOMAIN_TOL,
};
use crate::fracops::{convolve, convolve_kernel, frac_derivative, FracInput, FracOrder, ShiftKernel};
use crate::funcspec::TestFunction;
use crate::gamma::factorial;
use crate::inversion::{
    invert_collocation, invert_rational, invert_rational_with, CollocationOptions, InversionPolicy, ResidueRule,
};
use crate::special::{exp_ts, hk, hk_recursive, hk_table};
use crate::timescale::{delta_derivative, GridFunction, TimeScale};
use crate::zdomain::{forward_transform, forward_transform_auto, parse, ZExpr};

pub const SCHEMA_VERSION: &str = "1";

/// Pinned tolerances, reported with every run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub polynomial: f64,
    pub transform: f64,
    pub tail: f64,
    pub delta_rule: f64,
    pub round_trip: f64,
    pub symbolic: f64,
    pub time_domain: f64,
    pub reals: f64,
    pub prop1: f64,
    pub collocation: f64,
    pub convolution_theorem: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    polynomial: 1e-12,
    transform: 1e-8,
    tail: 1e-10,
    delta_rule: 1e-8,
    round_trip: 1e-6,
    symbolic: SYMBOLIC_TOL,
    time_domain: TIME_DOMAIN_TOL,
    reals: REALS_TOL,
    prop1: 1e-3,
    collocation: 1e-6,
    convolution_theorem: 1e-6,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Polynomials,
    Transform,
    Inversion,
    Propositions,
    RealsOracle,
    Convolution,
    All,
}

impl Suite {
    /// The concrete suites in report order.
    pub const PARTS: [Suite; 6] = [
        Suite::Polynomials,
        Suite::Transform,
        Suite::Inversion,
        Suite::Propositions,
        Suite::RealsOracle,
        Suite::Convolution,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Polynomials => "polynomials",
            Suite::Transform => "transform",
            Suite::Inversion => "inversion",
            Suite::Propositions => "propositions",
            Suite::RealsOracle => "reals-oracle",
            Suite::Convolution => "convolution",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::PARTS
            .into_iter()
            .chain([Suite::All])
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::ScenarioUnsupported(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportEntry {
    pub suite: Suite,
    #[serde(flatten)]
    pub check: CheckEntry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub outside_hypothesis: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema_version: &'static str,
    pub suite: Suite,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub summary: Summary,
    pub entries: Vec<ReportEntry>,
    /// Kept out of the serialized report so that reports are byte-identical
    /// across runs.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn entries_for<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a CheckEntry> + 'a {
        self.entries.iter().map(|e| &e.check).filter(move |c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    /// One line per entry, for terminals.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let c = &e.check;
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::OutsideHypothesis => "outside-hypothesis",
            };
            out.push_str(&format!(
                "{:<13} {:<22} {:<11} {:>10.3e} <= {:<8.1e} {:<18} {}\n",
                e.suite.as_str(),
                c.id,
                mode_str(c.mode),
                c.max_error,
                c.tolerance,
                status,
                c.scenario
            ));
        }
        let s = &self.summary;
        out.push_str(&format!(
            "{} checks: {} passed, {} failed, {} outside hypothesis\n",
            s.total, s.passed, s.failed, s.outside_hypothesis
        ));
        out
    }
}

fn mode_str(m: CheckMode) -> &'static str {
    match m {
        CheckMode::Symbolic => "symbolic",
        CheckMode::TimeDomain => "time-domain",
        CheckMode::Numeric => "numeric",
    }
}

type Job = Box<dyn Fn() -> Vec<CheckEntry> + Send + Sync>;

/// Describes one check so that an error can be turned into a failed entry.
#[derive(Clone)]
struct Spec {
    id: &'static str,
    scenario: String,
    mode: CheckMode,
    tol: f64,
    anchor: &'static str,
}

impl Spec {
    fn new(id: &'static str, scenario: impl Into<String>, mode: CheckMode, tol: f64, anchor: &'static str) -> Self {
        Spec { id, scenario: scenario.into(), mode, tol, anchor }
    }

    fn entry(&self, err: f64) -> CheckEntry {
        CheckEntry::measured(self.id, &self.scenario, self.mode, err, self.tol, self.anchor)
    }

    /// A job producing one entry from a measured error.
    fn job<F>(self, measure: F) -> Job
    where
        F: Fn() -> Result<f64> + Send + Sync + 'static,
    {
        Box::new(move || {
            vec![match measure() {
                Ok(e) => self.entry(e),
                Err(e) => CheckEntry::failed(self.id, &self.scenario, self.mode, self.tol, self.anchor, &e),
            }]
        })
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `|a - b| / |b|`, or `|a|` when `b` is zero.
fn rel(a: Complex64, b: Complex64) -> f64 {
    let d = (a - b).norm();
    if b == Complex64::new(0.0, 0.0) {
        d
    } else {
        d / b.norm()
    }
}

/// Largest `|a_j - b_j| / max(1, |b_j|)`.
fn pointwise(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm() / y.norm().max(1.0)).fold(0.0, f64::max)
}

fn fmt_z(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

/// Runs a suite. Deterministic for a given seed: scenarios are generated
/// sequentially from the seed, run in parallel, and collected in order.
pub fn run_suite(suite: Suite, seed: u64) -> VerifyReport {
    let start = Instant::now();
    let parts: Vec<Suite> = if suite == Suite::All { Suite::PARTS.to_vec() } else { vec![suite] };
    let mut jobs: Vec<(Suite, Job)> = Vec::new();
    for part in parts {
        let list = match part {
            Suite::Polynomials => polynomial_jobs(),
            Suite::Transform => transform_jobs(seed),
            Suite::Inversion => inversion_jobs(seed),
            Suite::Propositions => proposition_jobs(),
            Suite::RealsOracle => reals_jobs(),
            Suite::Convolution => convolution_jobs(seed),
            Suite::All => unreachable!("expanded above"),
        };
        jobs.extend(list.into_iter().map(|j| (part, j)));
    }
    let entries: Vec<ReportEntry> = jobs
        .par_iter()
        .map(|(s, job)| job().into_iter().map(|check| ReportEntry { suite: *s, check }).collect::<Vec<_>>())
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let mut summary = Summary { total: entries.len(), ..Summary::default() };
    for e in &entries {
        match e.check.status {
            Status::Pass => summary.passed += 1,
            Status::Fail => summary.failed += 1,
            Status::OutsideHypothesis => summary.outside_hypothesis += 1,
        }
    }
    VerifyReport {
        schema_version: SCHEMA_VERSION,
        suite,
        seed,
        tolerances: TOLERANCES,
        summary,
        entries,
        wall_time: start.elapsed(),
    }
}

// ---------------------------------------------------------------- polynomials

const T_MAX: u32 = 20;
const K_MAX: u32 = 6;

fn polynomial_jobs() -> Vec<Job> {
    let tol = TOLERANCES.polynomial;
    let mut jobs: Vec<Job> = Vec::new();
    for ts_name in ["int", "uniform:0.5"] {
        for k in 0..=K_MAX {
            let spec = Spec::new(
                "hk-recursion",
                format!("ts={ts_name} k={k} t<={T_MAX}"),
                CheckMode::Numeric,
                tol,
                "h_k by the delta-integral recursion = closed form",
            );
            jobs.push(spec.job(move || {
                let ts: TimeScale = ts_name.parse()?;
                let h = match ts {
                    TimeScale::Uniform { step } => step,
                    _ => 1.0,
                };
                let mut worst = 0.0f64;
                let mut t = 0.0;
                while t <= T_MAX as f64 {
                    // h^k binom(t/h, k)
                    let m = t / h;
                    let closed = (0..k).fold(1.0, |acc, i| acc * h * (m - i as f64) / (i as f64 + 1.0));
                    worst = worst.max(rel(c(hk_recursive(&ts, k, t, 0.0)?), c(closed)));
                    t += h;
                }
                Ok(worst)
            }));
        }
    }
    for k in 0..=K_MAX {
        let spec = Spec::new(
            "hk-recursion",
            format!("ts=reals k={k} t<={T_MAX}"),
            CheckMode::Numeric,
            tol,
            "h_k by the delta-integral recursion = closed form",
        );
        jobs.push(spec.job(move || {
            let mut worst = 0.0f64;
            for i in 0..=(2 * T_MAX) {
                let t = 0.5 * i as f64;
                let closed = t.powi(k as i32) / factorial(k);
                worst = worst.max(rel(c(hk_recursive(&TimeScale::Reals, k, t, 0.0)?), c(closed)));
            }
            Ok(worst)
        }));
    }
    for ts_name in ["int", "qscale:2:1", "grid:0,0.5,1.75,2,3.5,4,6,6.25,8,9.5,10"] {
        let spec = Spec::new(
            "hk-delta",
            format!("ts={ts_name} 1<=k<={K_MAX}"),
            CheckMode::Numeric,
            tol,
            "Δ h_k = h_(k-1)",
        );
        jobs.push(spec.job(move || {
            let ts: TimeScale = ts_name.parse()?;
            let n = ts.capacity().unwrap_or(T_MAX as usize + 1);
            let table = hk_table(&ts, K_MAX, n)?;
            let mut worst = 0.0f64;
            for k in 1..=K_MAX as usize {
                let g = GridFunction::from_samples(&ts, table[k].iter().map(|&v| c(v)).collect(), None)?;
                let d = delta_derivative(&g)?;
                for (j, v) in d.samples().iter().enumerate() {
                    worst = worst.max(rel(*v, c(table[k - 1][j])));
                }
            }
            Ok(worst)
        }));
    }
    for z in [c(2.0), c(-0.5), Complex64::new(1.0, 1.0)] {
        let spec = Spec::new(
            "exp-series",
            format!("ts=int z={} t<={T_MAX}", fmt_z(z)),
            CheckMode::Numeric,
            tol,
            "e_z(t, 0) = Σ_k z^k h_k(t, 0) on the integers",
        );
        jobs.push(spec.job(move || {
            let ts = TimeScale::integers();
            let n = T_MAX as usize + 1;
            let table = hk_table(&ts, T_MAX, n)?;
            let mut worst = 0.0f64;
            for j in 0..n {
                let series: Complex64 = (0..=j).map(|k| z.powu(k as u32) * table[k][j]).sum();
                worst = worst.max(rel(exp_ts(&ts, z, j as f64, 0.0)?, series));
            }
            Ok(worst)
        }));
    }
    jobs
}

// ------------------------------------------------------------------ transform

fn transform_jobs(seed: u64) -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    for ts_name in ["int", "uniform:0.5"] {
        for k in 0..=4u32 {
            for z in [c(1.0), c(2.0), Complex64::new(1.0, 1.0)] {
                let scenario = format!("ts={ts_name} f=hk:{k} z={}", fmt_z(z));
                let value = Spec::new(
                    "hk-transform",
                    scenario.clone(),
                    CheckMode::Numeric,
                    TOLERANCES.transform,
                    "L[h_k](z) = z^(-k-1)",
                );
                let tail = Spec::new(
                    "transform-tail",
                    scenario,
                    CheckMode::Numeric,
                    TOLERANCES.tail,
                    "truncated transform tail bound",
                );
                jobs.push(Box::new(move || {
                    let run = || -> Result<(f64, f64)> {
                        let ts: TimeScale = ts_name.parse()?;
                        let (v, d) = forward_transform_auto(
                            &ts,
                            |_, t| c(hk(&ts, k, t, 0.0).unwrap_or(f64::NAN)),
                            z,
                            TOLERANCES.tail,
                        )?;
                        let want = z.powf(-(k as f64) - 1.0);
                        Ok((rel(v, want), d.tail_bound))
                    };
                    match run() {
                        Ok((e, t)) => vec![value.entry(e), tail.entry(t)],
                        Err(e) => vec![
                            CheckEntry::failed(value.id, &value.scenario, value.mode, value.tol, value.anchor, &e),
                            CheckEntry::failed(tail.id, &tail.scenario, tail.mode, tail.tol, tail.anchor, &e),
                        ],
                    }
                }) as Job);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut zs = vec![c(3.0), c(4.0), Complex64::new(3.0, 1.0)];
    for _ in 0..2 {
        zs.push(Complex64::new(rng.gen_range(3.0..5.0), rng.gen_range(-2.0..2.0)));
    }
    for f in [TestFunction::Hk(1), TestFunction::Hk(2), TestFunction::Exp(c(2.0))] {
        for &z in &zs {
            let spec = Spec::new(
                "delta-rule",
                format!("ts=int f={f} z={}", fmt_z(z)),
                CheckMode::Numeric,
                TOLERANCES.delta_rule,
                "L[f^Δ](z) = z F(z) - f(0)",
            );
            let f = f.clone();
            jobs.push(spec.job(move || {
                let ts = TimeScale::integers();
                let samples = f.sample(&ts, 401, None)?;
                let d = delta_derivative(&samples)?;
                let (lhs, diag) = forward_transform(&d, z)?;
                if diag.tail_bound >= TOLERANCES.tail {
                    return Err(Error::TailUnbounded { horizon: diag.truncation_horizon, tail_bound: diag.tail_bound });
                }
                let rhs = z * f.transform().eval(z)? - f.initial_value();
                Ok(rel(lhs, rhs))
            }));
        }
    }
    jobs
}

// ------------------------------------------------------------------ inversion

pub const ROUND_TRIP_CASES: usize = 25;
const ROUND_TRIP_Z: [Complex64; 5] = [
    Complex64::new(4.0, 0.0),
    Complex64::new(5.0, 0.0),
    Complex64::new(6.0, 0.0),
    Complex64::new(4.0, 2.0),
    Complex64::new(7.0, -1.0),
];
const GRID_POINTS: usize = 600;

/// A random strictly proper rational transform: at most four poles in the
/// closed unit disc, orders at most two, pairwise separated by 0.1 and with
/// `|1 + μλ| ≥ 0.2` for every graininess in `mus`.
pub fn random_rational<R: Rng>(rng: &mut R, mus: &[f64]) -> ZExpr {
    let count = rng.gen_range(1..=4);
    let mut poles: Vec<Complex64> = Vec::new();
    let mut f = ZExpr::zero();
    while poles.len() < count {
        let re = rng.gen_range(-1.0..=1.0);
        let im = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(-1.0..=1.0) };
        let lam = Complex64::new(re, im);
        let ok = lam.norm() <= 1.0
            && mus.iter().all(|m| (1.0 + lam * m).norm() >= 0.2)
            && poles.iter().all(|p| (p - lam).norm() >= 0.1);
        if !ok {
            continue;
        }
        poles.push(lam);
        let order = rng.gen_range(1..=2u32);
        for m in 1..=order {
            let coeff = Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
            f = f.add(&ZExpr::pole(coeff, lam, m));
        }
    }
    f
}

/// A random explicit grid from 0 with `len` points and steps in `[0.5, 1.5]`.
pub fn random_grid<R: Rng>(rng: &mut R, len: usize) -> TimeScale {
    let mut pts = Vec::with_capacity(len);
    let mut t = 0.0;
    for _ in 0..len {
        pts.push(t);
        t += rng.gen_range(0.5..=1.5);
    }
    TimeScale::grid(pts).expect("increasing points from 0")
}

fn round_trip(f: &ZExpr, ts: &TimeScale, n: usize) -> Result<f64> {
    let r = invert_rational(f, ts, n)?;
    let mut worst = 0.0f64;
    for z in ROUND_TRIP_Z {
        let (v, d) = forward_transform(&r.values, z)?;
        if d.tail_bound >= TOLERANCES.tail {
            return Err(Error::TailUnbounded { horizon: d.truncation_horizon, tail_bound: d.tail_bound });
        }
        worst = worst.max(rel(v, f.eval(z)?));
    }
    Ok(worst)
}

fn inversion_jobs(seed: u64) -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1f2e_3d4c);
    let grid = random_grid(&mut rng, GRID_POINTS);
    let grid_mus: Vec<f64> = (0..GRID_POINTS - 1).map(|j| grid.mu_at(j).expect("inside grid")).collect();
    let grid_label = format!("grid[{GRID_POINTS} random steps in 0.5..1.5, seed {seed}]");
    for case in 0..ROUND_TRIP_CASES {
        let fz = random_rational(&mut rng, &[1.0]);
        let spec = Spec::new(
            "round-trip",
            format!("ts=int case={case} F={fz}"),
            CheckMode::Numeric,
            TOLERANCES.round_trip,
            "L[L⁻¹[F]] = F at sample z",
        );
        jobs.push(spec.job(move || round_trip(&fz, &TimeScale::integers(), 200)));
    }
    for case in 0..ROUND_TRIP_CASES {
        let fz = random_rational(&mut rng, &grid_mus);
        let spec = Spec::new(
            "round-trip",
            format!("ts={grid_label} case={case} F={fz}"),
            CheckMode::Numeric,
            TOLERANCES.round_trip,
            "L[L⁻¹[F]] = F at sample z",
        );
        let grid = grid.clone();
        jobs.push(spec.job(move || round_trip(&fz, &grid, GRID_POINTS)));
    }

    for ts_name in ["int", "uniform:0.5", "qscale:2:1"] {
        let spec = Spec::new(
            "hk-inverse",
            format!("ts={ts_name} k<=4"),
            CheckMode::TimeDomain,
            TIME_DOMAIN_TOL,
            "L⁻¹[z^(-k-1)] = h_k",
        );
        jobs.push(spec.job(move || {
            let ts: TimeScale = ts_name.parse()?;
            let n = if matches!(ts, TimeScale::QScale { .. }) { 20 } else { 64 };
            let table = hk_table(&ts, 4, n)?;
            let mut worst = 0.0f64;
            for k in 0..=4usize {
                let r = invert_rational(&ZExpr::monomial(c(1.0), -(k as f64) - 1.0), &ts, n)?;
                let want: Vec<Complex64> = table[k].iter().map(|&v| c(v)).collect();
                worst = worst.max(pointwise(r.values.samples(), &want));
            }
            Ok(worst)
        }));
    }

    let (f1, f2) = (random_rational(&mut rng, &[1.0]), random_rational(&mut rng, &[1.0]));
    let (a, b) = (
        Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
        Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
    );
    let spec = Spec::new(
        "linearity",
        format!("ts=int a={} b={} F={f1} G={f2}", fmt_z(a), fmt_z(b)),
        CheckMode::TimeDomain,
        1e-10,
        "L⁻¹[aF + bG] = a L⁻¹[F] + b L⁻¹[G]",
    );
    jobs.push(spec.job(move || {
        let ts = TimeScale::integers();
        let n = 64;
        let lhs = invert_rational(&f1.scale(a).add(&f2.scale(b)), &ts, n)?;
        let (x, y) = (invert_rational(&f1, &ts, n)?, invert_rational(&f2, &ts, n)?);
        let rhs: Vec<Complex64> =
            x.values.samples().iter().zip(y.values.samples()).map(|(u, v)| a * u + b * v).collect();
        Ok(pointwise(lhs.values.samples(), &rhs))
    }));

    for case in 0..3 {
        let fz = random_rational(&mut rng, &[1.0]);
        let spec = Spec::new(
            "contour-residue",
            format!("ts=int case={case} F={fz}"),
            CheckMode::TimeDomain,
            TIME_DOMAIN_TOL,
            "series residues = contour-quadrature residues",
        );
        jobs.push(spec.job(move || {
            let ts = TimeScale::integers();
            let s = invert_rational_with(&fz, &ts, 40, ResidueRule::Series)?;
            let q = invert_rational_with(&fz, &ts, 40, ResidueRule::Contour)?;
            Ok(pointwise(q.values.samples(), s.values.samples()))
        }));
    }

    for text in ["1/z^2", "1/(z-2)", "1/z^3", "1/(z+0.5)"] {
        let spec = Spec::new(
            "collocation",
            format!("ts=int F={text} N=24"),
            CheckMode::Numeric,
            TOLERANCES.collocation,
            "collocation inverse = residue inverse",
        );
        jobs.push(spec.job(move || {
            let ts = TimeScale::integers();
            let fz = parse(text)?;
            let col = invert_collocation(&fz, &ts, 24, &CollocationOptions::default())?;
            let res = invert_rational(&fz, &ts, 24)?;
            Ok(pointwise(col.values.samples(), res.values.samples()))
        }));
    }
    let spec = Spec::new(
        "collocation-residual",
        "ts=int F=z^-0.5 N=12",
        CheckMode::Numeric,
        TOLERANCES.collocation,
        "held-out forward-match residual of the collocation inverse",
    );
    jobs.push(Box::new(move || {
        let run = || -> Result<f64> {
            let fz = parse("z^-0.5")?;
            let r = invert_collocation(&fz, &TimeScale::integers(), 12, &CollocationOptions::default())?;
            r.residual.ok_or_else(|| Error::ScenarioUnsupported("collocation returned no residual".into()))
        };
        vec![match run() {
            Ok(e) => spec.entry(e).with_note("self-consistency only; no ground truth"),
            Err(e) => CheckEntry::failed(spec.id, &spec.scenario, spec.mode, spec.tol, spec.anchor, &e),
        }]
    }));
    jobs
}

// --------------------------------------------------------------- propositions

const ORDERS: [f64; 5] = [0.3, 0.5, 0.7, 1.0, 1.5];

fn families() -> Vec<TestFunction> {
    let mut fs: Vec<TestFunction> = (0..=4).map(TestFunction::Hk).collect();
    fs.push(TestFunction::Exp(c(2.0)));
    fs.push(TestFunction::Exp(c(-0.5)));
    fs.push(TestFunction::Const(c(7.0)));
    fs
}

/// A job running one proposition on one scenario; unsupported scenarios
/// contribute no entries.
fn proposition_job(id: PropositionId, s: Scenario) -> Job {
    Box::new(move || match verify_proposition(id, &s) {
        Ok(v) => v,
        Err(Error::ScenarioUnsupported(_)) => Vec::new(),
        Err(e) => vec![CheckEntry::failed(id.as_str(), &s.describe(), CheckMode::Symbolic, SYMBOLIC_TOL, id.anchor(), &e)],
    })
}

fn proposition_jobs() -> Vec<Job> {
    use PropositionId::*;
    let mut jobs: Vec<Job> = Vec::new();
    let int = TimeScale::integers();
    for id in PropositionId::ALL {
        if id == P9 {
            continue;
        }
        let two_orders = matches!(id, P6 | P7a | P7b | Pcomm);
        for f in families() {
            for alpha in ORDERS {
                let base = Scenario::new(int.clone(), f.clone(), alpha);
                if two_orders {
                    for beta in ORDERS {
                        jobs.push(proposition_job(id, base.clone().with_beta(beta)));
                    }
                } else {
                    jobs.push(proposition_job(id, base));
                }
            }
        }
    }
    // other discrete scales
    for ts in [TimeScale::uniform(0.5).expect("valid"), TimeScale::qscale(2.0, 1.0).expect("valid")] {
        for f in [TestFunction::Hk(1), TestFunction::Hk(2), TestFunction::Exp(c(2.0))] {
            for alpha in [0.5, 1.0] {
                let s = Scenario::new(ts.clone(), f.clone(), alpha).with_horizon(16);
                jobs.push(proposition_job(P6, s.clone().with_beta(0.5)));
                jobs.push(proposition_job(Pid, s));
            }
        }
    }
    for alpha in [0.3, 0.5, 0.7] {
        for f in [TestFunction::Hk(1), TestFunction::Hk(2)] {
            for g in [ShiftKernel::Hk(1), ShiftKernel::Hk(2)] {
                jobs.push(proposition_job(P9, Scenario::new(int.clone(), f.clone(), alpha).with_kernel(g)));
            }
        }
    }
    jobs.push(proposition_job(
        P9,
        Scenario::new(int, TestFunction::Exp(c(2.0)), 0.5).with_kernel(ShiftKernel::Exp(c(2.0))),
    ));
    jobs
}

// --------------------------------------------------------------- reals oracle

fn reals_jobs() -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    let times = [0.5, 1.0, 2.0];
    for (name, text, m) in [("t", "1/z^2", 1), ("t^2", "2/z^3", 2)] {
        for alpha in [0.3, 0.5, 0.9] {
            let f = move |t: f64| t.powi(m);
            let value = move || -> Result<Vec<f64>> {
                let policy = InversionPolicy { mesh: Some(0.5), ..InversionPolicy::default() };
                let r = frac_derivative(&FracInput::Symbolic(parse(text)?), FracOrder::new(alpha)?, &TimeScale::Reals, 5, &policy)?;
                let s = r.result.values.samples();
                Ok(vec![s[1].re, s[2].re, s[4].re])
            };
            for (id, anchor) in [
                ("reals-caputo", "f^(α) on the real line = Caputo derivative"),
                ("reals-rl", "f^(α) on the real line = Riemann–Liouville derivative (f(0) = 0)"),
            ] {
                let spec = Spec::new(id, format!("ts=reals f={name} alpha={alpha} t=0.5,1,2"), CheckMode::Numeric, REALS_TOL, anchor);
                jobs.push(spec.job(move || {
                    let got = value()?;
                    let mut worst = 0.0f64;
                    for (g, &t) in got.iter().zip(&times) {
                        let want = if id == "reals-caputo" { caputo_reals(f, alpha, t)? } else { rl_derivative_reals(f, alpha, t)? };
                        worst = worst.max(rel(c(*g), c(want)));
                    }
                    Ok(worst)
                }));
            }
        }
    }
    let spec = Spec::new(
        "prop1",
        "ts=reals f=t*exp(-t) alpha=0.5 z=1,2",
        CheckMode::Numeric,
        TOLERANCES.prop1,
        "L[D^α_C f](z) = z^α F(z) - f(0) z^(α-1)",
    );
    jobs.push(spec.job(|| {
        let zs = [c(1.0), c(2.0)];
        Ok(prop1_check(|t| t * (-t).exp(), 0.5, &zs)?.max_rel_error)
    }));
    jobs
}

// ---------------------------------------------------------------- convolution

fn convolution_jobs(seed: u64) -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    let spec = Spec::new(
        "conv-exact",
        format!("ts=int f=exp:2 g=exp:2 t<={T_MAX}"),
        CheckMode::TimeDomain,
        TIME_DOMAIN_TOL,
        "(e_2 * e_2)(t) = t 3^(t-1)",
    );
    jobs.push(Box::new(move || {
        let run = || -> Result<f64> {
            let ts = TimeScale::integers();
            let f = TestFunction::Exp(c(2.0)).sample(&ts, T_MAX as usize + 1, None)?;
            let r = convolve_kernel(&f, ShiftKernel::Exp(c(2.0)))?;
            let want: Vec<Complex64> =
                (0..=T_MAX as i32).map(|t| c(if t == 0 { 0.0 } else { t as f64 * 3f64.powi(t - 1) })).collect();
            Ok(pointwise(r.samples(), &want))
        };
        vec![match run() {
            Ok(e) => spec.entry(e).with_note(if e == 0.0 { "bit-exact" } else { "not bit-exact" }),
            Err(e) => CheckEntry::failed(spec.id, &spec.scenario, spec.mode, spec.tol, spec.anchor, &e),
        }]
    }));
    let spec = Spec::new(
        "conv-residue",
        format!("ts=int f=exp:2 g=exp:2 t<={T_MAX}"),
        CheckMode::TimeDomain,
        TIME_DOMAIN_TOL,
        "e_2 * e_2 = L⁻¹[1/(z-2)^2]",
    );
    jobs.push(spec.job(|| {
        let ts = TimeScale::integers();
        let n = T_MAX as usize + 1;
        let f = TestFunction::Exp(c(2.0)).sample(&ts, n, None)?;
        let r = convolve_kernel(&f, ShiftKernel::Exp(c(2.0)))?;
        let inv = invert_rational(&parse("1/(z-2)^2")?, &ts, n)?;
        Ok(pointwise(inv.values.samples(), r.samples()))
    }));
    let spec = Spec::new("conv-unit", "ts=int f=const:1 g=1 t<=20", CheckMode::TimeDomain, TIME_DOMAIN_TOL, "(1 * 1)(t) = t");
    jobs.push(spec.job(|| {
        let ts = TimeScale::integers();
        let one = TestFunction::Const(c(1.0)).sample(&ts, 21, None)?;
        let r = convolve(&one, |_, _| Ok(c(1.0)))?;
        let want: Vec<Complex64> = (0..21).map(|t| c(t as f64)).collect();
        Ok(pointwise(r.samples(), &want))
    }));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
    let grid = random_grid(&mut rng, 40);
    let spec = Spec::new(
        "conv-h0",
        format!("ts=grid[40 random steps, seed {seed}] f=exp:0.3 g=hk:0"),
        CheckMode::TimeDomain,
        TIME_DOMAIN_TOL,
        "f * h_0 = running delta integral of f",
    );
    jobs.push(spec.job(move || {
        let f = TestFunction::Exp(c(0.3)).sample(&grid, 40, None)?;
        let r = convolve_kernel(&f, ShiftKernel::Hk(0))?;
        Ok(pointwise(r.samples(), f.antiderivative()?.samples()))
    }));
    for (f, g) in [(TestFunction::Exp(c(2.0)), ShiftKernel::Exp(c(2.0))), (TestFunction::Hk(0), ShiftKernel::Hk(0))] {
        let g_name = match g {
            ShiftKernel::Hk(k) => format!("hk:{k}"),
            ShiftKernel::Exp(l) => format!("exp:{}", fmt_z(l)),
        };
        let spec = Spec::new(
            "conv-theorem",
            format!("ts=int f={f} g={g_name} z=4,5+i,6 N=160"),
            CheckMode::Numeric,
            TOLERANCES.convolution_theorem,
            "L[f * g] = L[f] L[g(·, 0)]",
        );
        jobs.push(spec.job(move || {
            let ts = TimeScale::integers();
            let n = 160;
            let fs = f.sample(&ts, n, None)?;
            let gs = GridFunction::sample(&ts, n, None, |_, t| g.eval(&ts, t, 0.0).unwrap_or(c(f64::NAN)))?;
            let conv = convolve_kernel(&fs, g)?;
            let mut worst = 0.0f64;
            for z in [c(4.0), Complex64::new(5.0, 1.0), c(6.0)] {
                let mut parts = Vec::new();
                for h in [&conv, &fs, &gs] {
                    let (v, d) = forward_transform(h, z)?;
                    if d.tail_bound >= TOLERANCES.tail {
                        return Err(Error::TailUnbounded { horizon: d.truncation_horizon, tail_bound: d.tail_bound });
                    }
                    parts.push(v);
                }
                worst = worst.max(rel(parts[0], parts[1] * parts[2]));
            }
            Ok(worst)
        }));
    }
    jobs
}
