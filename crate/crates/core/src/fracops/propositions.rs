//! Mechanical checks of the algebraic properties of the fractional
//! operators: each check compares two transform-domain expressions by
//! canonical cancellation and, where the result is rational, compares the
//! inverted values with an independent time-domain computation.

use num_complex::Complex64;
use serde::Serialize;

use super::{frac_derivative_auto, frac_derivative_z, frac_integral_z, FracOrder, ShiftKernel};
use crate::error::{Error, Result};
use crate::funcspec::TestFunction;
use crate::inversion::{invert_rational, ROUTING_PRUNE};
use crate::special::hk_table;
use crate::timescale::{delta_derivative, GridFunction, TimeScale};
use crate::zdomain::{initial_values_from_zexpr, transform_of_delta_derivative, InitialValues, ZExpr};

/// Largest leftover coefficient accepted by a symbolic cancellation check.
pub const SYMBOLIC_TOL: f64 = 1e-12;
/// Pointwise tolerance (relative to `max(1, |value|)`) of exact discrete paths.
pub const TIME_DOMAIN_TOL: f64 = 1e-8;
/// Relative tolerance of quadrature-based checks on the real line.
pub const REALS_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PropositionId {
    P3,
    P4,
    P5,
    P6,
    P7a,
    P7b,
    P7c,
    #[serde(rename = "PCOMM")]
    Pcomm,
    #[serde(rename = "PID")]
    Pid,
    #[serde(rename = "PDI")]
    Pdi,
    P9,
}

impl PropositionId {
    pub const ALL: [PropositionId; 11] = [
        PropositionId::P3,
        PropositionId::P4,
        PropositionId::P5,
        PropositionId::P6,
        PropositionId::P7a,
        PropositionId::P7b,
        PropositionId::P7c,
        PropositionId::Pcomm,
        PropositionId::Pid,
        PropositionId::Pdi,
        PropositionId::P9,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PropositionId::P3 => "P3",
            PropositionId::P4 => "P4",
            PropositionId::P5 => "P5",
            PropositionId::P6 => "P6",
            PropositionId::P7a => "P7a",
            PropositionId::P7b => "P7b",
            PropositionId::P7c => "P7c",
            PropositionId::Pcomm => "PCOMM",
            PropositionId::Pid => "PID",
            PropositionId::Pdi => "PDI",
            PropositionId::P9 => "P9",
        }
    }

    /// The identity being checked.
    pub fn anchor(&self) -> &'static str {
        match self {
            PropositionId::P3 => "h_k^(α) = 0 for k ≤ n-1, α ∈ (n-1, n]",
            PropositionId::P4 => "h_k^(α) = L⁻¹[z^(α-k-1)] for k ≥ n",
            PropositionId::P5 => "c^(α) = 0 for a constant c ≡ m",
            PropositionId::P6 => "I^β(I^α f) = I^(α+β) f for α, β > 0",
            PropositionId::P7a => "(f^(α))^(β) = f^(α+β) - L⁻¹[z^(β-1)] f^(α)(0) for α+β ≤ 1",
            PropositionId::P7b => {
                "(f^(α))^(β) = f^(α+β) + L⁻¹[z^(α+β-2)] f^Δ(0) - L⁻¹[z^(β-1)] f^(α)(0) for 1 < α+β ≤ 2"
            }
            PropositionId::P7c => "(f^Δ)^(β) = f^(β+1) for β ∈ (0, 1]",
            PropositionId::Pcomm => "(f^(α))^(β) = (f^(β))^(α) for α+β ≤ 1 and f(0) = 0",
            PropositionId::Pid => "I^α(f^(α)) = f - Σ_{k<n} f^(Δ^k)(0) h_k",
            PropositionId::Pdi => "(I^α f)^(α) = f",
            PropositionId::P9 => "(f*g)^(α) = f^(α/2) * g^(α/2) = f^(α) * g",
        }
    }
}

impl std::fmt::Display for PropositionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PropositionId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PropositionId::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::ScenarioUnsupported(format!("unknown proposition id '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    Symbolic,
    TimeDomain,
    /// Floating-point comparison that is neither symbolic nor an exact
    /// discrete path (quadrature, forward transforms, collocation).
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    OutsideHypothesis,
}

/// One measured check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub id: String,
    pub scenario: String,
    pub mode: CheckMode,
    pub max_error: f64,
    pub tolerance: f64,
    pub status: Status,
    pub anchor: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckEntry {
    pub fn measured(id: &str, scenario: &str, mode: CheckMode, max_error: f64, tolerance: f64, anchor: &str) -> Self {
        let status = if max_error <= tolerance { Status::Pass } else { Status::Fail };
        CheckEntry {
            id: id.to_string(),
            scenario: scenario.to_string(),
            mode,
            max_error,
            tolerance,
            status,
            anchor: anchor.to_string(),
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn failed(id: &str, scenario: &str, mode: CheckMode, tolerance: f64, anchor: &str, err: &Error) -> Self {
        CheckEntry::measured(id, scenario, mode, f64::INFINITY, tolerance, anchor).with_note(err.to_string())
    }
}

/// Inputs of one proposition check.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub ts: TimeScale,
    pub f: TestFunction,
    pub kernel: Option<ShiftKernel>,
    pub alpha: f64,
    pub beta: Option<f64>,
    /// Grid points used by time-domain confirmations.
    pub horizon: usize,
}

impl Scenario {
    pub fn new(ts: TimeScale, f: TestFunction, alpha: f64) -> Self {
        Scenario { ts, f, kernel: None, alpha, beta: None, horizon: 64 }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_kernel(mut self, g: ShiftKernel) -> Self {
        self.kernel = Some(g);
        self
    }

    pub fn with_horizon(mut self, n: usize) -> Self {
        self.horizon = n;
        self
    }

    pub fn describe(&self) -> String {
        let mut s = format!("ts={} f={} alpha={}", self.ts, self.f, self.alpha);
        if let Some(b) = self.beta {
            s.push_str(&format!(" beta={b}"));
        }
        if let Some(g) = self.kernel {
            let g = match g {
                ShiftKernel::Hk(k) => TestFunction::Hk(k),
                ShiftKernel::Exp(l) => TestFunction::Exp(l),
            };
            s.push_str(&format!(" g={g}"));
        }
        s.push_str(&format!(" N={}", self.horizon));
        s
    }

    fn beta(&self) -> Result<f64> {
        self.beta.ok_or_else(|| Error::ScenarioUnsupported("this check needs a second order beta".into()))
    }
}

fn order(a: f64) -> Result<FracOrder> {
    if a <= 0.0 {
        return Err(Error::InvalidOrder(a));
    }
    FracOrder::new(a)
}

fn deriv(f: &ZExpr, a: f64) -> Result<ZExpr> {
    Ok(frac_derivative_auto(f, order(a)?)?.0)
}

fn initial(f: &ZExpr, n: usize) -> Result<InitialValues> {
    initial_values_from_zexpr(f, n)
}

/// Leftover of `a - b` after canonical cancellation.
fn leftover(a: &ZExpr, b: &ZExpr) -> f64 {
    a.sub(b).max_coeff()
}

fn settled(g: &ZExpr) -> ZExpr {
    g.prune(ROUTING_PRUNE * g.max_coeff().max(1.0))
}

/// Inverts `g` when it is (up to rounding) a strictly proper rational.
fn try_invert(g: &ZExpr, ts: &TimeScale, n: usize) -> Result<Option<Vec<Complex64>>> {
    let g = settled(g);
    if !g.is_strictly_proper() {
        return Ok(None);
    }
    Ok(Some(invert_rational(&g, ts, n)?.values.samples().to_vec()))
}

fn pointwise(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm() / y.norm().max(1.0)).fold(0.0, f64::max)
}

/// Iterated delta derivative of samples, first `n` points.
fn delta_power(f: &GridFunction, m: usize, n: usize) -> Result<Vec<Complex64>> {
    let mut g = f.clone();
    for _ in 0..m {
        g = delta_derivative(&g)?;
    }
    Ok(g.samples()[..n].to_vec())
}

/// Iterated running delta integral of samples, first `n` points.
fn integral_power(f: &GridFunction, m: usize, n: usize) -> Result<Vec<Complex64>> {
    let mut g = f.clone();
    for _ in 0..m {
        g = g.antiderivative()?;
    }
    Ok(g.samples()[..n].to_vec())
}

struct Ctx<'a> {
    id: PropositionId,
    scenario: &'a Scenario,
    desc: String,
    entries: Vec<CheckEntry>,
}

impl Ctx<'_> {
    fn symbolic(&mut self, err: f64) {
        self.entries.push(CheckEntry::measured(
            self.id.as_str(),
            &self.desc,
            CheckMode::Symbolic,
            err,
            SYMBOLIC_TOL,
            self.id.anchor(),
        ));
    }

    fn time(&mut self, err: f64, note: &str) {
        self.entries.push(
            CheckEntry::measured(self.id.as_str(), &self.desc, CheckMode::TimeDomain, err, TIME_DOMAIN_TOL, self.id.anchor())
                .with_note(note),
        );
    }

    /// Time-domain confirmation: every inverted expression against `oracle`.
    fn confirm(&mut self, exprs: &[&ZExpr], oracle: &[Complex64], note: &str) -> Result<()> {
        let n = oracle.len();
        let mut worst = 0.0f64;
        for e in exprs {
            match try_invert(e, &self.scenario.ts, n)? {
                Some(v) => worst = worst.max(pointwise(&v, oracle)),
                None => return Ok(()),
            }
        }
        self.time(worst, note);
        Ok(())
    }

    fn samples(&self, extra: usize) -> Result<GridFunction> {
        let s = self.scenario;
        let n = s.horizon + extra;
        let n = s.ts.capacity().map_or(n, |cap| n.min(cap));
        s.f.sample(&s.ts, n, None)
    }

    fn n(&self) -> usize {
        let s = self.scenario;
        s.ts.capacity().map_or(s.horizon, |cap| s.horizon.min(cap.saturating_sub(2)))
    }
}

/// Runs one proposition on one scenario. Scenarios that do not meet the
/// proposition's preconditions give `ScenarioUnsupported`; P9 outside its
/// zero-initial-value hypothesis is reported, not failed.
pub fn verify_proposition(id: PropositionId, scenario: &Scenario) -> Result<Vec<CheckEntry>> {
    let mut cx = Ctx { id, scenario, desc: scenario.describe(), entries: Vec::new() };
    let f = scenario.f.transform();
    let alpha = scenario.alpha;
    let ord = order(alpha)?;
    let n_br = ord.bracket() as usize;
    let n = cx.n();
    match id {
        PropositionId::P3 | PropositionId::P4 => {
            let TestFunction::Hk(k) = scenario.f else {
                return Err(Error::ScenarioUnsupported(format!("{id} needs f = h_k")));
            };
            let k = k as usize;
            let g = deriv(&f, alpha)?;
            if id == PropositionId::P3 {
                if k >= n_br {
                    return Err(Error::ScenarioUnsupported(format!("P3 needs k ≤ n-1, got k={k}, n={n_br}")));
                }
                cx.symbolic(g.max_coeff());
                cx.confirm(&[&g], &vec![Complex64::new(0.0, 0.0); n], "inverse is the zero function")?;
            } else {
                if k < n_br {
                    return Err(Error::ScenarioUnsupported(format!("P4 needs k ≥ n, got k={k}, n={n_br}")));
                }
                let expected = ZExpr::monomial(Complex64::new(1.0, 0.0), alpha - k as f64 - 1.0);
                cx.symbolic(leftover(&g, &expected));
                if ord.is_integer() {
                    let table = hk_table(&scenario.ts, (k - n_br) as u32, n)?;
                    let oracle: Vec<Complex64> = table[k - n_br].iter().map(|&v| Complex64::new(v, 0.0)).collect();
                    cx.confirm(&[&g], &oracle, "h_(k-n) by the delta-integral recursion")?;
                }
            }
        }
        PropositionId::P5 => {
            let TestFunction::Const(_) = scenario.f else {
                return Err(Error::ScenarioUnsupported("P5 needs a constant f".into()));
            };
            let g = deriv(&f, alpha)?;
            cx.symbolic(g.max_coeff());
            cx.confirm(&[&g], &vec![Complex64::new(0.0, 0.0); n], "inverse is the zero function")?;
        }
        PropositionId::P6 => {
            let beta = scenario.beta()?;
            let lhs = frac_integral_z(&frac_integral_z(&f, ord), order(beta)?);
            let rhs = frac_integral_z(&f, order(alpha + beta)?);
            cx.symbolic(leftover(&lhs, &rhs));
            let total = FracOrder::new(alpha + beta)?;
            if total.is_integer() {
                let oracle = integral_power(&cx.samples(0)?, total.alpha() as usize, n)?;
                cx.confirm(&[&lhs, &rhs], &oracle, "iterated delta antiderivative of samples")?;
            }
        }
        PropositionId::P7a | PropositionId::P7b => {
            let beta = scenario.beta()?;
            let sum = alpha + beta;
            if alpha > 1.0 || beta > 1.0 {
                return Err(Error::ScenarioUnsupported(format!("{id} needs α, β ∈ (0, 1]")));
            }
            let in_range = if id == PropositionId::P7a { sum <= 1.0 + 1e-12 } else { sum > 1.0 + 1e-12 && sum <= 2.0 };
            if !in_range {
                return Err(Error::ScenarioUnsupported(format!("{id} does not cover α+β = {sum}")));
            }
            let da = deriv(&f, alpha)?;
            let fa0 = initial(&da, 1)?.values()[0];
            let lhs = frac_derivative_z(&da, &InitialValues(vec![fa0]), order(beta)?)?;
            let mut rhs = deriv(&f, sum)?.sub(&ZExpr::monomial(fa0, beta - 1.0));
            if id == PropositionId::P7b {
                let fd0 = initial(&f, 2)?.values()[1];
                rhs = rhs.add(&ZExpr::monomial(fd0, sum - 2.0));
            }
            cx.symbolic(leftover(&lhs, &rhs));
            let total = FracOrder::new(sum)?;
            if total.is_integer() && fa0.norm() <= SYMBOLIC_TOL || total.alpha() == 2.0 {
                let oracle = delta_power(&cx.samples(2)?, total.alpha() as usize, n)?;
                cx.confirm(&[&lhs, &rhs], &oracle, "iterated delta difference of samples")?;
            }
        }
        PropositionId::P7c => {
            let beta = scenario.beta.unwrap_or(alpha);
            if !(beta > 0.0 && beta <= 1.0) {
                return Err(Error::ScenarioUnsupported("P7c needs β ∈ (0, 1]".into()));
            }
            let first = transform_of_delta_derivative(&f, &initial(&f, 1)?, 1)?;
            let lhs = deriv(&first, beta)?;
            let rhs = deriv(&f, beta + 1.0)?;
            cx.symbolic(leftover(&lhs, &rhs));
            if FracOrder::new(beta)?.is_integer() {
                let oracle = delta_power(&cx.samples(3)?, 2, n)?;
                cx.confirm(&[&lhs, &rhs], &oracle, "second delta difference of samples")?;
            }
        }
        PropositionId::Pcomm => {
            let beta = scenario.beta()?;
            if alpha + beta > 1.0 + 1e-12 {
                return Err(Error::ScenarioUnsupported("PCOMM needs α+β ≤ 1".into()));
            }
            if initial(&f, 1)?.values()[0].norm() > SYMBOLIC_TOL {
                return Err(Error::ScenarioUnsupported("PCOMM needs f(0) = 0".into()));
            }
            let ab = deriv(&deriv(&f, alpha)?, beta)?;
            let ba = deriv(&deriv(&f, beta)?, alpha)?;
            cx.symbolic(leftover(&ab, &ba));
            if FracOrder::new(alpha + beta)?.is_integer() {
                let oracle = delta_power(&cx.samples(2)?, 1, n)?;
                cx.confirm(&[&ab, &ba], &oracle, "delta difference of samples")?;
            }
        }
        PropositionId::Pid => {
            let (da, iv) = frac_derivative_auto(&f, ord)?;
            let lhs = frac_integral_z(&da, ord);
            let mut rhs = f.clone();
            for (k, v) in iv.values().iter().enumerate() {
                rhs = rhs.sub(&ZExpr::monomial(*v, -(k as f64) - 1.0));
            }
            cx.symbolic(leftover(&lhs, &rhs));
            let samples = cx.samples(0)?;
            let table = hk_table(&scenario.ts, n_br.saturating_sub(1) as u32, n)?;
            let oracle: Vec<Complex64> = (0..n)
                .map(|j| samples.samples()[j] - iv.values().iter().enumerate().map(|(k, v)| v * table[k][j]).sum::<Complex64>())
                .collect();
            cx.confirm(&[&lhs, &rhs], &oracle, "samples minus Σ f^(Δ^k)(0) h_k")?;
        }
        PropositionId::Pdi => {
            let ia = frac_integral_z(&f, ord);
            let iv = initial(&ia, n_br)?;
            let hypothesis = iv.max_abs() <= SYMBOLIC_TOL
                && (0..=n_br).all(|k| {
                    f.mul_zpow(k as f64 - if k == 0 { 0.0 } else { alpha })
                        .asymptotic(-1e-9)
                        .iter()
                        .all(|(_, c)| c.norm() <= SYMBOLIC_TOL)
                });
            let lhs = frac_derivative_z(&ia, &InitialValues::zeros(n_br), ord)?;
            let err = leftover(&lhs, &f);
            if !hypothesis {
                let mut e = CheckEntry::measured(id.as_str(), &cx.desc, CheckMode::Symbolic, err, SYMBOLIC_TOL, id.anchor());
                e.status = Status::OutsideHypothesis;
                cx.entries.push(e.with_note("limit conditions on F do not hold"));
            } else {
                cx.symbolic(err);
                let oracle = cx.samples(0)?.samples()[..n].to_vec();
                cx.confirm(&[&lhs], &oracle, "samples of f")?;
            }
        }
        PropositionId::P9 => {
            let kernel = scenario
                .kernel
                .ok_or_else(|| Error::ScenarioUnsupported("P9 needs a kernel g".into()))?;
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::ScenarioUnsupported("P9 needs α ∈ (0, 1)".into()));
            }
            let g = kernel.transform();
            let fg = f.mul(&g);
            let a = deriv(&fg, alpha)?;
            let b = deriv(&f, alpha / 2.0)?.mul(&deriv(&g, alpha / 2.0)?);
            let c = deriv(&f, alpha)?.mul(&g);
            let err = leftover(&a, &b).max(leftover(&a, &c));
            let f0 = initial(&f, 1)?.values()[0];
            let g0 = initial(&g, 1)?.values()[0];
            let mut e = CheckEntry::measured(id.as_str(), &cx.desc, CheckMode::Symbolic, err, SYMBOLIC_TOL, id.anchor());
            if f0.norm() > SYMBOLIC_TOL || g0.norm() > SYMBOLIC_TOL {
                e.status = Status::OutsideHypothesis;
                e = e.with_note(format!("f(0) = {f0}, g(0,0) = {g0}: measured discrepancy only"));
            }
            cx.entries.push(e);
        }
    }
    Ok(cx.entries)
}
