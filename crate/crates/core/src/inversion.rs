//! Inverse generalized Laplace transform.
//!
//! * [`invert_rational`]: residues of `e_z(t, 0) F(z)` at the poles of a
//!   strictly proper rational `F` on a discrete scale. Residues are taken
//!   exactly from the Taylor expansion of the grid product
//!   `e_{λ+w}(t_j, 0) = Π_{i<j} (1 + μ_i λ + μ_i w)` around each pole; the
//!   contour-quadrature rule ([`ResidueRule::Contour`]) is kept as an
//!   independent cross-check.
//! * [`invert_on_reals_closed_form`]: classical inverse Laplace pairs on
//!   the real line, including fractional powers.
//! * [`invert_collocation`]: a numerical surrogate for non-rational
//!   transforms on discrete scales, fitted by least squares in the variable
//!   `x = 1 / (1 + μ̄ z)`. Opt-in; always reports a held-out residual.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamma::{factorial, rgamma};
use crate::special::is_regressive;
use crate::timescale::{GridFunction, TimeScale};
use crate::zdomain::{PowerTerm, ZExpr};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionMethod {
    Residue,
    RealsClosedForm,
    Collocation,
    /// Computed in the time domain (exact delta sums and differences, or
    /// the product-trapezoid rule on the real line); no inversion involved.
    Direct,
}

impl std::fmt::Display for InversionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InversionMethod::Residue => "residue",
            InversionMethod::RealsClosedForm => "reals_closed_form",
            InversionMethod::Collocation => "collocation",
            InversionMethod::Direct => "direct",
        })
    }
}

/// Regressivity status of one pole over the inversion horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleStatus {
    pub location: Complex64,
    pub order: u32,
    pub regressive: bool,
    pub offending_index: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct InverseResult {
    pub values: GridFunction,
    pub method: InversionMethod,
    /// Held-out relative forward mismatch (collocation only).
    pub residual: Option<f64>,
    pub pole_report: Vec<PoleStatus>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidueRule {
    /// Exact Taylor coefficients of the grid product.
    #[default]
    Series,
    /// Trapezoidal contour quadrature with node doubling.
    Contour,
}

/// Principal-part coefficients grouped by pole: `(λ, [c_1, .., c_m])`
/// with `F = Σ_λ Σ_r c_r / (z - λ)^r`.
fn principal_parts(f: &ZExpr) -> Result<Vec<(Complex64, Vec<Complex64>)>> {
    if !f.is_rational() {
        return Err(Error::NotRational);
    }
    if !f.is_strictly_proper() {
        return Err(Error::NotStrictlyProper);
    }
    let mut parts: Vec<(Complex64, Vec<Complex64>)> = Vec::new();
    for t in f.terms() {
        let p = t.poles[0];
        let r = p.order as usize;
        let slot = match parts.iter().position(|(l, _)| *l == p.location) {
            Some(i) => &mut parts[i].1,
            None => {
                parts.push((p.location, Vec::new()));
                &mut parts.last_mut().expect("just pushed").1
            }
        };
        if slot.len() < r {
            slot.resize(r, ZERO);
        }
        slot[r - 1] += t.coeff;
    }
    Ok(parts)
}

fn pole_report(ts: &TimeScale, parts: &[(Complex64, Vec<Complex64>)], n: usize) -> Vec<PoleStatus> {
    parts
        .iter()
        .map(|(l, c)| {
            let offending = match is_regressive(ts, *l, n) {
                Ok(_) => None,
                Err(Error::NotRegressive { index, .. }) => Some(index),
                Err(_) => None,
            };
            PoleStatus { location: *l, order: c.len() as u32, regressive: offending.is_none(), offending_index: offending }
        })
        .collect()
}

/// Graininess at the first `n` indices; the value at an explicit grid's
/// final point is never needed for `j < n` products and is set to 0.
fn graininess(ts: &TimeScale, n: usize) -> Result<Vec<f64>> {
    (0..n)
        .map(|j| match ts.mu_at(j) {
            Err(Error::HorizonExceeded(_)) => Ok(0.0),
            other => other,
        })
        .collect()
}

/// Residue inversion of a strictly proper rational transform on a discrete
/// scale, using the exact series rule.
pub fn invert_rational(f: &ZExpr, ts: &TimeScale, n: usize) -> Result<InverseResult> {
    invert_rational_with(f, ts, n, ResidueRule::Series)
}

pub fn invert_rational_with(f: &ZExpr, ts: &TimeScale, n: usize, rule: ResidueRule) -> Result<InverseResult> {
    if ts.is_classical() {
        return Err(Error::InvalidTimeScale("residue inversion needs a discrete time scale".into()));
    }
    let parts = principal_parts(f)?;
    let points = ts.make_grid(n, None)?;
    let report = pole_report(ts, &parts, n);
    if let Some(bad) = report.iter().find(|p| !p.regressive) {
        return Err(Error::NotRegressive { value: bad.location, index: bad.offending_index.unwrap_or(0) });
    }
    let mu = graininess(ts, n)?;
    let mut values = vec![ZERO; n];
    match rule {
        ResidueRule::Series => {
            for (lam, coeffs) in &parts {
                let m = coeffs.len();
                // running Taylor coefficients of e_{λ+w}(t_j, 0) in w
                let mut e = vec![ZERO; m];
                e[0] = ONE;
                for j in 0..n {
                    values[j] += coeffs.iter().zip(&e).map(|(c, e)| c * e).sum::<Complex64>();
                    if j + 1 < n {
                        let a = 1.0 + lam * mu[j];
                        for i in (0..m).rev() {
                            e[i] = e[i] * a + if i > 0 { e[i - 1] * mu[j] } else { ZERO };
                        }
                    }
                }
            }
        }
        ResidueRule::Contour => {
            let locations: Vec<Complex64> = parts.iter().map(|p| p.0).collect();
            for (lam, _) in &parts {
                let nearest = locations
                    .iter()
                    .filter(|l| *l != lam)
                    .map(|l| (l - lam).norm())
                    .fold(f64::INFINITY, f64::min);
                // On the circle |e_z(t_j, 0)| can exceed |e_λ(t_j, 0)| by
                // Π (1 + r μ_i / |1 + μ_i λ|); keeping r below
                // min |1 + μ_i λ| / (μ_i n) bounds that growth by about e and
                // with it the cancellation in the quadrature sum.
                let damping = mu
                    .iter()
                    .filter(|&&m| m > 0.0)
                    .map(|&m| (1.0 + lam * m).norm() / (m * n as f64))
                    .fold(f64::INFINITY, f64::min);
                // nodes never coincide with a pole: the circle stays at half the separation
                let radius = (0.5 * nearest).min(1.0).min(damping);
                let g = |z: Complex64| f.eval(z).unwrap_or(ZERO);
                let res = contour_residues(&g, *lam, radius, &mu, n)?;
                for j in 0..n {
                    values[j] += res[j];
                }
            }
        }
    }
    Ok(InverseResult {
        values: GridFunction::from_parts(ts.clone(), points, values),
        method: InversionMethod::Residue,
        residual: None,
        pole_report: report,
    })
}

/// `(1/2πi) ∮ e_z(t_j, 0) g(z) dz` around `center` for all `j < n`, by the
/// trapezoidal rule starting at 64 nodes and doubling until every residue
/// changes by less than 1e-12 relative.
pub fn contour_residues<G>(g: &G, center: Complex64, radius: f64, mu: &[f64], n: usize) -> Result<Vec<Complex64>>
where
    G: Fn(Complex64) -> Complex64,
{
    const MAX_NODES: usize = 1 << 15;
    let rule = |m: usize| -> (Vec<Complex64>, f64) {
        let mut out = vec![ZERO; n];
        let mut scale = 0.0f64;
        for k in 0..m {
            let dir = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64);
            let z = center + dir * radius;
            let w = g(z) * dir * (radius / m as f64);
            let mut e = ONE;
            for j in 0..n {
                let v = w * e;
                scale = scale.max(v.norm());
                out[j] += v;
                if j + 1 < n {
                    e *= 1.0 + z * mu[j];
                }
            }
        }
        (out, scale)
    };
    // the rule is exact for Laurent terms of degree below m in (z - center)
    let mut m = (n + 2).next_power_of_two().max(64);
    let (mut prev, _) = rule(m);
    loop {
        m *= 2;
        let (next, scale) = rule(m);
        let converged = next
            .iter()
            .zip(&prev)
            .all(|(a, b)| (a - b).norm() <= (1e-12 * a.norm()).max(100.0 * scale * m as f64 * f64::EPSILON));
        if converged {
            return Ok(next);
        }
        if m >= MAX_NODES {
            let worst = next.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            return Err(Error::QuadratureFailure(worst));
        }
        prev = next;
    }
}

/// Value at `t ≥ 0` of the classical inverse Laplace transform of `F`.
pub fn reals_value(f: &ZExpr, t: f64) -> Result<Complex64> {
    f.terms().iter().map(|term| reals_term(term, t)).sum()
}

fn reals_term(term: &PowerTerm, t: f64) -> Result<Complex64> {
    if term.degree() >= 0.0 {
        return Err(Error::NotInvertibleTerm(ZExpr::term(term.clone()).to_string()));
    }
    let c = term.coeff;
    let Some(pole) = term.poles.first() else {
        // z^{-β} ↦ t^{β-1} / Γ(β)
        let beta = -term.exponent;
        return Ok(c * t.powf(beta - 1.0) * rgamma(beta));
    };
    let m = pole.order;
    let lam = pole.location;
    let phi = term.exponent;
    if phi == 0.0 {
        // (z - λ)^{-m} ↦ t^{m-1} e^{λt} / (m-1)!
        return Ok(c * t.powi(m as i32 - 1) * (lam * t).exp() / factorial(m - 1));
    }
    // z^φ (z-λ)^{-m} = Σ_n C(n+m-1, n) λ^n z^{φ-m-n}
    //   ↦ Σ_n C(n+m-1, n) λ^n t^{m+n-φ-1} / Γ(m+n-φ)
    let m = m as f64;
    let mut a = Complex64::new(t.powf(m - phi - 1.0) * rgamma(m - phi), 0.0);
    let mut sum = a;
    let lt = lam * t;
    let mut k = 0.0;
    while k < 10_000.0 {
        a *= lt * ((k + m) / ((k + 1.0) * (m + k - phi)));
        sum += a;
        k += 1.0;
        if k > 2.0 * lt.norm() + 10.0 && a.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    Ok(c * sum)
}

/// Classical closed-form inversion at the given points of the real line.
pub fn invert_on_reals_closed_form(f: &ZExpr, points: &[f64]) -> Result<Vec<Complex64>> {
    points.iter().map(|&t| reals_value(f, t)).collect()
}

/// Closed-form inversion on the uniform real mesh `{0, h, .., (n-1)h}`.
pub fn invert_on_reals(f: &ZExpr, n: usize, mesh: Option<f64>) -> Result<InverseResult> {
    let points = TimeScale::Reals.make_grid(n, mesh)?;
    let values = invert_on_reals_closed_form(f, &points)?;
    Ok(InverseResult {
        values: GridFunction::from_parts(TimeScale::Reals, points, values),
        method: InversionMethod::RealsClosedForm,
        residual: None,
        pole_report: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollocationOptions {
    /// Reject the fit when the column-equilibrated condition number exceeds this.
    pub max_condition: f64,
    /// Samples per unknown.
    pub oversample: usize,
    /// Sampling radius in the `x` plane; chosen from the poles when `None`.
    pub radius: Option<f64>,
    /// Half-angle of the sampling arc used for transforms with a branch cut.
    pub arc_half_angle: f64,
    /// For rational transforms the fit carries `tail_factor · N` unknowns
    /// (capped by the grid) so the truncated tail does not pollute the
    /// first `N` values or the residual.
    pub tail_factor: usize,
}

impl Default for CollocationOptions {
    fn default() -> Self {
        CollocationOptions { max_condition: 1e12, oversample: 4, radius: None, arc_half_angle: 0.15 * PI, tail_factor: 4 }
    }
}

/// Collocation inverse of a symbolic transform on a discrete scale.
pub fn invert_collocation(f: &ZExpr, ts: &TimeScale, n: usize, opts: &CollocationOptions) -> Result<InverseResult> {
    let poles: Vec<Complex64> = f.poles().iter().map(|p| p.location).collect();
    let mut r = invert_collocation_fn(&|z| f.eval(z), &poles, f.is_rational(), ts, n, opts)?;
    r.pole_report = f
        .poles()
        .iter()
        .map(|p| {
            let offending = match is_regressive(ts, p.location, n) {
                Err(Error::NotRegressive { index, .. }) => Some(index),
                _ => None,
            };
            PoleStatus { location: p.location, order: p.order, regressive: offending.is_none(), offending_index: offending }
        })
        .collect();
    Ok(r)
}

/// Collocation inverse of an arbitrary transform given by evaluation.
///
/// Unknowns are `f(t_0..t_{n-1})`; each sample `z_k` contributes the row
/// `μ_j Π_{i≤j} (1 + μ_i z_k)^{-1}`. Samples are placed at
/// `z = (1/x - 1)/μ̄` with `x` on a circle (`rational`) or on a short arc
/// around the positive axis (branch cut present), `μ̄` the smallest
/// graininess on the horizon. `singularities` bound the sampling radius.
pub fn invert_collocation_fn(
    eval: &dyn Fn(Complex64) -> Result<Complex64>,
    singularities: &[Complex64],
    rational: bool,
    ts: &TimeScale,
    n: usize,
    opts: &CollocationOptions,
) -> Result<InverseResult> {
    if ts.is_classical() {
        return Err(Error::InvalidTimeScale("collocation inversion needs a discrete time scale".into()));
    }
    if let Some(cap) = ts.capacity() {
        if n + 1 > cap {
            return Err(Error::HorizonTooSmall { needed: n + 1, have: cap });
        }
    }
    let points = ts.make_grid(n, None)?;
    let unknowns = if rational {
        let k = opts.tail_factor.max(1) * n;
        ts.capacity().map_or(k, |cap| k.min(cap - 1))
    } else {
        n
    };
    let mu: Vec<f64> = (0..unknowns).map(|j| ts.mu_at(j)).collect::<Result<_>>()?;
    let mubar = mu[..n].iter().copied().fold(f64::INFINITY, f64::min);
    let spread = singularities.iter().map(|l| (1.0 + mubar * l).norm()).fold(1.0, f64::max);
    let mut rho = opts.radius.unwrap_or(0.7 / spread);
    if !rational {
        rho = rho.min(0.4);
    }
    let m = opts.oversample.max(1) * unknowns;
    let angle = |s: f64| -> f64 {
        if rational {
            2.0 * PI * s / m as f64
        } else {
            let a = opts.arc_half_angle;
            -a + 2.0 * a * s / (m - 1).max(1) as f64
        }
    };
    let to_z = |theta: f64| (ONE / Complex64::from_polar(rho, theta) - 1.0) / mubar;
    let fit: Vec<Complex64> = (0..m).map(|k| to_z(angle(k as f64))).collect();
    let stride = (m / n).max(1);
    let held: Vec<Complex64> = (0..n).map(|k| to_z(angle((k * stride) as f64 + 0.5))).collect();

    let row = |z: Complex64| -> Result<Vec<Complex64>> {
        let mut w = ONE;
        let mut out = Vec::with_capacity(unknowns);
        for &mj in &mu {
            let d = 1.0 + z * mj;
            if d.norm() <= crate::special::REGRESSIVITY_TOL {
                return Err(Error::NotRegressive { value: z, index: out.len() });
            }
            w /= d;
            out.push(w * mj);
        }
        Ok(out)
    };

    let mut a = DMatrix::<Complex64>::zeros(m, unknowns);
    let mut b = DVector::<Complex64>::zeros(m);
    for (k, &z) in fit.iter().enumerate() {
        for (j, v) in row(z)?.into_iter().enumerate() {
            a[(k, j)] = v;
        }
        b[k] = eval(z)?;
    }
    let scales: Vec<f64> =
        (0..unknowns).map(|j| a.column(j).iter().map(|v| v.norm()).fold(0.0, f64::max)).collect();
    for (j, &sc) in scales.iter().enumerate() {
        if sc > 0.0 {
            a.column_mut(j).scale_mut(1.0 / sc);
        }
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(cond <= opts.max_condition) {
        return Err(Error::IllConditioned(cond));
    }
    let y = svd.solve(&b, 0.0).map_err(|_| Error::IllConditioned(cond))?;
    let full: Vec<Complex64> =
        (0..unknowns).map(|j| if scales[j] > 0.0 { y[j] / scales[j] } else { ZERO }).collect();

    let mut residual = 0.0f64;
    for &z in &held {
        let target = eval(z)?;
        let fitted: Complex64 = row(z)?.iter().zip(&full).map(|(r, v)| r * v).sum();
        residual = residual.max((fitted - target).norm() / target.norm().max(f64::MIN_POSITIVE));
    }
    let values = full[..n].to_vec();
    Ok(InverseResult {
        values: GridFunction::from_parts(ts.clone(), points, values),
        method: InversionMethod::Collocation,
        residual: Some(residual),
        pole_report: Vec::new(),
    })
}

/// How [`invert`] picks a method.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InversionPolicy {
    pub allow_collocation: bool,
    /// Mesh step on the real line.
    pub mesh: Option<f64>,
    pub collocation: CollocationOptions,
}

/// Relative size below which coefficients are treated as rounding residue
/// when routing.
pub const ROUTING_PRUNE: f64 = 1e-13;

/// Inverts `F` on the first `n` points: closed forms on the real line,
/// residues when `F` is rational, collocation otherwise (opt-in).
pub fn invert(f: &ZExpr, ts: &TimeScale, n: usize, policy: &InversionPolicy) -> Result<InverseResult> {
    if ts.is_classical() {
        return invert_on_reals(f, n, policy.mesh);
    }
    let pruned = f.prune(ROUTING_PRUNE * f.max_coeff());
    if pruned.is_rational() {
        return invert_rational(&pruned, ts, n);
    }
    if policy.allow_collocation {
        return invert_collocation(&pruned, ts, n, &policy.collocation);
    }
    Err(Error::NeedsCollocation(pruned.to_string()))
}
