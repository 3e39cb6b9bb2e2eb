//! Classical fractional calculus on the real line, used as an independent
//! oracle for the transform-based operators.

use std::cell::RefCell;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gamma::{gamma, rgamma};
use crate::quadrature::{integrate, integrate_real, QuadOptions};
use crate::timescale::{GridFunction, TimeScale};
use crate::zdomain::forward_transform_reals;

const INNER: QuadOptions = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-10, max_intervals: 4000 };

fn check_unit_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidOrder(alpha))
    }
}

/// Five-point derivative; one-sided near the origin so `f` is never
/// evaluated at negative arguments.
fn derivative<F: Fn(f64) -> f64>(f: &F, x: f64) -> f64 {
    let h = 1e-3 * x.abs().max(1.0);
    if x >= 2.0 * h {
        (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
    } else {
        (-25.0 * f(x) + 48.0 * f(x + h) - 36.0 * f(x + 2.0 * h) + 16.0 * f(x + 3.0 * h) - 3.0 * f(x + 4.0 * h))
            / (12.0 * h)
    }
}

/// Caputo derivative `(1/Γ(1-α)) ∫_0^t f'(τ) (t-τ)^{-α} dτ` for `0 < α < 1`.
///
/// The integral is split at `t - δ`, `δ = 10⁻³ t`. The singular piece is
/// rewritten with `u = (t-τ)^{1-α}`, which turns it into
/// `(1/(1-α)) ∫_0^{δ^{1-α}} f'(t - u^{1/(1-α)}) du` with a bounded integrand.
pub fn caputo_reals<F: Fn(f64) -> f64>(f: F, alpha: f64, t: f64) -> Result<f64> {
    check_unit_order(alpha)?;
    if t <= 0.0 {
        return Ok(0.0);
    }
    let delta = 1e-3 * t;
    let outer = integrate_real(|tau| derivative(&f, tau) * (t - tau).powf(-alpha), 0.0, t - delta, INNER)?;
    let p = 1.0 / (1.0 - alpha);
    let inner = integrate_real(|u| derivative(&f, t - u.powf(p)), 0.0, delta.powf(1.0 - alpha), INNER)? * p;
    Ok((outer + inner) * rgamma(1.0 - alpha))
}

/// `(I^{1-α} f)(s)` with the kernel singularity removed by `u = (s-τ)^{1-α}`.
fn rl_integral<F: Fn(f64) -> f64>(f: &F, alpha: f64, s: f64) -> Result<f64> {
    let p = 1.0 / (1.0 - alpha);
    let v = integrate_real(|u| f(s - u.powf(p)), 0.0, s.powf(1.0 - alpha), INNER)?;
    Ok(v * p * rgamma(1.0 - alpha))
}

/// Riemann–Liouville derivative `d/dt (I^{1-α} f)(t)` for `0 < α < 1`,
/// `t > 0`: the fractional integral by quadrature, then a five-point
/// central difference with step `t/100`.
pub fn rl_derivative_reals<F: Fn(f64) -> f64>(f: F, alpha: f64, t: f64) -> Result<f64> {
    check_unit_order(alpha)?;
    if !(t > 0.0) {
        return Err(Error::InvalidTimeScale(format!("Riemann–Liouville derivative needs t > 0, got {t}")));
    }
    let h = t / 100.0;
    let j = |s: f64| rl_integral(&f, alpha, s);
    Ok((-j(t + 2.0 * h)? + 8.0 * j(t + h)? - 8.0 * j(t - h)? + j(t - 2.0 * h)?) / (12.0 * h))
}

/// Riemann–Liouville fractional integral of samples on a uniform real mesh
/// by the product trapezoidal rule (piecewise-linear interpolation of `f`,
/// exact weights against the kernel).
pub fn product_trapezoid_integral(f: &GridFunction, alpha: f64) -> Result<GridFunction> {
    if !f.timescale().is_classical() {
        return Err(Error::InvalidTimeScale("product trapezoid rule needs the real line".into()));
    }
    if alpha == 0.0 {
        return Ok(f.clone());
    }
    let n = f.horizon();
    if n < 2 {
        return Err(Error::HorizonTooSmall { needed: 2, have: n });
    }
    let p = f.points();
    let s = f.samples();
    let h = p[1] - p[0];
    let a1 = alpha + 1.0;
    let pw: Vec<f64> = (0..=n).map(|k| (k as f64).powf(a1)).collect();
    let scale = h.powf(alpha) / gamma(alpha + 2.0);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for m in 1..n {
        let mf = m as f64;
        let mut acc = s[0] * (pw[m - 1] - (mf - 1.0 - alpha) * mf.powf(alpha));
        for j in 1..m {
            let k = m - j;
            acc += s[j] * (pw[k + 1] - 2.0 * pw[k] + pw[k - 1]);
        }
        acc += s[m];
        out[m] = acc * scale;
    }
    Ok(GridFunction::from_parts(TimeScale::Reals, p.to_vec(), out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Sample {
    pub z: Complex64,
    /// Transform of the Caputo derivative, by quadrature.
    pub lhs: Complex64,
    /// `z^α F(z) - f(0) z^{α-1}`.
    pub rhs: Complex64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Report {
    pub alpha: f64,
    pub horizon: f64,
    pub samples: Vec<Prop1Sample>,
    pub max_rel_error: f64,
}

/// Horizon used for the transforms in [`prop1_check`].
pub const PROP1_HORIZON: f64 = 60.0;

/// Checks `L[D^α_C f](z) = z^α L[f](z) - f(0) z^{α-1}` for `0 < α < 1`,
/// computing both sides by independent quadratures over `[0, T]`.
///
/// `f` must decay: `|f(T)|` has to be negligible and the estimated growth
/// rate below `Re z`, otherwise the hypotheses are reported violated.
pub fn prop1_check<F: Fn(f64) -> f64>(f: F, alpha: f64, zs: &[Complex64]) -> Result<Prop1Report> {
    check_unit_order(alpha)?;
    let t_max = PROP1_HORIZON;
    let peak = (0..=600).map(|i| f(t_max * i as f64 / 600.0).abs()).fold(0.0, f64::max);
    if f(t_max).abs() > 1e-8 * peak.max(1.0) || !peak.is_finite() {
        return Err(Error::HypothesisViolated(format!(
            "f does not decay: |f({t_max})| = {:e} against peak {peak:e}",
            f(t_max).abs()
        )));
    }
    let f0 = f(0.0);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let caputo = |t: f64| -> f64 {
        caputo_reals(&f, alpha, t).unwrap_or_else(|e| {
            failure.borrow_mut().get_or_insert(e);
            0.0
        })
    };
    let outer = QuadOptions { abs_tol: 1e-11, rel_tol: 1e-9, max_intervals: 2000 };
    let mut samples = Vec::with_capacity(zs.len());
    let mut worst = 0.0f64;
    for &z in zs {
        let (big_f, _) = forward_transform_reals(|t| Complex64::new(f(t), 0.0), z, t_max).map_err(|e| match e {
            Error::TailUnbounded { .. } => Error::HypothesisViolated(format!("growth of f is not below Re z = {}", z.re)),
            other => other,
        })?;
        let lhs = integrate(|t| caputo(t) * (-z * t).exp(), 0.0, t_max, outer)?.value;
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        let za = (z.ln() * alpha).exp();
        let rhs = za * big_f - f0 * za / z;
        let diff = (lhs - rhs).norm();
        let rel = if diff == 0.0 { 0.0 } else { diff / rhs.norm() };
        worst = worst.max(rel);
        samples.push(Prop1Sample { z, lhs, rhs, rel_error: rel });
    }
    Ok(Prop1Report { alpha, horizon: t_max, samples, max_rel_error: worst })
}
