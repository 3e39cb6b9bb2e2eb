//! Numeric forward transforms, the delta-derivative rule and initial values.

use num_complex::Complex64;

use super::{ZExpr, EXPONENT_TOL};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::special::REGRESSIVITY_TOL;
use crate::timescale::{delta_derivative, GridFunction, TimeScale};

/// Smallest and largest horizon tried by [`forward_transform_auto`].
pub const AUTO_HORIZON_START: usize = 256;
pub const AUTO_HORIZON_MAX: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformDiagnostics {
    /// Number of series terms (or the upper limit `T` on the real line).
    pub truncation_horizon: usize,
    /// Estimated magnitude of the neglected tail; infinite when the terms
    /// are not geometrically decaying.
    pub tail_bound: f64,
    /// Heuristic `(M, c)` with `|f(t)| <= M |e_c(t, 0)|` over the horizon.
    pub growth_constants: Option<(f64, f64)>,
}

impl TransformDiagnostics {
    pub fn is_reliable(&self) -> bool {
        self.tail_bound.is_finite()
    }
}

/// `f^{Δ^k}(0)` for `k = 0..n`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InitialValues(pub Vec<Complex64>);

impl InitialValues {
    pub fn zeros(n: usize) -> Self {
        InitialValues(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Geometric tail estimate from the trailing quarter of the series terms.
///
/// The window is split in halves and a geometric envelope `C r^j` is drawn
/// through the largest term of each half, so oscillating magnitudes (beating
/// between several poles) do not masquerade as growth. The bound is the
/// envelope summed past the last term.
fn tail_estimate(terms: &[f64]) -> f64 {
    let n = terms.len();
    if n == 0 {
        return 0.0;
    }
    let start = (n - n / 4).min(n.saturating_sub(2));
    let window = &terms[start..];
    if window.iter().all(|&a| a == 0.0) {
        return 0.0;
    }
    if window.len() < 2 {
        return f64::INFINITY;
    }
    let peak = |part: &[f64], offset: usize| {
        part.iter()
            .enumerate()
            .fold((offset, 0.0f64), |best, (i, &a)| if a > best.1 { (offset + i, a) } else { best })
    };
    let half = window.len() / 2;
    let (p_head, head) = peak(&window[..half], 0);
    let (p_tail, tail) = peak(&window[half..], half);
    if tail == 0.0 {
        return 0.0;
    }
    if head == 0.0 {
        return f64::INFINITY;
    }
    let ratio = (tail / head).powf(1.0 / (p_tail - p_head) as f64);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    let last = window.len() - 1;
    tail * ratio.powi((last - p_tail) as i32) * ratio / (1.0 - ratio)
}

fn growth_constants(f: &GridFunction) -> Option<(f64, f64)> {
    let s = f.samples();
    let p = f.points();
    let n = s.len();
    if n < 4 {
        return None;
    }
    let start = n - n / 4 - 1;
    let mut c = f64::NEG_INFINITY;
    for j in start..n - 1 {
        let (a, b) = (s[j].norm(), s[j + 1].norm());
        if a > 0.0 {
            let mu = p[j + 1] - p[j];
            c = c.max((b / a - 1.0) / mu);
        }
    }
    if !c.is_finite() {
        return Some((0.0, 0.0));
    }
    // M = max |f| / |e_c| over the horizon
    let mut e = 1.0f64;
    let mut m = 0.0f64;
    for j in 0..n {
        m = m.max(s[j].norm() / e);
        if j + 1 < n {
            e *= (1.0 + (p[j + 1] - p[j]) * c).abs().max(f64::MIN_POSITIVE);
        }
    }
    Some((m, c))
}

/// Truncated generalized Laplace transform of samples on a discrete scale:
/// `Σ_j f(t_j) μ(t_j) Π_{i≤j} (1 + μ(t_i) z)^{-1}`.
///
/// A non-decaying tail is not an error here: the value is returned with an
/// infinite `tail_bound`, see [`TransformDiagnostics::is_reliable`].
pub fn forward_transform(f: &GridFunction, z: Complex64) -> Result<(Complex64, TransformDiagnostics)> {
    let ts = f.timescale();
    if ts.is_classical() {
        return Err(Error::InvalidTimeScale("use forward_transform_reals on the real line".into()));
    }
    let s = f.samples();
    // the last point of an explicit grid has no graininess
    let n = match ts.capacity() {
        Some(cap) if s.len() >= cap => cap - 1,
        _ => s.len(),
    };
    let mut acc = Complex64::new(0.0, 0.0);
    let mut weight = Complex64::new(1.0, 0.0);
    let mut mags = Vec::with_capacity(n);
    for j in 0..n {
        let mu = ts.mu_at(j)?;
        let factor = 1.0 + z * mu;
        if factor.norm() <= REGRESSIVITY_TOL {
            return Err(Error::NotRegressive { value: z, index: j });
        }
        weight /= factor;
        let term = s[j] * mu * weight;
        mags.push(term.norm());
        acc += term;
    }
    let diag = TransformDiagnostics {
        truncation_horizon: n,
        tail_bound: tail_estimate(&mags),
        growth_constants: growth_constants(f),
    };
    Ok((acc, diag))
}

/// Forward transform of `f(j, t_j)` with the horizon doubled from 256 until
/// the tail bound drops below `tol`.
pub fn forward_transform_auto<F>(ts: &TimeScale, f: F, z: Complex64, tol: f64) -> Result<(Complex64, TransformDiagnostics)>
where
    F: Fn(usize, f64) -> Complex64,
{
    let cap = ts.capacity().unwrap_or(usize::MAX);
    let mut n = AUTO_HORIZON_START.min(cap);
    loop {
        let g = GridFunction::sample(ts, n, None, &f)?;
        let (v, d) = forward_transform(&g, z)?;
        if d.tail_bound < tol {
            return Ok((v, d));
        }
        if n >= AUTO_HORIZON_MAX || n >= cap {
            return Err(Error::TailUnbounded { horizon: d.truncation_horizon, tail_bound: d.tail_bound });
        }
        n = (2 * n).min(AUTO_HORIZON_MAX).min(cap);
    }
}

/// Classical Laplace transform `∫_0^T f(t) e^{-zt} dt` with an exponential
/// tail estimate. The growth rate of `f` is read off `log|f|` between
/// `T/2` and `T`.
pub fn forward_transform_reals<F>(f: F, z: Complex64, horizon: f64) -> Result<(Complex64, TransformDiagnostics)>
where
    F: Fn(f64) -> Complex64,
{
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidTimeScale(format!("transform horizon must be positive, got {horizon}")));
    }
    let (fa, fb) = (f(0.5 * horizon).norm(), f(horizon).norm());
    let (tail_bound, growth) = if fb == 0.0 {
        (0.0, None)
    } else {
        let c = if fa > 0.0 { (fb.ln() - fa.ln()) / (0.5 * horizon) } else { f64::INFINITY };
        if z.re <= c {
            return Err(Error::TailUnbounded { horizon: horizon as usize, tail_bound: f64::INFINITY });
        }
        let bound = fb * (-z.re * horizon).exp() / (z.re - c);
        (bound, Some((fb * (-c * horizon).exp(), c)))
    };
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 20_000 };
    let r = integrate(|t| f(t) * (-z * t).exp(), 0.0, horizon, opts)?;
    Ok((
        r.value,
        TransformDiagnostics { truncation_horizon: horizon as usize, tail_bound, growth_constants: growth },
    ))
}

/// Transform of the `n`-th delta derivative:
/// `z^n F - Σ_{k<n} z^{n-k-1} f^{Δ^k}(0)`.
pub fn transform_of_delta_derivative(f: &ZExpr, iv: &InitialValues, n: usize) -> Result<ZExpr> {
    if iv.len() != n {
        return Err(Error::ArityMismatch { expected: n, got: iv.len() });
    }
    let mut out = f.mul_zpow(n as f64);
    for (k, &v) in iv.values().iter().enumerate() {
        out = out.sub(&ZExpr::monomial(v, (n - k - 1) as f64));
    }
    Ok(out)
}

/// Initial values by the limit rule `f^{Δ^k}(0) = lim_{z→∞} z G_k(z)`,
/// where `G_k` is the transform of the `k`-th delta derivative.
///
/// A positive power surviving in `z G_k` (beyond rounding noise relative
/// to the coefficients of `F`) makes the limit infinite.
pub fn initial_values_from_zexpr(f: &ZExpr, n: usize) -> Result<InitialValues> {
    let scale = f.max_coeff().max(1.0);
    let mut values = Vec::with_capacity(n);
    let mut g = f.clone();
    for k in 0..n {
        let zg = g.mul_zpow(1.0);
        let mut value = Complex64::new(0.0, 0.0);
        for (e, c) in zg.asymptotic(-EXPONENT_TOL) {
            if e.abs() <= EXPONENT_TOL {
                value = c;
            } else if c.norm() > 1e-12 * scale {
                return Err(Error::NonFiniteInitialValue(k));
            }
        }
        values.push(value);
        g = zg.sub(&ZExpr::monomial(value, 0.0));
    }
    Ok(InitialValues(values))
}

/// Initial values from samples by iterated delta differences at the origin.
pub fn initial_values_from_grid(f: &GridFunction, n: usize) -> Result<InitialValues> {
    if f.horizon() < n + 1 {
        return Err(Error::HorizonTooSmall { needed: n + 1, have: f.horizon() });
    }
    let mut values = Vec::with_capacity(n);
    let mut g = f.clone();
    for k in 0..n {
        values.push(g.samples()[0]);
        if k + 1 < n {
            g = delta_derivative(&g)?;
        }
    }
    Ok(InitialValues(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zdomain::parse;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn on_int<F: Fn(f64) -> f64>(n: usize, f: F) -> GridFunction {
        GridFunction::sample(&TimeScale::integers(), n, None, |_, t| c(f(t))).unwrap()
    }

    #[test]
    fn forward_examples() {
        let (v, d) = forward_transform(&on_int(60, |_| 1.0), c(1.0)).unwrap();
        assert!((v - c(1.0)).norm() < 1e-12 && d.tail_bound < 1e-12);
        let (v, _) = forward_transform(&on_int(80, |t| t), c(1.0)).unwrap();
        assert!((v - c(1.0)).norm() < 1e-10);
        let (v, _) = forward_transform(&on_int(80, |t| 3f64.powf(t)), c(5.0)).unwrap();
        assert!((v - c(1.0 / 3.0)).norm() < 1e-10);
    }

    #[test]
    fn divergent_tail_is_flagged() {
        let (_, d) = forward_transform(&on_int(40, |t| 3f64.powf(t)), c(1.0)).unwrap();
        assert!(!d.is_reliable());
        assert!(matches!(
            forward_transform(&on_int(5, |_| 1.0), c(-1.0)),
            Err(Error::NotRegressive { index: 0, .. })
        ));
    }

    #[test]
    fn beating_terms_are_not_growth() {
        // two exponentials of equal modulus beat; the terms still decay
        let f = on_int(200, |t| (0.6f64.powf(t) * (1.3 * t).cos()).abs() + 0.6f64.powf(t) * (0.2 * t).sin().abs());
        let (_, d) = forward_transform(&f, c(1.0)).unwrap();
        assert!(d.is_reliable() && d.tail_bound < 1e-60, "{d:?}");
        let geometric = on_int(64, |t| 0.5f64.powf(t));
        let (_, d) = forward_transform(&geometric, c(1.0)).unwrap();
        // exact tail: Σ_{j≥64} 0.25^j (1/2)
        let exact = 0.5 * 0.25f64.powi(64) / 0.75;
        assert!(d.tail_bound >= exact && d.tail_bound < 10.0 * exact, "{} vs {exact}", d.tail_bound);
        let (_, d) = forward_transform(&on_int(40, |t| if t < 20.0 { 1.0 } else { 0.0 }), c(1.0)).unwrap();
        assert_eq!(d.tail_bound, 0.0);
    }

    #[test]
    fn auto_horizon_grows() {
        let (v, d) = forward_transform_auto(&TimeScale::integers(), |_, t| c(t * t), c(0.05), 1e-9).unwrap();
        // Σ t² μ / (1.05)^{t+1} = (z+2)/z^3·... compare against closed form 2/z^3 + 1/z^2
        let z: f64 = 0.05;
        assert!(((v.re - (2.0 / z.powi(3) + 1.0 / z.powi(2))) / v.re).abs() < 1e-8);
        assert!(d.truncation_horizon > 256);
    }

    #[test]
    fn reals_examples() {
        let (v, _) = forward_transform_reals(|_| c(1.0), c(2.0), 40.0).unwrap();
        assert!((v - c(0.5)).norm() < 1e-8);
        let (v, _) = forward_transform_reals(c, c(1.0), 60.0).unwrap();
        assert!((v - c(1.0)).norm() < 1e-8);
        assert!(matches!(
            forward_transform_reals(|t| c((2.0 * t).exp()), c(1.0), 40.0),
            Err(Error::TailUnbounded { .. })
        ));
    }

    #[test]
    fn derivative_rule_examples() {
        let f = parse("1/z^2").unwrap();
        let g = transform_of_delta_derivative(&f, &InitialValues(vec![c(0.0)]), 1).unwrap();
        assert_eq!(g, parse("1/z").unwrap());
        let f = parse("1/(z-2)").unwrap();
        let g = transform_of_delta_derivative(&f, &InitialValues(vec![c(1.0)]), 1).unwrap();
        assert_eq!(g, parse("2/(z-2)").unwrap());
        let g = transform_of_delta_derivative(&ZExpr::zero(), &InitialValues::zeros(2), 2).unwrap();
        assert!(g.is_zero());
        assert!(matches!(
            transform_of_delta_derivative(&f, &InitialValues::zeros(2), 1),
            Err(Error::ArityMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn initial_value_examples() {
        let iv = initial_values_from_zexpr(&parse("1/(z-0.5)").unwrap(), 1).unwrap();
        assert_eq!(iv.values(), &[c(1.0)]);
        let iv = initial_values_from_zexpr(&parse("1/z^2").unwrap(), 2).unwrap();
        assert_eq!(iv.values(), &[c(0.0), c(1.0)]);
        assert!(matches!(
            initial_values_from_zexpr(&parse("z^-0.5").unwrap(), 1),
            Err(Error::NonFiniteInitialValue(0))
        ));

        let iv = initial_values_from_grid(&on_int(10, |t| t * (t - 1.0) / 2.0), 2).unwrap();
        assert_eq!(iv.values(), &[c(0.0), c(0.0)]);
        let iv = initial_values_from_grid(&on_int(10, |t| 3f64.powf(t)), 2).unwrap();
        assert_eq!(iv.values(), &[c(1.0), c(2.0)]);
        let iv = initial_values_from_grid(&on_int(10, |_| 5.0), 1).unwrap();
        assert_eq!(iv.values(), &[c(5.0)]);
        assert!(matches!(initial_values_from_grid(&on_int(2, |_| 5.0), 2), Err(Error::HorizonTooSmall { .. })));
    }
}
