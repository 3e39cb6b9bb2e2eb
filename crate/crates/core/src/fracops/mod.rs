//! Fractional integrals and derivatives on time scales.
//!
//! Both are defined through the transform: the integral of order `α` is
//! `L⁻¹[F(z) / z^α]`, the derivative is
//! `L⁻¹[z^α F(z) - Σ_{k<n} f^{Δ^k}(0) z^{α-k-1}]` with `n = ⌈α⌉`.

pub mod classical;
pub mod propositions;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::inversion::{
    invert, invert_collocation_fn, InverseResult, InversionMethod, InversionPolicy, ROUTING_PRUNE,
};
use crate::special::{exp_ts, hk};
use crate::timescale::{delta_derivative, GridFunction, TimeScale};
use crate::zdomain::{initial_values_from_grid, initial_values_from_zexpr, InitialValues, ZExpr};

/// Orders within this distance of an integer are treated as that integer.
pub const ORDER_SNAP: f64 = 1e-12;

/// A fractional order `α ≥ 0` with its bracket `n`, `n - 1 < α ≤ n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder {
    alpha: f64,
    bracket: u32,
}

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidOrder(alpha));
        }
        let r = alpha.round();
        let alpha = if (alpha - r).abs() <= ORDER_SNAP { r } else { alpha };
        Ok(FracOrder { alpha, bracket: alpha.ceil() as u32 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn bracket(&self) -> u32 {
        self.bracket
    }

    pub fn is_integer(&self) -> bool {
        self.alpha.fract() == 0.0
    }
}

/// `F / z^α`. Order 0 is the identity.
pub fn frac_integral_z(f: &ZExpr, order: FracOrder) -> ZExpr {
    if order.alpha == 0.0 {
        return f.clone();
    }
    f.mul_zpow(-order.alpha)
}

/// `z^α F - Σ_{k<n} iv_k z^{α-k-1}`.
pub fn frac_derivative_z(f: &ZExpr, iv: &InitialValues, order: FracOrder) -> Result<ZExpr> {
    if order.alpha == 0.0 {
        return Err(Error::InvalidOrder(0.0));
    }
    let n = order.bracket as usize;
    if iv.len() != n {
        return Err(Error::ArityMismatch { expected: n, got: iv.len() });
    }
    let mut out = f.mul_zpow(order.alpha);
    for (k, &v) in iv.values().iter().enumerate() {
        out = out.sub(&ZExpr::monomial(v, order.alpha - k as f64 - 1.0));
    }
    Ok(out)
}

/// Transform-domain derivative with initial values from the limit rule.
pub fn frac_derivative_auto(f: &ZExpr, order: FracOrder) -> Result<(ZExpr, InitialValues)> {
    let iv = initial_values_from_zexpr(f, order.bracket as usize)?;
    Ok((frac_derivative_z(f, &iv, order)?, iv))
}

/// Input of the time-domain pipelines.
#[derive(Debug, Clone)]
pub enum FracInput {
    /// A transform; initial values come from the limit rule.
    Symbolic(ZExpr),
    /// Samples on a grid; initial values from delta differences.
    Sampled(GridFunction),
}

#[derive(Debug, Clone)]
pub struct FracOutput {
    /// Result transform (symbolic arm only).
    pub transform: Option<ZExpr>,
    pub initial_values: Option<InitialValues>,
    pub result: InverseResult,
}

/// Drops rounding residue relative to the magnitudes that produced `g`.
fn settle(g: &ZExpr, scale: f64) -> ZExpr {
    g.prune(ROUTING_PRUNE * scale.max(g.max_coeff()))
}

pub fn frac_integral(input: &FracInput, order: FracOrder, ts: &TimeScale, n: usize, policy: &InversionPolicy) -> Result<FracOutput> {
    match input {
        FracInput::Symbolic(f) => {
            let g = settle(&frac_integral_z(f, order), f.max_coeff());
            let result = invert(&g, ts, n, policy)?;
            Ok(FracOutput { transform: Some(g), initial_values: None, result })
        }
        FracInput::Sampled(f) => sampled(f, order, false, ts, n, policy),
    }
}

pub fn frac_derivative(input: &FracInput, order: FracOrder, ts: &TimeScale, n: usize, policy: &InversionPolicy) -> Result<FracOutput> {
    if order.alpha == 0.0 {
        return Err(Error::InvalidOrder(0.0));
    }
    match input {
        FracInput::Symbolic(f) => {
            let (g, iv) = frac_derivative_auto(f, order)?;
            let g = settle(&g, f.max_coeff().max(iv.max_abs()));
            let result = invert(&g, ts, n, policy)?;
            Ok(FracOutput { transform: Some(g), initial_values: Some(iv), result })
        }
        FracInput::Sampled(f) => sampled(f, order, true, ts, n, policy),
    }
}

/// Sampled arm. Integer orders are exact iterated delta integrals or
/// differences; fractional orders on discrete scales go through the
/// truncated numeric transform and collocation (opt-in); on the real line
/// the product-trapezoid rule is used.
fn sampled(f: &GridFunction, order: FracOrder, derivative: bool, ts: &TimeScale, n: usize, policy: &InversionPolicy) -> Result<FracOutput> {
    if f.timescale() != ts {
        return Err(Error::InvalidTimeScale(format!("samples live on {}, requested {}", f.timescale(), ts)));
    }
    let bracket = order.bracket as usize;
    let iv = if derivative { Some(initial_values_from_grid(f, bracket)?) } else { None };
    let values = if order.is_integer() {
        let mut g = f.clone();
        for _ in 0..bracket {
            g = if derivative { delta_derivative(&g)? } else { g.antiderivative()? };
        }
        if g.horizon() < n {
            return Err(Error::HorizonTooSmall { needed: n + if derivative { bracket } else { 0 }, have: f.horizon() });
        }
        g.truncate(n)
    } else if ts.is_classical() {
        let g = if derivative {
            let mut d = f.clone();
            for _ in 0..bracket {
                d = delta_derivative(&d)?;
            }
            classical::product_trapezoid_integral(&d, bracket as f64 - order.alpha)?
        } else {
            classical::product_trapezoid_integral(f, order.alpha)?
        };
        if g.horizon() < n {
            return Err(Error::HorizonTooSmall { needed: n, have: g.horizon() });
        }
        g.truncate(n)
    } else {
        if !policy.allow_collocation {
            let what = if derivative { "derivative" } else { "integral" };
            return Err(Error::NeedsCollocation(format!(
                "fractional {what} of order {} of sampled data",
                order.alpha
            )));
        }
        let alpha = order.alpha;
        let iv_vals: Vec<Complex64> = iv.as_ref().map(|v| v.values().to_vec()).unwrap_or_default();
        let eval = |z: Complex64| -> Result<Complex64> {
            let (big_f, _) = crate::zdomain::forward_transform(f, z)?;
            let za = (z.ln() * alpha).exp();
            if derivative {
                let mut g = za * big_f;
                for (k, v) in iv_vals.iter().enumerate() {
                    g -= v * (z.ln() * (alpha - k as f64 - 1.0)).exp();
                }
                Ok(g)
            } else {
                Ok(big_f / za)
            }
        };
        let r = invert_collocation_fn(&eval, &[], false, ts, n, &policy.collocation)?;
        return Ok(FracOutput { transform: None, initial_values: iv, result: r });
    };
    Ok(FracOutput {
        transform: None,
        initial_values: iv,
        result: InverseResult { values, method: InversionMethod::Direct, residual: None, pole_report: Vec::new() },
    })
}

/// Shift kernels `g(t, s)` with known transforms of `g(·, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftKernel {
    /// `h_k(t, s)`.
    Hk(u32),
    /// `e_λ(t, s)`.
    Exp(Complex64),
}

impl ShiftKernel {
    pub fn eval(&self, ts: &TimeScale, t: f64, s: f64) -> Result<Complex64> {
        match self {
            ShiftKernel::Hk(k) => hk(ts, *k, t, s).map(|v| Complex64::new(v, 0.0)),
            ShiftKernel::Exp(l) => exp_ts(ts, *l, t, s),
        }
    }

    /// Transform of the slice `g(·, 0)`.
    pub fn transform(&self) -> ZExpr {
        let one = Complex64::new(1.0, 0.0);
        match self {
            ShiftKernel::Hk(k) => ZExpr::monomial(one, -(*k as f64) - 1.0),
            ShiftKernel::Exp(l) => ZExpr::pole(one, *l, 1),
        }
    }
}

impl std::str::FromStr for ShiftKernel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<crate::funcspec::TestFunction>()? {
            crate::funcspec::TestFunction::Hk(k) => Ok(ShiftKernel::Hk(k)),
            crate::funcspec::TestFunction::Exp(l) => Ok(ShiftKernel::Exp(l)),
            _ => Err(Error::InvalidFunctionSpec(format!("'{s}' is not a shift kernel (use hk:<k> or exp:<λ>)"))),
        }
    }
}

/// `(f ∗ g)(t) = ∫_0^t f(τ) g(t, σ(τ)) Δτ` on the grid of `f`.
pub fn convolve<G>(f: &GridFunction, g: G) -> Result<GridFunction>
where
    G: Fn(f64, f64) -> Result<Complex64>,
{
    let ts = f.timescale();
    if ts.is_classical() {
        return Err(Error::InvalidTimeScale("convolution is defined here for discrete time scales".into()));
    }
    let n = f.horizon();
    if n < 2 {
        return Err(Error::HorizonTooSmall { needed: 2, have: n });
    }
    let p = f.points();
    let s = f.samples();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..j {
            acc += s[i] * g(p[j], p[i + 1])? * (p[i + 1] - p[i]);
        }
        out.push(acc);
    }
    Ok(GridFunction::from_parts(ts.clone(), p.to_vec(), out))
}

/// Convolution with a shift kernel.
pub fn convolve_kernel(f: &GridFunction, kernel: ShiftKernel) -> Result<GridFunction> {
    let ts = f.timescale().clone();
    convolve(f, |t, s| kernel.eval(&ts, t, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspec::TestFunction;
    use crate::gamma::gamma;
    use crate::zdomain::parse;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn ord(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    #[test]
    fn orders() {
        assert_eq!(ord(0.5).bracket(), 1);
        assert_eq!(ord(1.0).bracket(), 1);
        assert_eq!(ord(1.5).bracket(), 2);
        assert_eq!(ord(2.0 + 1e-14).alpha(), 2.0);
        assert!(FracOrder::new(-0.1).is_err());
    }

    #[test]
    fn transform_examples() {
        let f = parse("1/z").unwrap();
        assert_eq!(frac_integral_z(&f, ord(1.0)), parse("1/z^2").unwrap());
        assert_eq!(frac_integral_z(&f, ord(0.0)), f);
        let g = frac_integral_z(&frac_integral_z(&parse("1/(z-2)").unwrap(), ord(0.7)), ord(0.3));
        assert!(g.sub(&parse("1/z(z-2)").unwrap()).max_coeff() < 1e-15);

        for k in 0..4u32 {
            let f = TestFunction::Hk(k).transform();
            for a in [0.3, 0.5, 1.0, 1.5, 2.5] {
                let o = ord(a);
                let (g, _) = frac_derivative_auto(&f, o).unwrap();
                if k < o.bracket() {
                    assert!(g.is_zero(), "k={k} a={a}: {g}");
                } else {
                    assert!(g.sub(&ZExpr::monomial(c(1.0), a - k as f64 - 1.0)).is_zero());
                }
            }
        }
        let (g, _) = frac_derivative_auto(&parse("7/z").unwrap(), ord(0.8)).unwrap();
        assert!(g.is_zero());
        assert!(matches!(
            frac_derivative_z(&f, &InitialValues::zeros(2), ord(0.5)),
            Err(Error::ArityMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn pipeline_examples() {
        let ts = TimeScale::integers();
        let p = InversionPolicy::default();
        let e2 = FracInput::Symbolic(parse("1/(z-2)").unwrap());
        let r = frac_integral(&e2, ord(1.0), &ts, 20, &p).unwrap();
        let direct = TestFunction::Exp(c(2.0)).sample(&ts, 21, None).unwrap().antiderivative().unwrap();
        for j in 0..20 {
            let want = (3f64.powi(j as i32) - 1.0) / 2.0;
            assert!((r.result.values.samples()[j] - c(want)).norm() <= 1e-12 * want.max(1.0));
            assert!((direct.samples()[j] - c(want)).norm() <= 1e-12 * want.max(1.0));
        }

        let h1 = FracInput::Symbolic(parse("1/z^2").unwrap());
        let r = frac_integral(&h1, ord(0.5), &TimeScale::Reals, 101, &InversionPolicy { mesh: Some(0.01), ..p }).unwrap();
        assert_eq!(r.result.method, InversionMethod::RealsClosedForm);
        let t: f64 = 1.0;
        assert!((r.result.values.samples()[100].re - t.powf(1.5) / gamma(2.5)).abs() < 1e-13);

        let h0 = FracInput::Symbolic(parse("1/z").unwrap());
        assert!(matches!(frac_integral(&h0, ord(0.5), &ts, 10, &p), Err(Error::NeedsCollocation(_))));

        let h3 = FracInput::Symbolic(parse("1/z^4").unwrap());
        match frac_derivative(&h3, ord(0.5), &ts, 10, &p) {
            Err(Error::NeedsCollocation(s)) => assert_eq!(s, ZExpr::monomial(c(1.0), -3.5).to_string()),
            other => panic!("{other:?}"),
        }

        let r = frac_derivative(&FracInput::Symbolic(parse("7/z").unwrap()), ord(0.8), &ts, 10, &p).unwrap();
        assert!(r.result.values.samples().iter().all(|v| *v == c(0.0)));

        let r = frac_derivative(&e2, ord(1.0), &ts, 10, &p).unwrap();
        for j in 0..10 {
            assert!((r.result.values.samples()[j] - c(2.0 * 3f64.powi(j as i32))).norm() < 1e-9);
        }
    }

    #[test]
    fn sampled_integer_orders_are_exact() {
        let ts = TimeScale::integers();
        let p = InversionPolicy::default();
        let f = TestFunction::Exp(c(2.0)).sample(&ts, 12, None).unwrap();
        let r = frac_derivative(&FracInput::Sampled(f.clone()), ord(1.0), &ts, 10, &p).unwrap();
        assert_eq!(r.result.values.samples()[4], c(162.0));
        let r = frac_integral(&FracInput::Sampled(f.clone()), ord(2.0), &ts, 10, &p).unwrap();
        // I² e_2 = (3^t - 1)/4 - t/2
        assert_eq!(r.result.values.samples()[3], c((27.0 - 1.0) / 4.0 - 1.5));
        assert!(matches!(
            frac_integral(&FracInput::Sampled(f), ord(0.5), &ts, 10, &p),
            Err(Error::NeedsCollocation(_))
        ));
    }

    #[test]
    fn convolution_examples() {
        let ts = TimeScale::integers();
        let one = TestFunction::Const(c(1.0)).sample(&ts, 10, None).unwrap();
        let r = convolve(&one, |_, _| Ok(c(1.0))).unwrap();
        for (j, v) in r.samples().iter().enumerate() {
            assert_eq!(*v, c(j as f64));
        }
        let e2 = TestFunction::Exp(c(2.0)).sample(&ts, 21, None).unwrap();
        let r = convolve_kernel(&e2, ShiftKernel::Exp(c(2.0))).unwrap();
        for (j, v) in r.samples().iter().enumerate().skip(1) {
            assert_eq!(*v, c(j as f64 * 3f64.powi(j as i32 - 1)));
        }
        let g = TimeScale::grid(vec![0.0, 1.0, 3.0, 6.0]).unwrap();
        let f = TestFunction::Hk(1).sample(&g, 4, None).unwrap();
        let r = convolve_kernel(&f, ShiftKernel::Hk(0)).unwrap();
        assert_eq!(r.samples(), f.antiderivative().unwrap().samples());
        assert!(matches!(convolve_kernel(&f.truncate(1), ShiftKernel::Hk(0)), Err(Error::HorizonTooSmall { .. })));
    }
}
