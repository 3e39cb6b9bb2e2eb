//! Property tests for the transform algebra, the parser and the inversion.

use num_complex::Complex64;
use proptest::prelude::*;

use tsfrac::fracops::{frac_derivative_z, frac_integral, frac_integral_z, FracInput, FracOrder};
use tsfrac::inversion::{invert_rational, InversionPolicy};
use tsfrac::special::hk_table;
use tsfrac::timescale::{delta_derivative, GridFunction, TimeScale};
use tsfrac::zdomain::{forward_transform, initial_values_from_zexpr, parse, InitialValues, ZExpr};

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

/// A pole with `0.1 ≤ |λ| < 0.9` and `|1 + λ| ≥ 0.3` (regressive on ℤ).
///
/// Partial fractions of `z^p / (z - λ)` carry coefficients of size
/// `|λ|^{-⌈-p⌉}`, so poles crowding the origin are ill-conditioned in the
/// canonical form; they are kept at the same distance as from each other.
fn pole() -> impl Strategy<Value = Complex64> {
    (0.1..0.9f64, -3.1..3.1f64)
        .prop_map(|(r, th)| Complex64::from_polar(r, th))
        .prop_filter("regressive with margin", |l| (1.0 + l).norm() >= 0.3)
}

/// A strictly proper rational with up to three distinct poles.
fn rational() -> impl Strategy<Value = ZExpr> {
    prop::collection::vec((pole(), 1u32..=2, complex()), 1..=3)
        .prop_filter("separated poles", |v| {
            v.iter().enumerate().all(|(i, a)| v[..i].iter().all(|b| (a.0 - b.0).norm() >= 0.1))
        })
        .prop_map(|v| v.into_iter().fold(ZExpr::zero(), |acc, (l, m, c)| acc.add(&ZExpr::pole(c, l, m))))
}

/// Mixed expression: fractional monomials and shifted poles.
fn expression() -> impl Strategy<Value = ZExpr> {
    let monomial = (complex(), -4.0..1.0f64).prop_map(|(c, p)| ZExpr::monomial(c, p));
    let shifted = (complex(), pole(), 1u32..=3).prop_map(|(c, l, m)| ZExpr::pole(c, l, m));
    prop::collection::vec(prop_oneof![monomial, shifted], 0..5)
        .prop_map(|v| v.iter().fold(ZExpr::zero(), |acc, t| acc.add(t)))
}

/// `Σ |atom(z)|`: the scale against which cancellation in the canonical form
/// is measured.
fn magnitude(e: &ZExpr, z: Complex64) -> f64 {
    e.terms().iter().map(|t| ZExpr::term(t.clone()).eval(z).unwrap().norm()).sum()
}

fn close(a: &ZExpr, b: &ZExpr, tol: f64) -> bool {
    a.sub(b).max_coeff() <= tol * a.max_coeff().max(b.max_coeff()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printing_round_trips(e in expression()) {
        let back = parse(&e.to_string()).unwrap();
        prop_assert!(close(&back, &e, 1e-15), "{e} -> {back}");
    }

    #[test]
    fn addition_is_commutative_and_invertible(a in expression(), b in expression()) {
        prop_assert!(close(&a.add(&b), &b.add(&a), 1e-14));
        prop_assert!(close(&a.add(&b).sub(&b), &a, 1e-12));
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in expression(), b in expression(), k in complex(), x in 2.0..4.0f64, y in -1.0..1.0f64) {
        let z = Complex64::new(x, y);
        let sum = a.scale(k).add(&b).eval(z).unwrap();
        let want = k * a.eval(z).unwrap() + b.eval(z).unwrap();
        prop_assert!((sum - want).norm() <= 1e-10 * want.norm().max(1.0));
        let prod = a.mul(&b).eval(z).unwrap();
        let want = a.eval(z).unwrap() * b.eval(z).unwrap();
        let scale = magnitude(&a.mul(&b), z).max(magnitude(&a, z) * magnitude(&b, z)).max(1.0);
        prop_assert!((prod - want).norm() <= 1e-13 * scale, "{prod} vs {want}");
    }

    #[test]
    fn fractional_integrals_form_a_semigroup(f in expression(), a in 0.05..2.0f64, b in 0.05..2.0f64) {
        let ord = |x: f64| FracOrder::new(x).unwrap();
        let lhs = frac_integral_z(&frac_integral_z(&f, ord(a)), ord(b));
        prop_assert!(close(&lhs, &frac_integral_z(&f, ord(a + b)), 1e-12));
    }

    #[test]
    fn derivative_undoes_integral(f in rational(), a in 0.05..2.5f64) {
        // F strictly proper rational: z^{α-k} I^α F has no nonnegative powers
        let ord = FracOrder::new(a).unwrap();
        let g = frac_integral_z(&f, ord);
        let iv = initial_values_from_zexpr(&g, ord.bracket() as usize).unwrap();
        prop_assert!(iv.max_abs() <= 1e-12);
        let back = frac_derivative_z(&g, &InitialValues::zeros(ord.bracket() as usize), ord).unwrap();
        prop_assert!(close(&back, &f, 1e-12));
    }

    #[test]
    fn inversion_is_linear(f in rational(), g in rational(), a in complex(), b in complex()) {
        let ts = TimeScale::integers();
        let n = 40;
        let lhs = invert_rational(&f.scale(a).add(&g.scale(b)), &ts, n).unwrap();
        let x = invert_rational(&f, &ts, n).unwrap();
        let y = invert_rational(&g, &ts, n).unwrap();
        for j in 0..n {
            let want = a * x.values.samples()[j] + b * y.values.samples()[j];
            let got = lhs.values.samples()[j];
            prop_assert!((got - want).norm() <= 1e-10 * want.norm().max(1.0));
        }
    }

    #[test]
    fn forward_undoes_inverse(f in rational(), x in 3.0..6.0f64, y in -2.0..2.0f64) {
        let z = Complex64::new(x, y);
        let r = invert_rational(&f, &TimeScale::integers(), 150).unwrap();
        let (v, d) = forward_transform(&r.values, z).unwrap();
        prop_assert!(d.tail_bound < 1e-12);
        let want = f.eval(z).unwrap();
        prop_assert!((v - want).norm() <= 1e-9 * want.norm().max(1e-3), "{v} vs {want}");
    }

    #[test]
    fn delta_of_generalized_polynomials(steps in prop::collection::vec(0.1..2.0f64, 3..30), k in 1u32..6) {
        let mut pts = vec![0.0];
        for s in &steps {
            pts.push(pts.last().unwrap() + s);
        }
        let ts = TimeScale::grid(pts).unwrap();
        let n = steps.len() + 1;
        let table = hk_table(&ts, k, n).unwrap();
        let g = GridFunction::from_samples(&ts, table[k as usize].iter().map(|&v| Complex64::new(v, 0.0)).collect(), None).unwrap();
        let d = delta_derivative(&g).unwrap();
        for (j, v) in d.samples().iter().enumerate() {
            let want = table[k as usize - 1][j];
            prop_assert!((v.re - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn integer_integral_matches_running_sums(f in rational()) {
        let ts = TimeScale::integers();
        let n = 30;
        let policy = InversionPolicy::default();
        let one = FracOrder::new(1.0).unwrap();
        let sym = frac_integral(&FracInput::Symbolic(f.clone()), one, &ts, n, &policy).unwrap();
        let samples = invert_rational(&f, &ts, n + 1).unwrap().values;
        let direct = frac_integral(&FracInput::Sampled(samples), one, &ts, n, &policy).unwrap();
        for (a, b) in sym.result.values.samples().iter().zip(direct.result.values.samples()) {
            prop_assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0));
        }
    }
}
