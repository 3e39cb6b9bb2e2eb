//! Symbolic z-domain expressions: finite sums of `c z^p Π (z - λ)^{-m}`.
//!
//! Every [`ZExpr`] is kept in a unique canonical form built from two kinds
//! of atoms:
//!
//! * monomials `c z^e` (a negative integer `e` is stored as a pole at the
//!   origin of order `-e`);
//! * shifted poles `c z^φ / (z - λ)^m` with `λ ≠ 0` and `0 ≤ φ < 1`.
//!
//! Arbitrary products are reduced to atoms by partial fractions, so two
//! expressions denoting the same function have the same terms up to
//! floating-point rounding of the coefficients. This is what makes
//! cancellation checks like `z^α · z^{-α-1} - z^{-1} = 0` exact.

mod parse;
pub mod transform;

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gamma::binomial;

pub use parse::parse;
pub use transform::{
    forward_transform, forward_transform_auto, forward_transform_reals, initial_values_from_grid,
    initial_values_from_zexpr, transform_of_delta_derivative, InitialValues, TransformDiagnostics,
};

/// Exponents closer than this to an integer are snapped to it.
pub const EXPONENT_TOL: f64 = 1e-10;
/// Pole locations closer than this are identified (and `|λ|` below it is the origin).
pub const POLE_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub location: Complex64,
    pub order: u32,
}

/// `coeff · z^exponent · Π (z - λ_j)^{-m_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTerm {
    pub coeff: Complex64,
    pub exponent: f64,
    pub poles: Vec<Pole>,
}

impl PowerTerm {
    pub fn new(coeff: Complex64, exponent: f64, poles: Vec<Pole>) -> Self {
        PowerTerm { coeff, exponent, poles }
    }

    pub fn monomial(coeff: Complex64, exponent: f64) -> Self {
        PowerTerm { coeff, exponent, poles: Vec::new() }
    }

    pub fn pole(coeff: Complex64, location: Complex64, order: u32) -> Self {
        PowerTerm { coeff, exponent: 0.0, poles: vec![Pole { location, order }] }
    }

    /// Total degree in `z`: the exponent minus all pole orders.
    pub fn degree(&self) -> f64 {
        self.exponent - self.poles.iter().map(|p| p.order as f64).sum::<f64>()
    }

    fn same_shape(&self, other: &PowerTerm) -> bool {
        (self.exponent - other.exponent).abs() <= EXPONENT_TOL
            && self.poles.len() == other.poles.len()
            && self
                .poles
                .iter()
                .zip(&other.poles)
                .all(|(a, b)| a.order == b.order && (a.location - b.location).norm() <= POLE_TOL)
    }

    /// Sort key: exponent descending, then pole locations and orders.
    fn shape_cmp(&self, other: &PowerTerm) -> Ordering {
        other.exponent.total_cmp(&self.exponent).then_with(|| {
            for (a, b) in self.poles.iter().zip(&other.poles) {
                let o = a
                    .location
                    .re
                    .total_cmp(&b.location.re)
                    .then(a.location.im.total_cmp(&b.location.im))
                    .then(a.order.cmp(&b.order));
                if o != Ordering::Equal {
                    return o;
                }
            }
            self.poles.len().cmp(&other.poles.len())
        })
    }
}

/// A canonical z-domain expression. The empty expression is zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ZExpr {
    terms: Vec<PowerTerm>,
}

fn snap(p: f64) -> f64 {
    let r = p.round();
    if (p - r).abs() <= EXPONENT_TOL {
        r
    } else {
        p
    }
}

fn snap_location(l: Complex64) -> Complex64 {
    let re = if l.re.abs() <= POLE_TOL { 0.0 } else { l.re };
    let im = if l.im.abs() <= POLE_TOL { 0.0 } else { l.im };
    Complex64::new(re, im)
}

/// Canonical atom for `c z^e` with no shifted poles.
fn monomial_atom(c: Complex64, e: f64) -> PowerTerm {
    let e = snap(e);
    if e < 0.0 && e.fract() == 0.0 {
        PowerTerm::pole(c, ZERO, (-e) as u32)
    } else {
        PowerTerm::monomial(c, e + 0.0)
    }
}

/// Taylor coefficients of `(d + w)^e` for integer `e`, up to `w^deg`.
fn shifted_power_series(d: Complex64, e: i64, deg: usize) -> Vec<Complex64> {
    let inv = ONE / d;
    let mut out = Vec::with_capacity(deg + 1);
    let mut pow = d.powi(e as i32);
    for n in 0..=deg {
        out.push(pow * binomial(e as f64, n as u32));
        pow *= inv;
    }
    out
}

fn series_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let deg = a.len().min(b.len());
    (0..deg).map(|n| (0..=n).map(|i| a[i] * b[n - i]).sum()).collect()
}

/// Reduces one raw product term to canonical atoms.
fn decompose(term: &PowerTerm, out: &mut Vec<PowerTerm>) {
    if term.coeff == ZERO {
        return;
    }
    let mut p = term.exponent;
    let mut poles: Vec<Pole> = Vec::new();
    for pole in &term.poles {
        if pole.order == 0 {
            continue;
        }
        let loc = snap_location(pole.location);
        if loc.norm() <= POLE_TOL {
            p -= pole.order as f64;
            continue;
        }
        match poles.iter_mut().find(|q| (q.location - loc).norm() <= POLE_TOL) {
            Some(q) => q.order += pole.order,
            None => poles.push(Pole { location: loc, order: pole.order }),
        }
    }
    let p = snap(p);
    if poles.is_empty() {
        out.push(monomial_atom(term.coeff, p));
        return;
    }
    let k = p.floor();
    let phi = p - k;
    let k = k as i64;
    let c = term.coeff;

    // principal parts at each shifted pole
    for (j, pj) in poles.iter().enumerate() {
        let m = pj.order as usize;
        let mut g = shifted_power_series(pj.location, k, m - 1);
        for (i, pi) in poles.iter().enumerate() {
            if i != j {
                let h = shifted_power_series(pj.location - pi.location, -(pi.order as i64), m - 1);
                g = series_mul(&g, &h);
            }
        }
        for r in 1..=m {
            out.push(PowerTerm::new(
                c * g[m - r],
                phi,
                vec![Pole { location: pj.location, order: r as u32 }],
            ));
        }
    }

    // principal part at the origin
    if k < 0 {
        let m0 = (-k) as usize;
        let mut h = vec![ONE; 1];
        h.resize(m0, ZERO);
        for pi in &poles {
            h = series_mul(&h, &shifted_power_series(-pi.location, -(pi.order as i64), m0 - 1));
        }
        for r in 1..=m0 {
            out.push(monomial_atom(c * h[m0 - r], phi - r as f64));
        }
    }

    // polynomial part, from the expansion at infinity
    let total: i64 = poles.iter().map(|q| q.order as i64).sum();
    if k >= total {
        let deg = (k - total) as usize;
        let mut a = vec![ONE; 1];
        a.resize(deg + 1, ZERO);
        for pi in &poles {
            // (1 - λ u)^{-m}
            let s: Vec<Complex64> = (0..=deg)
                .map(|n| (-pi.location).powi(n as i32) * binomial(-(pi.order as f64), n as u32))
                .collect();
            a = series_mul(&a, &s);
        }
        for (n, an) in a.iter().enumerate() {
            out.push(monomial_atom(c * an, phi + (deg - n) as f64));
        }
    }
}

fn zpow(z: Complex64, p: f64) -> Result<Complex64> {
    if p == 0.0 {
        return Ok(ONE);
    }
    if p.fract() == 0.0 {
        if z == ZERO {
            return if p > 0.0 { Ok(ZERO) } else { Err(Error::PoleEvaluation(z)) };
        }
        return Ok(z.powi(p as i32));
    }
    if z.im == 0.0 && z.re < 0.0 {
        return Err(Error::BranchCut(z));
    }
    if z == ZERO {
        return if p > 0.0 { Ok(ZERO) } else { Err(Error::PoleEvaluation(z)) };
    }
    Ok((z.ln() * p).exp())
}

impl ZExpr {
    pub fn zero() -> Self {
        ZExpr::default()
    }

    /// Canonicalizes an arbitrary list of (possibly non-canonical) terms.
    pub fn from_terms<I: IntoIterator<Item = PowerTerm>>(terms: I) -> Self {
        let mut atoms = Vec::new();
        for t in terms {
            decompose(&t, &mut atoms);
        }
        let mut merged: Vec<PowerTerm> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.iter_mut().find(|m| m.same_shape(&a)) {
                Some(m) => m.coeff += a.coeff,
                None => merged.push(a),
            }
        }
        merged.retain(|t| t.coeff != ZERO);
        merged.sort_by(|a, b| a.shape_cmp(b));
        ZExpr { terms: merged }
    }

    pub fn term(t: PowerTerm) -> Self {
        ZExpr::from_terms([t])
    }

    /// `c z^p`.
    pub fn monomial(c: Complex64, p: f64) -> Self {
        ZExpr::term(PowerTerm::monomial(c, p))
    }

    /// `c / (z - λ)^m`.
    pub fn pole(c: Complex64, location: Complex64, order: u32) -> Self {
        ZExpr::term(PowerTerm::pole(c, location, order))
    }

    pub fn terms(&self) -> &[PowerTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Every exponent is an integer, i.e. the expression has no branch cut.
    pub fn is_rational(&self) -> bool {
        self.terms.iter().all(|t| t.exponent.fract() == 0.0)
    }

    /// Rational with every term vanishing at infinity. Zero counts.
    pub fn is_strictly_proper(&self) -> bool {
        self.is_rational() && self.terms.iter().all(|t| !t.poles.is_empty())
    }

    pub fn add(&self, other: &ZExpr) -> ZExpr {
        ZExpr::from_terms(self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn sub(&self, other: &ZExpr) -> ZExpr {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, c: Complex64) -> ZExpr {
        ZExpr::from_terms(self.terms.iter().map(|t| PowerTerm { coeff: t.coeff * c, ..t.clone() }))
    }

    /// Multiplies by `z^α`.
    pub fn mul_zpow(&self, alpha: f64) -> ZExpr {
        ZExpr::from_terms(self.terms.iter().map(|t| PowerTerm { exponent: t.exponent + alpha, ..t.clone() }))
    }

    pub fn mul(&self, other: &ZExpr) -> ZExpr {
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut poles = a.poles.clone();
                poles.extend_from_slice(&b.poles);
                raw.push(PowerTerm::new(a.coeff * b.coeff, a.exponent + b.exponent, poles));
            }
        }
        ZExpr::from_terms(raw)
    }

    /// Principal-branch evaluation.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let mut acc = ZERO;
        for t in &self.terms {
            let mut v = t.coeff * zpow(z, t.exponent)?;
            for p in &t.poles {
                let d = z - p.location;
                if d == ZERO {
                    return Err(Error::PoleEvaluation(p.location));
                }
                v /= d.powi(p.order as i32);
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Largest coefficient magnitude (0 for the zero expression).
    pub fn max_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    /// Drops terms whose coefficient magnitude is at most `tol`.
    pub fn prune(&self, tol: f64) -> ZExpr {
        ZExpr { terms: self.terms.iter().filter(|t| t.coeff.norm() > tol).cloned().collect() }
    }

    /// Distinct pole locations (origin included) with their maximal order.
    pub fn poles(&self) -> Vec<Pole> {
        let mut out: Vec<Pole> = Vec::new();
        for t in &self.terms {
            for p in &t.poles {
                match out.iter_mut().find(|q| (q.location - p.location).norm() <= POLE_TOL) {
                    Some(q) => q.order = q.order.max(p.order),
                    None => out.push(*p),
                }
            }
        }
        out
    }

    /// Expansion at infinity: pairs `(exponent, coefficient)` of
    /// `Σ c_e z^e` for all exponents `e ≥ min_exponent`, exponents descending.
    pub fn asymptotic(&self, min_exponent: f64) -> Vec<(f64, Complex64)> {
        let mut acc: Vec<(f64, Complex64)> = Vec::new();
        let mut push = |e: f64, c: Complex64| {
            let e = snap(e);
            match acc.iter_mut().find(|(x, _)| (x - e).abs() <= EXPONENT_TOL) {
                Some(slot) => slot.1 += c,
                None => acc.push((e, c)),
            }
        };
        for t in &self.terms {
            let mut base = t.exponent;
            let mut shifted = None;
            for p in &t.poles {
                if p.location == ZERO {
                    base -= p.order as f64;
                } else {
                    shifted = Some(*p);
                }
            }
            match shifted {
                None => {
                    if base >= min_exponent - EXPONENT_TOL {
                        push(base, t.coeff);
                    }
                }
                Some(p) => {
                    // z^base (z - λ)^{-m} = Σ_n binom(-m, n) (-λ)^n z^{base - m - n}
                    let m = p.order as f64;
                    let mut n = 0u32;
                    while base - m - n as f64 >= min_exponent - EXPONENT_TOL {
                        let c = t.coeff * binomial(-m, n) * (-p.location).powi(n as i32);
                        push(base - m - n as f64, c);
                        n += 1;
                    }
                }
            }
        }
        acc.sort_by(|a, b| b.0.total_cmp(&a.0));
        acc
    }
}

impl std::ops::Add for &ZExpr {
    type Output = ZExpr;
    fn add(self, rhs: &ZExpr) -> ZExpr {
        ZExpr::add(self, rhs)
    }
}

impl std::ops::Sub for &ZExpr {
    type Output = ZExpr;
    fn sub(self, rhs: &ZExpr) -> ZExpr {
        ZExpr::sub(self, rhs)
    }
}

impl std::ops::Mul for &ZExpr {
    type Output = ZExpr;
    fn mul(self, rhs: &ZExpr) -> ZExpr {
        ZExpr::mul(self, rhs)
    }
}
