//! Time scales, their jump and graininess operators, truncated grids and
//! basic delta calculus on sampled functions.
//!
//! Discrete variants are addressed by grid index: index 0 is the origin of
//! the scale (0 for uniform and explicit grids, `t0` for q-scales). All
//! transforms and integrals start at the origin.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default mesh step for the classical (continuous) mode.
pub const DEFAULT_MESH: f64 = 1e-3;

/// Relative tolerance used when locating a real number on a grid.
const GRID_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum TimeScale {
    /// The real line. Handled in classical mode: closed forms and quadrature.
    Reals,
    /// `hZ` for a positive step `h`. `Uniform { step: 1.0 }` is the integers.
    Uniform { step: f64 },
    /// `{t0 q^k : k >= 0}` with `q > 1`, `t0 > 0`. The origin is `t0`.
    QScale { q: f64, t0: f64 },
    /// A finite, strictly increasing list of points starting at 0.
    Grid(Arc<[f64]>),
}

impl TimeScale {
    pub fn integers() -> Self {
        TimeScale::Uniform { step: 1.0 }
    }

    pub fn uniform(step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidTimeScale(format!("uniform step must be positive, got {step}")));
        }
        Ok(TimeScale::Uniform { step })
    }

    pub fn qscale(q: f64, t0: f64) -> Result<Self> {
        if !(q.is_finite() && q > 1.0) {
            return Err(Error::InvalidTimeScale(format!("q-scale ratio must exceed 1, got {q}")));
        }
        if !(t0.is_finite() && t0 > 0.0) {
            return Err(Error::InvalidTimeScale(format!("q-scale start must be positive, got {t0}")));
        }
        Ok(TimeScale::QScale { q, t0 })
    }

    pub fn grid(points: Vec<f64>) -> Result<Self> {
        match points.first() {
            None => return Err(Error::InvalidTimeScale("explicit grid is empty".into())),
            Some(&p0) if p0 != 0.0 => {
                return Err(Error::InvalidTimeScale(format!("explicit grid must start at 0, got {p0}")))
            }
            _ => {}
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidTimeScale("explicit grid has non-finite points".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTimeScale("explicit grid must be strictly increasing".into()));
        }
        Ok(TimeScale::Grid(points.into()))
    }

    /// True for the real line, which bypasses the residue machinery.
    pub fn is_classical(&self) -> bool {
        matches!(self, TimeScale::Reals)
    }

    pub fn origin(&self) -> f64 {
        match self {
            TimeScale::QScale { t0, .. } => *t0,
            _ => 0.0,
        }
    }

    /// Number of points available, `None` when unbounded.
    pub fn capacity(&self) -> Option<usize> {
        match self {
            TimeScale::Grid(p) => Some(p.len()),
            _ => None,
        }
    }

    /// The `j`-th grid point of a discrete scale.
    pub fn point(&self, j: usize) -> Result<f64> {
        match self {
            TimeScale::Reals => Err(Error::InvalidTimeScale("the real line has no grid points".into())),
            TimeScale::Uniform { step } => Ok(j as f64 * step),
            TimeScale::QScale { q, t0 } => Ok(t0 * q.powi(j as i32)),
            TimeScale::Grid(p) => p
                .get(j)
                .copied()
                .ok_or(Error::HorizonTooSmall { needed: j + 1, have: p.len() }),
        }
    }

    /// Grid index of `t` on a discrete scale.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let close = |a: f64, b: f64| (a - b).abs() <= GRID_TOL * a.abs().max(b.abs()).max(1.0);
        match self {
            TimeScale::Reals => Err(Error::InvalidTimeScale("the real line has no grid index".into())),
            TimeScale::Uniform { step } => {
                let j = (t / step).round();
                if j >= 0.0 && close(j * step, t) {
                    Ok(j as usize)
                } else {
                    Err(Error::PointNotOnGrid(t))
                }
            }
            TimeScale::QScale { q, t0 } => {
                if t <= 0.0 {
                    return Err(Error::PointNotOnGrid(t));
                }
                let j = ((t / t0).ln() / q.ln()).round();
                if j >= 0.0 && close(t0 * q.powi(j as i32), t) {
                    Ok(j as usize)
                } else {
                    Err(Error::PointNotOnGrid(t))
                }
            }
            TimeScale::Grid(p) => {
                let k = p.partition_point(|&x| x < t);
                for j in [k.saturating_sub(1), k] {
                    if let Some(&x) = p.get(j) {
                        if close(x, t) {
                            return Ok(j);
                        }
                    }
                }
                Err(Error::PointNotOnGrid(t))
            }
        }
    }

    /// Graininess at grid index `j`.
    pub fn mu_at(&self, j: usize) -> Result<f64> {
        match self {
            TimeScale::Reals => Ok(0.0),
            TimeScale::Uniform { step } => Ok(*step),
            TimeScale::QScale { q, t0 } => Ok((q - 1.0) * t0 * q.powi(j as i32)),
            TimeScale::Grid(p) => {
                if j + 1 < p.len() {
                    Ok(p[j + 1] - p[j])
                } else if j + 1 == p.len() {
                    Err(Error::HorizonExceeded(p[j]))
                } else {
                    Err(Error::HorizonTooSmall { needed: j + 2, have: p.len() })
                }
            }
        }
    }

    /// Forward jump operator.
    pub fn sigma(&self, t: f64) -> Result<f64> {
        match self {
            TimeScale::Reals => Ok(t),
            _ => {
                let j = self.index_of(t)?;
                if let TimeScale::Grid(p) = self {
                    return p.get(j + 1).copied().ok_or(Error::HorizonExceeded(t));
                }
                self.point(j + 1)
            }
        }
    }

    /// Graininess `sigma(t) - t`.
    pub fn mu(&self, t: f64) -> Result<f64> {
        match self {
            TimeScale::Reals => Ok(0.0),
            _ => self.mu_at(self.index_of(t)?),
        }
    }

    /// The first `n` points of the scale from its origin. The real line
    /// needs a mesh step (defaults to [`DEFAULT_MESH`]).
    pub fn make_grid(&self, n: usize, mesh: Option<f64>) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidCount);
        }
        if let TimeScale::Reals = self {
            let h = mesh.unwrap_or(DEFAULT_MESH);
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidTimeScale(format!("mesh step must be positive, got {h}")));
            }
            return Ok((0..n).map(|j| j as f64 * h).collect());
        }
        if let Some(cap) = self.capacity() {
            if n > cap {
                return Err(Error::HorizonTooSmall { needed: n, have: cap });
            }
        }
        let points = (0..n).map(|j| self.point(j)).collect::<Result<Vec<_>>>()?;
        let (lo, hi) = self.graininess_bounds(n.saturating_sub(1))?;
        if n > 1 && !(lo > 0.0 && hi.is_finite()) {
            return Err(Error::InvalidTimeScale(format!("graininess bounds ({lo}, {hi}) are degenerate")));
        }
        Ok(points)
    }

    /// `(min, max)` of the graininess over the first `n` grid indices.
    pub fn graininess_bounds(&self, n: usize) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for j in 0..n {
            let m = self.mu_at(j)?;
            lo = lo.min(m);
            hi = hi.max(m);
        }
        Ok((lo, hi))
    }
}

impl fmt::Display for TimeScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeScale::Reals => write!(f, "reals"),
            TimeScale::Uniform { step } if *step == 1.0 => write!(f, "int"),
            TimeScale::Uniform { step } => write!(f, "uniform:{step}"),
            TimeScale::QScale { q, t0 } => write!(f, "qscale:{q}:{t0}"),
            TimeScale::Grid(p) => {
                write!(f, "grid:")?;
                for (i, x) in p.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for TimeScale {
    type Err = Error;

    /// Parses `reals`, `int`, `uniform:<h>`, `qscale:<q>:<t0>` or `grid:<p0,p1,...>`.
    fn from_str(s: &str) -> Result<Self> {
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidTimeScale(format!("bad number '{x}' in '{s}'")))
        };
        let s = s.trim();
        match s {
            "reals" => return Ok(TimeScale::Reals),
            "int" => return Ok(TimeScale::integers()),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("uniform:") {
            return TimeScale::uniform(num(rest)?);
        }
        if let Some(rest) = s.strip_prefix("qscale:") {
            let (q, t0) = rest
                .split_once(':')
                .ok_or_else(|| Error::InvalidTimeScale(format!("expected qscale:<q>:<t0>, got '{s}'")))?;
            return TimeScale::qscale(num(q)?, num(t0)?);
        }
        if let Some(rest) = s.strip_prefix("grid:") {
            let pts = rest.split(',').map(num).collect::<Result<Vec<_>>>()?;
            return TimeScale::grid(pts);
        }
        Err(Error::InvalidTimeScale(format!(
            "unknown time scale '{s}' (expected reals, int, uniform:<h>, qscale:<q>:<t0>, grid:<p0,...>)"
        )))
    }
}

/// A function sampled on the first `points.len()` points of a time scale.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    timescale: TimeScale,
    points: Vec<f64>,
    samples: Vec<Complex64>,
}

impl GridFunction {
    /// Samples `f` on the first `n` points. For the real line the mesh step
    /// defaults to [`DEFAULT_MESH`].
    pub fn sample<F>(ts: &TimeScale, n: usize, mesh: Option<f64>, f: F) -> Result<Self>
    where
        F: Fn(usize, f64) -> Complex64,
    {
        let points = ts.make_grid(n, mesh)?;
        let samples = points.iter().enumerate().map(|(j, &t)| f(j, t)).collect();
        Ok(GridFunction { timescale: ts.clone(), points, samples })
    }

    /// Wraps existing samples taken at the first `samples.len()` grid points.
    pub fn from_samples(ts: &TimeScale, samples: Vec<Complex64>, mesh: Option<f64>) -> Result<Self> {
        let points = ts.make_grid(samples.len(), mesh)?;
        Ok(GridFunction { timescale: ts.clone(), points, samples })
    }

    pub(crate) fn from_parts(ts: TimeScale, points: Vec<f64>, samples: Vec<Complex64>) -> Self {
        debug_assert_eq!(points.len(), samples.len());
        GridFunction { timescale: ts, points, samples }
    }

    pub fn timescale(&self) -> &TimeScale {
        &self.timescale
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn horizon(&self) -> usize {
        self.points.len()
    }

    /// Sample at the grid point `t`.
    pub fn at(&self, t: f64) -> Result<Complex64> {
        let j = self.local_index(t)?;
        Ok(self.samples[j])
    }

    fn local_index(&self, t: f64) -> Result<usize> {
        let j = match self.timescale {
            TimeScale::Reals => {
                let h = self.mesh_step();
                let j = (t / h).round();
                if j < 0.0 || (j * h - t).abs() > GRID_TOL * t.abs().max(1.0) {
                    return Err(Error::PointNotOnGrid(t));
                }
                j as usize
            }
            _ => self.timescale.index_of(t)?,
        };
        if j >= self.points.len() {
            return Err(Error::PointNotOnGrid(t));
        }
        Ok(j)
    }

    fn mesh_step(&self) -> f64 {
        if self.points.len() > 1 {
            self.points[1] - self.points[0]
        } else {
            DEFAULT_MESH
        }
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        GridFunction {
            timescale: self.timescale.clone(),
            points: self.points.clone(),
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Keeps the first `n` samples.
    pub fn truncate(&self, n: usize) -> Self {
        let n = n.min(self.horizon());
        GridFunction {
            timescale: self.timescale.clone(),
            points: self.points[..n].to_vec(),
            samples: self.samples[..n].to_vec(),
        }
    }

    /// Running delta antiderivative `F(t_j) = ∫_{t_0}^{t_j} f Δτ`.
    pub fn antiderivative(&self) -> Result<Self> {
        let n = self.horizon();
        let mut out = Vec::with_capacity(n);
        let mut acc = Complex64::new(0.0, 0.0);
        match self.timescale {
            TimeScale::Reals => {
                out.push(acc);
                for j in 1..n {
                    let h = self.points[j] - self.points[j - 1];
                    acc += (self.samples[j] + self.samples[j - 1]) * (0.5 * h);
                    out.push(acc);
                }
            }
            _ => {
                for j in 0..n {
                    out.push(acc);
                    if j + 1 < n {
                        acc += self.samples[j] * self.timescale.mu_at(j)?;
                    }
                }
            }
        }
        Ok(GridFunction::from_parts(self.timescale.clone(), self.points.clone(), out))
    }
}

/// Delta derivative. On discrete scales the result lives on the first
/// `N - 1` points; on the real line it is a second-order finite difference
/// on the full mesh.
pub fn delta_derivative(f: &GridFunction) -> Result<GridFunction> {
    let n = f.horizon();
    if n < 2 {
        return Err(Error::HorizonTooSmall { needed: 2, have: n });
    }
    let s = &f.samples;
    let p = &f.points;
    match f.timescale {
        TimeScale::Reals => {
            let h = f.mesh_step();
            let mut d = Vec::with_capacity(n);
            if n == 2 {
                let g = (s[1] - s[0]) / h;
                d.extend([g, g]);
            } else {
                d.push((s[0] * -3.0 + s[1] * 4.0 - s[2]) / (2.0 * h));
                for j in 1..n - 1 {
                    d.push((s[j + 1] - s[j - 1]) / (2.0 * h));
                }
                d.push((s[n - 1] * 3.0 - s[n - 2] * 4.0 + s[n - 3]) / (2.0 * h));
            }
            Ok(GridFunction::from_parts(TimeScale::Reals, p.clone(), d))
        }
        _ => {
            let d = (0..n - 1).map(|j| (s[j + 1] - s[j]) / (p[j + 1] - p[j])).collect();
            Ok(GridFunction::from_parts(f.timescale.clone(), p[..n - 1].to_vec(), d))
        }
    }
}

/// Delta integral of `f` over `[a, b)`: an exact Riemann sum on discrete
/// scales and the composite trapezoid rule on the real mesh.
pub fn delta_integral(f: &GridFunction, a: f64, b: f64) -> Result<Complex64> {
    let ia = f.local_index(a)?;
    let ib = f.local_index(b)?;
    if ia > ib {
        return Err(Error::InvalidTimeScale(format!("integration bounds reversed: {a} > {b}")));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    match f.timescale {
        TimeScale::Reals => {
            for j in ia..ib {
                let h = f.points[j + 1] - f.points[j];
                acc += (f.samples[j] + f.samples[j + 1]) * (0.5 * h);
            }
        }
        _ => {
            for j in ia..ib {
                acc += f.samples[j] * (f.points[j + 1] - f.points[j]);
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(TimeScale::integers().sigma(3.0).unwrap(), 4.0);
        let q = TimeScale::qscale(2.0, 1.0).unwrap();
        assert_eq!(q.sigma(4.0).unwrap(), 8.0);
        assert_eq!(TimeScale::Reals.sigma(1.7).unwrap(), 1.7);
    }

    #[test]
    fn sigma_errors() {
        assert!(matches!(TimeScale::integers().sigma(2.5), Err(Error::PointNotOnGrid(_))));
        let g = TimeScale::grid(vec![0.0, 1.0, 3.0, 6.0]).unwrap();
        assert!(matches!(g.sigma(6.0), Err(Error::HorizonExceeded(_))));
        assert!(matches!(g.sigma(2.0), Err(Error::PointNotOnGrid(_))));
    }

    #[test]
    fn mu_examples() {
        assert_eq!(TimeScale::integers().mu(5.0).unwrap(), 1.0);
        assert_eq!(TimeScale::qscale(2.0, 1.0).unwrap().mu(4.0).unwrap(), 4.0);
        let g = TimeScale::grid(vec![0.0, 1.0, 3.0, 6.0]).unwrap();
        assert_eq!(g.mu(1.0).unwrap(), 2.0);
        assert_eq!(TimeScale::Reals.mu(3.3).unwrap(), 0.0);
    }

    #[test]
    fn grids() {
        assert_eq!(TimeScale::integers().make_grid(4, None).unwrap(), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(TimeScale::uniform(0.5).unwrap().make_grid(3, None).unwrap(), vec![0.0, 0.5, 1.0]);
        let g = TimeScale::grid(vec![0.0, 1.0, 3.0, 6.0]).unwrap();
        assert_eq!(g.make_grid(3, None).unwrap(), vec![0.0, 1.0, 3.0]);
        assert!(matches!(g.make_grid(0, None), Err(Error::InvalidCount)));
        assert!(matches!(g.make_grid(5, None), Err(Error::HorizonTooSmall { .. })));
        let q = TimeScale::qscale(2.0, 1.0).unwrap();
        assert_eq!(q.make_grid(4, None).unwrap(), vec![1.0, 2.0, 4.0, 8.0]);
    }

    #[test]
    fn invalid_scales() {
        assert!(TimeScale::grid(vec![1.0, 2.0]).is_err());
        assert!(TimeScale::grid(vec![0.0, 2.0, 2.0]).is_err());
        assert!(TimeScale::uniform(0.0).is_err());
        assert!(TimeScale::qscale(1.0, 1.0).is_err());
        assert!("qscale:2".parse::<TimeScale>().is_err());
        assert!("foo".parse::<TimeScale>().is_err());
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["reals", "int", "uniform:0.5", "qscale:2:1", "grid:0,1,3,6"] {
            let ts: TimeScale = s.parse().unwrap();
            assert_eq!(ts.to_string(), s);
        }
    }

    #[test]
    fn derivative_examples() {
        let z = TimeScale::integers();
        let h2 = GridFunction::sample(&z, 10, None, |_, t| c(t * (t - 1.0) / 2.0)).unwrap();
        let d = delta_derivative(&h2).unwrap();
        assert_eq!(d.horizon(), 9);
        for (&t, v) in d.points().iter().zip(d.samples()) {
            assert_eq!(v.re, t);
        }
        let one = GridFunction::sample(&z, 5, None, |_, _| c(1.0)).unwrap();
        assert!(delta_derivative(&one).unwrap().samples().iter().all(|v| v.norm() == 0.0));
        let p3 = GridFunction::sample(&z, 8, None, |_, t| c(3f64.powf(t))).unwrap();
        for (&t, v) in delta_derivative(&p3).unwrap().points().iter().zip(delta_derivative(&p3).unwrap().samples()) {
            assert_eq!(v.re, 2.0 * 3f64.powf(t));
        }
        let single = GridFunction::sample(&z, 1, None, |_, _| c(1.0)).unwrap();
        assert!(matches!(delta_derivative(&single), Err(Error::HorizonTooSmall { .. })));
    }

    #[test]
    fn reals_derivative_is_second_order() {
        let f = GridFunction::sample(&TimeScale::Reals, 101, Some(0.01), |_, t| c(t * t)).unwrap();
        let d = delta_derivative(&f).unwrap();
        for (&t, v) in d.points().iter().zip(d.samples()) {
            assert!((v.re - 2.0 * t).abs() < 1e-10, "t={t} v={v}");
        }
    }

    #[test]
    fn integral_examples() {
        let z = TimeScale::integers();
        let one = GridFunction::sample(&z, 6, None, |_, _| c(1.0)).unwrap();
        assert_eq!(delta_integral(&one, 0.0, 5.0).unwrap().re, 5.0);
        let g = TimeScale::grid(vec![0.0, 1.0, 3.0, 6.0]).unwrap();
        let h1 = GridFunction::sample(&g, 4, None, |_, t| c(t)).unwrap();
        assert_eq!(delta_integral(&h1, 0.0, 3.0).unwrap().re, 2.0);
        let r = GridFunction::sample(&TimeScale::Reals, 2001, None, |_, _| c(1.0)).unwrap();
        assert!((delta_integral(&r, 0.0, 2.0).unwrap().re - 2.0).abs() < 1e-12);
        assert!(matches!(delta_integral(&one, 0.0, 2.5), Err(Error::PointNotOnGrid(_))));
    }

    #[test]
    fn jump_structure_invariant() {
        for ts in [
            TimeScale::integers(),
            TimeScale::uniform(0.25).unwrap(),
            TimeScale::qscale(1.5, 0.2).unwrap(),
            TimeScale::grid(vec![0.0, 0.3, 1.0, 1.1, 2.5, 4.0]).unwrap(),
        ] {
            let pts = ts.make_grid(6, None).unwrap();
            for j in 0..5 {
                assert_eq!(ts.sigma(pts[j]).unwrap(), pts[j + 1]);
                let m = ts.mu(pts[j]).unwrap();
                assert!(m > 0.0);
                assert!((m - (pts[j + 1] - pts[j])).abs() <= 1e-12 * pts[j + 1]);
            }
        }
    }

    #[test]
    fn fundamental_theorem_on_grids() {
        let ts = TimeScale::grid(vec![0.0, 0.5, 0.7, 2.0, 2.25, 3.0, 4.5]).unwrap();
        let f = GridFunction::sample(&ts, 7, None, |_, t| Complex64::new(t.sin(), t * t)).unwrap();
        let d = delta_derivative(&f).unwrap();
        for &t in d.points() {
            let lhs = delta_integral(&d, 0.0, t).unwrap();
            let rhs = f.at(t).unwrap() - f.at(0.0).unwrap();
            assert!((lhs - rhs).norm() < 1e-14);
        }
        let anti = f.antiderivative().unwrap();
        let back = delta_derivative(&anti).unwrap();
        for (a, b) in back.samples().iter().zip(f.samples()) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
