//! Generalized polynomials `h_k`, the time-scale exponential `e_z`, circle
//! minus and regressivity certificates.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gamma::factorial;
use crate::quadrature::gauss_legendre;
use crate::timescale::TimeScale;

/// `|1 + mu z|` must exceed this for `z` to count as regressive.
pub const REGRESSIVITY_TOL: f64 = 1e-12;

/// A constant certified regressive over the first `verified_horizon` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressiveConstant {
    pub value: Complex64,
    pub verified_horizon: usize,
}

fn check_order(ts: &TimeScale, t: f64, t0: f64) -> Result<Option<(usize, usize)>> {
    if ts.is_classical() {
        if t < t0 {
            return Err(Error::InvalidTimeScale(format!("need t >= t0, got t={t}, t0={t0}")));
        }
        return Ok(None);
    }
    let i0 = ts.index_of(t0)?;
    let it = ts.index_of(t)?;
    if it < i0 {
        return Err(Error::InvalidTimeScale(format!("need t >= t0, got t={t}, t0={t0}")));
    }
    Ok(Some((i0, it)))
}

/// Generalized polynomial `h_k(t, t0)`. Closed forms on the real line and
/// on uniform grids; the delta-integral recursion elsewhere.
pub fn hk(ts: &TimeScale, k: u32, t: f64, t0: f64) -> Result<f64> {
    let Some((i0, it)) = check_order(ts, t, t0)? else {
        return Ok((t - t0).powi(k as i32) / factorial(k));
    };
    match ts {
        TimeScale::Uniform { step } => {
            let m = (it - i0) as f64;
            let mut acc = 1.0;
            for i in 0..k {
                acc *= step * (m - i as f64) / (i as f64 + 1.0);
            }
            Ok(acc)
        }
        _ => hk_dp(ts, k, i0, it),
    }
}

/// `h_k(t, t0)` from the recursion `h_{k+1}(t) = ∫_{t0}^t h_k Δτ` with no
/// closed forms. On the real line the nested integrals are evaluated with
/// Gauss–Legendre rules that are exact for the polynomial integrands.
pub fn hk_recursive(ts: &TimeScale, k: u32, t: f64, t0: f64) -> Result<f64> {
    match check_order(ts, t, t0)? {
        Some((i0, it)) => hk_dp(ts, k, i0, it),
        None => Ok(hk_nested_quadrature(k, t, t0)),
    }
}

fn hk_nested_quadrature(k: u32, t: f64, t0: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    // h_{k-1} has degree k-1, exact with ceil(k/2) nodes
    let n = (k as usize).div_ceil(2).max(1);
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (t - t0);
    let mid = 0.5 * (t + t0);
    x.iter().zip(&w).map(|(&x, &w)| w * half * hk_nested_quadrature(k - 1, mid + half * x, t0)).sum()
}

/// Dynamic programming over the grid prefix, `O(k (it - i0))`.
fn hk_dp(ts: &TimeScale, k: u32, i0: usize, it: usize) -> Result<f64> {
    let len = it - i0 + 1;
    let mut row = vec![1.0f64; len];
    let mus = (i0..it).map(|j| ts.mu_at(j)).collect::<Result<Vec<_>>>()?;
    for _ in 0..k {
        let mut next = vec![0.0f64; len];
        for j in 1..len {
            next[j] = next[j - 1] + row[j - 1] * mus[j - 1];
        }
        row = next;
    }
    Ok(row[len - 1])
}

/// Table `h_k(t_j, origin)` for `k <= k_max` and grid indices `j < n`.
pub fn hk_table(ts: &TimeScale, k_max: u32, n: usize) -> Result<Vec<Vec<f64>>> {
    let points = ts.make_grid(n, None)?;
    if ts.is_classical() {
        return Ok((0..=k_max)
            .map(|k| points.iter().map(|&t| t.powi(k as i32) / factorial(k)).collect())
            .collect());
    }
    let mus = (0..n.saturating_sub(1)).map(|j| ts.mu_at(j)).collect::<Result<Vec<_>>>()?;
    let mut table = vec![vec![1.0f64; n]];
    for _ in 0..k_max {
        let prev = table.last().expect("nonempty");
        let mut next = vec![0.0f64; n];
        for j in 1..n {
            next[j] = next[j - 1] + prev[j - 1] * mus[j - 1];
        }
        table.push(next);
    }
    Ok(table)
}

/// Time-scale exponential `e_z(t, t0)`.
pub fn exp_ts(ts: &TimeScale, z: Complex64, t: f64, t0: f64) -> Result<Complex64> {
    let Some((i0, it)) = check_order(ts, t, t0)? else {
        return Ok((z * (t - t0)).exp());
    };
    let mut acc = Complex64::new(1.0, 0.0);
    for j in i0..it {
        let factor = 1.0 + z * ts.mu_at(j)?;
        if factor.norm() <= REGRESSIVITY_TOL {
            return Err(Error::NotRegressive { value: z, index: j });
        }
        acc *= factor;
    }
    Ok(acc)
}

/// Circle minus `⊖z = -z / (1 + mu z)`.
pub fn ominus(mu: f64, z: Complex64) -> Result<Complex64> {
    let d = 1.0 + z * mu;
    if d.norm() <= REGRESSIVITY_TOL {
        return Err(Error::NotRegressive { value: z, index: 0 });
    }
    Ok(-z / d)
}

/// Certifies `|1 + mu(t_j) lambda| > REGRESSIVITY_TOL` for all `j < n`.
/// The last point of an explicit grid has no graininess and is skipped.
pub fn is_regressive(ts: &TimeScale, lambda: Complex64, n: usize) -> Result<RegressiveConstant> {
    if n == 0 {
        return Err(Error::InvalidCount);
    }
    if !ts.is_classical() {
        let limit = ts.capacity().map_or(n, |cap| n.min(cap.saturating_sub(1)));
        for j in 0..limit {
            if (1.0 + lambda * ts.mu_at(j)?).norm() <= REGRESSIVITY_TOL {
                return Err(Error::NotRegressive { value: lambda, index: j });
            }
        }
    }
    Ok(RegressiveConstant { value: lambda, verified_horizon: n })
}
