//! Test-function families and their textual specs:
//! `hk:<k>`, `exp:<λ>`, `const:<m>`, `poly:<c0,c1,...>` (meaning `Σ c_k h_k`)
//! and `samples:<path.csv>`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gamma::factorial;
use crate::special::{exp_ts, hk_table};
use crate::timescale::{GridFunction, TimeScale};
use crate::zdomain::ZExpr;

/// A function with a known transform.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// Generalized polynomial `h_k(·, 0)`.
    Hk(u32),
    /// Time-scale exponential `e_λ(·, 0)`.
    Exp(Complex64),
    Const(Complex64),
    /// `Σ c_k h_k(·, 0)`.
    Poly(Vec<Complex64>),
}

impl TestFunction {
    /// Its generalized Laplace transform.
    pub fn transform(&self) -> ZExpr {
        let one = Complex64::new(1.0, 0.0);
        match self {
            TestFunction::Hk(k) => ZExpr::monomial(one, -(*k as f64) - 1.0),
            TestFunction::Exp(l) => ZExpr::pole(one, *l, 1),
            TestFunction::Const(m) => ZExpr::monomial(*m, -1.0),
            TestFunction::Poly(c) => c
                .iter()
                .enumerate()
                .fold(ZExpr::zero(), |acc, (k, &ck)| acc.add(&ZExpr::monomial(ck, -(k as f64) - 1.0))),
        }
    }

    /// Samples on the first `n` points (mesh step `mesh` on the real line).
    pub fn sample(&self, ts: &TimeScale, n: usize, mesh: Option<f64>) -> Result<GridFunction> {
        let points = ts.make_grid(n, mesh)?;
        let k_max = match self {
            TestFunction::Hk(k) => *k,
            TestFunction::Poly(c) => c.len().saturating_sub(1) as u32,
            _ => 0,
        };
        let table = if ts.is_classical() {
            (0..=k_max).map(|k| points.iter().map(|&t| t.powi(k as i32) / factorial(k)).collect()).collect()
        } else {
            hk_table(ts, k_max, n)?
        };
        let samples = match self {
            TestFunction::Hk(k) => table[*k as usize].iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            TestFunction::Exp(l) => {
                let origin = points[0];
                points.iter().map(|&t| exp_ts(ts, *l, t, origin)).collect::<Result<Vec<_>>>()?
            }
            TestFunction::Const(m) => vec![*m; n],
            TestFunction::Poly(c) => {
                (0..n).map(|j| c.iter().enumerate().map(|(k, ck)| ck * table[k][j]).sum()).collect()
            }
        };
        GridFunction::from_samples(ts, samples, mesh)
    }

    /// `f(0)`.
    pub fn initial_value(&self) -> Complex64 {
        match self {
            TestFunction::Hk(0) => Complex64::new(1.0, 0.0),
            TestFunction::Hk(_) => Complex64::new(0.0, 0.0),
            TestFunction::Exp(_) => Complex64::new(1.0, 0.0),
            TestFunction::Const(m) => *m,
            TestFunction::Poly(c) => c.first().copied().unwrap_or_default(),
        }
    }
}

fn fmt_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("({}{:+}i)", c.re, c.im)
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Hk(k) => write!(f, "hk:{k}"),
            TestFunction::Exp(l) => write!(f, "exp:{}", fmt_complex(*l)),
            TestFunction::Const(m) => write!(f, "const:{}", fmt_complex(*m)),
            TestFunction::Poly(c) => {
                let parts: Vec<String> = c.iter().map(|&v| fmt_complex(v)).collect();
                write!(f, "poly:{}", parts.join(","))
            }
        }
    }
}

/// Parses a real or complex constant such as `2`, `-0.5`, `i`, `1-2i` or
/// `(1-2i)`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let bad = || Error::InvalidFunctionSpec(format!("'{text}' is not a number"));
    let mut s = text.trim();
    if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        s = inner.trim();
    }
    let real = |x: &str| -> Result<f64> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse::<f64>().map_err(|_| bad()),
        }
    };
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split before the sign that starts the imaginary part (not an exponent sign)
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse::<f64>().map_err(|_| bad())?, real(&body[k..])?),
        None => (0.0, real(body)?),
    };
    if s.is_empty() || !(re.is_finite() && im.is_finite()) {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidFunctionSpec(format!("expected <family>:<argument>, got '{s}'")))?;
        match kind.trim() {
            "hk" => arg
                .trim()
                .parse::<u32>()
                .map(TestFunction::Hk)
                .map_err(|_| Error::InvalidFunctionSpec(format!("hk index must be a nonnegative integer, got '{arg}'"))),
            "exp" => Ok(TestFunction::Exp(parse_complex(arg)?)),
            "const" => Ok(TestFunction::Const(parse_complex(arg)?)),
            "poly" => {
                let c = arg.split(',').map(parse_complex).collect::<Result<Vec<_>>>()?;
                Ok(TestFunction::Poly(c))
            }
            other => Err(Error::InvalidFunctionSpec(format!("unknown function family '{other}'"))),
        }
    }
}

/// A function given either by family or by a samples file.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Family(TestFunction),
    Samples(PathBuf),
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some(("samples", path)) if !path.is_empty() => Ok(FunctionSpec::Samples(PathBuf::from(path))),
            _ => s.parse().map(FunctionSpec::Family),
        }
    }
}

/// Reads samples from a CSV file with a header and columns `t,re[,im]`.
/// The `t` column must list the first grid points of `ts` in order.
pub fn load_samples(path: &Path, ts: &TimeScale, mesh: Option<f64>) -> Result<GridFunction> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let field = |k: usize| -> Result<f64> {
            let raw = record.get(k).unwrap_or("0").trim();
            raw.parse::<f64>()
                .map_err(|_| Error::InvalidFunctionSpec(format!("row {}: '{raw}' is not a number", i + 1)))
        };
        if record.len() < 2 {
            return Err(Error::InvalidFunctionSpec(format!("row {}: expected t,re[,im]", i + 1)));
        }
        times.push(field(0)?);
        samples.push(Complex64::new(field(1)?, if record.len() > 2 { field(2)? } else { 0.0 }));
    }
    if samples.is_empty() {
        return Err(Error::InvalidFunctionSpec(format!("{} contains no samples", path.display())));
    }
    let g = GridFunction::from_samples(ts, samples, mesh)?;
    for (t, p) in times.iter().zip(g.points()) {
        if (t - p).abs() > 1e-9 * p.abs().max(1.0) {
            return Err(Error::PointNotOnGrid(*t));
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs_round_trip() {
        for s in ["hk:3", "exp:2", "exp:(1-0.5i)", "const:7", "poly:1,0,2"] {
            let f: TestFunction = s.parse().unwrap();
            assert_eq!(f.to_string().parse::<TestFunction>().unwrap(), f, "{s}");
        }
        assert!(matches!("hk:-1".parse::<TestFunction>(), Err(Error::InvalidFunctionSpec(_))));
        assert!(matches!("sin:1".parse::<TestFunction>(), Err(Error::InvalidFunctionSpec(_))));
        for (text, want) in [("1+i", (1.0, 1.0)), ("(2.5e-1-3i)", (0.25, -3.0)), ("-i", (0.0, -1.0)), ("-1e-3", (-1e-3, 0.0))] {
            assert_eq!(parse_complex(text).unwrap(), Complex64::new(want.0, want.1), "{text}");
        }
        for text in ["", "i+", "1+2", "z", "()"] {
            assert!(parse_complex(text).is_err(), "{text}");
        }
        assert_eq!("samples:a.csv".parse::<FunctionSpec>().unwrap(), FunctionSpec::Samples("a.csv".into()));
    }

    #[test]
    fn samples_match_families() {
        let ts = TimeScale::integers();
        let f = TestFunction::Exp(Complex64::new(2.0, 0.0)).sample(&ts, 5, None).unwrap();
        assert_eq!(f.samples()[4], Complex64::new(81.0, 0.0));
        let f = TestFunction::Poly(vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)]).sample(&ts, 4, None).unwrap();
        assert_eq!(f.samples()[3], Complex64::new(7.0, 0.0));
        let f = TestFunction::Hk(2).sample(&TimeScale::Reals, 3, Some(0.5)).unwrap();
        assert_eq!(f.samples()[2], Complex64::new(0.5, 0.0));
    }

    #[test]
    fn csv_samples() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        std::fs::write(&path, "t,re,im\n0,1,0\n1,3,0\n2,9,0.5\n").unwrap();
        let g = load_samples(&path, &TimeScale::integers(), None).unwrap();
        assert_eq!(g.samples()[2], Complex64::new(9.0, 0.5));
        std::fs::write(&path, "t,re\n0,1\n0.5,3\n").unwrap();
        assert!(matches!(load_samples(&path, &TimeScale::integers(), None), Err(Error::PointNotOnGrid(_))));
    }
}
