//! CSV and JSON emission of grid functions.
//!
//! CSV has the header `t,re,im`, LF line endings and every number printed
//! with 17 significant digits so that values round-trip exactly.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::inversion::InverseResult;
use crate::timescale::GridFunction;

/// `{:.16e}`: 17 significant digits; negative zero is printed as zero.
pub fn num(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

pub fn write_csv<W: Write>(out: &mut W, f: &GridFunction) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["t", "re", "im"])?;
    for (t, v) in f.points().iter().zip(f.samples()) {
        w.write_record([num(*t), num(v.re), num(v.im)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(f: &GridFunction) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, f).expect("writing to memory");
    String::from_utf8(buf).expect("ASCII output")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(c: Complex64) -> Self {
        ComplexValue { re: c.re + 0.0, im: c.im + 0.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PoleJson {
    pub location: ComplexValue,
    pub order: u32,
    pub regressive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offending_index: Option<usize>,
}

/// JSON document for a computed grid function.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesJson {
    pub timescale: String,
    pub method: String,
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transform: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_values: Option<Vec<ComplexValue>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub poles: Vec<PoleJson>,
    pub values: Vec<Sample>,
}

impl SeriesJson {
    pub fn plain(f: &GridFunction, method: &str) -> Self {
        SeriesJson {
            timescale: f.timescale().to_string(),
            method: method.to_string(),
            residual: None,
            transform: None,
            initial_values: None,
            poles: Vec::new(),
            values: samples(f),
        }
    }

    pub fn from_inverse(r: &InverseResult) -> Self {
        SeriesJson {
            residual: r.residual,
            poles: r
                .pole_report
                .iter()
                .map(|p| PoleJson {
                    location: p.location.into(),
                    order: p.order,
                    regressive: p.regressive,
                    offending_index: p.offending_index,
                })
                .collect(),
            ..SeriesJson::plain(&r.values, &r.method.to_string())
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("series is serializable")
    }
}

fn samples(f: &GridFunction) -> Vec<Sample> {
    f.points()
        .iter()
        .zip(f.samples())
        .map(|(&t, v)| Sample { t: t + 0.0, re: v.re + 0.0, im: v.im + 0.0 })
        .collect()
}
