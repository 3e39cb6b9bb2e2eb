use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use tsfrac::error::{Error, Result};
use tsfrac::fracops::{
    convolve_kernel, frac_derivative, frac_integral, FracInput, FracOrder, FracOutput, ShiftKernel,
};
use tsfrac::funcspec::{load_samples, parse_complex, FunctionSpec, TestFunction};
use tsfrac::gamma::factorial;
use tsfrac::inversion::{invert, InversionPolicy};
use tsfrac::output::{csv_string, num, ComplexValue, SeriesJson};
use tsfrac::special::{exp_ts, hk};
use tsfrac::timescale::{GridFunction, TimeScale, DEFAULT_MESH};
use tsfrac::verify::{run_suite, Suite};
use tsfrac::zdomain::{forward_transform, forward_transform_auto, forward_transform_reals, ZExpr};

/// Fractional calculus on time scales through the generalized Laplace transform.
#[derive(Debug, Parser)]
#[command(name = "tsfrac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Time scale: reals, int, uniform:<h>, qscale:<q>:<t0>, grid:<p0,p1,...>
    #[arg(long, global = true, default_value = "int", value_parser = parse_ts)]
    ts: TimeScale,
    /// Number of grid points [default: 64 on discrete scales]
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// Last time to report; sets the horizon to the points in [origin, tmax] [default on reals: 1]
    #[arg(long, global = true, allow_hyphen_values = true)]
    tmax: Option<f64>,
    /// Mesh step on the real line
    #[arg(long, global = true, default_value_t = DEFAULT_MESH)]
    mesh: f64,
    /// Output file, or `csv` / `json` to pick the format for stdout
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Permit the (approximate, labelled) collocation inverse
    #[arg(long, global = true)]
    allow_collocation: bool,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Tail-bound target for numeric forward transforms
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Table,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generalized polynomial h_k(t, t0); a table over the horizon without --t
    Hk {
        #[arg(long)]
        k: u32,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        /// Defaults to the origin of the time scale
        #[arg(long, allow_hyphen_values = true)]
        t0: Option<f64>,
    },
    /// Time-scale exponential e_λ(t, t0); a table over the horizon without --t
    Exp {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_value)]
        lambda: Complex64,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        t0: Option<f64>,
    },
    /// Numeric forward transform of a function, next to its known transform
    Transform {
        /// hk:<k>, exp:<λ>, const:<m>, poly:<c0,c1,...> or samples:<path.csv>
        #[arg(long, value_parser = parse_fspec)]
        f: FunctionSpec,
        /// Evaluation point; repeatable
        #[arg(long, required = true, allow_hyphen_values = true, value_parser = parse_value)]
        z: Vec<Complex64>,
    },
    /// Inverse transform of an expression in z
    Invert {
        #[arg(long, value_parser = parse_zexpr)]
        zexpr: ZExpr,
    },
    /// Fractional integral I^α f
    Fracint {
        #[command(flatten)]
        input: OperandArgs,
        #[arg(long)]
        alpha: f64,
    },
    /// Fractional derivative f^(α)
    Fracderiv {
        #[command(flatten)]
        input: OperandArgs,
        #[arg(long)]
        alpha: f64,
    },
    /// Convolution with a shift kernel, (f * g)(t) = ∫_0^t f(τ) g(t, σ(τ)) Δτ
    Convolve {
        #[arg(long, value_parser = parse_fspec)]
        f: FunctionSpec,
        /// hk:<k> or exp:<λ>
        #[arg(long, value_parser = parse_kernel)]
        kernel: ShiftKernel,
    },
    /// Run verification suites
    Verify {
        #[arg(long, default_value = "all", value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        report: ReportFormat,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct OperandArgs {
    #[arg(long, value_parser = parse_fspec)]
    f: Option<FunctionSpec>,
    #[arg(long, value_parser = parse_zexpr)]
    zexpr: Option<ZExpr>,
}

fn parse_ts(s: &str) -> std::result::Result<TimeScale, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_value(s: &str) -> std::result::Result<Complex64, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

fn parse_fspec(s: &str) -> std::result::Result<FunctionSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_zexpr(s: &str) -> std::result::Result<ZExpr, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_kernel(s: &str) -> std::result::Result<ShiftKernel, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Where results go.
struct Sink {
    path: Option<PathBuf>,
    format: Format,
}

impl Sink {
    fn new(c: &Common) -> Self {
        match c.out.as_deref() {
            Some("csv") => Sink { path: None, format: Format::Csv },
            Some("json") => Sink { path: None, format: Format::Json },
            Some(p) => {
                let path = PathBuf::from(p);
                let by_ext = match path.extension().and_then(|e| e.to_str()) {
                    Some("json") => Format::Json,
                    _ => Format::Csv,
                };
                Sink { format: c.format.unwrap_or(by_ext), path: Some(path) }
            }
            None => Sink { path: None, format: c.format.unwrap_or(Format::Csv) },
        }
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.path {
            Some(p) => Ok(fs::write(p, text)?),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

impl Common {
    fn mesh(&self) -> Option<f64> {
        Some(self.mesh)
    }

    fn policy(&self) -> InversionPolicy {
        InversionPolicy { allow_collocation: self.allow_collocation, mesh: self.mesh(), ..InversionPolicy::default() }
    }

    /// Number of grid points from `--horizon`, `--tmax` or the defaults.
    fn horizon(&self) -> Result<usize> {
        if let Some(n) = self.horizon {
            if n == 0 {
                return Err(Error::InvalidCount);
            }
            return Ok(n);
        }
        let tmax = match (self.tmax, &self.ts) {
            (Some(t), _) => t,
            (None, TimeScale::Reals) => 1.0,
            (None, _) => return Ok(64),
        };
        let origin = self.ts.origin();
        if tmax < origin {
            return Err(Error::InvalidTimeScale(format!("--tmax {tmax} lies before the origin {origin}")));
        }
        let slack = 1e-9 * tmax.abs().max(1.0);
        if let TimeScale::Reals = self.ts {
            return Ok(((tmax + slack) / self.mesh).floor() as usize + 1);
        }
        let mut n = 0;
        while self.ts.capacity().is_none_or(|cap| n < cap) && self.ts.point(n)? <= tmax + slack {
            n += 1;
        }
        Ok(n.max(1))
    }
}

/// Collocation residuals above this are flagged on stderr.
const RESIDUAL_WARNING: f64 = 1e-6;

fn series(sink: &Sink, json: SeriesJson, values: &GridFunction) -> Result<()> {
    if let Some(r) = json.residual.filter(|r| !(*r <= RESIDUAL_WARNING)) {
        eprintln!("warning: collocation residual {r:e} exceeds {RESIDUAL_WARNING:e}; values are not trustworthy");
    }
    match sink.format {
        Format::Csv => {
            let residual = json.residual.map_or("none".to_string(), |r| format!("{r:e}"));
            eprintln!("method={} residual={residual}", json.method);
            sink.emit(&csv_string(values))
        }
        Format::Json => sink.emit(&(json.to_json() + "\n")),
    }
}

/// Samples of a function spec on the first `n` points.
fn sampled(spec: &FunctionSpec, c: &Common, n: usize) -> Result<GridFunction> {
    match spec {
        FunctionSpec::Family(f) => f.sample(&c.ts, n, c.mesh()),
        FunctionSpec::Samples(p) => {
            let g = load_samples(p, &c.ts, c.mesh())?;
            if g.horizon() < n {
                return Err(Error::HorizonTooSmall { needed: n, have: g.horizon() });
            }
            Ok(g)
        }
    }
}

/// Pointwise value of a family on the real line.
fn reals_value(f: &TestFunction, t: f64) -> Complex64 {
    let hk = |k: usize| t.powi(k as i32) / factorial(k as u32);
    match f {
        TestFunction::Hk(k) => Complex64::new(hk(*k as usize), 0.0),
        TestFunction::Exp(l) => (l * t).exp(),
        TestFunction::Const(m) => *m,
        TestFunction::Poly(c) => c.iter().enumerate().map(|(k, ck)| ck * hk(k)).sum(),
    }
}

#[derive(Serialize)]
struct TransformRow {
    z: ComplexValue,
    value: ComplexValue,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<ComplexValue>,
    truncation_horizon: usize,
    tail_bound: f64,
    reliable: bool,
}

fn transform(c: &Common, sink: &Sink, f: &FunctionSpec, zs: &[Complex64]) -> Result<()> {
    let mut rows = Vec::new();
    for &z in zs {
        let ((v, d), exact) = match f {
            FunctionSpec::Family(fam) => {
                let exact = fam.transform().eval(z).ok();
                let r = if c.ts.is_classical() {
                    forward_transform_reals(|t| reals_value(fam, t), z, c.tmax.unwrap_or(60.0))?
                } else {
                    let ts = c.ts.clone();
                    let origin = ts.origin();
                    forward_transform_auto(
                        &c.ts,
                        |_, t| match fam {
                            TestFunction::Hk(k) => Complex64::new(hk(&ts, *k, t, origin).unwrap_or(f64::NAN), 0.0),
                            TestFunction::Exp(l) => exp_ts(&ts, *l, t, origin).unwrap_or(Complex64::new(f64::NAN, 0.0)),
                            TestFunction::Const(m) => *m,
                            TestFunction::Poly(cs) => cs
                                .iter()
                                .enumerate()
                                .map(|(k, ck)| ck * hk(&ts, k as u32, t, origin).unwrap_or(f64::NAN))
                                .sum(),
                        },
                        z,
                        c.tol,
                    )?
                };
                (r, exact)
            }
            FunctionSpec::Samples(p) => {
                if c.ts.is_classical() {
                    return Err(Error::InvalidTimeScale("sampled transforms need a discrete time scale".into()));
                }
                (forward_transform(&load_samples(p, &c.ts, c.mesh())?, z)?, None)
            }
        };
        rows.push(TransformRow {
            z: z.into(),
            value: v.into(),
            exact: exact.map(Into::into),
            truncation_horizon: d.truncation_horizon,
            tail_bound: d.tail_bound,
            reliable: d.is_reliable(),
        });
    }
    match sink.format {
        Format::Json => sink.emit(&(serde_json::to_string_pretty(&rows).expect("serializable") + "\n")),
        Format::Csv => {
            let mut s = String::from("z_re,z_im,re,im,exact_re,exact_im,horizon,tail_bound\n");
            for r in &rows {
                let (er, ei) = r.exact.as_ref().map_or((String::new(), String::new()), |e| (num(e.re), num(e.im)));
                s.push_str(&format!(
                    "{},{},{},{},{er},{ei},{},{}\n",
                    num(r.z.re),
                    num(r.z.im),
                    num(r.value.re),
                    num(r.value.im),
                    r.truncation_horizon,
                    num(r.tail_bound)
                ));
                if !r.reliable {
                    eprintln!("warning: tail at z = {}{:+}i is not geometrically dominated", r.z.re, r.z.im);
                }
            }
            sink.emit(&s)
        }
    }
}

fn fractional(c: &Common, sink: &Sink, input: &OperandArgs, alpha: f64, derivative: bool) -> Result<()> {
    let order = FracOrder::new(alpha)?;
    let n = c.horizon()?;
    let operand = match (&input.f, &input.zexpr) {
        (Some(FunctionSpec::Family(f)), _) => FracInput::Symbolic(f.transform()),
        (Some(FunctionSpec::Samples(p)), _) => {
            let g = load_samples(p, &c.ts, c.mesh())?;
            FracInput::Sampled(g)
        }
        (None, Some(z)) => FracInput::Symbolic(z.clone()),
        (None, None) => unreachable!("clap requires one operand"),
    };
    let out: FracOutput = if derivative {
        frac_derivative(&operand, order, &c.ts, n, &c.policy())?
    } else {
        frac_integral(&operand, order, &c.ts, n, &c.policy())?
    };
    let mut json = SeriesJson::from_inverse(&out.result);
    json.transform = out.transform.as_ref().map(ToString::to_string);
    json.initial_values = out.initial_values.as_ref().map(|iv| iv.values().iter().map(|&v| v.into()).collect());
    series(sink, json, &out.result.values)
}

fn scalar(sink: &Sink, v: Complex64) -> Result<()> {
    match sink.format {
        Format::Json => sink.emit(&(serde_json::to_string(&ComplexValue::from(v)).expect("serializable") + "\n")),
        Format::Csv if v.im == 0.0 => sink.emit(&format!("{}\n", v.re + 0.0)),
        Format::Csv => sink.emit(&format!("{}{:+}i\n", v.re + 0.0, v.im)),
    }
}

fn table<F: Fn(f64) -> Result<Complex64>>(c: &Common, sink: &Sink, what: &str, f: F) -> Result<()> {
    let n = c.horizon()?;
    let points = c.ts.make_grid(n, c.mesh())?;
    let samples = points.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
    let g = GridFunction::from_samples(&c.ts, samples, c.mesh())?;
    series(sink, SeriesJson::plain(&g, what), &g)
}

enum Outcome {
    Done,
    VerificationFailed,
}

fn run(cli: Cli) -> Result<Outcome> {
    let c = &cli.common;
    let sink = Sink::new(c);
    match &cli.command {
        Command::Hk { k, t, t0 } => {
            let t0 = t0.unwrap_or(c.ts.origin());
            match t {
                Some(t) => scalar(&sink, Complex64::new(hk(&c.ts, *k, *t, t0)?, 0.0))?,
                None => table(c, &sink, "direct", |t| Ok(Complex64::new(hk(&c.ts, *k, t, t0)?, 0.0)))?,
            }
        }
        Command::Exp { lambda, t, t0 } => {
            let t0 = t0.unwrap_or(c.ts.origin());
            match t {
                Some(t) => scalar(&sink, exp_ts(&c.ts, *lambda, *t, t0)?)?,
                None => table(c, &sink, "direct", |t| exp_ts(&c.ts, *lambda, t, t0))?,
            }
        }
        Command::Transform { f, z } => transform(c, &sink, f, z)?,
        Command::Invert { zexpr } => {
            let r = invert(zexpr, &c.ts, c.horizon()?, &c.policy())?;
            let mut json = SeriesJson::from_inverse(&r);
            json.transform = Some(zexpr.to_string());
            series(&sink, json, &r.values)?;
        }
        Command::Fracint { input, alpha } => fractional(c, &sink, input, *alpha, false)?,
        Command::Fracderiv { input, alpha } => fractional(c, &sink, input, *alpha, true)?,
        Command::Convolve { f, kernel } => {
            let g = sampled(f, c, c.horizon()?)?;
            let r = convolve_kernel(&g, *kernel)?;
            series(&sink, SeriesJson::plain(&r, "direct"), &r)?;
        }
        Command::Verify { suite, report } => {
            let r = run_suite(*suite, c.seed);
            let text = match report {
                ReportFormat::Json => r.to_json() + "\n",
                ReportFormat::Table => r.to_table(),
            };
            sink.emit(&text)?;
            eprintln!("suite {} (seed {}) finished in {:.2?}", r.suite, r.seed, r.wall_time);
            if !r.passed() {
                return Ok(Outcome::VerificationFailed);
            }
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::NeedsCollocation(_) = e {
                eprintln!("hint: pass --allow-collocation to use the approximate collocation inverse");
            }
            ExitCode::from(1)
        }
    }
}
