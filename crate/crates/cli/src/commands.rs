//! Subcommand definitions and dispatch.
//!
//! Flags left unset fall back to the config file (same key as the long flag
//! name) and then to the documented defaults; the fully resolved
//! configuration is echoed into every JSON report (and printed for CSV
//! outputs), so no run depends on hidden state.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use nls_core::certify::{prove_periodic, CertifyParams, Verdict};
use nls_core::dynamics::{classify_monochromatic, estimate_astar, Regime};
use nls_core::evaluate::{emit_grid, integrate_galerkin, GridSpec};
use nls_core::json::{
    from_json_f64, to_json_f64, to_json_interval, to_json_rational, SequenceJson,
};
use nls_core::scalar::rational_from_str;
use nls_core::{
    solve_quadrature, solve_spacetime, Complex64, ComplexInterval, FrequencyVector, ModeSequence,
    MultiIndex, ProblemConfig, RationalComplex, Scalar,
};

use crate::config::ConfigMap;
use crate::output::{emit_json, grid_csv, trajectory_csv, write_text};

#[derive(Parser, Debug)]
#[command(
    name = "nls",
    version,
    about = "Fourier-coefficient expansions, rigorous periodic-orbit certification, and blow-up \
             diagnostics for i u_t = \u{394}u + u^p restricted to non-negative modes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Flat key=value config file; explicit flags override its entries
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (fallback: NLS_THREADS env var, then all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact space-time coefficients c_{n,j} for positive-mode data
    Coeffs(CoeffsArgs),
    /// Mode trajectories by quadrature (general data, d = 1)
    Quadrature(QuadratureArgs),
    /// Radii-polynomial certification of a periodic orbit (p = 2, d = 1)
    Verify(VerifyArgs),
    /// Classify monochromatic data against the proved thresholds
    Classify(ClassifyArgs),
    /// Critical-amplitude regression from large-shell row sums
    EstimateAstar(EstimateAstarArgs),
    /// Sample u(t, x) from stored coefficients onto a CSV grid
    Evaluate(EvaluateArgs),
    /// RK4 integration of the truncated Galerkin system (oracle)
    Integrate(IntegrateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScalarChoice {
    F64,
    Rational,
    Interval,
}

impl std::str::FromStr for ScalarChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "f64" => Ok(Self::F64),
            "rational" => Ok(Self::Rational),
            "interval" => Ok(Self::Interval),
            other => Err(format!("unknown scalar {other:?}")),
        }
    }
}

#[derive(Args, Debug)]
pub struct CoeffsArgs {
    /// Nonlinearity power p >= 2 [default: 2]
    #[arg(long)]
    pub p: Option<u32>,
    /// Spatial dimension [default: 1]
    #[arg(long)]
    pub d: Option<usize>,
    /// Frequency components, comma separated [default: 1]
    #[arg(long)]
    pub omega: Option<String>,
    /// Initial data: inline "n:re,im;..." (d = 1) or a JSON file path
    /// [default: 1:1,0]
    #[arg(long)]
    pub phi: Option<String>,
    /// Truncation order N [default: 5]
    #[arg(long = "N")]
    pub n_order: Option<u64>,
    /// Norm weight exponent s [default: 0]
    #[arg(long)]
    pub s: Option<f64>,
    /// Scalar arithmetic: f64, rational, or interval [default: f64]
    #[arg(long)]
    pub scalar: Option<ScalarChoice>,
    /// Output file [default: coeffs.json]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct QuadratureArgs {
    /// Nonlinearity power p >= 2 [default: 2]
    #[arg(long)]
    pub p: Option<u32>,
    /// Frequency (d = 1) [default: 1]
    #[arg(long)]
    pub omega: Option<f64>,
    /// Initial data: inline "n:re,im;..." or a JSON file path; the zero mode
    /// may be present [default: 1:1,0]
    #[arg(long)]
    pub phi: Option<String>,
    /// Highest mode to solve [default: 8]
    #[arg(long = "N")]
    pub n_order: Option<u64>,
    /// Final time of the uniform grid [default: 6.283185307179586]
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Number of grid steps [default: 2000]
    #[arg(long)]
    pub steps: Option<usize>,
    /// Output CSV (t, n, re, im) [default: quadrature.csv]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Amplitude A: real "3" or complex "re,im" [default: 3]
    #[arg(long = "A")]
    pub amplitude: Option<String>,
    /// Frequency omega > 0 [default: 1]
    #[arg(long)]
    pub omega: Option<f64>,
    /// Truncation order N [default: 110]
    #[arg(long = "N")]
    pub n_order: Option<u64>,
    /// Ball radius r; when absent the midpoint of the quadratic's root range
    /// is tried
    #[arg(long)]
    pub r: Option<f64>,
    /// Output report [default: report.json]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// Amplitude A (modulus is classified): real or "re,im" [default: 1]
    #[arg(long = "A")]
    pub amplitude: Option<String>,
    /// Frequency omega > 0 [default: 1]
    #[arg(long)]
    pub omega: Option<f64>,
    /// Attempt certification at this truncation order when A sits between
    /// the proved thresholds
    #[arg(long = "escalate-N")]
    pub escalate_n: Option<u64>,
    /// Output JSON [default: - (stdout)]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EstimateAstarArgs {
    /// First shell of the regression window [default: 100]
    #[arg(long = "n-min")]
    pub n_min: Option<u64>,
    /// Last shell of the regression window [default: 300]
    #[arg(long = "n-max")]
    pub n_max: Option<u64>,
    /// Shells to compute (at least n-max) [default: n-max]
    #[arg(long = "N")]
    pub n_order: Option<u64>,
    /// Use the FFT convolution path (recommended above ~150 shells)
    #[arg(long)]
    pub fft: bool,
    /// Output JSON [default: - (stdout)]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Coefficient file produced by `coeffs` [default: coeffs.json]
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
    /// Time range start [default: 0]
    #[arg(long)]
    pub t0: Option<f64>,
    /// Time range end [default: 6.283185307179586]
    #[arg(long)]
    pub t1: Option<f64>,
    /// Time samples [default: 64]
    #[arg(long)]
    pub nt: Option<usize>,
    /// Space range start [default: 0]
    #[arg(long)]
    pub x0: Option<f64>,
    /// Space range end [default: 6.283185307179586]
    #[arg(long)]
    pub x1: Option<f64>,
    /// Space samples [default: 64]
    #[arg(long)]
    pub nx: Option<usize>,
    /// Output CSV (t, x, re, im, abs) [default: grid.csv]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IntegrateArgs {
    /// Initial data: inline "n:re,im;..." or a JSON file path [default: 1:1,0]
    #[arg(long)]
    pub phi: Option<String>,
    /// Frequency (d = 1) [default: 1]
    #[arg(long)]
    pub omega: Option<f64>,
    /// Nonlinearity power p >= 2 [default: 2]
    #[arg(long)]
    pub p: Option<u32>,
    /// Galerkin truncation order [default: 20]
    #[arg(long = "N")]
    pub n_order: Option<u64>,
    /// Final time [default: 6.283185307179586]
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Time step [default: 0.001]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Output CSV (t, n, re, im) [default: traj.csv]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const TWO_PI: f64 = std::f64::consts::TAU;

fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    if let Some((re, im)) = s.split_once(',') {
        Ok(Complex64::new(
            re.trim().parse().context("bad real part")?,
            im.trim().parse().context("bad imaginary part")?,
        ))
    } else {
        Ok(Complex64::new(s.parse().context("bad amplitude")?, 0.0))
    }
}

fn parse_omega_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|w| w.trim().parse::<f64>().context("bad omega component"))
        .collect()
}

/// Initial data as raw component strings, so exact scalars can parse the
/// decimal text without a double-precision detour.
enum PhiSpec {
    Inline(Vec<(u64, String, String)>),
    File(Vec<(Vec<i64>, f64, f64)>),
}

#[derive(serde::Deserialize)]
struct PhiFileEntry {
    n: Vec<i64>,
    #[serde(default)]
    re: f64,
    #[serde(default)]
    im: f64,
}

fn parse_phi_spec(raw: &str) -> Result<PhiSpec> {
    if Path::new(raw).exists() {
        let text = std::fs::read_to_string(raw)?;
        let entries: Vec<PhiFileEntry> =
            serde_json::from_str(&text).with_context(|| format!("bad phi JSON in {raw}"))?;
        return Ok(PhiSpec::File(
            entries.into_iter().map(|e| (e.n, e.re, e.im)).collect(),
        ));
    }
    let mut out = Vec::new();
    for chunk in raw.split(';') {
        let chunk = chunk.trim();
        if chunk.is_empty() {
            continue;
        }
        let (mode, value) = chunk
            .split_once(':')
            .ok_or_else(|| anyhow!("phi entry {chunk:?} is not n:re,im"))?;
        let n: u64 = mode.trim().parse().context("bad mode number in phi")?;
        let (re, im) = match value.split_once(',') {
            Some((re, im)) => (re.trim().to_string(), im.trim().to_string()),
            None => (value.trim().to_string(), "0".to_string()),
        };
        out.push((n, re, im));
    }
    if out.is_empty() {
        bail!("phi {raw:?} has no entries");
    }
    Ok(PhiSpec::Inline(out))
}

fn phi_from_spec<S: Scalar>(
    spec: &PhiSpec,
    d: usize,
    weight_s: f64,
    from_strs: impl Fn(&str, &str) -> Result<S>,
) -> Result<ModeSequence<S>> {
    let mut phi = ModeSequence::new(d, weight_s);
    match spec {
        PhiSpec::Inline(entries) => {
            if d != 1 {
                bail!("inline phi is for d = 1; pass a JSON file for d = {d}");
            }
            for (n, re, im) in entries {
                phi.insert(MultiIndex::scalar(*n), from_strs(re, im)?)?;
            }
        }
        PhiSpec::File(entries) => {
            for (n, re, im) in entries {
                phi.insert(
                    MultiIndex::new(n.clone())?,
                    from_strs(&re.to_string(), &im.to_string())?,
                )?;
            }
        }
    }
    Ok(phi)
}

pub fn run_coeffs(cli: &Cli, args: &CoeffsArgs, threads: usize) -> Result<u8> {
    let cfg = ConfigMap::load(cli.config.as_deref())?;
    let p = cfg.resolve(args.p.as_ref(), "p", 2u32)?;
    let d = cfg.resolve(args.d.as_ref(), "d", 1usize)?;
    let omega_raw = cfg.resolve(args.omega.as_ref(), "omega", "1".to_string())?;
    let phi_raw = cfg.resolve(args.phi.as_ref(), "phi", "1:1,0".to_string())?;
    let n_order = cfg.resolve(args.n_order.as_ref(), "N", 5u64)?;
    let weight_s = cfg.resolve(args.s.as_ref(), "s", 0.0f64)?;
    let scalar = cfg.resolve(args.scalar.as_ref(), "scalar", ScalarChoice::F64)?;
    let out = cfg.resolve(args.out.as_ref(), "out", PathBuf::from("coeffs.json"))?;

    let omega_components = parse_omega_list(&omega_raw)?;
    if omega_components.len() != d {
        bail!(
            "omega has {} components but d = {d}",
            omega_components.len()
        );
    }
    let omega = FrequencyVector::new(omega_components.clone())
        .map_err(|e| anyhow!("bad omega: {e}"))?;
    let phi_spec = parse_phi_spec(&phi_raw)?;

    let config_echo = json!({
        "command": "coeffs",
        "p": p,
        "d": d,
        "omega": omega_components,
        "phi": phi_raw,
        "N": n_order,
        "s": weight_s,
        "scalar": scalar_name(scalar),
        "threads": threads,
        "out": out.display().to_string(),
    });

    let sequence = match scalar {
        ScalarChoice::F64 => {
            let phi = phi_from_spec::<Complex64>(&phi_spec, d, weight_s, |re, im| {
                Ok(Complex64::new(
                    re.parse().context("bad phi value")?,
                    im.parse().context("bad phi value")?,
                ))
            })?;
            let problem = ProblemConfig::new(p, omega, phi)?;
            to_json_f64(&solve_spacetime(&problem, n_order)?)
        }
        ScalarChoice::Rational => {
            let phi = phi_from_spec::<RationalComplex>(&phi_spec, d, weight_s, |re, im| {
                Ok(RationalComplex::new(
                    rational_from_str(re)?,
                    rational_from_str(im)?,
                ))
            })?;
            let problem = ProblemConfig::new(p, omega, phi)?;
            to_json_rational(&solve_spacetime(&problem, n_order)?)
        }
        ScalarChoice::Interval => {
            let phi = phi_from_spec::<ComplexInterval>(&phi_spec, d, weight_s, |re, im| {
                Ok(ComplexInterval::point(
                    re.parse().context("bad phi value")?,
                    im.parse().context("bad phi value")?,
                ))
            })?;
            let problem = ProblemConfig::new(p, omega, phi)?;
            to_json_interval(&solve_spacetime(&problem, n_order)?)
        }
    };

    #[derive(serde::Serialize)]
    struct CoeffsOutput {
        config: serde_json::Value,
        #[serde(flatten)]
        sequence: SequenceJson,
    }
    emit_json(
        &CoeffsOutput {
            config: config_echo,
            sequence,
        },
        &out,
    )?;
    Ok(0)
}

pub fn run_quadrature(cli: &Cli, args: &QuadratureArgs, threads: usize) -> Result<u8> {
    let cfg = ConfigMap::load(cli.config.as_deref())?;
    let p = cfg.resolve(args.p.as_ref(), "p", 2u32)?;
    let omega = cfg.resolve(args.omega.as_ref(), "omega", 1.0f64)?;
    let phi_raw = cfg.resolve(args.phi.as_ref(), "phi", "1:1,0".to_string())?;
    let n_order = cfg.resolve(args.n_order.as_ref(), "N", 8u64)?;
    let t_end = cfg.resolve(args.t_end.as_ref(), "t-end", TWO_PI)?;
    let steps = cfg.resolve(args.steps.as_ref(), "steps", 2000usize)?;
    let out = cfg.resolve(args.out.as_ref(), "out", PathBuf::from("quadrature.csv"))?;

    let phi_spec = parse_phi_spec(&phi_raw)?;
    let phi = phi_from_spec::<Complex64>(&phi_spec, 1, 0.0, |re, im| {
        Ok(Complex64::new(
            re.parse().context("bad phi value")?,
            im.parse().context("bad phi value")?,
        ))
    })?;
    let problem = ProblemConfig::new(p, FrequencyVector::scalar(omega)?, phi)?;
    let traj = solve_quadrature(&problem, n_order, t_end, steps)?;

    write_text(&trajectory_csv(&traj), &out)?;
    print_config(&json!({
        "command": "quadrature",
        "p": p,
        "omega": [omega],
        "phi": phi_raw,
        "N": n_order,
        "t-end": t_end,
        "steps": steps,
        "threads": threads,
        "out": out.display().to_string(),
    }))?;
    Ok(0)
}

pub fn run_verify(cli: &Cli, args: &VerifyArgs, threads: usize) -> Result<u8> {
    let cfg = ConfigMap::load(cli.config.as_deref())?;
    let a_raw = cfg.resolve(args.amplitude.as_ref(), "A", "3".to_string())?;
    let omega = cfg.resolve(args.omega.as_ref(), "omega", 1.0f64)?;
    let n_order = cfg.resolve(args.n_order.as_ref(), "N", 110u64)?;
    let radius = cfg.resolve_opt(args.r.as_ref(), "r")?;
    let out = cfg.resolve(args.out.as_ref(), "out", PathBuf::from("report.json"))?;

    let amplitude = parse_complex(&a_raw)?;
    let report = prove_periodic(&CertifyParams {
        amplitude,
        omega,
        n_trunc: n_order,
        radius,
    })?;

    #[derive(serde::Serialize)]
    struct VerifyOutput {
        config: serde_json::Value,
        #[serde(flatten)]
        report: nls_core::certify::RadiiReport,
    }
    let verdict = report.verdict;
    emit_json(
        &VerifyOutput {
            config: json!({
                "command": "verify",
                "A": [amplitude.re, amplitude.im],
                "omega": omega,
                "N": n_order,
                "r": radius,
                "scalar": "interval",
                "threads": threads,
                "out": out.display().to_string(),
            }),
            report,
        },
        &out,
    )?;
    Ok(match verdict {
        Verdict::Certified => 0,
        Verdict::Inconclusive => 2,
    })
}

pub fn run_classify(cli: &Cli, args: &ClassifyArgs, threads: usize) -> Result<u8> {
    let cfg = ConfigMap::load(cli.config.as_deref())?;
    let a_raw = cfg.resolve(args.amplitude.as_ref(), "A", "1".to_string())?;
    let omega = cfg.resolve(args.omega.as_ref(), "omega", 1.0f64)?;
    let escalate = cfg.resolve_opt(args.escalate_n.as_ref(), "escalate-N")?;
    let out = cfg.resolve(args.out.as_ref(), "out", PathBuf::from("-"))?;

    let amplitude = parse_complex(&a_raw)?.norm();
    let result = classify_monochromatic(amplitude, omega, escalate)?;

    #[derive(serde::Serialize)]
    struct ClassifyOutput {
        config: serde_json::Value,
        #[serde(flatten)]
        result: nls_core::dynamics::ClassificationResult,
    }
    let regime = result.regime;
    emit_json(
        &ClassifyOutput {
            config: json!({
                "command": "classify",
                "A": amplitude,
                "omega": omega,
                "escalate-N": escalate,
                "threads": threads,
                "out": out.display().to_string(),
            }),
            result,
        },
        &out,
    )?;
    Ok(if regime == Regime::Undetermined { 2 } else { 0 })
}

pub fn run_estimate_astar(cli: &Cli, args: &EstimateAstarArgs, threads: usize) -> Result<u8> {
    let cfg = ConfigMap::load(cli.config.as_deref())?;
    let n_min = cfg.resolve(args.n_min.as_ref(), "n-min", 100u64)?;
    let n_max = cfg.resolve(args.n_max.as_ref(), "n-max", 300u64)?;
    let n_order = cfg.resolve(args.n_order.as_ref(), "N", n_max)?;
    let fft = args.fft || cfg.resolve(None::<&bool>, "fft", false)?;
    let out = cfg.resolve(args.out.as_ref(), "out", PathBuf::from("-"))?;

    let estimate = estimate_astar(n_min, n_max, n_order, fft)?;

    #[derive(serde::Serialize)]
    struct AstarOutput {
        config: serde_json::Value,
        #[serde(flatten)]
        estimate: nls_core::dynamics::AstarEstimate,
    }
    emit_json(
        &AstarOutput {
            config: json!({
                "command": "estimate-astar",
                "n-min": n_min,
                "n-max": n_max,
                "N": n_order,
                "fft": fft,
                "threads": threads,
                "out": out.display().to_string(),
            }),
            estimate,
        },
        &out,
    )?;
    Ok(0)
}

pub fn run_evaluate(cli: &Cli, args: &EvaluateArgs, threads: usize) -> Result<u8> {
    let cfg = ConfigMap::load(cli.config.as_deref())?;
    let coeffs = cfg.resolve(args.coeffs.as_ref(), "coeffs", PathBuf::from("coeffs.json"))?;
    let t0 = cfg.resolve(args.t0.as_ref(), "t0", 0.0f64)?;
    let t1 = cfg.resolve(args.t1.as_ref(), "t1", TWO_PI)?;
    let nt = cfg.resolve(args.nt.as_ref(), "nt", 64usize)?;
    let x0 = cfg.resolve(args.x0.as_ref(), "x0", 0.0f64)?;
    let x1 = cfg.resolve(args.x1.as_ref(), "x1", TWO_PI)?;
    let nx = cfg.resolve(args.nx.as_ref(), "nx", 64usize)?;
    let out = cfg.resolve(args.out.as_ref(), "out", PathBuf::from("grid.csv"))?;

    let text = std::fs::read_to_string(&coeffs)
        .with_context(|| format!("cannot read {}", coeffs.display()))?;
    let sequence = from_json_f64(&SequenceJson::parse(&text)?)?;
    let rows = emit_grid(
        &sequence,
        &GridSpec {
            t_min: t0,
            t_max: t1,
            nt,
            x_min: x0,
            x_max: x1,
            nx,
        },
    )?;

    write_text(&grid_csv(&rows), &out)?;
    print_config(&json!({
        "command": "evaluate",
        "coeffs": coeffs.display().to_string(),
        "t0": t0, "t1": t1, "nt": nt,
        "x0": x0, "x1": x1, "nx": nx,
        "threads": threads,
        "out": out.display().to_string(),
    }))?;
    Ok(0)
}

pub fn run_integrate(cli: &Cli, args: &IntegrateArgs, threads: usize) -> Result<u8> {
    let cfg = ConfigMap::load(cli.config.as_deref())?;
    let phi_raw = cfg.resolve(args.phi.as_ref(), "phi", "1:1,0".to_string())?;
    let omega = cfg.resolve(args.omega.as_ref(), "omega", 1.0f64)?;
    let p = cfg.resolve(args.p.as_ref(), "p", 2u32)?;
    let n_order = cfg.resolve(args.n_order.as_ref(), "N", 20u64)?;
    let t_end = cfg.resolve(args.t_end.as_ref(), "t-end", TWO_PI)?;
    let dt = cfg.resolve(args.dt.as_ref(), "dt", 1e-3f64)?;
    let out = cfg.resolve(args.out.as_ref(), "out", PathBuf::from("traj.csv"))?;

    let phi_spec = parse_phi_spec(&phi_raw)?;
    let phi = phi_from_spec::<Complex64>(&phi_spec, 1, 0.0, |re, im| {
        Ok(Complex64::new(
            re.parse().context("bad phi value")?,
            im.parse().context("bad phi value")?,
        ))
    })?;
    if !(omega > 0.0) {
        bail!("omega must be positive");
    }
    let traj = integrate_galerkin(&phi, omega * omega, p, n_order, t_end, dt)?;

    write_text(&trajectory_csv(&traj), &out)?;
    print_config(&json!({
        "command": "integrate",
        "phi": phi_raw,
        "omega": [omega],
        "p": p,
        "N": n_order,
        "t-end": t_end,
        "dt": dt,
        "threads": threads,
        "out": out.display().to_string(),
    }))?;
    Ok(0)
}

fn scalar_name(s: ScalarChoice) -> &'static str {
    match s {
        ScalarChoice::F64 => "f64",
        ScalarChoice::Rational => "rational",
        ScalarChoice::Interval => "interval",
    }
}

/// CSV commands print their resolved configuration to stdout as JSON.
fn print_config(config: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(config)?);
    Ok(())
}
