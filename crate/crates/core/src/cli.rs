//! Command-line front end. The binary only forwards to [`run`].
//!
//! Exit codes: 0 success, 1 verification or numerical failure, 2 usage or
//! validation error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::bounds::{
    bound_gpe_pe, bound_gpe_pe_equal, bound_gpe_pe_triangle, bound_pattern, bound_pe_pe, bound_pe_pe_equal_theta,
    bound_pg_pe, MeanMode, NormConvention,
};
use crate::distance::{
    dbw_proxy, dk_continuous, dtv_continuous, dtv_monte_carlo, dtv_quantile_grid, empirical_cdf_distance, w1_cdf,
    EmpiricalMetric, Model,
};
use crate::distributions::{GPEParams, PEParams, PGParams, SampleMode};
use crate::error::{Error, Result};
use crate::fit::{mle_with, Dataset, Family, FitOptions};
use crate::patterns::{pattern_experiment, pg_experiment, simulate_max_waiting, simulate_scaled_pg, PatternSimConfig, PatternSpec};
use crate::tables::reproduce_tables;
use crate::verify::{self, Suite, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "pestein", version, about = "PE / GPE / PG distributions, Stein bounds, distances and fitting")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Worker threads for sweeps and replications (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate or sample a distribution.
    Dist(DistArgs),
    /// Evaluate an explicit distance bound with its term breakdown.
    Bound(BoundArgs),
    /// Numerical distance between two laws, or between data and a law.
    Distance(DistanceArgs),
    /// Maximum-likelihood fit to a data file.
    Fit(FitArgs),
    /// Pattern-maximum or scaled-PG simulation.
    Simulate(SimulateArgs),
    /// Run the verification suites.
    Verify(VerifyArgs),
    /// Reproduce the Aarset / Alloy comparison tables and the bound audit.
    Tables(TablesArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DistFamily {
    Pe,
    Gpe,
    Pg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DistAction {
    Pdf,
    Cdf,
    Sf,
    Quantile,
    Sample,
    Mean,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Inverse,
    MaxConstruction,
}

impl From<ModeArg> for SampleMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Inverse => SampleMode::Inverse,
            ModeArg::MaxConstruction => SampleMode::MaxConstruction,
        }
    }
}

#[derive(Debug, Args)]
struct DistArgs {
    family: DistFamily,
    action: DistAction,
    #[arg(long)]
    theta: f64,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// PG success probability.
    #[arg(long)]
    p: Option<f64>,
    /// Evaluation points (repeatable).
    #[arg(long, allow_negative_numbers = true)]
    x: Vec<f64>,
    /// Quantile levels (repeatable).
    #[arg(long)]
    u: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    n_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Inverse)]
    mode: ModeArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BoundKind {
    PePe,
    PePeEqual,
    GpePe,
    GpePeEqual,
    Triangle,
    PgPe,
    Pattern,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConvArg {
    Raw,
    Dtv,
    Dbw,
    DbwLiteral,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MeanModeArg {
    Lemma,
    Numeric,
}

#[derive(Debug, Args)]
struct BoundArgs {
    kind: BoundKind,
    #[arg(long, value_enum, default_value_t = ConvArg::Dtv)]
    conv: ConvArg,
    #[arg(long, value_enum, default_value_t = MeanModeArg::Lemma)]
    mean_mode: MeanModeArg,
    /// `‖h̃‖` for the raw convention.
    #[arg(long)]
    h_tilde_norm: Option<f64>,
    /// `‖h'‖` for the raw convention.
    #[arg(long)]
    h_prime_norm: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    theta1: Option<f64>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    theta2: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    n: Option<f64>,
    #[arg(long, default_value_t = 2)]
    k: u32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Dtv,
    Dk,
    W1,
    DbwProxy,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DtvMethod {
    Quadrature,
    QuantileGrid,
    MonteCarlo,
}

#[derive(Debug, Args)]
struct DistanceArgs {
    metric: MetricArg,
    /// First law, `pe:θ,λ` or `gpe:θ,λ,β` (omit with --data).
    #[arg(long)]
    a: Option<Model>,
    /// Second (reference) law.
    #[arg(long)]
    b: Model,
    /// Sample file compared against `--b` (dk and w1 only).
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DtvMethod::Quadrature)]
    method: DtvMethod,
    #[arg(long, default_value_t = 100_000)]
    n_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct FitArgs {
    family: FitFamily,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = FitOptions::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = FitOptions::default().starts)]
    starts: usize,
    /// Log-likelihood tolerance of the simplex.
    #[arg(long, default_value_t = FitOptions::default().ftol)]
    tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FitFamily {
    Pe,
    Gpe,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SimKind {
    Pattern,
    Pg,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    kind: SimKind,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Trials scale; several values run a sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [100u64, 1000])]
    n: Vec<u64>,
    /// Pattern length when no `--pattern` is given (alternating 0,1,...).
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Pattern bits such as `01`; repeat to cycle patterns over systems.
    #[arg(long)]
    pattern: Vec<PatternSpec>,
    /// Replications.
    #[arg(long, default_value_t = 10_000)]
    n_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Inverse)]
    mode: ModeArg,
    /// Emit CSV-ready histogram bin counts of the draws at the first `n`.
    #[arg(long)]
    bins: Option<usize>,
    /// Emit the raw draws at the first `n` instead of the report.
    #[arg(long)]
    samples_only: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Reduced sweep.
    #[arg(long)]
    quick: bool,
    /// Suites to run (default: all).
    #[arg(long, value_parser = parse_suite)]
    suite: Vec<Suite>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, default_value_t = VerifyOptions::default().seed)]
    seed: u64,
    /// Keep passing cases in the report.
    #[arg(long)]
    all_cases: bool,
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    Suite::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("unknown suite `{s}`; expected one of {}", names.join(", "))
    })
}

#[derive(Debug, Args)]
struct TablesArgs {
    #[arg(long, default_value = "data")]
    data_dir: PathBuf,
}

/// Outcome of a command before rendering.
enum Output {
    Report(Value),
    Rows { header: Vec<String>, rows: Vec<Vec<String>> },
    Skipped(String),
    Failed(Value),
}

fn is_validation(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidParameter { .. }
            | Error::Domain(_)
            | Error::Ordering { .. }
            | Error::Hypothesis { .. }
            | Error::Dataset(_)
    )
}

fn need(name: &'static str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::Domain(format!("--{name} is required here")))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

fn cmd_dist(a: &DistArgs) -> Result<Output> {
    let family = match a.family {
        DistFamily::Pe => "pe",
        DistFamily::Gpe => "gpe",
        DistFamily::Pg => "pg",
    };
    let xs = || -> Result<&[f64]> {
        if a.x.is_empty() {
            Err(Error::Domain("--x is required here".into()))
        } else {
            Ok(&a.x)
        }
    };
    let us = || -> Result<&[f64]> {
        if a.u.is_empty() {
            Err(Error::Domain("--u is required here".into()))
        } else {
            Ok(&a.u)
        }
    };
    enum Law {
        Pe(PEParams),
        Gpe(GPEParams),
        Pg(PGParams),
    }
    let law = match a.family {
        DistFamily::Pe => Law::Pe(PEParams::new(a.theta, need("lambda", a.lambda)?)?),
        DistFamily::Gpe => Law::Gpe(GPEParams::new(a.theta, need("lambda", a.lambda)?, need("beta", a.beta)?)?),
        DistFamily::Pg => Law::Pg(match (a.p, a.lambda) {
            (Some(p), _) => PGParams::new(a.theta, p)?,
            (None, Some(_)) => return Err(Error::Domain("pg takes --p (success probability)".into())),
            (None, None) => return Err(Error::Domain("--p is required here".into())),
        }),
    };
    let (col, pts, vals): (&str, Vec<f64>, Vec<f64>) = match a.action {
        DistAction::Pdf | DistAction::Cdf | DistAction::Sf => {
            let pts = xs()?.to_vec();
            let mut vals = Vec::with_capacity(pts.len());
            for &x in &pts {
                vals.push(match (&law, a.action) {
                    (Law::Pe(p), DistAction::Pdf) => p.pdf(x),
                    (Law::Pe(p), DistAction::Cdf) => p.cdf(x),
                    (Law::Pe(p), _) => p.sf(x),
                    (Law::Gpe(g), DistAction::Pdf) => g.pdf(x),
                    (Law::Gpe(g), DistAction::Cdf) => g.cdf(x),
                    (Law::Gpe(g), _) => g.sf(x),
                    (Law::Pg(g), DistAction::Pdf) => {
                        if x < 1.0 || x.fract() != 0.0 {
                            return Err(Error::Domain(format!("pg pmf needs a positive integer, got {x}")));
                        }
                        g.pmf(x as u64)?
                    }
                    (Law::Pg(g), DistAction::Cdf) => g.cdf(x),
                    (Law::Pg(g), _) => g.sf(x),
                });
            }
            ("x", pts, vals)
        }
        DistAction::Quantile => {
            let pts = us()?.to_vec();
            let mut vals = Vec::with_capacity(pts.len());
            for &u in &pts {
                vals.push(match &law {
                    Law::Pe(p) => p.quantile(u)?,
                    Law::Gpe(g) => g.quantile(u)?,
                    Law::Pg(g) => g.quantile(u)? as f64,
                });
            }
            ("u", pts, vals)
        }
        DistAction::Mean => {
            let v = match &law {
                Law::Pe(p) => p.mean()?,
                Law::Gpe(g) => g.mean()?,
                Law::Pg(g) => g.mean(),
            };
            ("-", vec![f64::NAN], vec![v])
        }
        DistAction::Sample => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let mode = SampleMode::from(a.mode);
            let draws: Vec<f64> = (0..a.n_samples)
                .map(|_| match &law {
                    Law::Pe(p) => p.sample(&mut rng, mode),
                    Law::Gpe(g) => g.sample(&mut rng),
                    Law::Pg(g) => g.sample(&mut rng, mode) as f64,
                })
                .collect();
            return Ok(Output::Rows {
                header: vec!["value".into()],
                rows: draws.iter().map(|v| vec![fmt_num(*v)]).collect(),
            });
        }
    };
    let action = format!("{:?}", a.action).to_lowercase();
    if col == "-" {
        return Ok(Output::Rows {
            header: vec!["family".into(), "action".into(), "value".into()],
            rows: vec![vec![family.into(), action, fmt_num(vals[0])]],
        });
    }
    Ok(Output::Rows {
        header: vec!["family".into(), "action".into(), col.into(), "value".into()],
        rows: pts
            .iter()
            .zip(&vals)
            .map(|(p, v)| vec![family.into(), action.clone(), fmt_num(*p), fmt_num(*v)])
            .collect(),
    })
}

fn convention(a: &BoundArgs) -> Result<NormConvention> {
    Ok(match a.conv {
        ConvArg::Dtv => NormConvention::dtv(),
        ConvArg::Dbw => NormConvention::dbw(),
        ConvArg::DbwLiteral => NormConvention::dbw_literal(),
        ConvArg::Raw => NormConvention::raw(need("h-tilde-norm", a.h_tilde_norm)?, a.h_prime_norm),
    })
}

fn cmd_bound(a: &BoundArgs) -> Result<Output> {
    let conv = convention(a)?;
    let mode = match a.mean_mode {
        MeanModeArg::Lemma => MeanMode::Lemma,
        MeanModeArg::Numeric => MeanMode::Numeric,
    };
    let pe1 = || -> Result<PEParams> { PEParams::new(need("theta1", a.theta1)?, need("lambda1", a.lambda1)?) };
    let report = match a.kind {
        BoundKind::PePe => bound_pe_pe(
            &pe1()?,
            &PEParams::new(need("theta2", a.theta2)?, need("lambda2", a.lambda2)?)?,
            conv,
        )?,
        BoundKind::PePeEqual => {
            bound_pe_pe_equal_theta(need("theta", a.theta)?, need("lambda1", a.lambda1)?, need("lambda2", a.lambda2)?, conv)?
        }
        BoundKind::GpePe | BoundKind::Triangle => {
            let g = GPEParams::new(need("theta2", a.theta2)?, need("lambda2", a.lambda2)?, need("beta", a.beta)?)?;
            if matches!(a.kind, BoundKind::GpePe) {
                bound_gpe_pe(&pe1()?, &g, conv, mode)?
            } else {
                bound_gpe_pe_triangle(&pe1()?, &g, conv)?
            }
        }
        BoundKind::GpePeEqual => {
            bound_gpe_pe_equal(need("theta", a.theta)?, need("lambda", a.lambda)?, need("beta", a.beta)?, conv)?
        }
        BoundKind::PgPe => bound_pg_pe(need("theta", a.theta)?, need("lambda", a.lambda)?, need("n", a.n)?, conv)?,
        BoundKind::Pattern => bound_pattern(need("theta", a.theta)?, need("lambda", a.lambda)?, need("n", a.n)?, a.k, conv)?,
    };
    Ok(Output::Report(to_value(&report)))
}

fn cmd_distance(a: &DistanceArgs) -> Result<Output> {
    let b = &a.b;
    if let Some(path) = &a.data {
        let data = Dataset::from_csv(path)?;
        let metric = match a.metric {
            MetricArg::Dk => EmpiricalMetric::Dk,
            MetricArg::W1 => EmpiricalMetric::W1,
            _ => return Err(Error::Domain("with --data only dk and w1 are available".into())),
        };
        return Ok(Output::Report(to_value(&empirical_cdf_distance(data.values(), b, metric)?)));
    }
    let a_law = a
        .a
        .as_ref()
        .ok_or_else(|| Error::Domain("--a is required unless --data is given".into()))?;
    let est = match (a.metric, a.method) {
        (MetricArg::Dtv, DtvMethod::Quadrature) => dtv_continuous(a_law, b)?,
        (MetricArg::Dtv, DtvMethod::QuantileGrid) => dtv_quantile_grid(a_law, b)?,
        (MetricArg::Dtv, DtvMethod::MonteCarlo) => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            dtv_monte_carlo(a_law, b, a.n_samples, &mut rng)
        }
        (MetricArg::Dk, _) => dk_continuous(a_law, b),
        (MetricArg::W1, _) => w1_cdf(a_law, b)?,
        (MetricArg::DbwProxy, _) => dbw_proxy(a_law, b)?,
    };
    Ok(Output::Report(to_value(&est)))
}

fn cmd_fit(a: &FitArgs) -> Result<Output> {
    if !a.data.exists() {
        return Ok(Output::Skipped(format!("fixture {} not found", a.data.display())));
    }
    let data = Dataset::from_csv(&a.data)?;
    let family = match a.family {
        FitFamily::Pe => Family::Pe,
        FitFamily::Gpe => Family::Gpe,
    };
    let opts = FitOptions {
        seed: a.seed,
        starts: a.starts,
        ftol: a.tol,
        ..FitOptions::default()
    };
    Ok(Output::Report(to_value(&mle_with(family, &data, &opts)?)))
}

fn histogram(xs: &[f64], bins: usize) -> Output {
    let bins = bins.max(1);
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0u64; bins];
    for &x in xs {
        let i = (((x - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Output::Rows {
        header: vec!["lo".into(), "hi".into(), "count".into()],
        rows: counts
            .iter()
            .enumerate()
            .map(|(i, c)| {
                vec![
                    fmt_num(lo + i as f64 * width),
                    fmt_num(lo + (i + 1) as f64 * width),
                    c.to_string(),
                ]
            })
            .collect(),
    }
}

fn cmd_simulate(a: &SimulateArgs) -> Result<Output> {
    if a.n.is_empty() {
        return Err(Error::Domain("--n needs at least one value".into()));
    }
    let mode = SampleMode::from(a.mode);
    let patterns = if a.pattern.is_empty() {
        vec![PatternSpec::alternating(a.k)?]
    } else {
        a.pattern.clone()
    };
    let draws = |n: u64| -> Result<Vec<f64>> {
        match a.kind {
            SimKind::Pattern => {
                simulate_max_waiting(&PatternSimConfig::new(a.theta, a.lambda, n, patterns.clone(), a.n_samples, a.seed)?)
            }
            SimKind::Pg => simulate_scaled_pg(a.theta, a.lambda, n, a.n_samples, a.seed, mode),
        }
    };
    if a.samples_only || a.bins.is_some() {
        let xs = draws(a.n[0])?;
        if let Some(b) = a.bins {
            return Ok(histogram(&xs, b));
        }
        return Ok(Output::Rows {
            header: vec!["value".into()],
            rows: xs.iter().map(|v| vec![fmt_num(*v)]).collect(),
        });
    }
    let report = match a.kind {
        SimKind::Pattern => to_value(&pattern_experiment(
            &PatternSimConfig::new(a.theta, a.lambda, a.n[0], patterns, a.n_samples, a.seed)?,
            &a.n,
        )?),
        SimKind::Pg => to_value(&pg_experiment(a.theta, a.lambda, &a.n, a.n_samples, a.seed, mode)?),
    };
    Ok(Output::Report(report))
}

fn cmd_verify(a: &VerifyArgs) -> Result<Output> {
    if let Some(t) = a.theta {
        PEParams::new(t, a.lambda.unwrap_or(1.0))?;
    }
    if let Some(l) = a.lambda {
        PEParams::new(a.theta.unwrap_or(1.0), l)?;
    }
    let opts = VerifyOptions {
        quick: a.quick,
        theta: a.theta,
        lambda: a.lambda,
        n: a.n,
        seed: a.seed,
        keep_all: a.all_cases,
    };
    let suites: Vec<Suite> = if a.suite.is_empty() { Suite::ALL.to_vec() } else { a.suite.clone() };
    let report = verify::run(&suites, &opts);
    let v = to_value(&report);
    Ok(if report.passed { Output::Report(v) } else { Output::Failed(v) })
}

fn cmd_tables(a: &TablesArgs) -> Result<Output> {
    let report = reproduce_tables(&a.data_dir)?;
    if report.aarset.is_none() && report.alloy.is_none() {
        return Ok(Output::Skipped(format!(
            "no fixture data under {}; bound audit consistent = {}",
            a.data_dir.display(),
            report.audit.consistent
        )));
    }
    Ok(Output::Report(to_value(&report)))
}

/// Flattens a JSON value into `key,value` rows with dotted paths.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<Vec<String>>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        Value::String(s) => out.push(vec![prefix.into(), s.clone()]),
        other => out.push(vec![prefix.into(), other.to_string()]),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render(out: &mut dyn Write, format: Format, o: &Output) -> std::io::Result<()> {
    match (o, format) {
        (Output::Skipped(msg), _) => writeln!(out, "SKIPPED: {msg}"),
        (Output::Report(v) | Output::Failed(v), Format::Json) => {
            writeln!(out, "{}", serde_json::to_string_pretty(v).unwrap_or_default())
        }
        (Output::Report(v) | Output::Failed(v), Format::Csv) => {
            let mut rows = Vec::new();
            flatten("", v, &mut rows);
            writeln!(out, "key,value")?;
            for r in rows {
                writeln!(out, "{},{}", csv_field(&r[0]), csv_field(&r[1]))?;
            }
            Ok(())
        }
        (Output::Rows { header, rows }, Format::Csv) => {
            writeln!(out, "{}", header.join(","))?;
            for r in rows {
                let line: Vec<String> = r.iter().map(|s| csv_field(s)).collect();
                writeln!(out, "{}", line.join(","))?;
            }
            Ok(())
        }
        (Output::Rows { header, rows }, Format::Json) => {
            let objs: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let m: serde_json::Map<String, Value> = header
                        .iter()
                        .zip(r)
                        .map(|(h, s)| {
                            let v = s
                                .parse::<f64>()
                                .ok()
                                .and_then(|f| serde_json::Number::from_f64(f).map(Value::Number))
                                .unwrap_or_else(|| Value::String(s.clone()));
                            (h.clone(), v)
                        })
                        .collect();
                    Value::Object(m)
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&objs).unwrap_or_default())
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Dist(a) => cmd_dist(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Distance(a) => cmd_distance(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Tables(a) => cmd_tables(a),
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// its output to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Error::Domain(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(o) => {
            let failed = matches!(o, Output::Failed(_));
            if render(out, cli.format, &o).is_err() {
                return 1;
            }
            i32::from(failed)
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if is_validation(&e) {
                2
            } else {
                1
            }
        }
    }
}
