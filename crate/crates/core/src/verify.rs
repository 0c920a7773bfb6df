//! Verification harness: sweeps that check the Stein solution bounds, the
//! PG second-difference inequality, bound domination and the samplers.
//!
//! Each suite returns a [`SuiteReport`] listing every case; a case carries
//! the measured quantity and the limit it must stay within.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    appendix_a_decay_slope, bound_gpe_pe, bound_gpe_pe_equal, bound_pe_pe, verify_inequality_appendix_a, MeanMode,
    NormConvention,
};
use crate::distance::dtv_continuous;
use crate::distributions::{GPEParams, PEParams, PGParams, SampleMode, ZTPParams};
use crate::error::{Error, Result};
use crate::numeric::linspace;
use crate::patterns::replication_rng;
use crate::stats::{chi_square_gof, ks_one_sample};
use crate::stein::{
    check_mean_zero, default_grid, solve_stein_pe, verify_lemma21, verify_lemma33, StandardizationPair, SteinSolver,
    TestFunction,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Stein,
    Lemma21,
    Lemma33,
    AppendixA,
    Domination,
    Samplers,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Stein,
        Suite::Lemma21,
        Suite::Lemma33,
        Suite::AppendixA,
        Suite::Domination,
        Suite::Samplers,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Stein => "stein",
            Suite::Lemma21 => "lemma21",
            Suite::Lemma33 => "lemma33",
            Suite::AppendixA => "appendix-a",
            Suite::Domination => "domination",
            Suite::Samplers => "samplers",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseResult {
    pub case: String,
    pub check: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

impl CaseResult {
    fn at_most(case: impl Into<String>, check: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            case: case.into(),
            check: check.into(),
            passed: value <= limit,
            value,
            limit,
        }
    }

    fn at_least(case: impl Into<String>, check: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            case: case.into(),
            check: check.into(),
            passed: value >= limit,
            value,
            limit,
        }
    }

    fn failed(case: impl Into<String>, check: impl Into<String>, err: &Error) -> Self {
        Self {
            case: case.into(),
            check: format!("{}: {err}", check.into()),
            passed: false,
            value: f64::NAN,
            limit: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub failures: Vec<CaseResult>,
    pub elapsed_s: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub results: Vec<CaseResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub quick: bool,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub quick: bool,
    /// Restricts parameter sweeps to one `(θ, λ)` point.
    pub theta: Option<f64>,
    pub lambda: Option<f64>,
    pub n: Option<u64>,
    pub seed: u64,
    /// Keep passing cases in the report as well as failures.
    pub keep_all: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            quick: false,
            theta: None,
            lambda: None,
            n: None,
            seed: 2024,
            keep_all: false,
        }
    }
}

impl VerifyOptions {
    fn grid_size(&self) -> usize {
        if self.quick {
            120
        } else {
            300
        }
    }

    fn pe_points(&self) -> Result<Vec<(f64, f64)>> {
        if self.theta.is_some() || self.lambda.is_some() {
            let p = PEParams::new(self.theta.unwrap_or(1.0), self.lambda.unwrap_or(1.0))?;
            return Ok(vec![(p.theta(), p.lambda())]);
        }
        let thetas: &[f64] = if self.quick { &[0.5, 2.0, 10.0] } else { &[0.1, 0.5, 1.0, 2.0, 5.0, 10.0] };
        let lambdas: &[f64] = if self.quick { &[1.0] } else { &[0.5, 2.0] };
        Ok(thetas.iter().flat_map(|&t| lambdas.iter().map(move |&l| (t, l))).collect())
    }

    fn pg_points(&self) -> Result<Vec<(f64, f64, u64)>> {
        let ns: Vec<u64> = match self.n {
            Some(n) => vec![n],
            None if self.quick => vec![50],
            None => vec![20, 200],
        };
        let pts = if self.theta.is_some() || self.lambda.is_some() {
            self.pe_points()?
        } else if self.quick {
            vec![(1.0, 1.0), (5.0, 0.5)]
        } else {
            vec![(0.5, 0.5), (1.0, 1.0), (2.0, 1.0), (5.0, 0.5), (10.0, 1.0), (1.0, 2.0)]
        };
        Ok(pts.iter().flat_map(|&(t, l)| ns.iter().map(move |&n| (t, l, n))).collect())
    }
}

fn finish(suite: Suite, start: Instant, results: Vec<CaseResult>, keep_all: bool) -> SuiteReport {
    let failures: Vec<CaseResult> = results.iter().filter(|c| !c.passed).cloned().collect();
    SuiteReport {
        suite: suite.name(),
        passed: failures.is_empty() && !results.is_empty(),
        cases: results.len(),
        failures,
        elapsed_s: start.elapsed().as_secs_f64(),
        results: if keep_all { results } else { Vec::new() },
    }
}

/// Test functions for the Lemma sweeps at a given law: an indicator at the
/// median, `e^{-x}`, `1/(1+x)` and `sin x`.
fn lemma_functions(p: &PEParams) -> Result<Vec<TestFunction>> {
    let med = p.quantile(0.5)?;
    Ok(vec![
        TestFunction::indicator(med),
        TestFunction::exp_decay(),
        TestFunction::reciprocal(),
        TestFunction::sine(),
    ])
}

/// The ten `(law, h)` pairs for the Stein characterization check.
pub fn stein_pairs() -> Result<Vec<(PEParams, TestFunction)>> {
    let mk = |t, l| PEParams::new(t, l);
    Ok(vec![
        (mk(1.0, 1.0)?, TestFunction::exp_decay()),
        (mk(1.0, 1.0)?, TestFunction::indicator(1.0)),
        (mk(0.5, 2.0)?, TestFunction::reciprocal()),
        (mk(2.0, 0.5)?, TestFunction::sine()),
        (mk(5.0, 1.0)?, TestFunction::exp_decay()),
        (mk(10.0, 1.0)?, TestFunction::reciprocal()),
        (mk(0.2, 1.0)?, TestFunction::ramp(0.5)),
        (mk(3.0, 0.3)?, TestFunction::indicator(4.0)),
        (mk(1.5, 1.5)?, TestFunction::sine()),
        (mk(20.0, 2.0)?, TestFunction::exp_decay()),
    ])
}

fn run_stein(opts: &VerifyOptions) -> Result<Vec<CaseResult>> {
    let pairs = stein_pairs()?;
    let n = opts.grid_size();
    let out: Vec<Vec<CaseResult>> = pairs
        .par_iter()
        .map(|(p, h)| {
            let case = format!("PE({}, {}) h={}", p.theta(), p.lambda(), h.name());
            let run = || -> Result<Vec<CaseResult>> {
                let grid = default_grid(p, n)?;
                let sol = solve_stein_pe(p, h, &grid)?;
                Ok(vec![
                    CaseResult::at_most(&case, "|E[Tf]|", check_mean_zero(&sol)?.abs(), 1e-6),
                    CaseResult::at_most(&case, "residual", sol.residual_max()?, 1e-7),
                ])
            };
            run().unwrap_or_else(|e| vec![CaseResult::failed(&case, "solve", &e)])
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

fn run_lemma21(opts: &VerifyOptions) -> Result<Vec<CaseResult>> {
    let n = opts.grid_size();
    let mut jobs = Vec::new();
    for (t, l) in opts.pe_points()? {
        let p = PEParams::new(t, l)?;
        for h in lemma_functions(&p)? {
            jobs.push((p, h));
        }
    }
    let out: Vec<Vec<CaseResult>> = jobs
        .par_iter()
        .map(|(p, h)| {
            let case = format!("PE({}, {}) h={}", p.theta(), p.lambda(), h.name());
            let run = || -> Result<Vec<CaseResult>> {
                let sol = solve_stein_pe(p, h, &default_grid(p, n)?)?;
                Ok(verify_lemma21(&sol)
                    .checks
                    .iter()
                    .map(|c| CaseResult::at_most(&case, c.name, c.violations as f64, 0.0))
                    .collect())
            };
            run().unwrap_or_else(|e| vec![CaseResult::failed(&case, "solve", &e)])
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

fn run_lemma33(opts: &VerifyOptions) -> Result<Vec<CaseResult>> {
    let grid_n = opts.grid_size();
    let mut jobs = Vec::new();
    for (t, l, n) in opts.pg_points()? {
        let p = PEParams::new(t, l)?;
        for h in lemma_functions(&p)? {
            jobs.push((p, n, h));
        }
    }
    let out: Vec<Vec<CaseResult>> = jobs
        .par_iter()
        .map(|(p, n, h)| {
            let case = format!("PE({}, {}) n={n} h={}", p.theta(), p.lambda(), h.name());
            let run = || -> Result<Vec<CaseResult>> {
                let sp = StandardizationPair::new(p.theta(), p.lambda(), *n)?;
                let sol = solve_stein_pe(p, h, &default_grid(p, grid_n)?)?;
                Ok(verify_lemma33(&sp, &sol)?
                    .checks
                    .iter()
                    .map(|c| CaseResult::at_most(&case, c.name, c.violations as f64, 0.0))
                    .collect())
            };
            run().unwrap_or_else(|e| vec![CaseResult::failed(&case, "solve", &e)])
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

/// `(θ, λ, n)` combinations for the second-difference inequality.
pub fn appendix_a_points(quick: bool) -> Vec<(f64, f64, f64)> {
    let base: &[(f64, f64)] = if quick {
        &[(1.0, 1.0), (5.0, 0.5), (0.5, 2.0)]
    } else {
        &[(0.5, 0.5), (1.0, 1.0), (2.0, 1.0), (5.0, 0.5), (10.0, 1.0), (1.0, 2.0)]
    };
    let ns: &[f64] = if quick { &[100.0] } else { &[50.0, 1000.0] };
    base.iter().flat_map(|&(t, l)| ns.iter().map(move |&n| (t, l, n))).collect()
}

/// Grid of `m` points spanning the `1e-6` to `1 - 1e-9` quantiles.
pub fn appendix_a_grid(theta: f64, lambda: f64, m: usize) -> Result<Vec<f64>> {
    let p = PEParams::new(theta, lambda)?;
    Ok(linspace(p.quantile(1e-6)?, p.quantile(1.0 - 1e-9)?, m))
}

fn run_appendix_a(opts: &VerifyOptions) -> Result<Vec<CaseResult>> {
    let m = if opts.quick { 200 } else { 1000 };
    let pts = match (opts.theta, opts.lambda, opts.n) {
        (None, None, None) => appendix_a_points(opts.quick),
        (t, l, n) => vec![(t.unwrap_or(1.0), l.unwrap_or(1.0), n.unwrap_or(100) as f64)],
    };
    let mut out = Vec::new();
    for (t, l, n) in pts {
        let case = format!("θ={t} λ={l} n={n}");
        let mut bad = 0usize;
        let mut worst = 0.0f64;
        for z in appendix_a_grid(t, l, m)? {
            let c = verify_inequality_appendix_a(t, l, n, z)?;
            if !c.holds {
                bad += 1;
            }
            if c.rhs > 0.0 {
                worst = worst.max(c.lhs / c.rhs);
            }
        }
        out.push(CaseResult::at_most(&case, "violations", bad as f64, 0.0));
        out.push(CaseResult::at_most(&case, "max lhs/rhs", worst, 1.0 + 1e-9));
        let med = PEParams::new(t, l)?.quantile(0.5)?;
        let slope = appendix_a_decay_slope(t, l, med, &[1e3, 2e3, 5e3, 1e4, 2e4, 5e4, 1e5]);
        out.push(CaseResult::at_most(&case, "|slope + 3| at median", (slope + 3.0).abs(), 0.2));
    }
    Ok(out)
}

/// Random parameter pairs for the domination sweep; the returned pairs
/// satisfy each theorem's rate ordering.
pub fn domination_pairs(count: usize, seed: u64) -> Vec<[f64; 5]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let t1 = 10f64.powf(rng.random_range(-1.0..1.3));
            let l1 = 10f64.powf(rng.random_range(-1.0..1.0));
            let t2 = t1 * 10f64.powf(rng.random_range(-0.5..0.5));
            let l2 = l1 * (1.0 + rng.random_range(0.0..0.6));
            let b = 10f64.powf(rng.random_range(-0.4..0.6));
            [t1, l1, t2, l2, b]
        })
        .collect()
}

fn run_domination(opts: &VerifyOptions) -> Result<Vec<CaseResult>> {
    let count = if opts.quick { 15 } else { 60 };
    let pairs = domination_pairs(count, opts.seed);
    let conv = NormConvention::dtv();
    let out: Vec<Vec<CaseResult>> = pairs
        .par_iter()
        .map(|&[t1, l1, t2, l2, b]| {
            let case = format!("θ1={t1:.4} λ1={l1:.4} θ2={t2:.4} λ2={l2:.4} β={b:.4}");
            let run = || -> Result<Vec<CaseResult>> {
                let p1 = PEParams::new(t1, l1)?;
                let p2 = PEParams::new(t2, l2)?;
                let g = GPEParams::new(t2, l2, b)?;
                let gb = GPEParams::new(t1, l1, b.max(1.0 / b))?;
                let d31 = dtv_continuous(&p1, &p2)?.value;
                let d33 = dtv_continuous(&p1, &g)?.value;
                let deq = dtv_continuous(&gb, &p1)?.value;
                Ok(vec![
                    CaseResult::at_most(&case, "Thm3.1", d31, bound_pe_pe(&p1, &p2, conv)?.value),
                    CaseResult::at_most(&case, "Thm3.3", d33, bound_gpe_pe(&p1, &g, conv, MeanMode::Lemma)?.value),
                    CaseResult::at_most(
                        &case,
                        "Cor-GPE-equal",
                        deq,
                        bound_gpe_pe_equal(t1, l1, gb.beta(), conv)?.value,
                    ),
                ])
            };
            run().unwrap_or_else(|e| vec![CaseResult::failed(&case, "bound", &e)])
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

fn run_samplers(opts: &VerifyOptions) -> Result<Vec<CaseResult>> {
    let m = if opts.quick { 20_000 } else { 100_000 };
    let alpha = 1e-3;
    let mut out = Vec::new();
    let draw = |k: u64, f: &(dyn Fn(&mut ChaCha8Rng) -> f64 + Sync)| -> Vec<f64> {
        (0..m as u64)
            .into_par_iter()
            .map(|r| f(&mut replication_rng(opts.seed ^ k, r)))
            .collect()
    };
    for (i, &(t, l)) in [(1.0, 1.0), (10.0, 0.5), (0.05, 2.0)].iter().enumerate() {
        let p = PEParams::new(t, l)?;
        for mode in [SampleMode::Inverse, SampleMode::MaxConstruction] {
            let xs = draw(i as u64 * 2 + (mode == SampleMode::Inverse) as u64, &|r| p.sample(r, mode));
            let ks = ks_one_sample(&xs, |x| p.cdf(x))?;
            out.push(CaseResult::at_least(
                format!("PE({t}, {l}) {mode:?}"),
                "KS p-value",
                ks.p_value,
                alpha,
            ));
        }
    }
    let g = GPEParams::new(4.99354, 0.02863, 0.4018)?;
    let xs = draw(100, &|r| g.sample(r));
    out.push(CaseResult::at_least(
        "GPE(4.99354, 0.02863, 0.4018)",
        "KS p-value",
        ks_one_sample(&xs, |x| g.cdf(x))?.p_value,
        alpha,
    ));
    for (i, &(t, pp)) in [(1.0, 0.3), (5.0, 0.05)].iter().enumerate() {
        let pg = PGParams::new(t, pp)?;
        let top = pg.quantile(1.0 - 1e-9)?;
        let probs: Vec<f64> = (1..=top).map(|y| pg.pmf(y).unwrap_or(0.0)).collect();
        for mode in [SampleMode::Inverse, SampleMode::MaxConstruction] {
            let ys = draw(200 + i as u64 * 2 + (mode == SampleMode::Inverse) as u64, &|r| {
                pg.sample(r, mode) as f64
            });
            let mut counts = vec![0u64; top as usize];
            for y in ys {
                let idx = (y as usize).clamp(1, top as usize) - 1;
                counts[idx] += 1;
            }
            let chi = chi_square_gof(&counts, &probs)?;
            out.push(CaseResult::at_least(
                format!("PG({t}, {pp}) {mode:?}"),
                "chi-square p-value",
                chi.p_value,
                alpha,
            ));
        }
    }
    for (i, &t) in [0.5, 3.0, 40.0].iter().enumerate() {
        let z = ZTPParams::new(t)?;
        let top = (t + 12.0 * t.sqrt() + 20.0) as u64;
        let probs: Vec<f64> = (1..=top).map(|k| z.pmf(k)).collect();
        let ys = draw(300 + i as u64, &|r| z.sample(r) as f64);
        let mut counts = vec![0u64; top as usize];
        for y in ys {
            counts[(y as usize).clamp(1, top as usize) - 1] += 1;
        }
        out.push(CaseResult::at_least(
            format!("ZTP({t})"),
            "chi-square p-value",
            chi_square_gof(&counts, &probs)?.p_value,
            alpha,
        ));
    }
    // The solver's Eh cross-checked against the sampler mean for one law.
    let p = PEParams::new(2.0, 1.0)?;
    let solver = SteinSolver::new(p, TestFunction::exp_decay())?;
    let xs = draw(400, &|r| p.sample(r, SampleMode::Inverse));
    let vals: Vec<f64> = xs.iter().map(|x| (-x).exp()).collect();
    let mean = vals.iter().sum::<f64>() / m as f64;
    let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m as f64).sqrt();
    out.push(CaseResult::at_most(
        "PE(2, 1) h=exp(-x)",
        "|MC mean - Eh| / SE",
        (mean - solver.eh()).abs() / (sd / (m as f64).sqrt()),
        4.0,
    ));
    Ok(out)
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> SuiteReport {
    let start = Instant::now();
    let results = match suite {
        Suite::Stein => run_stein(opts),
        Suite::Lemma21 => run_lemma21(opts),
        Suite::Lemma33 => run_lemma33(opts),
        Suite::AppendixA => run_appendix_a(opts),
        Suite::Domination => run_domination(opts),
        Suite::Samplers => run_samplers(opts),
    };
    let results = results.unwrap_or_else(|e| vec![CaseResult::failed(suite.name(), "setup", &e)]);
    finish(suite, start, results, opts.keep_all)
}

pub fn run(suites: &[Suite], opts: &VerifyOptions) -> VerifyReport {
    let reports: Vec<SuiteReport> = suites.iter().map(|&s| run_suite(s, opts)).collect();
    VerifyReport {
        quick: opts.quick,
        passed: reports.iter().all(|r| r.passed),
        suites: reports,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_roundtrip() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.name()), Some(s));
        }
        assert_eq!(Suite::parse("nope"), None);
    }

    #[test]
    fn single_point_lemma21() {
        let opts = VerifyOptions {
            quick: true,
            theta: Some(10.0),
            lambda: Some(1.0),
            ..Default::default()
        };
        let r = run_suite(Suite::Lemma21, &opts);
        assert!(r.passed, "{r:?}");
        assert!(r.cases >= 20);
    }
}
