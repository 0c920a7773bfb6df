//! Maximum waiting time for binary patterns across a random number of
//! parallel Bernoulli systems.
//!
//! `M ~ ZTP(θ)` systems each run i.i.d. Bernoulli(λ/n) trials until their
//! pattern first appears; `V_i` is the index where that first window starts
//! and `U_n = max V_i / n`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{bound_pattern, bound_pg_pe, NormConvention};
use crate::distance::{dk_step, empirical_cdf_distance, DistanceEstimate, EmpiricalMetric, StepCdf};
use crate::distributions::{PEParams, PGParams, SampleMode, ZtpSampler};
use crate::error::{check_positive, Error, Result};

/// Hard cap on trials per system.
pub const STEP_CAP: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternSpec {
    bits: Vec<u8>,
}

impl PatternSpec {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() || bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter {
                name: "pattern",
                value: f64::NAN,
                reason: "must be a nonempty sequence of 0/1",
            });
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn k(&self) -> usize {
        self.bits.len()
    }

    /// `[0, 1, 0, 1, ...]` of length `k`.
    pub fn alternating(k: usize) -> Result<Self> {
        Self::new((0..k).map(|i| (i % 2) as u8).collect())
    }

    /// Matching automaton: `delta[s][b]` is the longest pattern prefix that is
    /// a suffix of (matched prefix `s`) followed by `b`.
    fn automaton(&self) -> Vec<[usize; 2]> {
        let k = self.k();
        let mut fail = vec![0usize; k];
        let mut j = 0;
        for i in 1..k {
            while j > 0 && self.bits[i] != self.bits[j] {
                j = fail[j - 1];
            }
            if self.bits[i] == self.bits[j] {
                j += 1;
            }
            fail[i] = j;
        }
        let mut delta = vec![[0usize; 2]; k + 1];
        for s in 0..=k {
            for b in 0..2u8 {
                let mut t = if s == k { fail[k - 1] } else { s };
                loop {
                    if t < k && self.bits[t] == b {
                        t += 1;
                        break;
                    }
                    if t == 0 {
                        break;
                    }
                    t = fail[t - 1];
                }
                delta[s][b as usize] = t;
            }
        }
        delta
    }
}

impl FromStr for PatternSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits: Vec<u8> = s
            .chars()
            .filter(|c| !matches!(c, ',' | ' '))
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Domain(format!("pattern `{s}` may only contain 0 and 1"))),
            })
            .collect::<Result<_>>()?;
        Self::new(bits)
    }
}

impl fmt::Display for PatternSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Streaming matcher over single bits.
#[derive(Debug, Clone)]
pub struct Matcher {
    delta: Vec<[usize; 2]>,
    k: usize,
    state: usize,
    seen: u64,
}

impl Matcher {
    pub fn new(pattern: &PatternSpec) -> Self {
        Self {
            delta: pattern.automaton(),
            k: pattern.k(),
            state: 0,
            seen: 0,
        }
    }

    /// Feeds one bit; returns the 1-based start of the window completed by
    /// this bit, if it matches.
    pub fn feed(&mut self, bit: u8) -> Option<u64> {
        self.seen += 1;
        self.state = self.delta[self.state][bit as usize];
        (self.state == self.k).then(|| self.seen - self.k as u64 + 1)
    }
}

/// First match start in an explicit stream.
pub fn first_occurrence_in<I: IntoIterator<Item = u8>>(pattern: &PatternSpec, stream: I) -> Option<u64> {
    let mut m = Matcher::new(pattern);
    stream.into_iter().find_map(|b| m.feed(b))
}

fn check_p(p: f64) -> Result<f64> {
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(Error::InvalidParameter {
            name: "p",
            value: p,
            reason: "must lie in (0, 1)",
        })
    }
}

/// Start index of the first window matching `pattern` in a fresh
/// Bernoulli(p) stream.
///
/// Successes are placed by geometric gaps. Within a run of zeros the
/// automaton settles after at most `k + 1` steps, so only that prefix of each
/// run is fed bit by bit.
pub fn first_occurrence<R: Rng + ?Sized>(pattern: &PatternSpec, p: f64, rng: &mut R) -> Result<u64> {
    let p = check_p(p)?;
    let gaps = Geometric::new(p).map_err(|e| Error::Domain(e.to_string()))?;
    let mut m = Matcher::new(pattern);
    let settle = pattern.k() as u64 + 1;
    loop {
        let zeros = gaps.sample(rng);
        for _ in 0..zeros.min(settle) {
            if let Some(j) = m.feed(0) {
                return Ok(j);
            }
        }
        m.seen = m.seen.saturating_add(zeros - zeros.min(settle));
        if let Some(j) = m.feed(1) {
            return Ok(j);
        }
        if m.seen > STEP_CAP {
            return Err(Error::StepCap { cap: STEP_CAP });
        }
    }
}

/// Expected trial index at which the first match is completed, from the
/// absorbing Markov chain on matcher states.
pub fn expected_completion_time(pattern: &PatternSpec, p: f64) -> Result<f64> {
    let p = check_p(p)?;
    let delta = pattern.automaton();
    let k = pattern.k();
    // (I - P) E = 1 over transient states 0..k.
    let mut a = vec![vec![0.0; k + 1]; k];
    for s in 0..k {
        a[s][s] += 1.0;
        a[s][k] = 1.0;
        for (b, prob) in [(0usize, 1.0 - p), (1, p)] {
            let t = delta[s][b];
            if t < k {
                a[s][t] -= prob;
            }
        }
    }
    for c in 0..k {
        let piv = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap_or(c);
        a.swap(c, piv);
        for r in 0..k {
            if r != c {
                let factor = a[r][c] / a[c][c];
                for col in c..=k {
                    a[r][col] -= factor * a[c][col];
                }
            }
        }
    }
    Ok(a[0][k] / a[0][0])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternSimConfig {
    pub theta: f64,
    pub lambda: f64,
    pub n: u64,
    /// Cycled over systems; all must share one length.
    pub patterns: Vec<PatternSpec>,
    pub replications: usize,
    pub seed: u64,
}

impl PatternSimConfig {
    pub fn new(theta: f64, lambda: f64, n: u64, patterns: Vec<PatternSpec>, replications: usize, seed: u64) -> Result<Self> {
        check_positive("theta", theta)?;
        check_positive("lambda", lambda)?;
        check_p(lambda / n as f64)?;
        let Some(first) = patterns.first() else {
            return Err(Error::Domain("at least one pattern is required".into()));
        };
        if patterns.iter().any(|q| q.k() != first.k()) {
            return Err(Error::Domain("all patterns must have the same length".into()));
        }
        if replications == 0 {
            return Err(Error::Domain("replications must be at least 1".into()));
        }
        Ok(Self {
            theta,
            lambda,
            n,
            patterns,
            replications,
            seed,
        })
    }

    pub fn k(&self) -> usize {
        self.patterns[0].k()
    }

    pub fn p(&self) -> f64 {
        self.lambda / self.n as f64
    }

    pub fn with_n(&self, n: u64) -> Result<Self> {
        Self::new(self.theta, self.lambda, n, self.patterns.clone(), self.replications, self.seed)
    }
}

/// Generator for replication `rep`: one ChaCha8 key per seed, one stream per
/// replication.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// `cfg.replications` draws of `U_n = max V_i / n`.
pub fn simulate_max_waiting(cfg: &PatternSimConfig) -> Result<Vec<f64>> {
    let ztp = ZtpSampler::new(cfg.theta);
    let p = cfg.p();
    let n = cfg.n as f64;
    (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(cfg.seed, rep);
            let m = ztp.sample(&mut rng);
            let mut w = 0;
            for i in 0..m as usize {
                let pat = &cfg.patterns[i % cfg.patterns.len()];
                w = w.max(first_occurrence(pat, p, &mut rng)?);
            }
            Ok(w as f64 / n)
        })
        .collect()
}

/// `replications` draws of `Y/n` with `Y ~ PG(θ, λ/n)`.
pub fn simulate_scaled_pg(theta: f64, lambda: f64, n: u64, replications: usize, seed: u64, mode: SampleMode) -> Result<Vec<f64>> {
    let pg = PGParams::scaled(theta, lambda, n as f64)?;
    let sampler = pg.sampler();
    Ok((0..replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(seed, rep);
            let y = match mode {
                SampleMode::Inverse => pg.sample(&mut rng, mode),
                SampleMode::MaxConstruction => sampler.sample(&mut rng),
            };
            y as f64 / n as f64
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternRow {
    pub n: u64,
    pub k: usize,
    pub replications: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub dk: DistanceEstimate,
    pub w1: DistanceEstimate,
    /// `min(W1, 2 d_TV)`; the empirical law is discrete so `d_TV = 1`.
    pub w1_proxy: f64,
    pub bound: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternReport {
    pub theta: f64,
    pub lambda: f64,
    pub patterns: Vec<String>,
    pub seed: u64,
    pub rows: Vec<PatternRow>,
}

/// Runs the simulation at each `n`, compares with `PE(θ, λ)` and evaluates
/// the bounded-Wasserstein bound for the pattern maximum.
pub fn pattern_experiment(cfg: &PatternSimConfig, ns: &[u64]) -> Result<PatternReport> {
    let pe = PEParams::new(cfg.theta, cfg.lambda)?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let c = cfg.with_n(n)?;
        let xs = simulate_max_waiting(&c)?;
        let m = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / m;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0).max(1.0);
        let dk = empirical_cdf_distance(&xs, &pe, EmpiricalMetric::Dk)?;
        let w1 = empirical_cdf_distance(&xs, &pe, EmpiricalMetric::W1)?;
        let bound = bound_pattern(cfg.theta, cfg.lambda, n as f64, c.k() as u32, NormConvention::dbw())?.value;
        let w1_proxy = w1.value.min(2.0);
        rows.push(PatternRow {
            n,
            k: c.k(),
            replications: c.replications,
            mean,
            mean_se: (var / m).sqrt(),
            dk,
            w1,
            w1_proxy,
            bound,
            slack: bound - w1_proxy,
        });
    }
    Ok(PatternReport {
        theta: cfg.theta,
        lambda: cfg.lambda,
        patterns: cfg.patterns.iter().map(|p| p.to_string()).collect(),
        seed: cfg.seed,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PgRow {
    pub n: u64,
    pub replications: usize,
    /// Empirical `d_K` of the draws against `PE(θ, λ)`.
    pub dk: DistanceEstimate,
    /// Exact `d_K` of the scaled PG law against `PE(θ, λ)`.
    pub dk_exact: f64,
    pub w1: DistanceEstimate,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PgReport {
    pub theta: f64,
    pub lambda: f64,
    pub mode: SampleMode,
    pub seed: u64,
    pub rows: Vec<PgRow>,
}

/// Scaled PG draws against `PE(θ, λ)` over an `n` sweep, with the exact
/// distance and the bounded-Wasserstein bound alongside.
pub fn pg_experiment(theta: f64, lambda: f64, ns: &[u64], replications: usize, seed: u64, mode: SampleMode) -> Result<PgReport> {
    let pe = PEParams::new(theta, lambda)?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let xs = simulate_scaled_pg(theta, lambda, n, replications, seed, mode)?;
        let step = StepCdf::scaled_pg(&PGParams::scaled(theta, lambda, n as f64)?, n as f64)?;
        rows.push(PgRow {
            n,
            replications,
            dk: empirical_cdf_distance(&xs, &pe, EmpiricalMetric::Dk)?,
            dk_exact: dk_step(&step, &pe).value,
            w1: empirical_cdf_distance(&xs, &pe, EmpiricalMetric::W1)?,
            bound: bound_pg_pe(theta, lambda, n as f64, NormConvention::dbw())?.value,
        });
    }
    Ok(PgReport {
        theta,
        lambda,
        mode,
        seed,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(pattern: &[u8], stream: &[u8]) -> Option<u64> {
        stream.windows(pattern.len()).position(|w| w == pattern).map(|i| i as u64 + 1)
    }

    #[test]
    fn matcher_agrees_with_window_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let k = rng.random_range(1..6);
            let pat: Vec<u8> = (0..k).map(|_| rng.random_range(0..2)).collect();
            let stream: Vec<u8> = (0..60).map(|_| u8::from(rng.random_bool(0.4))).collect();
            let spec = PatternSpec::new(pat.clone()).unwrap();
            assert_eq!(first_occurrence_in(&spec, stream.iter().copied()), naive(&pat, &stream), "{pat:?}");
        }
    }

    #[test]
    fn markov_oracle_known_values() {
        let p11 = "11".parse::<PatternSpec>().unwrap();
        assert!((expected_completion_time(&p11, 0.5).unwrap() - 6.0).abs() < 1e-12);
        let p1 = "1".parse::<PatternSpec>().unwrap();
        assert!((expected_completion_time(&p1, 0.2).unwrap() - 5.0).abs() < 1e-12);
        let p01 = "01".parse::<PatternSpec>().unwrap();
        assert!((expected_completion_time(&p01, 0.5).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn gap_skipping_matches_oracle() {
        for (pat, p) in [("11", 0.5), ("01", 0.1), ("101", 0.3), ("00", 0.05), ("1", 0.02)] {
            let spec: PatternSpec = pat.parse().unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let m = 40_000;
            let ends: Vec<f64> = (0..m)
                .map(|_| (first_occurrence(&spec, p, &mut rng).unwrap() + spec.k() as u64 - 1) as f64)
                .collect();
            let mean = ends.iter().sum::<f64>() / m as f64;
            let sd = (ends.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m as f64).sqrt();
            let want = expected_completion_time(&spec, p).unwrap();
            assert!((mean - want).abs() < 3.0 * sd / (m as f64).sqrt(), "{pat}: {mean} vs {want}");
        }
    }

    #[test]
    fn reproducible_by_seed() {
        let cfg = PatternSimConfig::new(1.0, 1.0, 100, vec![PatternSpec::alternating(2).unwrap()], 500, 7).unwrap();
        assert_eq!(simulate_max_waiting(&cfg).unwrap(), simulate_max_waiting(&cfg).unwrap());
    }

    #[test]
    fn config_validation() {
        let pat = vec![PatternSpec::alternating(2).unwrap()];
        assert!(PatternSimConfig::new(1.0, 2.0, 2, pat.clone(), 10, 0).is_err());
        assert!(PatternSimConfig::new(1.0, 1.0, 10, pat, 0, 0).is_err());
        let mixed = vec!["01".parse().unwrap(), "1".parse().unwrap()];
        assert!(PatternSimConfig::new(1.0, 1.0, 10, mixed, 10, 0).is_err());
        assert!("012".parse::<PatternSpec>().is_err());
    }
}
