//! Numerical probability metrics between PE-family laws and between samples
//! and laws.
//!
//! Total variation is `½∫|p_a - p_b|`, integrated piecewise between the
//! crossing points of the two densities. Bounded Wasserstein is only ever
//! reported through the upper proxy `min(W1, 2 d_TV)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::Serialize;

use crate::distributions::{GPEParams, PEParams, PGParams};
use crate::error::{Error, Result};
use crate::numeric::roots::{brent, golden_max};
use crate::numeric::{integrate, integrate_pieces, integrate_to_infinity, linspace, Tolerance};

/// A continuous law on the positive half-line with a closed-form quantile.
pub trait ContinuousLaw: Sync {
    fn pdf(&self, x: f64) -> f64;
    fn ln_pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
    fn sf(&self, x: f64) -> f64;
    /// Quantile for `u` in `[0, 1)`.
    fn quantile(&self, u: f64) -> f64;
    fn draw(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.random();
        self.quantile(u)
    }
}

impl ContinuousLaw for PEParams {
    fn pdf(&self, x: f64) -> f64 {
        PEParams::pdf(self, x)
    }
    fn ln_pdf(&self, x: f64) -> f64 {
        PEParams::ln_pdf(self, x)
    }
    fn cdf(&self, x: f64) -> f64 {
        PEParams::cdf(self, x)
    }
    fn sf(&self, x: f64) -> f64 {
        PEParams::sf(self, x)
    }
    fn quantile(&self, u: f64) -> f64 {
        self.quantile_split(u, 1.0 - u)
    }
}

impl ContinuousLaw for GPEParams {
    fn pdf(&self, x: f64) -> f64 {
        GPEParams::pdf(self, x)
    }
    fn ln_pdf(&self, x: f64) -> f64 {
        GPEParams::ln_pdf(self, x)
    }
    fn cdf(&self, x: f64) -> f64 {
        GPEParams::cdf(self, x)
    }
    fn sf(&self, x: f64) -> f64 {
        GPEParams::sf(self, x)
    }
    fn quantile(&self, u: f64) -> f64 {
        GPEParams::quantile(self, u).unwrap_or(f64::INFINITY)
    }
}

/// A PE or GPE law, parsed from `pe:θ,λ` or `gpe:θ,λ,β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Model {
    Pe(PEParams),
    Gpe(GPEParams),
}

impl Model {
    fn law(&self) -> &dyn ContinuousLaw {
        match self {
            Model::Pe(p) => p,
            Model::Gpe(g) => g,
        }
    }

    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        data.iter().map(|&x| self.ln_pdf(x)).sum()
    }
}

impl ContinuousLaw for Model {
    fn pdf(&self, x: f64) -> f64 {
        self.law().pdf(x)
    }
    fn ln_pdf(&self, x: f64) -> f64 {
        self.law().ln_pdf(x)
    }
    fn cdf(&self, x: f64) -> f64 {
        self.law().cdf(x)
    }
    fn sf(&self, x: f64) -> f64 {
        self.law().sf(x)
    }
    fn quantile(&self, u: f64) -> f64 {
        self.law().quantile(u)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Pe(p) => write!(f, "pe:{},{}", p.theta(), p.lambda()),
            Model::Gpe(g) => write!(f, "gpe:{},{},{}", g.theta(), g.lambda(), g.beta()),
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Domain(format!("model `{s}` must look like pe:θ,λ or gpe:θ,λ,β")))?;
        let nums: Vec<f64> = rest
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Domain(format!("model `{s}`: {e}")))?;
        match (family.trim().to_ascii_lowercase().as_str(), nums.as_slice()) {
            ("pe", [t, l]) => Ok(Model::Pe(PEParams::new(*t, *l)?)),
            ("gpe", [t, l, b]) => Ok(Model::Gpe(GPEParams::new(*t, *l, *b)?)),
            _ => Err(Error::Domain(format!("model `{s}` must look like pe:θ,λ or gpe:θ,λ,β"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DistanceMetric {
    #[serde(rename = "dTV")]
    Dtv,
    #[serde(rename = "dK")]
    Dk,
    #[serde(rename = "W1")]
    W1,
    #[serde(rename = "dBW_proxy")]
    DbwProxy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Piecewise adaptive quadrature between density or cdf crossings.
    CrossingQuadrature,
    /// Quadrature of the density ratio over quantile levels of `b`.
    QuantileGrid,
    /// Sample average under `b`.
    MonteCarlo,
    /// Dense grid followed by golden-section refinement.
    GridGolden,
    /// Exact evaluation against a step cdf.
    StepExact,
    /// `min(W1, 2 d_TV)`.
    Proxy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceEstimate {
    pub metric: DistanceMetric,
    pub value: f64,
    pub abs_error_estimate: f64,
    pub method: Method,
}

const TAIL: f64 = 1e-12;

/// Scan points spread over both laws' quantiles, logistic in the level so
/// both tails are resolved.
fn scan_points(a: &dyn ContinuousLaw, b: &dyn ContinuousLaw, m: usize) -> Vec<f64> {
    let lim = ((1.0 - TAIL) / TAIL).ln();
    let mut xs = Vec::with_capacity(2 * m);
    for t in linspace(-lim, lim, m) {
        let u = 1.0 / (1.0 + (-t).exp());
        for law in [a, b] {
            let x = law.quantile(u);
            if x.is_finite() && x > 0.0 {
                xs.push(x);
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Sign changes of `g` on consecutive scan points, refined by Brent.
fn crossings<G: Fn(f64) -> f64>(g: G, xs: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in xs {
        let v = g(x);
        if !v.is_finite() {
            prev = None;
            continue;
        }
        if v == 0.0 {
            out.push(x);
            prev = None;
            continue;
        }
        if let Some((px, pv)) = prev {
            if pv.signum() != v.signum() {
                if let Ok(r) = brent(&g, px, x, 1e-14 * x.max(1e-300)) {
                    out.push(r);
                }
            }
        }
        prev = Some((x, v));
    }
    out
}

/// `½∫|p_a - p_b|` by adaptive quadrature between density crossings.
///
/// The reported error is the larger of the quadrature estimate and the gap
/// to the exact cdf-difference value `½Σ|ΔF_a - ΔF_b|` over the same pieces.
pub fn dtv_continuous(a: &dyn ContinuousLaw, b: &dyn ContinuousLaw) -> Result<DistanceEstimate> {
    let xs = scan_points(a, b, 3000);
    let cuts = crossings(|x| a.ln_pdf(x) - b.ln_pdf(x), &xs);
    let mut edges = vec![0.0];
    edges.extend(cuts.iter().copied());
    let tol = Tolerance::new(1e-12, 1e-10);
    let mut quad = 0.0;
    let mut quad_err = 0.0;
    let mut exact = 0.0;
    for (i, &lo) in edges.iter().enumerate() {
        let hi = edges.get(i + 1).copied().unwrap_or(f64::INFINITY);
        let f = |x: f64| (a.pdf(x) - b.pdf(x)).abs();
        let r = if hi.is_finite() {
            integrate(f, lo, hi, tol)?
        } else {
            let mid = a.quantile(0.5).max(b.quantile(0.5)).max(lo);
            let q99 = a.quantile(0.999).max(b.quantile(0.999)).max(lo);
            integrate_pieces(f, lo, hi, &[mid, q99], tol)?
        };
        quad += r.value;
        quad_err += r.abs_error;
        let fa = if hi.is_finite() { a.cdf(hi) - a.cdf(lo) } else { a.sf(lo) };
        let fb = if hi.is_finite() { b.cdf(hi) - b.cdf(lo) } else { b.sf(lo) };
        exact += (fa - fb).abs();
    }
    let value = 0.5 * quad;
    Ok(DistanceEstimate {
        metric: DistanceMetric::Dtv,
        value: value.clamp(0.0, 1.0),
        abs_error_estimate: (0.5 * quad_err).max((value - 0.5 * exact).abs()),
        method: Method::CrossingQuadrature,
    })
}

/// `½∫₀¹ |p_a(Q_b(u))/p_b(Q_b(u)) - 1| du`, the quantile-space form of the
/// total variation distance; used to cross-check [`dtv_continuous`].
pub fn dtv_quantile_grid(a: &dyn ContinuousLaw, b: &dyn ContinuousLaw) -> Result<DistanceEstimate> {
    let g = |u: f64| {
        let x = b.quantile(u);
        if !(x > 0.0) || !x.is_finite() {
            return 0.0;
        }
        ((a.ln_pdf(x) - b.ln_pdf(x)).exp() - 1.0).abs()
    };
    let xs = scan_points(a, b, 1500);
    let cuts: Vec<f64> = crossings(|x| a.ln_pdf(x) - b.ln_pdf(x), &xs).iter().map(|&x| b.cdf(x)).collect();
    let r = integrate_pieces(g, 0.0, 1.0, &cuts, Tolerance::new(1e-10, 1e-9))?;
    Ok(DistanceEstimate {
        metric: DistanceMetric::Dtv,
        value: (0.5 * r.value).clamp(0.0, 1.0),
        abs_error_estimate: 0.5 * r.abs_error,
        method: Method::QuantileGrid,
    })
}

/// Monte Carlo `½ mean|p_a(X)/p_b(X) - 1|` over `m` draws from `b`; the error
/// is three standard errors.
pub fn dtv_monte_carlo(a: &dyn ContinuousLaw, b: &dyn ContinuousLaw, m: usize, rng: &mut dyn RngCore) -> DistanceEstimate {
    let mut s = 0.0;
    let mut s2 = 0.0;
    for _ in 0..m {
        let x = b.draw(rng);
        let v = 0.5 * ((a.ln_pdf(x) - b.ln_pdf(x)).exp() - 1.0).abs();
        let v = if v.is_finite() { v } else { 0.0 };
        s += v;
        s2 += v * v;
    }
    let mean = s / m as f64;
    let var = (s2 / m as f64 - mean * mean).max(0.0);
    DistanceEstimate {
        metric: DistanceMetric::Dtv,
        value: mean,
        abs_error_estimate: 3.0 * (var / m as f64).sqrt(),
        method: Method::MonteCarlo,
    }
}

/// `sup|F_a - F_b|` on a dense quantile grid, refined by golden section.
pub fn dk_continuous(a: &dyn ContinuousLaw, b: &dyn ContinuousLaw) -> DistanceEstimate {
    let xs = scan_points(a, b, 4000);
    let gap = |x: f64| {
        if a.cdf(x) > 0.5 && b.cdf(x) > 0.5 {
            (a.sf(x) - b.sf(x)).abs()
        } else {
            (a.cdf(x) - b.cdf(x)).abs()
        }
    };
    let mut best = (0usize, 0.0f64);
    for (i, &x) in xs.iter().enumerate() {
        let g = gap(x);
        if g > best.1 {
            best = (i, g);
        }
    }
    let i = best.0;
    let lo = if i == 0 { 0.0 } else { xs[i - 1] };
    let hi = xs.get(i + 1).copied().unwrap_or(xs[i] * 2.0);
    let (_, refined) = golden_max(gap, lo, hi, 1e-12);
    let value = refined.max(best.1);
    DistanceEstimate {
        metric: DistanceMetric::Dk,
        value: value.clamp(0.0, 1.0),
        abs_error_estimate: (value - best.1).abs().max(1e-12),
        method: Method::GridGolden,
    }
}

/// `∫|F_a - F_b| dx`, split where the cdfs cross.
pub fn w1_cdf(a: &dyn ContinuousLaw, b: &dyn ContinuousLaw) -> Result<DistanceEstimate> {
    let diff = |x: f64| {
        let (fa, fb) = (a.cdf(x), b.cdf(x));
        if fa > 0.5 && fb > 0.5 {
            b.sf(x) - a.sf(x)
        } else {
            fa - fb
        }
    };
    let xs = scan_points(a, b, 3000);
    let mut cuts = crossings(diff, &xs);
    cuts.push(a.quantile(0.5));
    cuts.push(b.quantile(0.5));
    let r = integrate_pieces(|x| diff(x).abs(), 0.0, f64::INFINITY, &cuts, Tolerance::new(1e-12, 1e-10))?;
    Ok(DistanceEstimate {
        metric: DistanceMetric::W1,
        value: r.value,
        abs_error_estimate: r.abs_error,
        method: Method::CrossingQuadrature,
    })
}

/// Upper proxy `min(W1, 2 d_TV)` for the bounded Wasserstein distance.
pub fn dbw_proxy(a: &dyn ContinuousLaw, b: &dyn ContinuousLaw) -> Result<DistanceEstimate> {
    let w = w1_cdf(a, b)?;
    let t = dtv_continuous(a, b)?;
    let (value, err) = if w.value <= 2.0 * t.value {
        (w.value, w.abs_error_estimate)
    } else {
        (2.0 * t.value, 2.0 * t.abs_error_estimate)
    };
    Ok(DistanceEstimate {
        metric: DistanceMetric::DbwProxy,
        value,
        abs_error_estimate: err,
        method: Method::Proxy,
    })
}

/// A right-continuous step cdf: `level[j]` holds on `[jumps[j], jumps[j+1])`
/// and the cdf is zero left of `jumps[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCdf {
    jumps: Vec<f64>,
    levels: Vec<f64>,
    /// Number of observations for empirical cdfs.
    size: Option<usize>,
}

impl StepCdf {
    /// Empirical cdf of a sample.
    pub fn empirical(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Dataset("empty sample".into()));
        }
        let mut s = samples.to_vec();
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dataset("sample contains non-finite values".into()));
        }
        s.sort_by(f64::total_cmp);
        let m = s.len() as f64;
        let mut jumps = Vec::new();
        let mut levels = Vec::new();
        for (i, &x) in s.iter().enumerate() {
            if jumps.last() == Some(&x) {
                *levels.last_mut().unwrap() = (i + 1) as f64 / m;
            } else {
                jumps.push(x);
                levels.push((i + 1) as f64 / m);
            }
        }
        Ok(Self {
            jumps,
            levels,
            size: Some(s.len()),
        })
    }

    /// Cdf of `Y/n` for `Y ~ PG(θ, p)`, up to the `1 - 1e-12` quantile; the
    /// remaining mass is placed at the last jump.
    pub fn scaled_pg(pg: &PGParams, n: f64) -> Result<Self> {
        let top = pg.quantile(1.0 - TAIL)?;
        let mut jumps = Vec::with_capacity(top as usize);
        let mut levels = Vec::with_capacity(top as usize);
        for k in 1..=top {
            jumps.push(k as f64 / n);
            levels.push(if k == top { 1.0 } else { pg.cdf(k as f64) });
        }
        Ok(Self {
            jumps,
            levels,
            size: None,
        })
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let i = self.jumps.partition_point(|&j| j <= x);
        if i == 0 {
            0.0
        } else {
            self.levels[i - 1]
        }
    }
}

/// Two-sided 95% Dvoretzky–Kiefer–Wolfowitz band half-width for `m` draws.
pub fn dkw_band(m: usize) -> f64 {
    ((2.0f64 / 0.05).ln() / (2.0 * m as f64)).sqrt()
}

/// Exact `sup|F_step - F|`; the supremum sits at a jump, approached from
/// either side.
pub fn dk_step(step: &StepCdf, law: &dyn ContinuousLaw) -> DistanceEstimate {
    let mut best = 0.0f64;
    let mut before = 0.0;
    for (j, &x) in step.jumps.iter().enumerate() {
        let f = law.cdf(x);
        let after = step.levels[j];
        best = best.max((before - f).abs()).max((after - f).abs());
        before = after;
    }
    DistanceEstimate {
        metric: DistanceMetric::Dk,
        value: best,
        abs_error_estimate: step.size.map_or(0.0, dkw_band),
        method: Method::StepExact,
    }
}

/// `∫|F_step - F|`, exact up to quadrature of `F` on each step.
pub fn w1_step(step: &StepCdf, law: &dyn ContinuousLaw) -> Result<DistanceEstimate> {
    let tol = Tolerance::new(1e-14, 1e-10);
    let first = step.jumps[0];
    let mut total = integrate(|x| law.cdf(x), 0.0, first, tol)?.value;
    let mut err = 0.0;
    for j in 0..step.jumps.len() {
        let lo = step.jumps[j];
        let c = step.levels[j];
        match step.jumps.get(j + 1) {
            Some(&hi) => {
                // F is increasing, so |c - F| changes sign at most once, at Q(c).
                let cross = if c > 0.0 && c < 1.0 { law.quantile(c) } else { f64::NAN };
                let mut pieces = vec![lo];
                if cross > lo && cross < hi {
                    pieces.push(cross);
                }
                pieces.push(hi);
                for w in pieces.windows(2) {
                    let r = integrate(|x| c - law.cdf(x), w[0], w[1], tol)?;
                    total += r.value.abs();
                    err += r.abs_error;
                }
            }
            None => {
                let r = integrate_to_infinity(|x| law.sf(x), lo, tol)?;
                total += r.value;
                err += r.abs_error;
            }
        }
    }
    // Sampling scale ∫√(F(1-F)/m), the typical size of W1 under the null.
    let sampling = match step.size {
        Some(m) => {
            integrate_pieces(
                |x| (law.cdf(x) * law.sf(x)).sqrt(),
                0.0,
                f64::INFINITY,
                &[law.quantile(0.5)],
                Tolerance::new(1e-8, 1e-6),
            )?
            .value
                / (m as f64).sqrt()
        }
        None => 0.0,
    };
    Ok(DistanceEstimate {
        metric: DistanceMetric::W1,
        value: total,
        abs_error_estimate: err + sampling,
        method: Method::StepExact,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmpiricalMetric {
    Dk,
    W1,
}

/// Distance between the empirical cdf of `samples` and `law`.
pub fn empirical_cdf_distance(samples: &[f64], law: &dyn ContinuousLaw, metric: EmpiricalMetric) -> Result<DistanceEstimate> {
    let step = StepCdf::empirical(samples)?;
    match metric {
        EmpiricalMetric::Dk => Ok(dk_step(&step, law)),
        EmpiricalMetric::W1 => w1_step(&step, law),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pe(t: f64, l: f64) -> PEParams {
        PEParams::new(t, l).unwrap()
    }

    #[test]
    fn identical_laws() {
        let a = pe(1.0, 1.0);
        assert!(dtv_continuous(&a, &a).unwrap().value < 1e-10);
        assert_eq!(dk_continuous(&a, &a).value, 0.0);
        assert!(w1_cdf(&a, &a).unwrap().value < 1e-12);
    }

    #[test]
    fn dk_matches_brute_grid() {
        let (a, b) = (pe(1.0, 1.0), pe(1.0, 1.2));
        let brute = (1..=100_000)
            .map(|i| {
                let x = i as f64 * 2e-4;
                (a.cdf(x) - b.cdf(x)).abs()
            })
            .fold(0.0, f64::max);
        assert!((dk_continuous(&a, &b).value - brute).abs() < 1e-5);
    }

    #[test]
    fn dtv_routes_agree_and_dominate_dk() {
        let g = GPEParams::new(2.0, 0.7, 1.8).unwrap();
        for b in [pe(1.0, 0.5), pe(3.0, 0.7), pe(0.2, 1.0)] {
            let t = dtv_continuous(&g, &b).unwrap();
            let q = dtv_quantile_grid(&g, &b).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let mc = dtv_monte_carlo(&g, &b, 200_000, &mut rng);
            assert!((t.value - q.value).abs() < 2e-3);
            assert!((t.value - mc.value).abs() < mc.abs_error_estimate + t.abs_error_estimate);
            assert!(dk_continuous(&g, &b).value <= t.value + 1e-9);
            let rev = dtv_continuous(&b, &g).unwrap();
            assert!((rev.value - t.value).abs() < 1e-8);
        }
    }

    #[test]
    fn proxy_is_below_both_parts() {
        let (a, b) = (pe(1.0, 1.0), pe(2.0, 1.5));
        let p = dbw_proxy(&a, &b).unwrap();
        assert!(p.value <= w1_cdf(&a, &b).unwrap().value + 1e-15);
        assert!(p.value <= 2.0 * dtv_continuous(&a, &b).unwrap().value + 1e-15);
    }

    #[test]
    fn single_sample_at_median() {
        let a = pe(1.0, 1.0);
        let med = a.quantile(0.5).unwrap();
        let d = empirical_cdf_distance(&[med], &a, EmpiricalMetric::Dk).unwrap();
        assert!((d.value - 0.5).abs() < 1e-12);
        assert!(empirical_cdf_distance(&[], &a, EmpiricalMetric::Dk).is_err());
    }

    #[test]
    fn w1_step_matches_direct_quadrature() {
        let a = pe(1.0, 1.0);
        let xs = [0.3, 0.9, 0.9, 1.7, 2.2];
        let step = StepCdf::empirical(&xs).unwrap();
        let direct = integrate_pieces(
            |x| (step.cdf(x) - a.cdf(x)).abs(),
            0.0,
            f64::INFINITY,
            &[0.3, 0.9, 1.7, 2.2],
            Tolerance::new(1e-13, 1e-12),
        )
        .unwrap()
        .value;
        let w = w1_step(&step, &a).unwrap();
        assert!((w.value - direct).abs() < 1e-10);
    }

    #[test]
    fn model_parsing() {
        let m: Model = "gpe:4.99354,0.02863,0.4018".parse().unwrap();
        assert!(matches!(m, Model::Gpe(_)));
        assert!("pe:1".parse::<Model>().is_err());
        assert!("pe:1,-1".parse::<Model>().is_err());
        assert_eq!("pe:1,2".parse::<Model>().unwrap().to_string(), "pe:1,2");
    }
}
