//! Maximum-likelihood fitting of PE and GPE to positive failure times.
//!
//! Parameters are optimized on the log scale with a Nelder–Mead simplex from
//! twenty starting points; the best converged run wins.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distance::Model;
use crate::distributions::{GPEParams, PEParams};
use crate::error::{Error, Result};

/// Ordered positive observations with provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    values: Vec<f64>,
    pub label: String,
    pub source: String,
}

impl Dataset {
    pub fn new(values: Vec<f64>, label: impl Into<String>, source: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dataset("dataset is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Dataset(format!("value {v} is not a positive finite number")));
        }
        Ok(Self {
            values,
            label: label.into(),
            source: source.into(),
        })
    }

    /// Parses one value per line; `#` starts a comment and a single leading
    /// non-numeric line is taken as the header.
    pub fn parse_csv(text: &str, label: &str, source: &str) -> Result<Self> {
        let mut values = Vec::new();
        let mut header_seen = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let field = line.split(',').next().unwrap_or("").trim();
            match field.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) if !header_seen && values.is_empty() => header_seen = true,
                Err(_) => {
                    return Err(Error::Dataset(format!("{source}:{}: cannot parse `{field}`", lineno + 1)));
                }
            }
        }
        Self::new(values, label, source)
    }

    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Self::parse_csv(&text, &label, &path.display().to_string())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Multiplies every observation by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.values.iter().map(|v| v * c).collect(),
            format!("{}*{c}", self.label),
            self.source.clone(),
        )
    }
}

fn check_data(data: &[f64]) -> Result<()> {
    match data.iter().find(|v| !(**v > 0.0)) {
        Some(v) => Err(Error::Domain(format!("log-likelihood needs positive data, got {v}"))),
        None => Ok(()),
    }
}

pub fn loglik_pe(data: &[f64], params: &PEParams) -> Result<f64> {
    check_data(data)?;
    Ok(params.log_likelihood(data))
}

pub fn loglik_gpe(data: &[f64], params: &GPEParams) -> Result<f64> {
    check_data(data)?;
    Ok(params.log_likelihood(data))
}

/// `PE(θβ, λ)`, the single-shape surrogate for `GPE(θ, λ, β)`.
pub fn simplified_pe_from_gpe(g: &GPEParams) -> PEParams {
    PEParams::new(g.theta() * g.beta(), g.lambda()).expect("product of positive parameters is positive")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Pe,
    Gpe,
}

impl Family {
    pub fn dim(self) -> usize {
        match self {
            Family::Pe => 2,
            Family::Gpe => 3,
        }
    }

    fn model(self, logp: &[f64]) -> Option<Model> {
        if logp.iter().any(|v| !(v.abs() <= LOG_BOX)) {
            return None;
        }
        let e: Vec<f64> = logp.iter().map(|v| v.exp()).collect();
        match self {
            Family::Pe => PEParams::new(e[0], e[1]).ok().map(Model::Pe),
            Family::Gpe => GPEParams::new(e[0], e[1], e[2]).ok().map(Model::Gpe),
        }
    }
}

/// Log-parameters are confined to `[-LOG_BOX, LOG_BOX]`.
const LOG_BOX: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub starts: usize,
    pub seed: u64,
    /// Stop when the simplex log-likelihood spread falls below this.
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            starts: 20,
            seed: 0x5eed,
            ftol: 1e-8,
            max_iter: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartRecord {
    /// Natural-scale starting parameters.
    pub start: Vec<f64>,
    pub start_loglik: f64,
    pub final_loglik: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub family: Family,
    pub params: Model,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub converged: bool,
    pub iterations: usize,
    pub sample_size: usize,
    pub starts: Vec<StartRecord>,
}

impl FitResult {
    pub fn pe(&self) -> Option<PEParams> {
        match self.params {
            Model::Pe(p) => Some(p),
            Model::Gpe(_) => None,
        }
    }

    pub fn gpe(&self) -> Option<GPEParams> {
        match self.params {
            Model::Gpe(g) => Some(g),
            Model::Pe(_) => None,
        }
    }
}

pub fn aic(k: usize, loglik: f64) -> f64 {
    2.0 * k as f64 - 2.0 * loglik
}

pub fn bic(k: usize, m: usize, loglik: f64) -> f64 {
    k as f64 * (m as f64).ln() - 2.0 * loglik
}

struct Simplex {
    best: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

/// Minimizes `f` from `x0` with the standard reflection/expansion/contraction/
/// shrink coefficients (1, 2, ½, ½).
fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], step: f64, ftol: f64, max_iter: usize) -> Simplex {
    let d = x0.len();
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..d {
        let mut p = x0.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut iter = 0;
    let mut converged = false;
    while iter < max_iter {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let spread = (vals[d] - vals[0]).abs();
        if vals[0].is_finite() && spread <= ftol {
            converged = true;
            break;
        }
        iter += 1;
        let centroid: Vec<f64> = (0..d).map(|j| pts[..d].iter().map(|p| p[j]).sum::<f64>() / d as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&pts[d]).map(|(c, w)| c + t * (w - c)).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                pts[d] = xe;
                vals[d] = fe;
            } else {
                pts[d] = xr;
                vals[d] = fr;
            }
        } else if fr < vals[d - 1] {
            pts[d] = xr;
            vals[d] = fr;
        } else {
            let (xc, fc) = if fr < vals[d] {
                let x = along(-0.5);
                let v = f(&x);
                (x, v)
            } else {
                let x = along(0.5);
                let v = f(&x);
                (x, v)
            };
            if fc < vals[d].min(fr) {
                pts[d] = xc;
                vals[d] = fc;
            } else {
                for i in 1..=d {
                    pts[i] = pts[i].iter().zip(&pts[0]).map(|(p, b)| b + 0.5 * (p - b)).collect();
                    vals[i] = f(&pts[i]);
                }
            }
        }
    }
    let i = (0..=d).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    Simplex {
        best: pts[i].clone(),
        value: vals[i],
        iterations: iter,
        converged,
    }
}

/// Starting points on the log scale: the moment-informed point
/// `(θ, λ, β) = (1, 1/mean, 1)` followed by log-uniform draws around it.
fn start_points(family: Family, mean: f64, opts: &FitOptions) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let lam0 = (1.0 / mean).ln();
    let mut out = vec![vec![0.0, lam0, 0.0][..family.dim()].to_vec()];
    while out.len() < opts.starts.max(1) {
        let mut s = vec![
            rng.random_range(-3.0f64..4.0),
            lam0 + rng.random_range(-2.0f64..2.0),
            rng.random_range(-2.0f64..2.5),
        ];
        s.truncate(family.dim());
        out.push(s);
    }
    out
}

fn fit(family: Family, data: &Dataset, opts: &FitOptions) -> Result<FitResult> {
    let m = data.len();
    if m < family.dim() {
        return Err(Error::Dataset(format!(
            "{} observations cannot identify {} parameters",
            m,
            family.dim()
        )));
    }
    let xs = data.values();
    let nll = |lp: &[f64]| -> f64 {
        match family.model(lp) {
            Some(model) => {
                let ll = model.log_likelihood(xs);
                if ll.is_finite() {
                    -ll
                } else {
                    f64::INFINITY
                }
            }
            None => f64::INFINITY,
        }
    };
    let starts = start_points(family, data.mean(), opts);
    let runs: Vec<(Vec<f64>, f64, Simplex)> = starts
        .par_iter()
        .map(|s| {
            let first = nelder_mead(&nll, s, 0.5, opts.ftol, opts.max_iter);
            // A restart from the optimum guards against a collapsed simplex.
            let mut again = nelder_mead(&nll, &first.best, 0.05, opts.ftol, opts.max_iter);
            again.iterations += first.iterations;
            (s.clone(), -nll(s), again)
        })
        .collect();
    let records: Vec<StartRecord> = runs
        .iter()
        .map(|(s, sl, r)| StartRecord {
            start: s.iter().map(|v| v.exp()).collect(),
            start_loglik: *sl,
            final_loglik: -r.value,
            converged: r.converged,
            iterations: r.iterations,
        })
        .collect();
    let best = runs
        .iter()
        .filter(|(_, _, r)| r.converged && r.value.is_finite())
        .min_by(|a, b| a.2.value.total_cmp(&b.2.value));
    let Some((_, _, best)) = best else {
        let best_loglik = runs.iter().map(|(_, _, r)| -r.value).fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::NonConvergence {
            starts: runs.len(),
            best_loglik,
        });
    };
    let params = family.model(&best.best).expect("finite objective implies valid parameters");
    let loglik = -best.value;
    let k = family.dim();
    Ok(FitResult {
        family,
        params,
        loglik,
        aic: aic(k, loglik),
        bic: bic(k, m, loglik),
        converged: true,
        iterations: best.iterations,
        sample_size: m,
        starts: records,
    })
}

pub fn mle_pe(data: &Dataset) -> Result<FitResult> {
    fit(Family::Pe, data, &FitOptions::default())
}

pub fn mle_gpe(data: &Dataset) -> Result<FitResult> {
    fit(Family::Gpe, data, &FitOptions::default())
}

pub fn mle_with(family: Family, data: &Dataset, opts: &FitOptions) -> Result<FitResult> {
    fit(family, data, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::SampleMode;

    fn synthetic(t: f64, l: f64, m: usize, seed: u64) -> Dataset {
        let p = PEParams::new(t, l).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs = (0..m).map(|_| p.sample(&mut rng, SampleMode::Inverse)).collect();
        Dataset::new(xs, "synthetic", "PE draw").unwrap()
    }

    #[test]
    fn csv_parsing() {
        let d = Dataset::parse_csv("# note\ntime\n1.5\n\n2 # trailing\n3\n", "t", "mem").unwrap();
        assert_eq!(d.values(), &[1.5, 2.0, 3.0]);
        assert!(Dataset::parse_csv("x\ny\n1\n", "t", "mem").is_err());
        assert!(Dataset::parse_csv("1\n-2\n", "t", "mem").is_err());
        assert!(Dataset::parse_csv("# only\n", "t", "mem").is_err());
    }

    #[test]
    fn loglik_identities() {
        let p = PEParams::new(2.0, 0.5).unwrap();
        assert_eq!(loglik_pe(&[1.3], &p).unwrap(), p.ln_pdf(1.3));
        let g = GPEParams::new(2.0, 0.5, 1.0).unwrap();
        let xs = [0.2, 1.0, 4.0];
        assert!((loglik_gpe(&xs, &g).unwrap() - loglik_pe(&xs, &p).unwrap()).abs() < 1e-12);
        assert!(loglik_pe(&[1.0, 0.0], &p).is_err());
        let big = PEParams::new(49.00702, 0.02691199).unwrap();
        assert!(loglik_pe(&[0.01, 5.0, 300.0, 2000.0], &big).unwrap().is_finite());
    }

    #[test]
    fn simplified_surrogate() {
        let g = GPEParams::new(4.99354, 0.02863, 0.4018).unwrap();
        let p = simplified_pe_from_gpe(&g);
        assert!((p.theta() - 2.0064).abs() < 1e-3);
        assert_eq!(p.lambda(), 0.02863);
    }

    #[test]
    fn recovers_pe_and_nests() {
        let d = synthetic(1.0, 0.5, 5000, 11);
        let pe = mle_pe(&d).unwrap();
        let p = pe.pe().unwrap();
        assert!((p.theta() - 1.0).abs() < 0.15, "{p:?}");
        assert!((p.lambda() - 0.5).abs() < 0.075, "{p:?}");
        assert!(pe.starts.iter().all(|s| pe.loglik >= s.start_loglik));
        let gpe = mle_gpe(&d).unwrap();
        assert!(gpe.loglik >= pe.loglik - 1e-6);
        assert!((pe.aic - (4.0 - 2.0 * pe.loglik)).abs() < 1e-9);
    }

    #[test]
    fn scale_equivariance() {
        let d = synthetic(3.0, 2.0, 800, 3);
        let a = mle_pe(&d).unwrap().pe().unwrap();
        let b = mle_pe(&d.scaled(10.0).unwrap()).unwrap().pe().unwrap();
        assert!((b.theta() / a.theta() - 1.0).abs() < 0.01);
        assert!((b.lambda() * 10.0 / a.lambda() - 1.0).abs() < 0.01);
    }
}
