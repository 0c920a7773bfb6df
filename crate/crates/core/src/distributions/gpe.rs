use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::pe::{check_unit, PEParams};
use crate::error::{check_positive, Result};
use crate::numeric::{integrate_pieces, Tolerance};

/// Generalized Poisson-Exponential law with cdf `F_PE(x)^β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GPEParams {
    theta: f64,
    lambda: f64,
    beta: f64,
}

impl GPEParams {
    pub fn new(theta: f64, lambda: f64, beta: f64) -> Result<Self> {
        Ok(Self {
            theta: check_positive("theta", theta)?,
            lambda: check_positive("lambda", lambda)?,
            beta: check_positive("beta", beta)?,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The β = 1 member with the same θ and λ.
    pub fn base(&self) -> PEParams {
        PEParams::new(self.theta, self.lambda).expect("validated at construction")
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 || x.is_nan() {
            return 0.0;
        }
        self.ln_pdf(x).exp()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 || x.is_nan() {
            return f64::NEG_INFINITY;
        }
        let pe = self.base();
        let lf = if self.beta == 1.0 { 0.0 } else { (self.beta - 1.0) * pe.ln_cdf(x) };
        self.beta.ln() + lf + pe.ln_pdf(x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 || x.is_nan() {
            return 0.0;
        }
        let pe = self.base();
        if self.beta == 1.0 {
            return pe.cdf(x);
        }
        (self.beta * pe.ln_cdf(x)).exp()
    }

    pub fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 || x.is_nan() {
            return 1.0;
        }
        let pe = self.base();
        if self.beta == 1.0 {
            return pe.sf(x);
        }
        // 1 - F^β = -expm1(β ln F), ln F = ln1p(-sf_PE)
        let s = pe.sf(x);
        let lf = if s < 0.5 { (-s).ln_1p() } else { pe.ln_cdf(x) };
        -(self.beta * lf).exp_m1()
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_unit(u)?;
        let pe = self.base();
        if u == 0.0 {
            return Ok(0.0);
        }
        let ub = (u.ln() / self.beta).exp();
        let vb = -((-(1.0 - u)).ln_1p() / self.beta).exp_m1();
        Ok(pe.quantile_split(ub, vb))
    }

    /// Sampling by inversion.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.quantile(u).unwrap_or(0.0)
    }

    /// Upper bound on the mean; β = 1 takes the first branch.
    pub fn mean_upper(&self) -> f64 {
        let (t, l, b) = (self.theta, self.lambda, self.beta);
        let ln_norm = (-(-t).exp_m1()).ln();
        if b >= 1.0 {
            b * t / (l * (b * ln_norm).exp())
        } else {
            (b * t.ln() - t * (b - 1.0) + ln_gamma(b + 1.0) - b * b.ln() - l.ln() - b * ln_norm).exp()
        }
    }

    /// Mean by quadrature of the survival function.
    pub fn mean(&self) -> Result<f64> {
        let med = self.quantile(0.5)?;
        let r = integrate_pieces(|x| self.sf(x), 0.0, f64::INFINITY, &[med], Tolerance::new(1e-13 / self.lambda, 1e-11))?;
        Ok(r.value)
    }

    /// Score `(ln p)'(x) = λθw[β + (β - 1)/(e^{θ(1-w)} - 1)] - λ`, `w = e^{-λx}`.
    pub fn score(&self, x: f64) -> f64 {
        let (t, l, b) = (self.theta, self.lambda, self.beta);
        let w = (-l * x).exp();
        let a = t * -(-l * x).exp_m1();
        l * t * w * (b + (b - 1.0) / a.exp_m1()) - l
    }

    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        data.iter().map(|&x| self.ln_pdf(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_one_is_pe() {
        let g = GPEParams::new(2.3, 0.4, 1.0).unwrap();
        let p = g.base();
        for i in 0..500 {
            let x = i as f64 * 0.05;
            assert!((g.cdf(x) - p.cdf(x)).abs() < 1e-12);
            assert!((g.pdf(x) - p.pdf(x)).abs() < 1e-12);
        }
        assert_eq!(g.mean_upper(), p.mean_upper());
    }

    #[test]
    fn integrates_to_one() {
        for &b in &[0.4, 1.0, 2.9] {
            let g = GPEParams::new(4.0, 0.03, b).unwrap();
            let med = g.quantile(0.5).unwrap();
            let r = integrate_pieces(|x| g.pdf(x), 0.0, f64::INFINITY, &[med], Tolerance::new(1e-13, 1e-12)).unwrap();
            assert!((r.value - 1.0).abs() < 1e-8, "β={b}: {}", r.value);
        }
    }

    #[test]
    fn cdf_monotone_and_quantile_round_trip() {
        let g = GPEParams::new(0.97, 0.0269, 0.4018).unwrap();
        let mut prev = 0.0;
        for i in 0..10_000 {
            let c = g.cdf(i as f64 * 0.05);
            assert!(c >= prev);
            prev = c;
        }
        for i in 0..1000 {
            let u = i as f64 / 1000.0;
            let x = g.quantile(u).unwrap();
            assert!((g.cdf(x) - u).abs() < 1e-10);
        }
    }

    #[test]
    fn mean_upper_values() {
        let g = GPEParams::new(1.0, 1.0, 2.0).unwrap();
        let e = 1.0 - (-1f64).exp();
        assert!((g.mean_upper() - 2.0 / (e * e)).abs() < 1e-12);
        assert!((g.mean_upper() - 5.0060).abs() < 1e-3);
    }

    #[test]
    fn score_matches_log_density_slope() {
        let g = GPEParams::new(3.0, 0.5, 2.7).unwrap();
        for &x in &[0.1, 1.0, 4.0, 9.0] {
            let h = 1e-5;
            let fd = (g.ln_pdf(x + h) - g.ln_pdf(x - h)) / (2.0 * h);
            assert!((fd - g.score(x)).abs() < 1e-7);
        }
    }
}
