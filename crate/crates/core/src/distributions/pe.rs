use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::ztp::ZtpSampler;
use super::SampleMode;
use crate::error::{check_positive, Error, Result};
use crate::numeric::{integrate_pieces, Tolerance};

/// Poisson-Exponential law: the maximum of `N ~ ZTP(θ)` independent
/// `Exp(λ)` lifetimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PEParams {
    theta: f64,
    lambda: f64,
}

impl PEParams {
    pub fn new(theta: f64, lambda: f64) -> Result<Self> {
        Ok(Self {
            theta: check_positive("theta", theta)?,
            lambda: check_positive("lambda", lambda)?,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `1 - e^{-θ}`.
    #[inline]
    pub(crate) fn norm(&self) -> f64 {
        -(-self.theta).exp_m1()
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
        let w = (-self.lambda * x).exp();
        self.theta.ln() + self.lambda.ln() - self.lambda * x - self.theta * w - self.norm().ln()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 || x.is_nan() {
            return 0.0;
        }
        if x.is_infinite() {
            return 1.0;
        }
        // e^{-θw}(1 - e^{-θ(1-w)}) with 1 - w = -expm1(-λx)
        let w = (-self.lambda * x).exp();
        let one_minus_w = -(-self.lambda * x).exp_m1();
        let v = (-self.theta * w).exp() * (-(-self.theta * one_minus_w).exp_m1()) / self.norm();
        v.min(1.0)
    }

    /// `ln F(x)`, accurate in the far left tail.
    pub fn ln_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 || x.is_nan() {
            return f64::NEG_INFINITY;
        }
        let w = (-self.lambda * x).exp();
        let one_minus_w = -(-self.lambda * x).exp_m1();
        let lv = -self.theta * w + (-(-self.theta * one_minus_w).exp_m1()).ln() - self.norm().ln();
        lv.min(0.0)
    }

    /// Survival function `1 - F(x)`, accurate in the right tail.
    pub fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 || x.is_nan() {
            return 1.0;
        }
        let w = (-self.lambda * x).exp();
        (-(-self.theta * w).exp_m1() / self.norm()).min(1.0)
    }

    /// Inverse cdf. `u = 1` is rejected because the quantile is infinite.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_unit(u)?;
        Ok(self.quantile_split(u, 1.0 - u))
    }

    /// Quantile from the pair `(u, 1 - u)`; the complement is used directly
    /// in the upper half so callers can pass it without rounding.
    pub(crate) fn quantile_split(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if v <= 0.0 {
            return f64::INFINITY;
        }
        let (t, l) = (self.theta, self.lambda);
        if u <= 0.5 {
            if t < 700.0 {
                let w_compl = (u * t.exp_m1()).ln_1p() / t;
                -(-w_compl).ln_1p() / l
            } else {
                let w = -(u * self.norm() + (-t).exp()).ln() / t;
                -w.ln() / l
            }
        } else {
            let big_l = -(-v * self.norm()).ln_1p();
            (t.ln() - big_l.ln()) / l
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, mode: SampleMode) -> f64 {
        match mode {
            SampleMode::Inverse => self.sample_inverse(rng),
            SampleMode::MaxConstruction => self.sampler().sample_max(rng),
        }
    }

    pub(crate) fn sample_inverse<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.quantile_split(u, 1.0 - u)
    }

    /// Reusable sampler that caches the ZTP table for the max construction.
    pub fn sampler(&self) -> PeSampler {
        PeSampler {
            params: *self,
            ztp: ZtpSampler::new(self.theta),
        }
    }

    /// `θ / (λ(1 - e^{-θ}))`, the expected sum of the latent lifetimes.
    pub fn mean_upper(&self) -> f64 {
        self.theta / (self.lambda * self.norm())
    }

    /// Mean by quadrature of the survival function.
    pub fn mean(&self) -> Result<f64> {
        let med = self.quantile_split(0.5, 0.5);
        let r = integrate_pieces(|x| self.sf(x), 0.0, f64::INFINITY, &[med], Tolerance::new(1e-13 / self.lambda, 1e-11))?;
        Ok(r.value)
    }

    /// Hazard `p(x) / (1 - F(x))`; strictly increasing in `x`.
    pub fn failure_rate(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("failure rate needs x > 0, got {x}")));
        }
        let w = (-self.lambda * x).exp();
        let tw = self.theta * w;
        Ok(self.theta * self.lambda * w * (-tw).exp() / (-(-tw).exp_m1()))
    }

    /// Score `ρ(x) = (ln p)'(x) = λ(θe^{-λx} - 1)`.
    pub fn score(&self, x: f64) -> f64 {
        self.lambda * (self.theta * (-self.lambda * x).exp() - 1.0)
    }

    /// Log-likelihood of a sample; `-∞` if any point is off the support.
    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        data.iter().map(|&x| self.ln_pdf(x)).sum()
    }
}

pub(crate) fn check_unit(u: f64) -> Result<()> {
    if u == 1.0 {
        return Err(Error::Domain("quantile at u = 1 is infinite".into()));
    }
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Domain(format!("quantile level must lie in [0, 1), got {u}")));
    }
    Ok(())
}

/// PE sampler holding the latent-count table.
#[derive(Debug, Clone)]
pub struct PeSampler {
    params: PEParams,
    ztp: ZtpSampler,
}

impl PeSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, mode: SampleMode) -> f64 {
        match mode {
            SampleMode::Inverse => self.params.sample_inverse(rng),
            SampleMode::MaxConstruction => self.sample_max(rng),
        }
    }

    fn sample_max<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let n = self.ztp.sample(rng);
        let mut m = 0.0f64;
        for _ in 0..n {
            let e: f64 = rng.sample(Exp1);
            m = m.max(e);
        }
        m / self.params.lambda
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::roots::bisect_monotone;

    fn pe(t: f64, l: f64) -> PEParams {
        PEParams::new(t, l).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(PEParams::new(0.0, 1.0).is_err());
        assert!(PEParams::new(1.0, -1.0).is_err());
        assert!(PEParams::new(f64::NAN, 1.0).is_err());
        assert!(PEParams::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn support_edges() {
        let d = pe(1.0, 1.0);
        assert_eq!(d.pdf(0.0), 0.0);
        assert_eq!(d.pdf(-1.0), 0.0);
        assert_eq!(d.cdf(0.0), 0.0);
        assert_eq!(d.cdf(-3.0), 0.0);
        assert!(d.pdf(800.0) < 1e-300);
        assert!((d.cdf(60.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exponential_limit() {
        let d = pe(1e-9, 1.0);
        assert!((d.pdf(1.0) - (-1f64).exp()).abs() < 1e-6);
        assert!((d.mean_upper() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn density_integrates_to_one() {
        for &(t, l) in &[(0.1, 1.0), (1.0, 1.0), (5.0, 0.01), (49.27, 0.027), (0.97, 0.0269)] {
            let d = pe(t, l);
            let med = d.quantile(0.5).unwrap();
            let r = integrate_pieces(|x| d.pdf(x), 0.0, f64::INFINITY, &[med], Tolerance::new(1e-13, 1e-12)).unwrap();
            assert!((r.value - 1.0).abs() < 1e-9, "θ={t} λ={l}: {}", r.value);
        }
    }

    #[test]
    fn quantile_round_trip_and_bisection() {
        for &(t, l) in &[(1e-4, 2.0), (1.0, 1.0), (49.27, 0.027), (800.0, 3.0)] {
            let d = pe(t, l);
            for i in 0..=999 {
                let u = i as f64 / 1000.0;
                let x = d.quantile(u).unwrap();
                assert!((d.cdf(x) - u).abs() < 1e-10, "θ={t} u={u}");
            }
        }
        let d = pe(1.0, 1.0);
        let q = d.quantile(0.5).unwrap();
        let b = bisect_monotone(|x| d.cdf(x), 0.5, 0.0, 50.0, 200);
        assert!((q - b).abs() < 1e-9);
        assert_eq!(d.quantile(0.0).unwrap(), 0.0);
        assert!(d.quantile(1.0).is_err());
        assert!(d.quantile(-0.1).is_err());
    }

    #[test]
    fn failure_rate_matches_hazard_identity() {
        let d = pe(2.0, 0.7);
        for i in 1..200 {
            let x = i as f64 * 0.05;
            let h = d.failure_rate(x).unwrap();
            assert!((h - d.pdf(x) / d.sf(x)).abs() < 1e-10 * h.max(1.0));
        }
        assert!((d.failure_rate(200.0).unwrap() - 0.7).abs() < 1e-12);
        assert!(d.failure_rate(0.0).is_err());
    }

    #[test]
    fn mean_upper_value() {
        assert!((pe(1.0, 1.0).mean_upper() - 1.581_976_706_869_326_4).abs() < 1e-12);
    }
}
