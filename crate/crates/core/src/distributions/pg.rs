use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use super::pe::PEParams;
use super::ztp::ZtpSampler;
use super::SampleMode;
use crate::error::{check_positive, Error, Result};

/// Poisson-Geometric law: the maximum of `N ~ ZTP(θ)` independent
/// Geometric(p) counts on `{1, 2, ...}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PGParams {
    theta: f64,
    p: f64,
}

impl PGParams {
    pub fn new(theta: f64, p: f64) -> Result<Self> {
        check_positive("theta", theta)?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p,
                reason: "must lie in (0, 1)",
            });
        }
        Ok(Self { theta, p })
    }

    /// The scaled family `PG(θ, λ/n)` used for the PE limit.
    pub fn scaled(theta: f64, lambda: f64, n: f64) -> Result<Self> {
        check_positive("lambda", lambda)?;
        if !(n > lambda) {
            return Err(Error::Hypothesis {
                theorem: "PG scaling",
                message: format!("needs n > λ, got n = {n}, λ = {lambda}"),
            });
        }
        Self::new(theta, lambda / n)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    /// `-ln q`, the rate of the continuous PE whose ceiling is this law.
    pub fn log_rate(&self) -> f64 {
        -(-self.p).ln_1p()
    }

    /// `PE(θ, -ln q)`; this law is its ceiling.
    pub fn continuous(&self) -> PEParams {
        PEParams::new(self.theta, self.log_rate()).expect("positive rate")
    }

    pub fn pmf(&self, y: u64) -> Result<f64> {
        if y < 1 {
            return Err(Error::Domain("PG support starts at y = 1".into()));
        }
        Ok(self.pmf_unchecked(y))
    }

    pub(crate) fn pmf_unchecked(&self, y: u64) -> f64 {
        let lq = (-self.p).ln_1p();
        let qy1 = ((y - 1) as f64 * lq).exp();
        let qy = qy1 * self.q();
        // e^{-θq^y}(1 - e^{-θ q^{y-1} p})
        (-self.theta * qy).exp() * -(-self.theta * qy1 * self.p).exp_m1() / -(-self.theta).exp_m1()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y < 1.0 {
            return 0.0;
        }
        self.continuous().cdf(y.floor())
    }

    pub fn sf(&self, y: f64) -> f64 {
        if y < 1.0 {
            return 1.0;
        }
        self.continuous().sf(y.floor())
    }

    /// Smallest `y` with `cdf(y) ≥ u`.
    pub fn quantile(&self, u: f64) -> Result<u64> {
        let x = self.continuous().quantile(u)?;
        Ok((x.ceil() as u64).max(1))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, mode: SampleMode) -> u64 {
        match mode {
            SampleMode::Inverse => {
                let u: f64 = rng.random();
                let x = self.continuous().quantile_split(u, 1.0 - u);
                (x.ceil() as u64).max(1)
            }
            SampleMode::MaxConstruction => self.sampler().sample(rng),
        }
    }

    pub fn sampler(&self) -> PgSampler {
        PgSampler {
            ztp: ZtpSampler::new(self.theta),
            geom: Geometric::new(self.p).expect("p in (0,1)"),
        }
    }

    /// Mean by summing the survival function.
    pub fn mean(&self) -> f64 {
        let pe = self.continuous();
        let mut s = 0.0;
        let mut y = 0.0;
        loop {
            let t = pe.sf(y);
            s += t;
            if t < 1e-17 * s.max(1.0) {
                break;
            }
            y += 1.0;
        }
        s
    }
}

/// Max-of-geometrics sampler with a cached latent-count table.
#[derive(Debug, Clone)]
pub struct PgSampler {
    ztp: ZtpSampler,
    geom: Geometric,
}

impl PgSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let n = self.ztp.sample(rng);
        let mut m = 0u64;
        for _ in 0..n {
            m = m.max(self.geom.sample(rng) + 1);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_substitution() {
        let d = PGParams::new(1.0, 0.5).unwrap();
        let expect = ((-0.5f64).exp() - (-1f64).exp()) / (1.0 - (-1f64).exp());
        assert!((d.pmf(1).unwrap() - expect).abs() < 1e-15);
        assert!(d.pmf(0).is_err());
    }

    #[test]
    fn telescoping() {
        for &(t, p) in &[(1.0, 0.5), (49.0, 0.001), (0.3, 0.9)] {
            let d = PGParams::new(t, p).unwrap();
            let top = d.quantile(1.0 - 1e-11).unwrap();
            let mut s = 0.0;
            for y in 1..=top {
                let m = d.pmf(y).unwrap();
                assert!(m >= 0.0);
                assert!((d.cdf(y as f64) - d.cdf(y as f64 - 1.0) - m).abs() < 1e-14);
                s += m;
            }
            assert!((s - 1.0).abs() < 1e-10, "θ={t} p={p}: {s}");
        }
        assert!((PGParams::new(1.0, 0.5).unwrap().cdf(1e4) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quantile_is_generalized_inverse() {
        let d = PGParams::new(3.0, 0.2).unwrap();
        for i in 1..100 {
            let u = i as f64 / 100.0;
            let y = d.quantile(u).unwrap();
            assert!(d.cdf(y as f64) >= u - 1e-14);
            assert!(y == 1 || d.cdf(y as f64 - 1.0) < u);
        }
    }

    #[test]
    fn scaled_requires_n_above_lambda() {
        assert!(PGParams::scaled(1.0, 2.0, 1.5).is_err());
        let d = PGParams::scaled(1.0, 2.0, 100.0).unwrap();
        assert!((d.p() - 0.02).abs() < 1e-15);
    }
}
