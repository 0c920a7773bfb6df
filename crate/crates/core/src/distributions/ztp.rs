use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{check_positive, Result};

/// Zero-truncated Poisson law of the latent count `N ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTPParams {
    theta: f64,
}

impl ZTPParams {
    pub fn new(theta: f64) -> Result<Self> {
        Ok(Self {
            theta: check_positive("theta", theta)?,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn pmf(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let t = self.theta;
        let nf = n as f64;
        (nf * t.ln() - t - ln_gamma(nf + 1.0) - (-(-t).exp_m1()).ln()).exp()
    }

    pub fn mean(&self) -> f64 {
        self.theta / -(-self.theta).exp_m1()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        ZtpSampler::new(self.theta).sample(rng)
    }
}

const TAIL_MASS: f64 = 1e-12;
const REJECTION_THRESHOLD: f64 = 30.0;

/// Sampler with a cumulative table for small θ and Poisson rejection above.
#[derive(Debug, Clone)]
pub struct ZtpSampler {
    cumulative: Vec<f64>,
    poisson: Option<Poisson<f64>>,
}

impl ZtpSampler {
    pub fn new(theta: f64) -> Self {
        if theta > REJECTION_THRESHOLD {
            return Self {
                cumulative: Vec::new(),
                poisson: Some(Poisson::new(theta).expect("theta is positive and finite")),
            };
        }
        // p_1 = θe^{-θ}/(1-e^{-θ}) = θ/(e^θ - 1), stable for small θ
        let mut p = theta / theta.exp_m1();
        let mut acc = 0.0;
        let mut cumulative = Vec::new();
        let mut n = 1.0;
        loop {
            acc += p;
            cumulative.push(acc);
            if 1.0 - acc < TAIL_MASS || cumulative.len() > 10_000 {
                break;
            }
            n += 1.0;
            p *= theta / n;
            if p == 0.0 {
                break;
            }
        }
        Self {
            cumulative,
            poisson: None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if let Some(pois) = &self.poisson {
            loop {
                let k = pois.sample(rng);
                if k >= 1.0 {
                    return k as u64;
                }
            }
        }
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        (idx.min(self.cumulative.len() - 1) + 1) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pmf_sums_to_one_and_mean() {
        for &t in &[0.01, 1.0, 7.5, 49.0] {
            let d = ZTPParams::new(t).unwrap();
            let (mut s, mut m) = (0.0, 0.0);
            for n in 1..400 {
                s += d.pmf(n);
                m += n as f64 * d.pmf(n);
            }
            assert!((s - 1.0).abs() < 1e-12);
            assert!((m - d.mean()).abs() < 1e-9 * d.mean());
        }
    }

    #[test]
    fn p_one_at_theta_one() {
        let d = ZTPParams::new(1.0).unwrap();
        assert!((d.pmf(1) - 0.581_976_706_869_326_4).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = ZtpSampler::new(1.0);
        let n = 1_000_000;
        let mut ones = 0u64;
        let mut sum = 0u64;
        for _ in 0..n {
            let k = s.sample(&mut rng);
            assert!(k >= 1);
            ones += (k == 1) as u64;
            sum += k;
        }
        let p1 = ones as f64 / n as f64;
        let se = (0.582 * 0.418 / n as f64).sqrt();
        assert!((p1 - d.pmf(1)).abs() < 3.0 * se);
        let var: f64 = (1..60).map(|k| (k as f64 - d.mean()).powi(2) * d.pmf(k)).sum();
        let mean = sum as f64 / n as f64;
        assert!((mean - d.mean()).abs() < 3.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn rejection_branch_is_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = ZtpSampler::new(45.0);
        let mean: f64 = (0..20_000).map(|_| s.sample(&mut rng) as f64).sum::<f64>() / 20_000.0;
        assert!((mean - 45.0).abs() < 0.3);
    }
}
