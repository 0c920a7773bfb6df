//! Standardization functions that put the discrete PG operator and the PE
//! operator on a common scale.

use serde::Serialize;

use crate::error::{check_positive, Error, Result};

use super::SteinSolution;

/// `(θ, λ, n)` with `n > λ`, defining `c(z)` and `d(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardizationPair {
    theta: f64,
    lambda: f64,
    n: f64,
}

impl StandardizationPair {
    pub fn new(theta: f64, lambda: f64, n: u64) -> Result<Self> {
        check_positive("theta", theta)?;
        check_positive("lambda", lambda)?;
        let nf = n as f64;
        if !(nf > lambda) {
            return Err(Error::Domain(format!("standardization needs n > λ, got n = {n}, λ = {lambda}")));
        }
        Ok(Self {
            theta,
            lambda,
            n: nf,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    /// `e^{-λz - θe^{-λz}}`.
    pub fn kernel(&self, z: f64) -> f64 {
        (-self.lambda * z - self.theta * (-self.lambda * z).exp()).exp()
    }

    /// `c(z) = (λθ/n²) e^{-λz - θe^{-λz}}`.
    pub fn c(&self, z: f64) -> f64 {
        self.lambda * self.theta / (self.n * self.n) * self.kernel(z)
    }

    /// `ρ(z) = c'(z)/c(z) = λ(θe^{-λz} - 1)`.
    pub fn rho(&self, z: f64) -> f64 {
        self.lambda * (self.theta * (-self.lambda * z).exp() - 1.0)
    }

    pub fn dc(&self, z: f64) -> f64 {
        self.c(z) * self.rho(z)
    }

    /// `c'' = c(ρ² + ρ')` with `ρ' = -λ²θe^{-λz}`.
    pub fn d2c(&self, z: f64) -> f64 {
        let rho = self.rho(z);
        let drho = -self.lambda * self.lambda * self.theta * (-self.lambda * z).exp();
        self.c(z) * (rho * rho + drho)
    }

    /// `d(z) = e^{-θq^{nz}} - e^{-θq^{nz-1}}` with `q = 1 - λ/n`.
    pub fn d(&self, z: f64) -> f64 {
        let lq = (-self.lambda / self.n).ln_1p();
        let qnz = (self.n * z * lq).exp();
        let qnz1 = ((self.n * z - 1.0) * lq).exp();
        // e^{-θq^{nz}}(1 - e^{-θq^{nz-1}λ/n})
        (-self.theta * qnz).exp() * -(-self.theta * qnz1 * self.lambda / self.n).exp_m1()
    }
}

/// `g = f/c` and its first two derivatives on the solution grid.
#[derive(Debug, Clone, Serialize)]
pub struct StandardizedSolution {
    pub z: Vec<f64>,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    pub d2g: Vec<f64>,
}

/// Builds `g = f/c`, `g' = (f' - ρf)/c` and `g'' = (f'' - c''g - 2c'g')/c`.
pub fn standardized_solution_g(sp: &StandardizationPair, sol: &SteinSolution) -> Result<StandardizedSolution> {
    let p = sol.params();
    if p.theta() != sp.theta || p.lambda() != sp.lambda {
        return Err(Error::Domain("standardization pair and solution use different parameters".into()));
    }
    let mut out = StandardizedSolution {
        z: sol.grid.clone(),
        g: Vec::with_capacity(sol.grid.len()),
        dg: Vec::with_capacity(sol.grid.len()),
        d2g: Vec::with_capacity(sol.grid.len()),
    };
    for (i, &z) in sol.grid.iter().enumerate() {
        let c = sp.c(z);
        let g = sol.f[i] / c;
        let dg = (sol.df[i] - sp.rho(z) * sol.f[i]) / c;
        let d2g = (sol.d2f[i] - sp.d2c(z) * g - 2.0 * sp.dc(z) * dg) / c;
        out.g.push(g);
        out.dg.push(dg);
        out.d2g.push(d2g);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::PEParams;
    use crate::stein::{default_grid, solve_stein_pe, TestFunction};

    #[test]
    fn c_definition_and_d_positive() {
        let sp = StandardizationPair::new(1.0, 1.0, 100).unwrap();
        for i in 1..1000 {
            let z = i as f64 * 0.01;
            assert!((sp.c(z) * 1e4 - sp.kernel(z)).abs() < 1e-15);
            assert!(sp.d(z) > 0.0);
        }
        assert!(StandardizationPair::new(1.0, 2.0, 2).is_err());
    }

    #[test]
    fn d_over_nc_tends_to_one() {
        let mut prev = f64::INFINITY;
        for &n in &[100u64, 1000, 10_000, 100_000] {
            let sp = StandardizationPair::new(1.3, 0.8, n).unwrap();
            let gap = (sp.d(1.7) / (sp.n() * sp.c(1.7)) - 1.0).abs();
            assert!(gap < prev);
            assert!(gap < 5.0 / n as f64);
            prev = gap;
        }
    }

    #[test]
    fn g_reconstructs_f_and_solves_standardized_equation() {
        let p = PEParams::new(1.0, 1.0).unwrap();
        let sp = StandardizationPair::new(1.0, 1.0, 50).unwrap();
        let grid = default_grid(&p, 200).unwrap();
        let sol = solve_stein_pe(&p, &TestFunction::reciprocal(), &grid).unwrap();
        let st = standardized_solution_g(&sp, &sol).unwrap();
        for i in 0..grid.len() {
            let z = grid[i];
            let c = sp.c(z);
            assert!((c * st.g[i] - sol.f[i]).abs() < 1e-10 * sol.f[i].abs().max(1.0));
            assert!((sp.dc(z) * st.g[i] - sp.rho(z) * sol.f[i]).abs() < 1e-10 * sol.f[i].abs().max(1.0));
            // (cg)' + ρcg = h̃
            let lhs = c * st.dg[i] + sp.dc(z) * st.g[i] + sp.rho(z) * c * st.g[i];
            assert!((lhs - sol.solver().h_tilde(z)).abs() < 1e-6);
        }
    }
}
