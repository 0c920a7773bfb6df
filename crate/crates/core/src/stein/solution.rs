//! Solution of the PE Stein equation `f' + ρf = h - Eh`.
//!
//! `f(x) = (1/p(x)) ∫₀ˣ h̃ p = -(1/p(x)) ∫ₓ^∞ h̃ p`. Each form is evaluated by
//! quadrature of `h̃(t) p(t)/p(x)`, with the density ratio formed in log
//! space; the lower form is used left of the median and the upper one right of
//! it, so neither divides a vanishing integral by a vanishing density.

use crate::distributions::PEParams;
use crate::error::Result;
use crate::numeric::{fd, geomspace, integrate_pieces, linspace, Tolerance};

use super::TestFunction;

/// Pointwise evaluator of the Stein solution for one `(params, h)` pair.
#[derive(Debug, Clone)]
pub struct SteinSolver {
    params: PEParams,
    h: TestFunction,
    eh: f64,
    median: f64,
    centered_norm: f64,
}

impl SteinSolver {
    pub fn new(params: PEParams, h: TestFunction) -> Result<Self> {
        let median = params.quantile(0.5)?;
        let q1 = params.quantile(0.25)?;
        let q3 = params.quantile(0.75)?;
        let mut breaks = h.breaks().to_vec();
        breaks.extend([q1, median, q3]);
        let eh = integrate_pieces(
            |x| h.eval(x) * params.pdf(x),
            0.0,
            f64::INFINITY,
            &breaks,
            Tolerance::new(1e-16, 1e-14),
        )?
        .value;
        let centered_norm = h.centered_norm(eh);
        Ok(Self {
            params,
            h,
            eh,
            median,
            centered_norm,
        })
    }

    pub fn params(&self) -> &PEParams {
        &self.params
    }

    pub fn test_function(&self) -> &TestFunction {
        &self.h
    }

    /// `E h(X)` under the PE law.
    pub fn eh(&self) -> f64 {
        self.eh
    }

    /// `‖h̃‖` used by the bounds.
    pub fn centered_norm(&self) -> f64 {
        self.centered_norm
    }

    pub fn h_tilde(&self, x: f64) -> f64 {
        self.h.eval(x) - self.eh
    }

    fn tolerance(&self) -> Tolerance {
        let scale = self.centered_norm.max(self.h.sup_norm()).max(1e-300) / self.params.lambda();
        Tolerance::new(1e-15 * scale, 1e-13)
    }

    /// `p(t)/p(x)` in log space: `λ(x - t) - θe^{-λx}(e^{λ(x-t)} - 1)`.
    fn ratio(&self, t: f64, x: f64) -> f64 {
        let (th, l) = (self.params.theta(), self.params.lambda());
        let d = l * (x - t);
        (d - th * (-l * x).exp() * d.exp_m1()).exp()
    }

    /// Lower form `(1/p(x)) ∫₀ˣ h̃ p`.
    pub fn f_lower(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        let r = integrate_pieces(|t| self.h_tilde(t) * self.ratio(t, x), 0.0, x, self.h.breaks(), self.tolerance())?;
        Ok(r.value)
    }

    /// Upper form `-(1/p(x)) ∫ₓ^∞ h̃ p`.
    pub fn f_upper(&self, x: f64) -> Result<f64> {
        let x = x.max(0.0);
        let r = integrate_pieces(
            |t| self.h_tilde(t) * self.ratio(t, x),
            x,
            f64::INFINITY,
            self.h.breaks(),
            self.tolerance(),
        )?;
        Ok(-r.value)
    }

    pub fn f(&self, x: f64) -> Result<f64> {
        if x <= self.median {
            self.f_lower(x)
        } else {
            self.f_upper(x)
        }
    }

    /// `f' = h̃ - ρf`, read off the equation itself.
    pub fn df(&self, x: f64) -> Result<f64> {
        Ok(self.h_tilde(x) - self.params.score(x) * self.f(x)?)
    }

    /// `f'' = h' - ρf' + λ²θe^{-λx} f`.
    pub fn d2f(&self, x: f64) -> Result<f64> {
        let f = self.f(x)?;
        let rho = self.params.score(x);
        let df = self.h_tilde(x) - rho * f;
        let (th, l) = (self.params.theta(), self.params.lambda());
        Ok(self.h.deriv(x) - rho * df + l * l * th * (-l * x).exp() * f)
    }

    /// Finite-difference step suited to the scale of `p` and `h`.
    pub fn fd_step(&self) -> f64 {
        let (th, l) = (self.params.theta(), self.params.lambda());
        1e-3 * (1.0f64).min(1.0 / (l * (1.0 + th)))
    }

    pub fn solve(&self, grid: &[f64]) -> Result<SteinSolution> {
        let mut f = Vec::with_capacity(grid.len());
        let mut df = Vec::with_capacity(grid.len());
        let mut d2f = Vec::with_capacity(grid.len());
        let (th, l) = (self.params.theta(), self.params.lambda());
        for &x in grid {
            let fx = self.f(x)?;
            let rho = self.params.score(x);
            let dfx = self.h_tilde(x) - rho * fx;
            f.push(fx);
            df.push(dfx);
            d2f.push(self.h.deriv(x) - rho * dfx + l * l * th * (-l * x).exp() * fx);
        }
        Ok(SteinSolution {
            solver: self.clone(),
            grid: grid.to_vec(),
            f,
            df,
            d2f,
        })
    }
}

/// Default verification grid: a geometric and a uniform grid of `n/2` points
/// each, merged, between the `1e-10` and `1 - 1e-10` quantiles.
pub fn default_grid(params: &PEParams, n: usize) -> Result<Vec<f64>> {
    let lo = params.quantile(1e-10)?;
    let hi = params.quantile_split(1.0 - 1e-10, 1e-10);
    let mut g = geomspace(lo, hi, n / 2);
    g.extend(linspace(lo, hi, n - n / 2));
    g.sort_by(f64::total_cmp);
    g.dedup();
    Ok(g)
}

/// The Stein solution tabulated on a grid.
#[derive(Debug, Clone)]
pub struct SteinSolution {
    solver: SteinSolver,
    pub grid: Vec<f64>,
    pub f: Vec<f64>,
    pub df: Vec<f64>,
    pub d2f: Vec<f64>,
}

impl SteinSolution {
    pub fn solver(&self) -> &SteinSolver {
        &self.solver
    }

    pub fn params(&self) -> &PEParams {
        &self.solver.params
    }

    pub fn eh(&self) -> f64 {
        self.solver.eh
    }

    pub fn centered_norm(&self) -> f64 {
        self.solver.centered_norm
    }

    /// Largest `|f'_fd + ρf - h̃|` over the grid, with `f'` from a 4th-order
    /// finite difference of the pointwise solution. Grid points that sit on a
    /// jump of `h` are skipped.
    pub fn residual_max(&self) -> Result<f64> {
        let step = self.solver.fd_step();
        let breaks = self.solver.h.breaks();
        let f = |x: f64| self.solver.f(x).unwrap_or(f64::NAN);
        let mut worst = 0.0f64;
        for (i, &x) in self.grid.iter().enumerate() {
            let Some(d) = fd::derivative(&f, x, step, breaks) else {
                continue;
            };
            let r = (d + self.solver.params.score(x) * self.f[i] - self.solver.h_tilde(x)).abs();
            if r.is_nan() {
                return Ok(f64::NAN);
            }
            worst = worst.max(r);
        }
        Ok(worst)
    }

    /// Largest gap between the two integral forms at grid points between the
    /// 1% and 99% quantiles, scaled by `max(1, |f|)`. Outside that band one of
    /// the forms divides a cancelling integral by a vanishing density.
    pub fn forms_gap(&self) -> Result<f64> {
        let p = self.solver.params;
        let (lo, hi) = (p.quantile(0.01)?, p.quantile(0.99)?);
        let mut worst = 0.0f64;
        for &x in self.grid.iter().filter(|&&x| x >= lo && x <= hi) {
            let a = self.solver.f_lower(x)?;
            let b = self.solver.f_upper(x)?;
            worst = worst.max((a - b).abs() / a.abs().max(1.0));
        }
        Ok(worst)
    }
}

/// Solves the PE Stein equation for `h` on `grid`.
pub fn solve_stein_pe(params: &PEParams, h: &TestFunction, grid: &[f64]) -> Result<SteinSolution> {
    SteinSolver::new(*params, h.clone())?.solve(grid)
}

/// `E[f'(X) + ρ(X) f(X)]` under `X ~ PE`, with `f'` taken by finite
/// differences of the supplied `f`. The integral stops at the `1 - 1e-15`
/// quantile.
pub fn operator_expectation<F: Fn(f64) -> f64>(params: &PEParams, f: F, breaks: &[f64], step: f64) -> Result<f64> {
    let median = params.quantile(0.5)?;
    let top = params.quantile_split(1.0 - 1e-15, 1e-15);
    let integrand = |x: f64| {
        let p = params.pdf(x);
        if p == 0.0 {
            return 0.0;
        }
        match fd::derivative(&f, x, step, breaks) {
            Some(d) => (d + params.score(x) * f(x)) * p,
            None => 0.0,
        }
    };
    let mut cuts = breaks.to_vec();
    cuts.push(median);
    Ok(integrate_pieces(integrand, 0.0, top, &cuts, Tolerance::new(1e-10, 1e-9))?.value)
}

/// `E[𝒯f(X)]` for a tabulated solution, which vanishes for genuine solutions.
pub fn check_mean_zero(sol: &SteinSolution) -> Result<f64> {
    let solver = sol.solver();
    operator_expectation(
        solver.params(),
        |x| solver.f(x).unwrap_or(f64::NAN),
        solver.test_function().breaks(),
        solver.fd_step(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pe(t: f64, l: f64) -> PEParams {
        PEParams::new(t, l).unwrap()
    }

    #[test]
    fn constant_h_gives_zero_solution() {
        let p = pe(1.0, 1.0);
        let grid = default_grid(&p, 100).unwrap();
        let s = solve_stein_pe(&p, &TestFunction::constant(0.7), &grid).unwrap();
        assert!(s.f.iter().all(|&v| v.abs() < 1e-14));
    }

    #[test]
    fn exp_h_mean_zero_and_residual() {
        let p = pe(1.0, 1.0);
        let grid = default_grid(&p, 200).unwrap();
        let s = solve_stein_pe(&p, &TestFunction::exp_decay(), &grid).unwrap();
        assert!(check_mean_zero(&s).unwrap().abs() < 1e-6);
        assert!(s.residual_max().unwrap() < 1e-7);
        let gap = s.forms_gap().unwrap();
        assert!(gap < 1e-7, "{gap}");
    }

    #[test]
    fn indicator_mean_zero() {
        let p = pe(1.0, 1.0);
        let grid = default_grid(&p, 200).unwrap();
        let s = solve_stein_pe(&p, &TestFunction::indicator(1.0), &grid).unwrap();
        assert!(check_mean_zero(&s).unwrap().abs() < 1e-5);
        assert!(s.residual_max().unwrap() < 1e-7);
    }

    #[test]
    fn zero_function_has_zero_expectation() {
        let p = pe(2.0, 0.5);
        assert_eq!(operator_expectation(&p, |_| 0.0, &[], 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn negative_control_outside_stein_class() {
        // f = F/p solves 𝒯f = 1, and f·p does not vanish at infinity.
        let p = pe(1.0, 1.0);
        let v = operator_expectation(&p, |x| p.cdf(x) / p.pdf(x), &[], 1e-3).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{v}");
    }
}
