//! Closed-form right-hand sides for the Stein-solution bounds and their
//! pointwise verification on a grid.

use serde::Serialize;

use crate::distributions::PEParams;
use crate::error::Result;

use super::{standardized_solution_g, StandardizationPair, SteinSolution};

/// Absolute slack allowed before a grid point counts as a violation; it is
/// scaled up by the right-hand side when that exceeds 1.
pub const HEADROOM: f64 = 1e-6;

/// Outcome of checking one inequality at every grid point.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub passed: bool,
    pub points: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` seen (0 when rhs vanishes everywhere).
    pub max_ratio: f64,
    /// Smallest `rhs - lhs` seen.
    pub min_slack: f64,
    pub worst_x: f64,
}

impl BoundCheck {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            passed: true,
            points: 0,
            violations: 0,
            max_ratio: 0.0,
            min_slack: f64::INFINITY,
            worst_x: f64::NAN,
        }
    }

    fn record(&mut self, x: f64, lhs: f64, rhs: f64) {
        self.points += 1;
        let slack = rhs - lhs;
        let ok = lhs.is_finite() && lhs <= rhs + HEADROOM * rhs.max(1.0);
        if !ok {
            self.violations += 1;
            self.passed = false;
        }
        if rhs > 0.0 {
            self.max_ratio = self.max_ratio.max(lhs / rhs);
        }
        if slack < self.min_slack || !lhs.is_finite() {
            self.min_slack = slack;
            self.worst_x = x;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub checks: Vec<BoundCheck>,
}

impl LemmaReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }
}

/// Right-hand sides of the six bounds on the PE Stein solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma21Rhs {
    pub theta: f64,
    pub lambda: f64,
    pub h_tilde_norm: f64,
    /// `‖h̃‖/(θλ)`, bound on `e^{-λx}|f(x)|`.
    pub boundexp: f64,
    /// `‖h̃‖`, bound on `|ρ f|`.
    pub bound2: f64,
    /// `2‖h̃‖/λ`, bound on `|f|`.
    pub boundfx: f64,
    /// `2‖h̃‖`, bound on `|f'|`.
    pub bound1: f64,
    /// `‖h'‖ + 2λθ‖h̃‖ + 3λ‖h̃‖`, bound on `|f''|`; absent without `‖h'‖`.
    pub bound3: Option<f64>,
}

impl Lemma21Rhs {
    /// `‖h̃‖(1 - e^{-θ + θe^{-λx}})/(θλ)`, the pointwise bound on `e^{-λx}|f(x)|`.
    pub fn helpful(&self, x: f64) -> f64 {
        let a = self.theta * -(-self.lambda * x).exp_m1();
        self.h_tilde_norm * -(-a).exp_m1() / (self.theta * self.lambda)
    }
}

pub fn lemma21_rhs(params: &PEParams, h_tilde_norm: f64, h_prime_norm: Option<f64>) -> Lemma21Rhs {
    let (t, l, h) = (params.theta(), params.lambda(), h_tilde_norm);
    Lemma21Rhs {
        theta: t,
        lambda: l,
        h_tilde_norm: h,
        boundexp: h / (t * l),
        bound2: h,
        boundfx: 2.0 * h / l,
        bound1: 2.0 * h,
        bound3: h_prime_norm.map(|d| d + 2.0 * l * t * h + 3.0 * l * h),
    }
}

/// Checks every Stein-solution inequality at each grid point of `sol`.
pub fn verify_lemma21(sol: &SteinSolution) -> LemmaReport {
    let p = sol.params();
    let h = sol.solver().test_function();
    let rhs = lemma21_rhs(p, sol.centered_norm(), h.deriv_norm());
    let mut helpful = BoundCheck::new("helpful");
    let mut chain = BoundCheck::new("helpful<=boundexp");
    let mut b2 = BoundCheck::new("bound2");
    let mut bfx = BoundCheck::new("boundfx");
    let mut b1 = BoundCheck::new("bound1");
    let mut b3 = BoundCheck::new("bound3");
    let breaks = h.breaks();
    for (i, &x) in sol.grid.iter().enumerate() {
        let w = (-p.lambda() * x).exp();
        let f = sol.f[i];
        helpful.record(x, (w * f).abs(), rhs.helpful(x));
        chain.record(x, rhs.helpful(x), rhs.boundexp);
        b2.record(x, (p.score(x) * f).abs(), rhs.bound2);
        bfx.record(x, f.abs(), rhs.boundfx);
        b1.record(x, sol.df[i].abs(), rhs.bound1);
        if let Some(r3) = rhs.bound3 {
            if !breaks.contains(&x) {
                b3.record(x, sol.d2f[i].abs(), r3);
            }
        }
    }
    let mut checks = vec![helpful, chain, b2, bfx, b1];
    if rhs.bound3.is_some() {
        checks.push(b3);
    }
    LemmaReport { checks }
}

/// Right-hand sides of the bounds on the standardized solution `g = f/c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma33Rhs {
    /// `n²‖h̃‖/(λ²θ²)`
    pub msbound1: f64,
    /// `n²‖h̃‖/(λ²θ)`
    pub msbound2: f64,
    /// `2n²‖h̃‖/(λ²θ)`
    pub msbound5: f64,
    /// `3n²‖h̃‖/(λθ)`
    pub msbound3: f64,
    /// `‖h'‖ + 9λθ‖h̃‖ + 11λ‖h̃‖`
    pub msbound4: Option<f64>,
}

pub fn lemma33_rhs(theta: f64, lambda: f64, n: f64, h_tilde_norm: f64, h_prime_norm: Option<f64>) -> Lemma33Rhs {
    let (t, l, h) = (theta, lambda, h_tilde_norm);
    let n2 = n * n;
    Lemma33Rhs {
        msbound1: n2 * h / (l * l * t * t),
        msbound2: n2 * h / (l * l * t),
        msbound5: 2.0 * n2 * h / (l * l * t),
        msbound3: 3.0 * n2 * h / (l * t),
        msbound4: h_prime_norm.map(|d| d + 9.0 * l * t * h + 11.0 * l * h),
    }
}

/// Checks the five standardized-solution inequalities on the grid of `sol`.
pub fn verify_lemma33(sp: &StandardizationPair, sol: &SteinSolution) -> Result<LemmaReport> {
    let st = standardized_solution_g(sp, sol)?;
    let h = sol.solver().test_function();
    let rhs = lemma33_rhs(sp.theta(), sp.lambda(), sp.n(), sol.centered_norm(), h.deriv_norm());
    let (t, l) = (sp.theta(), sp.lambda());
    let mut m1 = BoundCheck::new("msbound1");
    let mut m2 = BoundCheck::new("msbound2");
    let mut m5 = BoundCheck::new("msbound5");
    let mut m3 = BoundCheck::new("msbound3");
    let mut m4 = BoundCheck::new("msbound4");
    let breaks = h.breaks();
    for (i, &z) in st.z.iter().enumerate() {
        let w = (-l * z).exp();
        let k = sp.kernel(z);
        m1.record(z, (w * k * st.g[i]).abs(), rhs.msbound1);
        m2.record(z, (k * (t * w - 1.0) * st.g[i]).abs(), rhs.msbound2);
        m5.record(z, (k * st.g[i]).abs(), rhs.msbound5);
        m3.record(z, (k * st.dg[i]).abs(), rhs.msbound3);
        if let Some(r4) = rhs.msbound4 {
            if !breaks.contains(&z) {
                m4.record(z, (sp.c(z) * st.d2g[i]).abs(), r4);
            }
        }
    }
    let mut checks = vec![m1, m2, m5, m3];
    if rhs.msbound4.is_some() {
        checks.push(m4);
    }
    Ok(LemmaReport { checks })
}
