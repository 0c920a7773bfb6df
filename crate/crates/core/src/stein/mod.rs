//! Stein operators for PE and GPE, the PE Stein equation and its bounds.

mod lemmas;
mod solution;
mod standardized;
mod test_function;

pub use lemmas::{
    lemma21_rhs, lemma33_rhs, verify_lemma21, verify_lemma33, BoundCheck, Lemma21Rhs, Lemma33Rhs, LemmaReport,
    HEADROOM,
};
pub use solution::{check_mean_zero, default_grid, operator_expectation, solve_stein_pe, SteinSolution, SteinSolver};
pub use standardized::{standardized_solution_g, StandardizationPair, StandardizedSolution};
pub use test_function::TestFunction;

use crate::distributions::{GPEParams, PEParams};

/// PE score `λ(θe^{-λx} - 1)`.
pub fn score_pe(params: &PEParams, x: f64) -> f64 {
    params.score(x)
}

/// GPE score; diverges as `x → 0` when `β < 1`.
pub fn score_gpe(params: &GPEParams, x: f64) -> f64 {
    params.score(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pe_score_root_and_limit() {
        let p = PEParams::new(3.0, 0.5).unwrap();
        assert!(score_pe(&p, 3f64.ln() / 0.5).abs() < 1e-15);
        assert!((score_pe(&p, 200.0) + 0.5).abs() < 1e-12);
        for &x in &[0.2, 1.0, 5.0] {
            let h = 1e-5;
            let fd = (p.ln_pdf(x + h) - p.ln_pdf(x - h)) / (2.0 * h);
            assert!((fd - score_pe(&p, x)).abs() < 1e-6);
        }
    }

    #[test]
    fn gpe_score_reduces_and_matches_slope() {
        let g1 = GPEParams::new(3.0, 0.5, 1.0).unwrap();
        let p = g1.base();
        for &x in &[0.1, 2.0, 7.0] {
            assert!((score_gpe(&g1, x) - score_pe(&p, x)).abs() < 1e-13);
        }
        for &b in &[0.4, 2.9] {
            let g = GPEParams::new(3.0, 0.5, b).unwrap();
            for &x in &[0.3, 1.0, 3.0, 8.0] {
                let h = 1e-5;
                let fd = (g.ln_pdf(x + h) - g.ln_pdf(x - h)) / (2.0 * h);
                let s = score_gpe(&g, x);
                assert!((fd - s).abs() < 1e-5 * s.abs().max(1.0), "β={b} x={x}");
            }
            assert!((score_gpe(&g, 300.0) + 0.5).abs() < 1e-10);
        }
    }
}
