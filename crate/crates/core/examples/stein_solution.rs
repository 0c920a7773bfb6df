//! Solves the PE Stein equation for a few test functions and checks the
//! solution bounds and the standardized solution.

use pestein::distributions::PEParams;
use pestein::stein::{
    check_mean_zero, default_grid, lemma21_rhs, solve_stein_pe, standardized_solution_g, verify_lemma21,
    verify_lemma33, StandardizationPair, TestFunction,
};

fn main() -> pestein::Result<()> {
    let params = PEParams::new(2.0, 1.0)?;
    let median = params.quantile(0.5)?;
    let grid = default_grid(&params, 200)?;
    let rhs = lemma21_rhs(&params, 1.0, None);
    println!("sup |f| ≤ {:.4}, sup |e^(-λx) f| ≤ {:.4}", rhs.boundfx, rhs.boundexp);

    for h in [TestFunction::indicator(median), TestFunction::exp_decay(), TestFunction::reciprocal()] {
        let name = h.name().to_string();
        let sol = solve_stein_pe(&params, &h, &grid)?;
        let report = verify_lemma21(&sol);
        println!(
            "{name:>12}: Eh = {:.6}, residual {:.2e}, E[Tf] = {:.2e}, bound checks {}/{}",
            sol.eh(),
            sol.residual_max()?,
            check_mean_zero(&sol)?,
            report.checks.len() - report.violations(),
            report.checks.len()
        );
    }

    let n = 200;
    let sp = StandardizationPair::new(2.0, 1.0, n)?;
    let sol = solve_stein_pe(&params, &TestFunction::exp_decay(), &grid)?;
    let g = standardized_solution_g(&sp, &sol)?;
    let report = verify_lemma33(&sp, &sol)?;
    println!(
        "standardized solution at n = {n}: {} grid points, {} violations",
        g.z.len(),
        report.violations()
    );
    Ok(())
}
