//! Upper bounds between PE, GPE and scaled PG laws, set against the measured
//! total variation distance.

use pestein::bounds::{
    bound_gpe_pe, bound_gpe_pe_equal, bound_pattern, bound_pe_pe, bound_pg_pe, BoundReport, MeanMode, NormConvention,
};
use pestein::distance::dtv_continuous;
use pestein::distributions::{GPEParams, PEParams};

fn show(r: &BoundReport, measured: Option<f64>) {
    print!("{:<16} value {:.6}", r.formula_id.to_string(), r.value);
    if let Some(d) = measured {
        print!("  (dTV {d:.6})");
    }
    println!();
    for t in &r.terms {
        println!("    {:<14} {:.6}", t.name, t.value);
    }
}

fn main() -> pestein::Result<()> {
    let conv = NormConvention::dtv();
    let p1 = PEParams::new(1.0, 1.0)?;
    let p2 = PEParams::new(1.5, 1.2)?;
    show(&bound_pe_pe(&p1, &p2, conv)?, Some(dtv_continuous(&p1, &p2)?.value));

    let g = GPEParams::new(1.5, 1.2, 1.3)?;
    for mode in [MeanMode::Lemma, MeanMode::Numeric] {
        show(&bound_gpe_pe(&p1, &g, conv, mode)?, Some(dtv_continuous(&p1, &g)?.value));
    }
    let g_eq = GPEParams::new(1.0, 1.0, 1.3)?;
    show(&bound_gpe_pe_equal(1.0, 1.0, 1.3, conv)?, Some(dtv_continuous(&p1, &g_eq)?.value));

    // Hypothesis violations come back as errors that name the result.
    if let Err(e) = bound_pe_pe(&p2, &p1, conv) {
        println!("swapped order: {e}");
    }

    let dbw = NormConvention::dbw();
    for n in [1e2, 1e3, 1e4] {
        let pg = bound_pg_pe(1.0, 1.0, n, dbw)?.value;
        let pat = bound_pattern(1.0, 1.0, n, 2, dbw)?.value;
        println!("n = {n:>6}: PG bound {pg:.6}, k = 2 pattern bound {pat:.6}");
    }
    Ok(())
}
