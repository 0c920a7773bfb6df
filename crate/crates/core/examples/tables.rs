//! Refits both reliability datasets and audits how each tabulated bound could
//! have been assembled.

use std::path::PathBuf;

use pestein::tables::reproduce_tables;

fn main() -> pestein::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let report = reproduce_tables(&dir)?;
    for path in &report.skipped {
        println!("SKIPPED: {path}");
    }
    for t in [&report.aarset, &report.alloy].into_iter().flatten() {
        println!("{}: PE {} | GPE {}", t.dataset, t.pe_fit.params, t.gpe_fit.params);
        println!("  dTV vs fitted PE {:.6}, vs simplified PE {:.6}", t.dtv_gpe_vs_pe_fit, t.dtv_gpe_vs_simplified);
    }
    println!("bound audit (consistent: {})", report.audit.consistent);
    for row in &report.audit.rows {
        println!("  {} {}: published {} / measured dTV {:.6}", row.row.table, row.row.label, row.row.upper_bound, row.dtv_measured);
        for e in &row.entries {
            match (e.value, &e.error) {
                (Some(v), _) => println!("      {:<9} {:<12} {:<8} {v:.5}", e.formula, e.convention, e.mean_mode.map(|m| format!("{m:?}")).unwrap_or_default()),
                (None, Some(err)) => println!("      {:<9} {:<12} unavailable: {err}", e.formula, e.convention),
                _ => {}
            }
        }
    }
    Ok(())
}
