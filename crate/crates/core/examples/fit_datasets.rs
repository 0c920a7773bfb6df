//! Maximum likelihood fits of PE and GPE to the bundled failure-time data,
//! or to a CSV given on the command line.

use std::path::PathBuf;

use pestein::distance::dtv_continuous;
use pestein::fit::{mle_gpe, mle_pe, simplified_pe_from_gpe, Dataset};

fn main() -> pestein::Result<()> {
    let paths: Vec<PathBuf> = match std::env::args().nth(1) {
        Some(p) => vec![p.into()],
        None => {
            let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
            vec![dir.join("aarset.csv"), dir.join("alloy_t7987.csv")]
        }
    };
    for path in paths {
        if !path.exists() {
            println!("SKIPPED: {} not found", path.display());
            continue;
        }
        let data = Dataset::from_csv(&path)?;
        let pe = mle_pe(&data)?;
        let gpe = mle_gpe(&data)?;
        println!("{} (m = {}, mean {:.3})", data.label, data.len(), data.mean());
        println!("  PE  {}  loglik {:.4}  AIC {:.3}  BIC {:.3}", pe.params, pe.loglik, pe.aic, pe.bic);
        println!("  GPE {}  loglik {:.4}  AIC {:.3}  BIC {:.3}", gpe.params, gpe.loglik, gpe.aic, gpe.bic);
        let (p, g) = (pe.pe().unwrap(), gpe.gpe().unwrap());
        let simple = simplified_pe_from_gpe(&g);
        println!("  dTV(GPE, fitted PE)     {:.6}", dtv_continuous(&g, &p)?.value);
        println!("  dTV(GPE, simplified PE) {:.6}", dtv_continuous(&g, &simple)?.value);
        let converged = gpe.starts.iter().filter(|s| s.converged).count();
        println!("  GPE starts converged: {converged}/{}", gpe.starts.len());
    }
    Ok(())
}
