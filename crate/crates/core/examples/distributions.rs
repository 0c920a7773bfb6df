//! Densities, quantiles and sampling for the PE, GPE, PG and zero-truncated
//! Poisson families.

use pestein::distributions::{GPEParams, PEParams, PGParams, SampleMode, ZTPParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pestein::Result<()> {
    let pe = PEParams::new(2.0, 0.5)?;
    let gpe = GPEParams::new(2.0, 0.5, 1.7)?;
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "x", "pe pdf", "pe cdf", "gpe pdf", "gpe cdf");
    for x in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
        println!("{x:>6} {:>12.6} {:>12.6} {:>12.6} {:>12.6}", pe.pdf(x), pe.cdf(x), gpe.pdf(x), gpe.cdf(x));
    }

    let q = pe.quantile(0.9)?;
    println!("pe 0.9-quantile {q:.6}, cdf back {:.12}", pe.cdf(q));
    println!("pe mean {:.6} (closed-form bound {:.6})", pe.mean()?, pe.mean_upper());
    println!("gpe mean {:.6} (closed-form bound {:.6})", gpe.mean()?, gpe.mean_upper());

    let pg = PGParams::new(2.0, 0.1)?;
    let ztp = ZTPParams::new(2.0)?;
    println!("pg P(Y=1..5) = {:?}", (1..=5).map(|y| pg.pmf(y)).collect::<Result<Vec<_>, _>>()?);
    println!("pg mean {:.4}, ztp mean {:.4}", pg.mean(), ztp.mean());

    // Both sampling routes target the same law.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let m = 200_000;
    for mode in [SampleMode::Inverse, SampleMode::MaxConstruction] {
        let mean = (0..m).map(|_| pe.sample(&mut rng, mode)).sum::<f64>() / m as f64;
        println!("pe sample mean via {mode:?}: {mean:.4}");
    }
    Ok(())
}
