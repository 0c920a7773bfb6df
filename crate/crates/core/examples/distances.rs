//! The distance estimators, each paired with an independent route.

use pestein::distance::{
    dbw_proxy, dk_continuous, dkw_band, dtv_continuous, dtv_monte_carlo, dtv_quantile_grid, empirical_cdf_distance, w1_cdf,
    EmpiricalMetric, Model,
};
use pestein::distributions::SampleMode;
use pestein::patterns::simulate_scaled_pg;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pestein::Result<()> {
    let a: Model = "gpe:4.99354,0.02863,0.4018".parse()?;
    let b: Model = "pe:0.97039,0.02685".parse()?;
    println!("{a} vs {b}");

    let quad = dtv_continuous(&a, &b)?;
    let grid = dtv_quantile_grid(&a, &b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mc = dtv_monte_carlo(&a, &b, 200_000, &mut rng);
    for d in [quad, grid, mc] {
        println!("  dTV {:.6} ± {:.1e} ({:?})", d.value, d.abs_error_estimate, d.method);
    }
    println!("  dK  {:.6}", dk_continuous(&a, &b).value);
    println!("  W1  {:.4}", w1_cdf(&a, &b)?.value);
    println!("  dBW proxy {:.4}", dbw_proxy(&a, &b)?.value);

    // Scaled PG draws against their PE limit.
    let pe: Model = "pe:1,1".parse()?;
    let m = 50_000;
    let xs = simulate_scaled_pg(1.0, 1.0, 1000, m, 4, SampleMode::Inverse)?;
    let dk = empirical_cdf_distance(&xs, &pe, EmpiricalMetric::Dk)?;
    let w1 = empirical_cdf_distance(&xs, &pe, EmpiricalMetric::W1)?;
    println!("scaled PG (n = 1000, m = {m}): dK {:.5} (95% DKW band {:.5}), W1 {:.5}", dk.value, dkw_band(m), w1.value);
    Ok(())
}
