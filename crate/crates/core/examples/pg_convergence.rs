//! Scaled Poisson-geometric maxima approaching the PE law as n grows.

use pestein::distributions::SampleMode;
use pestein::patterns::pg_experiment;

fn main() -> pestein::Result<()> {
    let report = pg_experiment(1.0, 1.0, &[100, 1000, 10_000], 50_000, 11, SampleMode::Inverse)?;
    println!("{:>7} {:>10} {:>10} {:>10} {:>10}", "n", "dK draws", "dK exact", "W1 draws", "bound");
    for r in &report.rows {
        println!("{:>7} {:>10.5} {:>10.5} {:>10.5} {:>10.5}", r.n, r.dk.value, r.dk_exact, r.w1.value, r.bound);
    }
    Ok(())
}
