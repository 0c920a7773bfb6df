//! Waiting times for binary patterns: the exact mean from the absorbing
//! chain, then the maximum over parallel systems against its PE limit.

use pestein::patterns::{
    expected_completion_time, first_occurrence, pattern_experiment, replication_rng, PatternSimConfig, PatternSpec,
};

fn main() -> pestein::Result<()> {
    for bits in ["1", "11", "01", "0110"] {
        let pat: PatternSpec = bits.parse()?;
        let exact = expected_completion_time(&pat, 0.5)?;
        let m = 100_000;
        let mut rng = replication_rng(1, 0);
        let mut total = 0.0;
        for _ in 0..m {
            total += first_occurrence(&pat, 0.5, &mut rng)? as f64;
        }
        // Simulation reports the 1-based start index; the chain counts trials to completion.
        let mc = total / m as f64 + pat.k() as f64 - 1.0;
        println!("pattern {pat:>4} at p = 0.5: completion mean {exact:.4}, simulated {mc:.4}");
    }

    let cfg = PatternSimConfig::new(1.0, 1.0, 100, vec![PatternSpec::alternating(2)?], 20_000, 7)?;
    let report = pattern_experiment(&cfg, &[100, 1000])?;
    println!("max waiting time over systems, θ = λ = 1, pattern 01:");
    for r in &report.rows {
        println!(
            "  n = {:>5}: mean {:.4} ± {:.4}, dK {:.4}, W1 proxy {:.4}, bound {:.4}",
            r.n, r.mean, r.mean_se, r.dk.value, r.w1_proxy, r.bound
        );
    }
    Ok(())
}
