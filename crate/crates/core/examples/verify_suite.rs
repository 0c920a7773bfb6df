//! Runs the reduced verification sweep and prints the per-suite summary.

use pestein::verify::{run, Suite, VerifyOptions};

fn main() {
    let opts = VerifyOptions {
        quick: true,
        ..VerifyOptions::default()
    };
    let report = run(&Suite::ALL, &opts);
    for s in &report.suites {
        println!("{:<11} {} {:>4} cases {:.2} s", s.suite, if s.passed { "pass" } else { "FAIL" }, s.cases, s.elapsed_s);
        for f in &s.failures {
            println!("    {} {}: {} > {}", f.case, f.check, f.value, f.limit);
        }
    }
    std::process::exit(if report.passed { 0 } else { 1 });
}
