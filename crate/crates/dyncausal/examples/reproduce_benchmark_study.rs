//! Run a seeded detection study and print the histogram table.
//!
//! ```bash
//! cargo run --release --example reproduce_benchmark_study
//! ```
//!
//! With 100 trials this reproduces the dyadic-search column of the
//! benchmark table for the two-change-point process; the default here is
//! 30 trials to keep the example snappy.

use dyncausal::*;

fn main() -> Result<()> {
    let trials = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(30);
    let cfg = InferenceConfig::with_method(Method::Rdp);
    let report = run_study(&|seed| Ok(model_b(seed)), 1, trials, 42, &cfg, None)?;

    println!(
        "model b, rdp, {} trials, tolerance +/-{}",
        report.trials, report.tolerance
    );
    let sections = [
        ("# change point", &report.cp_count_histogram),
        ("# exact detection", &report.exact_detection_histogram),
        ("# false edge detection", &report.false_edge_histogram),
    ];
    for (title, hist) in sections {
        println!("{title}");
        for (value, count) in hist {
            println!("  {value}: {count}");
        }
    }
    println!("\ncsv form:\n{}", report.to_csv("b", "rdp"));
    Ok(())
}
