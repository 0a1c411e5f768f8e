//! Generate the three benchmark processes and write them as CSV.
//!
//! ```bash
//! cargo run --release --example simulate_benchmarks
//! ```

use dyncausal::*;

fn main() -> Result<()> {
    let out = std::env::temp_dir().join("dyncausal-benchmarks");
    std::fs::create_dir_all(&out)?;

    // stationary VAR(2), no change point
    let spec_a = model_a(1);
    simulate(&spec_a)?.save_csv(out.join("model_a.csv"))?;

    // piecewise VAR(2), change points at 512 and 768
    let spec_b = model_b(1);
    let series_b = simulate(&spec_b)?;
    series_b.save_csv(out.join("model_b.csv"))?;
    println!(
        "model b: T = {}, N = {}, true change points {:?}",
        series_b.t_len(),
        series_b.n_nodes(),
        spec_b.change_points()
    );

    // change point near the boundary (T/8)
    let spec_c = model_c(1);
    simulate(&spec_c)?.save_csv(out.join("model_c.csv"))?;

    // the scaled-up variant embeds model b among pure-noise nodes
    let spec_scaled = model_b_scaled(11, 1)?;
    let series_scaled = simulate(&spec_scaled)?;
    println!(
        "scaled: N = {} nodes, {} of them noise",
        series_scaled.n_nodes(),
        series_scaled.n_nodes() - 3
    );

    // every generator is reproducible from its seed
    assert_eq!(simulate(&spec_b)?, series_b);

    println!("wrote CSVs to {}", out.display());
    Ok(())
}
