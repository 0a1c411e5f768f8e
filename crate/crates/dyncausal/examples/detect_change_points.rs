//! Detect the change points of one node's neighborhood.
//!
//! ```bash
//! cargo run --release --example detect_change_points
//! ```

use dyncausal::*;

fn main() -> Result<()> {
    let spec = model_b(42);
    let series = simulate(&spec)?;

    // dyadic search: O(T) model fits, requires T to be a power of two
    let cfg = InferenceConfig::with_method(Method::Rdp);
    let hood = infer_neighborhood(&series, 1, &cfg)?;
    println!(
        "true change points {:?}, detected {:?}",
        spec.change_points(),
        hood.change_points()
    );
    for (block, edges) in hood.partition.blocks.iter().zip(&hood.edges_per_block) {
        let sources: Vec<usize> = edges.iter().map(|e| e.from).collect();
        println!(
            "  block {} pl {:>8.2} lambda {:.3} incoming {:?}",
            block.interval, block.pl, block.lambda_used, sources
        );
    }
    println!(
        "total objective {:.2} (kappa = {:.2} per split)",
        hood.partition.total_objective, hood.partition.kappa
    );
    println!(
        "penalty charged: {:.2}",
        total_penalty(&hood.partition, &cfg)
    );

    // the general search also handles non-dyadic lengths; demonstrate on a
    // shorter cut of the same series for speed
    let spec_short = model_b_with_len(256, 42)?;
    let series_short = simulate(&spec_short)?;
    let cfg_rp = InferenceConfig::with_method(Method::Rp);
    let hood_rp = infer_neighborhood(&series_short, 1, &cfg_rp)?;
    println!(
        "T = 256 general search: true {:?}, detected {:?}",
        spec_short.change_points(),
        hood_rp.change_points()
    );
    Ok(())
}
