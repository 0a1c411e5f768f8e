//! Infer a full dynamic network and query its edge sets over time.
//!
//! ```bash
//! cargo run --release --example infer_network
//! ```

use std::collections::BTreeMap;

use dyncausal::*;

fn main() -> Result<()> {
    // a hand-built scenario: node 1 is driven by node 2 early and by
    // node 3 late; nodes 2 and 3 are exogenous noise
    let spec = GeneratorSpec {
        n_nodes: 3,
        t_len: 512,
        schedule: vec![
            simulate::Regime {
                interval: Interval::new(1, 256)?,
                coeffs: BTreeMap::from([((1, 2, 1), 0.9), ((1, 2, 2), 0.3)]),
            },
            simulate::Regime {
                interval: Interval::new(257, 512)?,
                coeffs: BTreeMap::from([((1, 3, 1), -0.8)]),
            },
        ],
        noise_sd: 1.0,
        seed: 5,
    };
    let series = simulate(&spec)?;

    let cfg = InferenceConfig::with_method(Method::Rdp);
    let network = infer_network(&series, &cfg)?;

    for t in [64usize, 200, 300, 480] {
        let edges: Vec<String> = network
            .edges_at(t)?
            .into_iter()
            .map(|(from, to)| {
                format!(
                    "{} -> {}",
                    network.labels[from - 1],
                    network.labels[to - 1]
                )
            })
            .collect();
        println!("t = {t:>3}: {edges:?}");
    }
    println!("merged change points: {:?}", network.all_change_points());

    // the JSON document is the machine-readable interface
    let doc = network.to_document(&cfg);
    let json = serde_json::to_string_pretty(&doc).expect("serializes");
    println!("document ({} bytes):", json.len());
    for line in json.lines().take(14) {
        println!("{line}");
    }
    println!("...");
    Ok(())
}
