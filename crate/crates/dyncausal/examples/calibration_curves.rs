//! The finite-sample penalty calibration, by the numbers.
//!
//! ```bash
//! cargo run --release --example calibration_curves
//! ```

use dyncausal::*;

fn main() -> Result<()> {
    // chi-square quantiles: closed form at dof = 2, inverted incomplete
    // gamma elsewhere
    println!("chi-square quantiles Q(q, dof):");
    for dof in [1usize, 2, 4, 7] {
        let row: Vec<String> = [0.5, 0.9, 0.95, 0.99]
            .iter()
            .map(|&q| format!("{:8.4}", chi2_quantile(q, dof).unwrap()))
            .collect();
        println!("  dof {dof}: {}", row.join(" "));
    }
    let exact = -2.0 * 0.05f64.ln();
    println!(
        "  dof 2, q = 0.95: {:.10} (closed form {:.10})",
        chi2_quantile(0.95, 2)?,
        exact
    );

    // lambda(alpha) = 2 sigma sqrt(p Q(1 - alpha/(N(N-1)))): the penalty
    // level that bounds the false-connection probability by alpha
    println!("\nlambda(alpha) at sigma = 1, p = 2:");
    print!("{:>8}", "N\\alpha");
    for &alpha in &[0.01, 0.05, 0.1, 0.2] {
        print!("{alpha:>9.2}");
    }
    println!();
    for n_nodes in [3usize, 6, 10, 15] {
        print!("{n_nodes:>8}");
        for &alpha in &[0.01, 0.05, 0.1, 0.2] {
            print!("{:>9.4}", lambda_alpha(1.0, 2, n_nodes, alpha)?);
        }
        println!();
    }

    // the level is monotone: down in alpha, up in sigma, p, and N
    let mut prev = f64::INFINITY;
    for &alpha in &[0.01, 0.05, 0.1, 0.2, 0.4] {
        let lam = lambda_alpha(1.0, 2, 6, alpha)?;
        assert!(lam <= prev);
        prev = lam;
    }
    println!("\nmonotone in alpha: ok");

    // the working penalty used on an interval divides by sqrt(T); compare
    // with the raw formula value on a simulated series
    let series = simulate(&model_a(3))?;
    let fit = block_score(
        &series,
        1,
        Interval::new(1, series.t_len())?,
        &InferenceConfig::default(),
    )?;
    println!(
        "model a full-series block: sigma_hat {:.4}, working lambda {:.4}, formula level {:.4}",
        fit.sigma_hat,
        fit.lambda_used,
        lambda_alpha(fit.sigma_hat, 2, 3, 0.05)?
    );
    Ok(())
}
