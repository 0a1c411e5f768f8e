//! Fit a group lasso on one interval and certify the solution.
//!
//! ```bash
//! cargo run --release --example fit_group_lasso
//! ```

use dyncausal::*;

fn main() -> Result<()> {
    // simulate the two-change-point process and look at its first regime,
    // where node 2 drives node 1 with coefficients (0.5, 0.25)
    let series = simulate(&model_b(7))?;
    let interval = Interval::new(1, 512)?;
    let design = build_lagged_design(&series, 1, 2, interval)?;
    println!(
        "design: {} rows x {} columns, column map {:?}",
        design.n_rows(),
        design.n_cols(),
        design.column_map()
    );

    // the penalty level that controls the false-connection probability at
    // alpha = 0.05, rescaled to this interval
    let y: Vec<f64> = (interval.start..=interval.end)
        .map(|t| series.value(t, 1))
        .collect();
    let sigma_hat = (y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64).sqrt();
    let level = lambda_alpha(sigma_hat, 2, series.n_nodes(), 0.05)?;
    let lambda = level / (series.t_len() as f64).sqrt();
    println!("lambda(alpha) = {level:.4}, working lambda = {lambda:.4}");

    let cfg = SolverConfig::default();
    let fit = fit_group_lasso(&y, &design, lambda, &cfg, None)?;
    println!(
        "converged in {} sweeps, objective {:.6}",
        fit.iterations, fit.objective
    );
    for (node, range) in fit.coeffs.groups() {
        println!(
            "  node {node}: norm {:.4}, coeffs {:?}",
            fit.coeffs.group_norm(range.start / 2),
            &fit.coeffs.theta()[range]
        );
    }
    assert_eq!(fit.coeffs.active_nodes(), vec![2]);

    // certify optimality: the KKT residual must sit below the tolerance
    let violation = kkt_check(&fit.coeffs, &y, &design, lambda)?;
    println!("kkt violation: {violation:.2e}");
    assert!(violation <= cfg.kkt_tol);

    Ok(())
}
