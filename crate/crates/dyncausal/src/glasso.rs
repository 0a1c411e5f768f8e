//! Group-lasso penalized least squares over lag groups, KKT certification,
//! and the finite-sample penalty level `lambda(alpha)`.
//!
//! The solver minimizes
//!
//! ```text
//! PL(theta) = (1/n) ||y - X theta||^2 + lambda * sum_v ||theta(v)||_2
//! ```
//!
//! by cyclic block coordinate descent, one group (the `p` lags of one source
//! node) at a time, with the closed-form group soft-threshold step. Inactive
//! groups come out exactly zero, which is what makes edge presence a
//! well-defined yes/no question downstream.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::timeseries::LaggedDesign;

/// Solver tolerances and iteration caps.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverConfig {
    /// Relative objective-change threshold for convergence.
    pub tol: f64,
    /// Hard cap on coordinate-descent sweeps.
    pub max_iter: usize,
    /// Maximum admissible KKT residual at convergence.
    pub kkt_tol: f64,
    /// Subtract column/response means before fitting. The model itself has
    /// no intercept; this is for callers who have not differenced or
    /// centered their data.
    pub center: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-8,
            max_iter: 10_000,
            kkt_tol: 1e-6,
            center: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid_input("solver tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid_input("max_iter must be at least 1"));
        }
        if !(self.kkt_tol > 0.0) {
            return Err(Error::invalid_input("kkt_tol must be positive"));
        }
        Ok(())
    }
}

/// Coefficients of one group-lasso fit: a flat vector of length
/// `(N-1) * p` partitioned into per-source-node groups of `p` lags each.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupCoefficients {
    theta: Vec<f64>,
    nodes: Vec<usize>,
    p: usize,
    norms: Vec<f64>,
}

impl GroupCoefficients {
    pub(crate) fn from_theta(theta: Vec<f64>, nodes: Vec<usize>, p: usize) -> Self {
        assert_eq!(theta.len(), nodes.len() * p);
        let norms = (0..nodes.len())
            .map(|g| norm2(&theta[g * p..(g + 1) * p]))
            .collect();
        GroupCoefficients {
            theta,
            nodes,
            p,
            norms,
        }
    }

    /// Zero coefficients with the given group layout.
    pub fn zeros(nodes: Vec<usize>, p: usize) -> Self {
        let len = nodes.len() * p;
        GroupCoefficients::from_theta(vec![0.0; len], nodes, p)
    }

    /// The flat coefficient vector, ordered like the design columns.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Source node of each group, ascending.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn lag_order(&self) -> usize {
        self.p
    }

    pub fn n_groups(&self) -> usize {
        self.nodes.len()
    }

    /// `(source node, column range)` per group.
    pub fn groups(&self) -> impl Iterator<Item = (usize, std::ops::Range<usize>)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .map(move |(g, &v)| (v, g * self.p..(g + 1) * self.p))
    }

    /// Cached l2 norm of group `g`.
    pub fn group_norm(&self, g: usize) -> f64 {
        self.norms[g]
    }

    /// Norm of the group belonging to source node `v`, if `v` is a source.
    pub fn node_norm(&self, v: usize) -> Option<f64> {
        self.nodes
            .iter()
            .position(|&n| n == v)
            .map(|g| self.norms[g])
    }

    /// The `p` lag coefficients of source node `v`.
    pub fn node_coeffs(&self, v: usize) -> Option<&[f64]> {
        self.nodes
            .iter()
            .position(|&n| n == v)
            .map(|g| &self.theta[g * self.p..(g + 1) * self.p])
    }

    /// Source nodes with nonzero groups, ascending.
    pub fn active_nodes(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .zip(&self.norms)
            .filter(|(_, &norm)| norm > 0.0)
            .map(|(&v, _)| v)
            .collect()
    }

    /// Sum of all group norms.
    pub fn total_norm(&self) -> f64 {
        self.norms.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.norms.iter().all(|&n| n == 0.0)
    }
}

/// Result of one solver run. `converged` is false when the iteration cap was
/// hit first; the coefficients are still the best iterate found.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub coeffs: GroupCoefficients,
    /// Converged value of the penalized objective.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|&v| v * v).sum::<f64>().sqrt()
}

/// Sufficient statistics of one least-squares instance. The coordinate
/// descent only ever touches `X'X`, `X'y`, and `y'y`, which lets the
/// partition search reuse prefix sums instead of materializing designs.
#[derive(Debug, Clone)]
pub(crate) struct GramProblem {
    pub gram: Array2<f64>,
    pub xty: Vec<f64>,
    pub yty: f64,
    pub n: usize,
    pub p: usize,
    pub nodes: Vec<usize>,
}

impl GramProblem {
    pub(crate) fn from_design(y: &[f64], x: &LaggedDesign) -> Result<Self> {
        let m = x.matrix();
        let n = m.nrows();
        if y.len() != n {
            return Err(Error::dimension_mismatch(format!(
                "y has {} entries, design has {} rows",
                y.len(),
                n
            )));
        }
        let k = m.ncols();
        let mut gram = Array2::zeros((k, k));
        let mut xty = vec![0.0; k];
        let mut yty = 0.0;
        for (r, &yr) in y.iter().enumerate() {
            yty += yr * yr;
            let row = m.row(r);
            for i in 0..k {
                let xi = row[i];
                xty[i] += xi * yr;
                for j in i..k {
                    gram[[i, j]] += xi * row[j];
                }
            }
        }
        for i in 0..k {
            for j in 0..i {
                gram[[i, j]] = gram[[j, i]];
            }
        }
        Ok(GramProblem {
            gram,
            xty,
            yty,
            n,
            p: x.lag_order(),
            nodes: x.source_nodes(),
        })
    }

    fn centered(&self, col_sums: &[f64], y_sum: f64) -> GramProblem {
        let k = self.xty.len();
        let n = self.n as f64;
        let mut gram = self.gram.clone();
        let mut xty = self.xty.clone();
        for i in 0..k {
            xty[i] -= col_sums[i] * y_sum / n;
            for j in 0..k {
                gram[[i, j]] -= col_sums[i] * col_sums[j] / n;
            }
        }
        GramProblem {
            gram,
            xty,
            yty: self.yty - y_sum * y_sum / n,
            n: self.n,
            p: self.p,
            nodes: self.nodes.clone(),
        }
    }
}

/// Largest eigenvalue of the symmetric `p x p` block starting at `offset`.
fn block_eig_max(gram: &Array2<f64>, offset: usize, p: usize) -> f64 {
    match p {
        1 => gram[[offset, offset]],
        2 => {
            let a = gram[[offset, offset]];
            let b = gram[[offset, offset + 1]];
            let c = gram[[offset + 1, offset + 1]];
            let mid = 0.5 * (a + c);
            let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            mid + rad
        }
        _ => {
            // power iteration with a deterministic start; blocks are tiny
            let mut v = vec![1.0 / (p as f64).sqrt(); p];
            let mut eig = 0.0;
            for _ in 0..100 {
                let mut w = vec![0.0; p];
                for i in 0..p {
                    for j in 0..p {
                        w[i] += gram[[offset + i, offset + j]] * v[j];
                    }
                }
                let norm = norm2(&w);
                if norm == 0.0 {
                    return 0.0;
                }
                let next = w.iter().map(|&x| x / norm).collect::<Vec<_>>();
                let delta = next
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                v = next;
                eig = norm;
                if delta < 1e-14 {
                    break;
                }
            }
            // Gershgorin upper bound keeps the step size safe if the power
            // iteration stalled between close eigenvalues
            let gershgorin = (0..p)
                .map(|i| {
                    (0..p)
                        .map(|j| gram[[offset + i, offset + j]].abs())
                        .sum::<f64>()
                })
                .fold(0.0f64, f64::max);
            eig.max(gershgorin.min(eig * 1.0000001).max(eig))
        }
    }
}

pub(crate) struct GramSolution {
    pub theta: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
}

/// Cyclic block coordinate descent on sufficient statistics.
pub(crate) fn solve_gram(
    prob: &GramProblem,
    lambda: f64,
    cfg: &SolverConfig,
    warm: Option<&[f64]>,
) -> GramSolution {
    let k = prob.xty.len();
    let p = prob.p;
    let n_groups = prob.nodes.len();
    let n = prob.n as f64;

    let mut theta: Vec<f64> = match warm {
        Some(w) => w.to_vec(),
        None => vec![0.0; k],
    };

    // per-group Lipschitz constants of the smooth part
    let lips: Vec<f64> = (0..n_groups)
        .map(|g| 2.0 / n * block_eig_max(&prob.gram, g * p, p))
        .collect();

    // kill groups whose columns are identically zero on this interval
    for g in 0..n_groups {
        if lips[g] <= 0.0 {
            for i in g * p..(g + 1) * p {
                theta[i] = 0.0;
            }
        }
    }

    let mut gtheta = mat_vec(&prob.gram, &theta);
    let objective = |theta: &[f64], gtheta: &[f64]| -> f64 {
        let mut quad = prob.yty;
        for i in 0..k {
            quad += theta[i] * (gtheta[i] - 2.0 * prob.xty[i]);
        }
        let mut pen = 0.0;
        for g in 0..n_groups {
            pen += norm2(&theta[g * p..(g + 1) * p]);
        }
        quad / n + lambda * pen
    };

    let mut prev_obj = objective(&theta, &gtheta);
    let mut iterations = 0;
    let mut converged = false;
    let mut kkt = f64::INFINITY;
    let mut z = vec![0.0; p];

    while iterations < cfg.max_iter {
        iterations += 1;
        for g in 0..n_groups {
            let lip = lips[g];
            if lip <= 0.0 {
                continue;
            }
            let base = g * p;
            // z = theta_g - grad_g / L with grad_g = (2/n)(G theta - X'y)_g
            for i in 0..p {
                let grad = 2.0 / n * (gtheta[base + i] - prob.xty[base + i]);
                z[i] = theta[base + i] - grad / lip;
            }
            let znorm = norm2(&z);
            let threshold = lambda / lip;
            if znorm <= threshold {
                if theta[base..base + p].iter().any(|&v| v != 0.0) {
                    for i in 0..p {
                        let delta = -theta[base + i];
                        theta[base + i] = 0.0;
                        axpy_col(&prob.gram, base + i, delta, &mut gtheta);
                    }
                }
            } else {
                let scale = 1.0 - threshold / znorm;
                for i in 0..p {
                    let new = scale * z[i];
                    let delta = new - theta[base + i];
                    if delta != 0.0 {
                        theta[base + i] = new;
                        axpy_col(&prob.gram, base + i, delta, &mut gtheta);
                    }
                }
            }
        }
        // refresh the running product periodically to cap drift
        if iterations % 64 == 0 {
            gtheta = mat_vec(&prob.gram, &theta);
        }
        let obj = objective(&theta, &gtheta);
        debug_assert!(
            obj <= prev_obj + 1e-9 * prev_obj.abs().max(1.0),
            "objective increased: {prev_obj} -> {obj}"
        );
        let stalled = (prev_obj - obj).abs() <= cfg.tol * obj.abs().max(1.0);
        prev_obj = obj;
        if stalled {
            kkt = kkt_from_gram(prob, &theta, &gtheta, lambda);
            if kkt <= cfg.kkt_tol {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        gtheta = mat_vec(&prob.gram, &theta);
        kkt = kkt_from_gram(prob, &theta, &gtheta, lambda);
        prev_obj = objective(&theta, &gtheta);
        if kkt <= cfg.kkt_tol {
            converged = true;
        }
    }
    GramSolution {
        theta,
        objective: prev_obj,
        iterations,
        converged,
        kkt_residual: kkt,
    }
}

fn mat_vec(gram: &Array2<f64>, theta: &[f64]) -> Vec<f64> {
    let k = theta.len();
    let mut out = vec![0.0; k];
    for i in 0..k {
        let mut acc = 0.0;
        for j in 0..k {
            acc += gram[[i, j]] * theta[j];
        }
        out[i] = acc;
    }
    out
}

fn axpy_col(gram: &Array2<f64>, col: usize, delta: f64, gtheta: &mut [f64]) {
    for i in 0..gtheta.len() {
        gtheta[i] += gram[[i, col]] * delta;
    }
}

fn kkt_from_gram(prob: &GramProblem, theta: &[f64], gtheta: &[f64], lambda: f64) -> f64 {
    let p = prob.p;
    let n = prob.n as f64;
    let mut worst = 0.0f64;
    for g in 0..prob.nodes.len() {
        let base = g * p;
        let group = &theta[base..base + p];
        let gnorm = norm2(group);
        let mut violation;
        if gnorm > 0.0 {
            let mut acc = 0.0;
            for i in 0..p {
                let grad = 2.0 / n * (gtheta[base + i] - prob.xty[base + i]);
                let stat = grad + lambda * group[i] / gnorm;
                acc += stat * stat;
            }
            violation = acc.sqrt();
        } else {
            let mut acc = 0.0;
            for i in 0..p {
                let grad = 2.0 / n * (gtheta[base + i] - prob.xty[base + i]);
                acc += grad * grad;
            }
            violation = acc.sqrt() - lambda;
            if violation < 0.0 {
                violation = 0.0;
            }
        }
        worst = worst.max(violation);
    }
    worst
}

/// Fit the group lasso on an explicit design. `warm_start` seeds the
/// iteration; it can change the iteration count but not the converged
/// solution beyond the solver tolerance.
pub fn fit_group_lasso(
    y: &[f64],
    x: &LaggedDesign,
    lambda: f64,
    cfg: &SolverConfig,
    warm_start: Option<&GroupCoefficients>,
) -> Result<FitOutcome> {
    cfg.validate()?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::invalid_input("lambda must be finite and >= 0"));
    }
    let mut prob = GramProblem::from_design(y, x)?;
    if cfg.center {
        let m = x.matrix();
        let col_sums: Vec<f64> = (0..m.ncols()).map(|c| m.column(c).sum()).collect();
        let y_sum: f64 = y.iter().sum();
        prob = prob.centered(&col_sums, y_sum);
    }
    let warm = match warm_start {
        Some(w) => {
            if w.theta().len() != prob.xty.len()
                || w.nodes() != prob.nodes.as_slice()
                || w.lag_order() != prob.p
            {
                return Err(Error::dimension_mismatch(
                    "warm start layout does not match the design",
                ));
            }
            Some(w.theta())
        }
        None => None,
    };
    let sol = solve_gram(&prob, lambda, cfg, warm);
    Ok(FitOutcome {
        coeffs: GroupCoefficients::from_theta(sol.theta, prob.nodes.clone(), prob.p),
        objective: sol.objective,
        iterations: sol.iterations,
        converged: sol.converged,
        kkt_residual: sol.kkt_residual,
    })
}

/// Maximum KKT violation of `theta` for the group-lasso problem on `(y, X)`.
///
/// For an active group the stationarity residual is
/// `|| -2/n X(v)'(y - X theta) + lambda theta(v)/||theta(v)|| ||`; for a zero
/// group it is `max(0, ||2/n X(v)'(y - X theta)|| - lambda)`.
pub fn kkt_check(
    theta: &GroupCoefficients,
    y: &[f64],
    x: &LaggedDesign,
    lambda: f64,
) -> Result<f64> {
    let m = x.matrix();
    let n = m.nrows();
    if y.len() != n {
        return Err(Error::dimension_mismatch(format!(
            "y has {} entries, design has {} rows",
            y.len(),
            n
        )));
    }
    let k = m.ncols();
    if theta.theta().len() != k {
        return Err(Error::dimension_mismatch(format!(
            "theta has {} entries, design has {} columns",
            theta.theta().len(),
            k
        )));
    }
    let p = theta.lag_order();
    let nf = n as f64;
    let mut residual = vec![0.0; n];
    for r in 0..n {
        let mut fit = 0.0;
        for c in 0..k {
            fit += m[[r, c]] * theta.theta()[c];
        }
        residual[r] = y[r] - fit;
    }
    let mut worst = 0.0f64;
    for (g, _) in theta.nodes().iter().enumerate() {
        let base = g * p;
        let group = &theta.theta()[base..base + p];
        let gnorm = norm2(group);
        let mut grad = vec![0.0; p];
        for (i, gi) in grad.iter_mut().enumerate() {
            let mut acc = 0.0;
            for r in 0..n {
                acc += m[[r, base + i]] * residual[r];
            }
            *gi = -2.0 / nf * acc;
        }
        let violation = if gnorm > 0.0 {
            let mut acc = 0.0;
            for i in 0..p {
                let stat = grad[i] + lambda * group[i] / gnorm;
                acc += stat * stat;
            }
            acc.sqrt()
        } else {
            (norm2(&grad) - lambda).max(0.0)
        };
        worst = worst.max(violation);
    }
    Ok(worst)
}

// --- chi-square quantiles via regularized incomplete gamma inversion ---
//
// Implemented here rather than taken from a stats crate so that the penalty
// calibration is bit-reproducible across platforms and dependency bumps.

/// ln Gamma(x) for x > 0, Lanczos approximation (g = 7, 9 terms).
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += c / (x + i as f64 + 1.0);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma P(a, x): series for small x,
/// continued fraction (modified Lentz) otherwise.
fn lower_regularized_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let log_prefix = a * x.ln() - x - ln_gamma(a);
    if log_prefix < -700.0 {
        return if x > a { 1.0 } else { 0.0 };
    }
    if x < a + 1.0 {
        // series expansion
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut denom = a;
        for _ in 0..500 {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        (log_prefix.exp() * sum).min(1.0)
    } else {
        // continued fraction for Q(a, x)
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        let q = log_prefix.exp() * h;
        (1.0 - q).clamp(0.0, 1.0)
    }
}

fn chi2_cdf(x: f64, dof: usize) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        lower_regularized_gamma(dof as f64 / 2.0, x / 2.0)
    }
}

fn chi2_ln_pdf(x: f64, dof: usize) -> f64 {
    let a = dof as f64 / 2.0;
    (a - 1.0) * x.ln() - x / 2.0 - a * std::f64::consts::LN_2 - ln_gamma(a)
}

/// Quantile of the chi-square distribution with `dof` degrees of freedom,
/// to about 1e-12 absolute accuracy. `q = 0` returns 0.
pub fn chi2_quantile(q: f64, dof: usize) -> Result<f64> {
    if dof == 0 {
        return Err(Error::invalid_input("chi-square dof must be at least 1"));
    }
    if !(0.0..1.0).contains(&q) {
        return Err(Error::invalid_input(format!(
            "quantile probability {q} outside [0, 1)"
        )));
    }
    if q == 0.0 {
        return Ok(0.0);
    }

    // bracket the root
    let mut lo = 0.0;
    let mut hi = (dof as f64).max(1.0);
    while chi2_cdf(hi, dof) < q {
        hi *= 2.0;
        if hi > 1e308 {
            return Err(Error::invalid_input("quantile out of range"));
        }
    }

    // Wilson-Hilferty starting point
    let d = dof as f64;
    let z = normal_quantile_approx(q);
    let wh = d * (1.0 - 2.0 / (9.0 * d) + z * (2.0 / (9.0 * d)).sqrt()).powi(3);
    let mut x = if wh.is_finite() && wh > lo && wh < hi {
        wh
    } else {
        0.5 * (lo + hi)
    };

    for _ in 0..200 {
        let f = chi2_cdf(x, dof) - q;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let pdf = chi2_ln_pdf(x, dof).exp();
        let mut next = if pdf > 0.0 { x - f / pdf } else { 0.5 * (lo + hi) };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-14 * x.abs().max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Acklam-style rational approximation to the standard normal quantile.
/// Only used to seed Newton iterations, so modest accuracy is fine.
fn normal_quantile_approx(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile_approx(1.0 - p)
    }
}

/// Penalty level controlling at level `alpha` the probability of falsely
/// joining two distinct connected components:
///
/// ```text
/// lambda(alpha) = 2 sigma_hat sqrt( p * Q(1 - alpha / (N (N-1))) )
/// ```
///
/// with `Q` the chi-square(p) quantile function.
pub fn lambda_alpha(sigma_hat: f64, p: usize, n_nodes: usize, alpha: f64) -> Result<f64> {
    if !(sigma_hat >= 0.0) || !sigma_hat.is_finite() {
        return Err(Error::invalid_input("sigma_hat must be finite and >= 0"));
    }
    if p == 0 {
        return Err(Error::invalid_input("lag order p must be at least 1"));
    }
    if n_nodes < 2 {
        return Err(Error::invalid_input("need at least 2 nodes"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid_input(format!(
            "alpha {alpha} outside the open interval (0, 1)"
        )));
    }
    let pairs = (n_nodes * (n_nodes - 1)) as f64;
    let quantile = chi2_quantile(1.0 - alpha / pairs, p)?;
    Ok(2.0 * sigma_hat * (p as f64 * quantile).sqrt())
}
