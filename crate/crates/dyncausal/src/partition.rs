//! Dynamic-programming search over recursive partitions, scoring each
//! candidate interval with a group-lasso penalized likelihood plus a
//! per-split count penalty.
//!
//! Interval scores are computed from prefix sums of the sufficient
//! statistics (`X'X`, `X'y`, `y'y`), so scoring any interval costs O(k^2)
//! regardless of its length. The general search fits O(T^2) intervals and
//! combines them with O(T^3) comparisons; the dyadic search fits O(T)
//! intervals.

use ndarray::Array2;
use rayon::prelude::*;

use crate::config::{InferenceConfig, Method};
use crate::error::{Error, Result};
use crate::glasso::{lambda_alpha, solve_gram, GramProblem, GroupCoefficients};
use crate::timeseries::{Interval, MultivariateSeries};

/// One interval's fitted score.
///
/// Intervals shorter than `p + 1` cannot support a lag-p fit; they are
/// scored by their raw sum of squares and carry no coefficients.
#[derive(Debug, Clone)]
pub struct BlockFit {
    pub interval: Interval,
    /// Fitted coefficient groups; `None` for unmodeled short blocks.
    pub coeffs: Option<GroupCoefficients>,
    /// Penalized likelihood score of the block on the extensive scale:
    /// residual sum of squares plus `|I| * lambda * sum of group norms`.
    pub pl: f64,
    /// Group penalty the fit was run with (0 for short blocks).
    pub lambda_used: f64,
    /// Interval-local scale estimate `sqrt(||X_I(u)||^2 / |I|)`.
    pub sigma_hat: f64,
    /// False when the solver hit its iteration cap on this block.
    pub converged: bool,
}

impl BlockFit {
    pub fn is_modeled(&self) -> bool {
        self.coeffs.is_some()
    }
}

/// Optimal partition of `[1, T]` for one target node.
#[derive(Debug, Clone)]
pub struct PartitionResult {
    /// Interior boundaries, sorted ascending; a boundary `tau` separates
    /// blocks `[.., tau]` and `[tau + 1, ..]`.
    pub change_points: Vec<usize>,
    /// Blocks tiling `[1, T]` in order.
    pub blocks: Vec<BlockFit>,
    /// `sum of block pl + kappa * (number of blocks - 1)`.
    pub total_objective: f64,
    pub method: Method,
    /// Per-split penalty used by the search.
    pub kappa: f64,
    /// False when any reported block hit the solver iteration cap.
    pub converged: bool,
}

impl PartitionResult {
    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }
}

/// Reporting view of the penalty actually charged to a partition:
/// `c3 * ln T * #blocks + sum_I lambda_I * sum_v ||theta_I(u,v)||`.
pub fn total_penalty(result: &PartitionResult, cfg: &InferenceConfig) -> f64 {
    let t_len = result.blocks.last().map(|b| b.interval.end).unwrap_or(0);
    let c3 = cfg.penalty.effective_c3(result.method);
    let count_term = c3 * (t_len as f64).ln() * result.blocks.len() as f64;
    let group_term: f64 = result
        .blocks
        .iter()
        .map(|b| {
            b.lambda_used
                * b.coeffs
                    .as_ref()
                    .map(|c| c.total_norm())
                    .unwrap_or(0.0)
        })
        .sum();
    count_term + group_term
}

/// Prefix-sum score engine for one `(series, target)` pair.
pub(crate) struct ScoreEngine<'a> {
    series: &'a MultivariateSeries,
    cfg: &'a InferenceConfig,
    k: usize,
    nodes: Vec<usize>,
    t_len: usize,
    // prefix_gram[t] = sum_{s<=t} x_s x_s', flattened k*k; index 0 is zero
    prefix_gram: Vec<f64>,
    prefix_xty: Vec<f64>,
    prefix_yy: Vec<f64>,
}

pub(crate) struct IntervalScore {
    pub pl: f64,
    pub lambda: f64,
    pub sigma_hat: f64,
    pub converged: bool,
}

impl<'a> ScoreEngine<'a> {
    pub fn new(
        series: &'a MultivariateSeries,
        u: usize,
        cfg: &'a InferenceConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let n = series.n_nodes();
        if u < 1 || u > n {
            return Err(Error::invalid_input(format!(
                "target node {u} out of range 1..={n}"
            )));
        }
        let p = cfg.p;
        let nodes: Vec<usize> = (1..=n).filter(|&v| v != u).collect();
        let k = nodes.len() * p;
        let t_len = series.t_len();

        let mut prefix_gram = vec![0.0; (t_len + 1) * k * k];
        let mut prefix_xty = vec![0.0; (t_len + 1) * k];
        let mut prefix_yy = vec![0.0; t_len + 1];
        let mut row = vec![0.0; k];
        for t in 1..=t_len {
            let mut c = 0;
            for &v in &nodes {
                for lag in 1..=p {
                    row[c] = series.value_or_zero(t as isize - lag as isize, v);
                    c += 1;
                }
            }
            let y = series.value(t, u);
            let (prev, cur) = {
                let base = t * k * k;
                let prev_base = (t - 1) * k * k;
                (prev_base, base)
            };
            for i in 0..k {
                for j in 0..k {
                    prefix_gram[cur + i * k + j] =
                        prefix_gram[prev + i * k + j] + row[i] * row[j];
                }
            }
            for i in 0..k {
                prefix_xty[t * k + i] = prefix_xty[(t - 1) * k + i] + row[i] * y;
            }
            prefix_yy[t] = prefix_yy[t - 1] + y * y;
        }
        Ok(ScoreEngine {
            series,
            cfg,
            k,
            nodes,
            t_len,
            prefix_gram,
            prefix_xty,
            prefix_yy,
        })
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    /// Fresh problem buffer sized for this engine, reusable across calls.
    pub fn problem_buffer(&self) -> GramProblem {
        GramProblem {
            gram: Array2::zeros((self.k, self.k)),
            xty: vec![0.0; self.k],
            yty: 0.0,
            n: 0,
            p: self.cfg.p,
            nodes: self.nodes.clone(),
        }
    }

    fn fill_problem(&self, interval: Interval, prob: &mut GramProblem) {
        let a = interval.start - 1;
        let b = interval.end;
        let k = self.k;
        let lo = a * k * k;
        let hi = b * k * k;
        for i in 0..k {
            for j in 0..k {
                prob.gram[[i, j]] =
                    self.prefix_gram[hi + i * k + j] - self.prefix_gram[lo + i * k + j];
            }
        }
        for i in 0..k {
            prob.xty[i] = self.prefix_xty[b * k + i] - self.prefix_xty[a * k + i];
        }
        prob.yty = self.prefix_yy[b] - self.prefix_yy[a];
        prob.n = interval.len();
    }

    fn sum_squares(&self, interval: Interval) -> f64 {
        self.prefix_yy[interval.end] - self.prefix_yy[interval.start - 1]
    }

    /// Working penalty for an interval with scale estimate `sigma_hat`.
    fn lambda_for(&self, interval: Interval, sigma_hat: f64) -> Result<f64> {
        if let Some(fixed) = self.cfg.lambda.fixed {
            return Ok(fixed);
        }
        let base = lambda_alpha(
            sigma_hat,
            self.cfg.p,
            self.series.n_nodes(),
            self.cfg.alpha,
        )?;
        let scale = match self.cfg.lambda.scale {
            crate::config::LambdaScale::InvSqrtLen => 1.0 / (interval.len() as f64).sqrt(),
            crate::config::LambdaScale::InvSqrtT => 1.0 / (self.t_len as f64).sqrt(),
            crate::config::LambdaScale::Literal => 1.0,
        };
        Ok(base * scale * self.cfg.lambda.mult)
    }

    /// Score an interval. `warm` carries the selection fit's warm start in
    /// and its solution out (pass an empty vector for a cold start);
    /// `final_theta` receives the coefficients the score is based on.
    pub fn score_into(
        &self,
        interval: Interval,
        warm: &mut Vec<f64>,
        final_theta: &mut Vec<f64>,
        prob: &mut GramProblem,
    ) -> Result<IntervalScore> {
        let n = interval.len();
        if n < self.cfg.p + 1 {
            let pl = self.sum_squares(interval);
            warm.clear();
            final_theta.clear();
            return Ok(IntervalScore {
                pl,
                lambda: 0.0,
                sigma_hat: (pl / n as f64).sqrt(),
                converged: true,
            });
        }
        self.fill_problem(interval, prob);
        let sigma_hat = (prob.yty / n as f64).max(0.0).sqrt();
        let lambda = self.lambda_for(interval, sigma_hat)?;
        let warm_ref = if warm.len() == self.k {
            Some(warm.as_slice())
        } else {
            None
        };
        let sol = solve_gram(prob, lambda, &self.cfg.solver, warm_ref);
        let mut converged = sol.converged;
        let pl;
        if self.cfg.debias {
            // relaxed fit: least squares on the selected groups, so the
            // score carries no shrinkage bias
            let (theta, rss, refit_ok) = self.refit_active(prob, &sol.theta);
            converged = converged && refit_ok;
            pl = rss;
            *final_theta = theta;
        } else {
            // extensive scale: |I| times the converged normalized objective
            pl = sol.objective * n as f64;
            *final_theta = sol.theta.clone();
        }
        *warm = sol.theta;
        Ok(IntervalScore {
            pl,
            lambda,
            sigma_hat,
            converged,
        })
    }

    /// Least-squares refit of the active groups of `selection`. Returns the
    /// full-size coefficient vector, the refit residual sum of squares, and
    /// the refit convergence flag.
    fn refit_active(&self, prob: &GramProblem, selection: &[f64]) -> (Vec<f64>, f64, bool) {
        let p = self.cfg.p;
        let active: Vec<usize> = (0..self.nodes.len())
            .filter(|&g| selection[g * p..(g + 1) * p].iter().any(|&x| x != 0.0))
            .collect();
        if active.is_empty() {
            return (vec![0.0; self.k], prob.yty, true);
        }
        let ka = active.len() * p;
        let mut sub = GramProblem {
            gram: Array2::zeros((ka, ka)),
            xty: vec![0.0; ka],
            yty: prob.yty,
            n: prob.n,
            p,
            nodes: active.iter().map(|&g| self.nodes[g]).collect(),
        };
        let mut warm = vec![0.0; ka];
        for (i, &gi) in active.iter().enumerate() {
            for ii in 0..p {
                sub.xty[i * p + ii] = prob.xty[gi * p + ii];
                warm[i * p + ii] = selection[gi * p + ii];
                for (j, &gj) in active.iter().enumerate() {
                    for jj in 0..p {
                        sub.gram[[i * p + ii, j * p + jj]] =
                            prob.gram[[gi * p + ii, gj * p + jj]];
                    }
                }
            }
        }
        let refit = solve_gram(&sub, 0.0, &self.cfg.solver, Some(&warm));
        let mut theta = vec![0.0; self.k];
        for (i, &gi) in active.iter().enumerate() {
            for ii in 0..p {
                theta[gi * p + ii] = refit.theta[i * p + ii];
            }
        }
        (theta, refit.objective * prob.n as f64, refit.converged)
    }

    /// Full block fit with materialized coefficients, cold-started so the
    /// result is independent of any surrounding search.
    pub fn block_fit(&self, interval: Interval) -> Result<BlockFit> {
        interval.validate_within(self.t_len)?;
        let n = interval.len();
        if n < self.cfg.p + 1 {
            let pl = self.sum_squares(interval);
            return Ok(BlockFit {
                interval,
                coeffs: None,
                pl,
                lambda_used: 0.0,
                sigma_hat: (pl / n as f64).sqrt(),
                converged: true,
            });
        }
        let mut prob = self.problem_buffer();
        let mut warm = Vec::new();
        let mut theta = Vec::new();
        let score = self.score_into(interval, &mut warm, &mut theta, &mut prob)?;
        Ok(BlockFit {
            interval,
            coeffs: Some(GroupCoefficients::from_theta(
                theta,
                self.nodes.clone(),
                self.cfg.p,
            )),
            pl: score.pl,
            lambda_used: score.lambda,
            sigma_hat: score.sigma_hat,
            converged: score.converged,
        })
    }

    fn materialize(
        &self,
        intervals: Vec<Interval>,
        kappa: f64,
        method: Method,
    ) -> Result<PartitionResult> {
        let mut blocks = Vec::with_capacity(intervals.len());
        for interval in intervals {
            blocks.push(self.block_fit(interval)?);
        }
        let mut total = 0.0;
        for block in &blocks {
            total += block.pl;
        }
        total += kappa * (blocks.len() as f64 - 1.0);
        let change_points = blocks[..blocks.len() - 1]
            .iter()
            .map(|b| b.interval.end)
            .collect();
        let converged = blocks.iter().all(|b| b.converged);
        Ok(PartitionResult {
            change_points,
            blocks,
            total_objective: total,
            method,
            kappa,
            converged,
        })
    }
}

/// Score one interval of the series for target `u` under `cfg`, with the
/// short-interval sum-of-squares rule for intervals shorter than `p + 1`.
pub fn block_score(
    series: &MultivariateSeries,
    u: usize,
    interval: Interval,
    cfg: &InferenceConfig,
) -> Result<BlockFit> {
    interval.validate_within(series.t_len())?;
    let engine = ScoreEngine::new(series, u, cfg)?;
    engine.block_fit(interval)
}

/// Exact search over general recursive partitions for target `u`.
///
/// Computes `opt(I) = min(pl_I, min_s opt(I[..s]) + opt(I[s+1..]) + kappa)`
/// bottom-up over all O(T^2) intervals. Ties prefer no split, then the
/// smallest split point. Split points are restricted so that every block
/// has at least `min_segment` observations.
pub fn rp_search(
    series: &MultivariateSeries,
    u: usize,
    cfg: &InferenceConfig,
) -> Result<PartitionResult> {
    if cfg.method != Method::Rp {
        // method mismatch is a config slip worth surfacing early
        return Err(Error::invalid_input(
            "rp_search called with a non-RP method configured",
        ));
    }
    let engine = ScoreEngine::new(series, u, cfg)?;
    let t_len = engine.t_len();
    let kappa = cfg
        .penalty
        .kappa_for(Method::Rp, t_len, series.n_nodes());
    let min_seg = cfg.penalty.min_segment_for(cfg.p).min(t_len);

    // phase 1: score every admissible interval, warm-starting each fit
    // from the same start one endpoint shorter
    let rows: Vec<Vec<f64>> = (0..t_len)
        .into_par_iter()
        .map(|a| {
            let first_b = a + min_seg - 1;
            if first_b >= t_len {
                return Vec::new();
            }
            let mut prob = engine.problem_buffer();
            let mut warm: Vec<f64> = Vec::new();
            let mut theta: Vec<f64> = Vec::new();
            let mut pls = Vec::with_capacity(t_len - first_b);
            for b in first_b..t_len {
                let interval = Interval::new(a + 1, b + 1).expect("valid by construction");
                let score = engine
                    .score_into(interval, &mut warm, &mut theta, &mut prob)
                    .expect("validated config");
                pls.push(score.pl);
            }
            pls
        })
        .collect();

    let idx = |a: usize, b: usize| a * t_len + b;
    let mut pl = vec![f64::INFINITY; t_len * t_len];
    for (a, row) in rows.iter().enumerate() {
        for (off, &value) in row.iter().enumerate() {
            pl[idx(a, a + min_seg - 1 + off)] = value;
        }
    }

    // phase 2: combine; opt_bwd mirrors opt_fwd transposed so both DP
    // lookups stream sequentially over the split point
    let mut opt_fwd = vec![f64::INFINITY; t_len * t_len];
    let mut opt_bwd = vec![f64::INFINITY; t_len * t_len];
    let mut choice = vec![0u32; t_len * t_len];
    for len in min_seg..=t_len {
        for a in 0..=(t_len - len) {
            let b = a + len - 1;
            let mut best = pl[idx(a, b)];
            let mut best_split = 0u32;
            if len >= 2 * min_seg {
                let s_lo = a + min_seg - 1;
                let s_hi = b - min_seg;
                let fwd = &opt_fwd[a * t_len..];
                let bwd = &opt_bwd[b * t_len..];
                for s in s_lo..=s_hi {
                    let cand = fwd[s] + bwd[s + 1] + kappa;
                    if cand < best {
                        best = cand;
                        best_split = (s + 1) as u32;
                    }
                }
            }
            opt_fwd[idx(a, b)] = best;
            opt_bwd[idx(b, a)] = best;
            choice[idx(a, b)] = best_split;
        }
    }

    // reconstruct block intervals
    let mut intervals = Vec::new();
    let mut stack = vec![(0usize, t_len - 1)];
    while let Some((a, b)) = stack.pop() {
        let split = choice[idx(a, b)];
        if split == 0 {
            intervals.push(Interval::new(a + 1, b + 1)?);
        } else {
            let s = split as usize - 1;
            // push right first so blocks come out left-to-right
            stack.push((s + 1, b));
            stack.push((a, s));
        }
    }
    intervals.sort_by_key(|i| i.start);
    engine.materialize(intervals, kappa, Method::Rp)
}

/// Exact search over recursive dyadic partitions for target `u`.
///
/// Splits only at interval midpoints; requires `T` to be a power of two.
/// Recursion stops at the smallest dyadic length exceeding `p + 1`.
pub fn rdp_search(
    series: &MultivariateSeries,
    u: usize,
    cfg: &InferenceConfig,
) -> Result<PartitionResult> {
    if cfg.method != Method::Rdp {
        return Err(Error::invalid_input(
            "rdp_search called with a non-RDP method configured",
        ));
    }
    let t_len = series.t_len();
    if t_len < 2 || t_len & (t_len - 1) != 0 {
        return Err(Error::invalid_input(format!(
            "recursive dyadic partitioning requires T to be a power of two, got T = {t_len}"
        )));
    }
    let engine = ScoreEngine::new(series, u, cfg)?;
    let kappa = cfg
        .penalty
        .kappa_for(Method::Rdp, t_len, series.n_nodes());

    // smallest dyadic length that can hold a lag-p fit
    let mut leaf = 1usize;
    while leaf <= cfg.p + 1 {
        leaf *= 2;
    }
    if leaf >= t_len {
        return engine.materialize(vec![Interval::new(1, t_len)?], kappa, Method::Rdp);
    }

    // bottom-up over levels; nodes at each level are contiguous intervals
    // of equal dyadic length
    let mut opts: Vec<Vec<f64>> = Vec::new();
    let mut splits: Vec<Vec<bool>> = Vec::new();
    let mut lengths = Vec::new();
    let mut len = leaf;
    while len <= t_len {
        lengths.push(len);
        len *= 2;
    }
    for (level, &len) in lengths.iter().enumerate() {
        let count = t_len / len;
        let mut level_opt = vec![0.0; count];
        let mut level_split = vec![false; count];
        let scored: Vec<f64> = (0..count)
            .into_par_iter()
            .map(|i| {
                let interval = Interval::new(i * len + 1, (i + 1) * len)
                    .expect("valid by construction");
                engine
                    .block_fit(interval)
                    .expect("validated config")
                    .pl
            })
            .collect();
        for i in 0..count {
            let whole = scored[i];
            if level == 0 {
                level_opt[i] = whole;
            } else {
                let children = opts[level - 1][2 * i] + opts[level - 1][2 * i + 1] + kappa;
                if children < whole {
                    level_opt[i] = children;
                    level_split[i] = true;
                } else {
                    level_opt[i] = whole;
                }
            }
        }
        opts.push(level_opt);
        splits.push(level_split);
    }

    // walk the chosen tree down from the root
    let mut intervals = Vec::new();
    let top = lengths.len() - 1;
    let mut stack = vec![(top, 0usize)];
    while let Some((level, i)) = stack.pop() {
        if splits[level][i] {
            stack.push((level - 1, 2 * i + 1));
            stack.push((level - 1, 2 * i));
        } else {
            let len = lengths[level];
            intervals.push(Interval::new(i * len + 1, (i + 1) * len)?);
        }
    }
    intervals.sort_by_key(|i| i.start);
    engine.materialize(intervals, kappa, Method::Rdp)
}

/// Dispatch on the configured method.
pub fn search(
    series: &MultivariateSeries,
    u: usize,
    cfg: &InferenceConfig,
) -> Result<PartitionResult> {
    match cfg.method {
        Method::Rdp => rdp_search(series, u, cfg),
        Method::Rp => rp_search(series, u, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{CountScale, InferenceConfig, LambdaConfig, LambdaScale, Method};
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn noise_series(n_nodes: usize, t_len: usize, seed: u64) -> MultivariateSeries {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let columns = (0..n_nodes)
            .map(|_| {
                (0..t_len)
                    .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .collect()
            })
            .collect();
        let labels = (1..=n_nodes).map(|i| format!("x{i}")).collect();
        MultivariateSeries::from_columns(columns, labels).unwrap()
    }

    fn rp_config() -> InferenceConfig {
        InferenceConfig {
            method: Method::Rp,
            ..Default::default()
        }
    }

    #[test]
    fn short_interval_scores_as_sum_of_squares() {
        let series = MultivariateSeries::from_columns(
            vec![vec![1.0, -2.0, 0.5, 0.1], vec![0.3, 0.4, 0.5, 0.6]],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let cfg = InferenceConfig::default(); // p = 2
        let fit = block_score(&series, 1, Interval::new(1, 2).unwrap(), &cfg).unwrap();
        assert_eq!(fit.pl, 5.0);
        assert!(fit.coeffs.is_none());
        assert!(!fit.is_modeled());
    }

    #[test]
    fn zero_target_gives_zero_score_and_zero_coeffs() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let others: Vec<f64> = (0..40).map(|_| rng.gen::<f64>()).collect();
        let series = MultivariateSeries::from_columns(
            vec![vec![0.0; 40], others],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let cfg = InferenceConfig::default();
        let fit = block_score(&series, 1, Interval::new(1, 40).unwrap(), &cfg).unwrap();
        assert_eq!(fit.pl, 0.0);
        assert!(fit.coeffs.unwrap().is_zero());
    }

    #[test]
    fn rdp_rejects_non_power_of_two() {
        let series = noise_series(3, 1000, 1);
        let cfg = InferenceConfig::default();
        let err = rdp_search(&series, 1, &cfg).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("power of two"), "{msg}");
    }

    #[test]
    fn partition_blocks_tile_the_series() {
        let series = noise_series(3, 64, 7);
        let cfg = InferenceConfig::default();
        let result = rdp_search(&series, 1, &cfg).unwrap();
        assert_eq!(result.blocks[0].interval.start, 1);
        assert_eq!(result.blocks.last().unwrap().interval.end, 64);
        for pair in result.blocks.windows(2) {
            assert_eq!(pair[1].interval.start, pair[0].interval.end + 1);
        }
        assert_eq!(result.change_points.len() + 1, result.blocks.len());
        // total objective re-derives from the stored blocks
        let recomputed: f64 = result.blocks.iter().map(|b| b.pl).sum::<f64>()
            + result.kappa * (result.blocks.len() as f64 - 1.0);
        assert_eq!(recomputed, result.total_objective);
    }

    #[test]
    fn iid_noise_yields_single_block() {
        for seed in [3u64, 5, 8] {
            let series = noise_series(3, 64, seed);
            let rdp = rdp_search(&series, 1, &InferenceConfig::default()).unwrap();
            assert_eq!(rdp.change_points.len(), 0, "seed {seed}");
            let rp = rp_search(&series, 1, &rp_config()).unwrap();
            assert_eq!(rp.change_points.len(), 0, "seed {seed}");
        }
    }

    /// Exhaustive enumeration over contiguous-block partitions with all
    /// parts at least `min_seg` long, scoring each with cold block fits.
    fn enumerate_best(
        series: &MultivariateSeries,
        u: usize,
        cfg: &InferenceConfig,
        kappa: f64,
        min_seg: usize,
    ) -> (f64, Vec<usize>) {
        let t_len = series.t_len();
        let mut score_cache: std::collections::HashMap<(usize, usize), f64> =
            std::collections::HashMap::new();
        let mut score = |a: usize, b: usize, cache: &mut std::collections::HashMap<(usize, usize), f64>| {
            *cache.entry((a, b)).or_insert_with(|| {
                block_score(series, u, Interval::new(a, b).unwrap(), cfg)
                    .unwrap()
                    .pl
            })
        };
        let mut best = f64::INFINITY;
        let mut best_cps = Vec::new();
        // enumerate compositions via bitmask over interior boundaries
        let boundaries = t_len - 1;
        for mask in 0u64..(1u64 << boundaries) {
            let mut cps = Vec::new();
            for b in 0..boundaries {
                if mask >> b & 1 == 1 {
                    cps.push(b + 1);
                }
            }
            let mut valid = true;
            let mut prev = 0usize;
            for &cp in cps.iter().chain(std::iter::once(&t_len)) {
                if cp - prev < min_seg {
                    valid = false;
                    break;
                }
                prev = cp;
            }
            if !valid {
                continue;
            }
            let mut total = 0.0;
            let mut prev = 0usize;
            for &cp in cps.iter().chain(std::iter::once(&t_len)) {
                total += score(prev + 1, cp, &mut score_cache);
                prev = cp;
            }
            total += kappa * cps.len() as f64;
            if total < best {
                best = total;
                best_cps = cps;
            }
        }
        (best, best_cps)
    }

    #[test]
    fn rp_matches_exhaustive_enumeration_on_small_instances() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for trial in 0..25 {
            let t_len = rng.gen_range(6..=12);
            let series = noise_series(3, t_len, 1000 + trial);
            let mut cfg = rp_config();
            cfg.penalty.min_segment = Some(rng.gen_range(1..=3));
            let result = rp_search(&series, 1, &cfg).unwrap();
            let kappa = result.kappa;
            let min_seg = cfg.penalty.min_segment_for(cfg.p).min(t_len);
            let (best, best_cps) = enumerate_best(&series, 1, &cfg, kappa, min_seg);
            assert_eq!(
                result.total_objective, best,
                "trial {trial}: dp {} vs enumeration {}",
                result.total_objective, best
            );
            assert_eq!(result.change_points, best_cps, "trial {trial}");
        }
    }

    #[test]
    fn planted_flip_is_found_exactly() {
        // strong coefficient flip halfway through a T = 16 series
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let driver: Vec<f64> = (0..16)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let mut target = vec![0.0; 16];
        for t in 1..16 {
            let coeff = if t < 8 { 3.0 } else { -3.0 };
            target[t] = coeff * driver[t - 1]
                + 0.05 * rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let series = MultivariateSeries::from_columns(
            vec![target, driver],
            vec!["y".into(), "x".into()],
        )
        .unwrap();
        let mut cfg = rp_config();
        cfg.p = 1;
        let result = rp_search(&series, 1, &cfg).unwrap();
        let (best, best_cps) =
            enumerate_best(&series, 1, &cfg, result.kappa, cfg.penalty.min_segment_for(1));
        assert_eq!(result.total_objective, best);
        assert_eq!(result.change_points, best_cps);
    }

    /// All recursive dyadic partitions of `[1, T]` with leaves no shorter
    /// than `leaf`, enumerated independently of the search.
    fn enumerate_dyadic(
        series: &MultivariateSeries,
        u: usize,
        cfg: &InferenceConfig,
        kappa: f64,
        leaf: usize,
        start: usize,
        len: usize,
    ) -> Vec<(f64, Vec<usize>)> {
        let whole = block_score(series, u, Interval::new(start, start + len - 1).unwrap(), cfg)
            .unwrap()
            .pl;
        let mut out = vec![(whole, Vec::new())];
        if len / 2 >= leaf {
            let half = len / 2;
            let lefts = enumerate_dyadic(series, u, cfg, kappa, leaf, start, half);
            let rights = enumerate_dyadic(series, u, cfg, kappa, leaf, start + half, half);
            for (lscore, lcps) in &lefts {
                for (rscore, rcps) in &rights {
                    let mut cps = lcps.clone();
                    cps.push(start + half - 1);
                    cps.extend_from_slice(rcps);
                    out.push((lscore + rscore + kappa, cps));
                }
            }
        }
        out
    }

    #[test]
    fn rdp_matches_exhaustive_dyadic_enumeration() {
        for trial in 0..10u64 {
            let series = noise_series(3, 32, 500 + trial);
            let cfg = InferenceConfig::default();
            let result = rdp_search(&series, 1, &cfg).unwrap();
            let mut leaf = 1usize;
            while leaf <= cfg.p + 1 {
                leaf *= 2;
            }
            let all = enumerate_dyadic(&series, 1, &cfg, result.kappa, leaf, 1, 32);
            let (best, best_cps) = all
                .into_iter()
                .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
                .unwrap();
            assert_eq!(result.total_objective, best, "trial {trial}");
            assert_eq!(result.change_points, best_cps, "trial {trial}");
        }
    }

    #[test]
    fn rising_kappa_never_adds_blocks() {
        // a series with a genuine flip so intermediate kappas matter
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let driver: Vec<f64> = (0..64)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let mut target = vec![0.0; 64];
        for t in 1..64 {
            let coeff = if t < 32 { 1.5 } else { -1.5 };
            target[t] = coeff * driver[t - 1]
                + 0.3 * rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let series = MultivariateSeries::from_columns(
            vec![target, driver],
            vec!["y".into(), "x".into()],
        )
        .unwrap();
        let mut prev_blocks = usize::MAX;
        for &kappa in &[0.0, 1.0, 4.0, 16.0, 64.0, 256.0] {
            let mut cfg = rp_config();
            cfg.p = 1;
            cfg.penalty.kappa = Some(kappa);
            let result = rp_search(&series, 1, &cfg).unwrap();
            assert!(
                result.n_blocks() <= prev_blocks,
                "kappa {kappa}: {} blocks after {}",
                result.n_blocks(),
                prev_blocks
            );
            prev_blocks = result.n_blocks();
        }
    }

    #[test]
    fn searches_are_deterministic() {
        let series = noise_series(3, 64, 77);
        let cfg = InferenceConfig::default();
        let a = rdp_search(&series, 1, &cfg).unwrap();
        let b = rdp_search(&series, 1, &cfg).unwrap();
        assert_eq!(a.total_objective.to_bits(), b.total_objective.to_bits());
        assert_eq!(a.change_points, b.change_points);
        let cfg = rp_config();
        let a = rp_search(&series, 1, &cfg).unwrap();
        let b = rp_search(&series, 1, &cfg).unwrap();
        assert_eq!(a.total_objective.to_bits(), b.total_objective.to_bits());
        assert_eq!(a.change_points, b.change_points);
    }

    #[test]
    fn total_penalty_recomputes_from_blocks() {
        let series = noise_series(3, 64, 31);
        let cfg = InferenceConfig::default();
        let result = rdp_search(&series, 1, &cfg).unwrap();
        // single noise block, theta should be zero: count term only
        let penalty = total_penalty(&result, &cfg);
        let expected = cfg.penalty.effective_c3(Method::Rdp)
            * 64f64.ln()
            * result.blocks.len() as f64
            + result
                .blocks
                .iter()
                .map(|b| {
                    b.lambda_used * b.coeffs.as_ref().map(|c| c.total_norm()).unwrap_or(0.0)
                })
                .sum::<f64>();
        assert!((penalty - expected).abs() < 1e-12);
    }

    #[test]
    fn lambda_override_and_scales_are_respected() {
        let series = noise_series(3, 32, 3);
        let mut cfg = InferenceConfig::default();
        cfg.lambda = LambdaConfig {
            fixed: Some(123.0),
            scale: LambdaScale::Literal,
            mult: 1.0,
        };
        let fit = block_score(&series, 1, Interval::new(1, 32).unwrap(), &cfg).unwrap();
        assert_eq!(fit.lambda_used, 123.0);
        assert!(fit.coeffs.unwrap().is_zero());

        cfg.lambda = LambdaConfig {
            fixed: None,
            scale: LambdaScale::InvSqrtLen,
            mult: 1.0,
        };
        let fit_len = block_score(&series, 1, Interval::new(1, 16).unwrap(), &cfg).unwrap();
        let base = lambda_alpha(fit_len.sigma_hat, cfg.p, 3, cfg.alpha).unwrap();
        assert!((fit_len.lambda_used - base / 4.0).abs() < 1e-12);
    }

    #[test]
    fn count_scale_changes_kappa() {
        let series = noise_series(4, 32, 3);
        let mut cfg = InferenceConfig::default();
        cfg.penalty.count_scale = CountScale::PerNeighborhood;
        let a = rdp_search(&series, 1, &cfg).unwrap();
        cfg.penalty.count_scale = CountScale::PerNode;
        let b = rdp_search(&series, 1, &cfg).unwrap();
        assert!((b.kappa / a.kappa - 3.0).abs() < 1e-12);
    }
}
