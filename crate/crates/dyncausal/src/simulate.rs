//! Benchmark process generators and study scoring.
//!
//! The generators reproduce the standard three-node benchmark processes
//! (a stationary VAR(2), a two-change-point piecewise VAR(2), and a
//! boundary-change variant), their scaled-up versions with extra noise
//! nodes, and the trial-aggregation machinery that scores inference
//! results by change-point count, exact detections, and false edges.
//!
//! Randomness comes from ChaCha12 with the node index as the stream id,
//! so node noise streams are independent and every draw is reproducible
//! across platforms from the single 64-bit seed.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::config::InferenceConfig;
use crate::error::{Error, Result};
use crate::network::{infer_neighborhood, NeighborhoodModel};
use crate::timeseries::{Interval, MultivariateSeries};

/// One stationary regime: an interval and its coefficient map
/// `(target, source, lag) -> value`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Regime {
    pub interval: Interval,
    /// Keys are `(target u, source v, lag l)` with `u != v`, `1 <= l`.
    pub coeffs: BTreeMap<(usize, usize, usize), f64>,
}

/// Specification of a piecewise VAR generating process.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GeneratorSpec {
    pub n_nodes: usize,
    pub t_len: usize,
    /// Regimes tiling `[1, T]` in order.
    pub schedule: Vec<Regime>,
    pub noise_sd: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 2 {
            return Err(Error::invalid_input("need at least 2 nodes"));
        }
        if self.t_len == 0 {
            return Err(Error::invalid_input("t_len must be positive"));
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return Err(Error::invalid_input("noise_sd must be finite and >= 0"));
        }
        let mut expected_start = 1usize;
        for regime in &self.schedule {
            if regime.interval.start != expected_start {
                return Err(Error::invalid_input(format!(
                    "schedule does not tile [1, T]: expected start {expected_start}, got {}",
                    regime.interval.start
                )));
            }
            expected_start = regime.interval.end + 1;
            for (&(u, v, lag), _) in &regime.coeffs {
                if u == v {
                    return Err(Error::invalid_input(format!(
                        "self-lag entry ({u}, {v}) is not allowed"
                    )));
                }
                if u < 1 || u > self.n_nodes || v < 1 || v > self.n_nodes {
                    return Err(Error::invalid_input(format!(
                        "schedule references node pair ({u}, {v}) outside 1..={}",
                        self.n_nodes
                    )));
                }
                if lag == 0 {
                    return Err(Error::invalid_input("lags start at 1"));
                }
            }
        }
        if expected_start != self.t_len + 1 {
            return Err(Error::invalid_input(format!(
                "schedule ends at {} but T = {}",
                expected_start - 1,
                self.t_len
            )));
        }
        Ok(())
    }

    /// True change points: interior regime boundaries where the
    /// coefficient map actually changes.
    pub fn change_points(&self) -> Vec<usize> {
        let mut cps = Vec::new();
        for pair in self.schedule.windows(2) {
            if pair[0].coeffs != pair[1].coeffs {
                cps.push(pair[0].interval.end);
            }
        }
        cps
    }

    /// True incoming sources of `target` anywhere within `[start, end]`.
    pub fn active_sources_in(&self, target: usize, start: usize, end: usize) -> Vec<usize> {
        let mut sources = Vec::new();
        for regime in &self.schedule {
            if regime.interval.end < start || regime.interval.start > end {
                continue;
            }
            for (&(u, v, _), &value) in &regime.coeffs {
                if u == target && value != 0.0 && !sources.contains(&v) {
                    sources.push(v);
                }
            }
        }
        sources.sort_unstable();
        sources
    }

    /// The noise draw for node `v` at time `t`, as used by `simulate`.
    pub fn noise_at(&self, v: usize, t: usize) -> f64 {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(v as u64);
        let mut value = 0.0;
        for _ in 0..t {
            value = self.noise_sd * rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        value
    }
}

/// Generate a series from a spec. Nodes with no incoming schedule entries
/// are i.i.d. Gaussian noise; driven nodes follow the scheduled recursion
/// with lagged values from the global series (times before 1 read as 0).
pub fn simulate(spec: &GeneratorSpec) -> Result<MultivariateSeries> {
    spec.validate()?;
    let n = spec.n_nodes;
    let t_len = spec.t_len;

    let noise: Vec<Vec<f64>> = (1..=n)
        .map(|v| {
            let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
            rng.set_stream(v as u64);
            (0..t_len)
                .map(|_| spec.noise_sd * rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect()
        })
        .collect();

    let mut columns: Vec<Vec<f64>> = vec![vec![0.0; t_len]; n];
    for t in 1..=t_len {
        let regime = spec
            .schedule
            .iter()
            .find(|r| r.interval.contains(t))
            .expect("schedule tiles [1, T]");
        for u in 1..=n {
            let mut value = 0.0;
            for (&(target, source, lag), &coeff) in &regime.coeffs {
                if target == u {
                    let s = t as isize - lag as isize;
                    let lagged = if s < 1 {
                        0.0
                    } else {
                        columns[source - 1][s as usize - 1]
                    };
                    value += coeff * lagged;
                }
            }
            value += noise[u - 1][t - 1];
            columns[u - 1][t - 1] = value;
        }
    }
    let labels = (1..=n).map(|v| format!("x{v}")).collect();
    MultivariateSeries::from_columns(columns, labels)
}

fn regime(start: usize, end: usize, entries: &[(usize, usize, usize, f64)]) -> Regime {
    Regime {
        interval: Interval::new(start, end).expect("static interval"),
        coeffs: entries
            .iter()
            .map(|&(u, v, lag, c)| ((u, v, lag), c))
            .collect(),
    }
}

/// Stationary VAR(2) with no change point: node 1 driven by nodes 2 and 3
/// at both lags, over a series of length `t_len`.
pub fn model_a_with_len(t_len: usize, seed: u64) -> GeneratorSpec {
    GeneratorSpec {
        n_nodes: 3,
        t_len,
        schedule: vec![regime(
            1,
            t_len,
            &[
                (1, 2, 1, 0.5),
                (1, 2, 2, 0.25),
                (1, 3, 1, 0.5),
                (1, 3, 2, 0.25),
            ],
        )],
        noise_sd: 1.0,
        seed,
    }
}

/// Standard stationary benchmark: `model_a_with_len(1024, seed)`.
pub fn model_a(seed: u64) -> GeneratorSpec {
    model_a_with_len(1024, seed)
}

/// Piecewise VAR(2) with two change points at `T/2` and `3T/4`:
/// node 2 drives in the first regime, node 3 in the second, both (lag 1
/// only, opposite signs) in the third. `t_len` must be divisible by 4.
pub fn model_b_with_len(t_len: usize, seed: u64) -> Result<GeneratorSpec> {
    if t_len < 8 || t_len % 4 != 0 {
        return Err(Error::invalid_input(
            "model b needs t_len divisible by 4 and at least 8",
        ));
    }
    let half = t_len / 2;
    let three_q = 3 * t_len / 4;
    Ok(GeneratorSpec {
        n_nodes: 3,
        t_len,
        schedule: vec![
            regime(1, half, &[(1, 2, 1, 0.5), (1, 2, 2, 0.25)]),
            regime(half + 1, three_q, &[(1, 3, 1, 0.5), (1, 3, 2, 0.25)]),
            regime(three_q + 1, t_len, &[(1, 2, 1, 0.5), (1, 3, 1, -0.5)]),
        ],
        noise_sd: 1.0,
        seed,
    })
}

/// Standard two-change-point benchmark: `model_b_with_len(1024, seed)`,
/// change points {512, 768}.
pub fn model_b(seed: u64) -> GeneratorSpec {
    model_b_with_len(1024, seed).expect("1024 is valid")
}

/// Change point close to the boundary, at `T/8`: node 2 drives first,
/// node 3 after. `t_len` must be divisible by 8.
pub fn model_c_with_len(t_len: usize, seed: u64) -> Result<GeneratorSpec> {
    if t_len < 16 || t_len % 8 != 0 {
        return Err(Error::invalid_input(
            "model c needs t_len divisible by 8 and at least 16",
        ));
    }
    let eighth = t_len / 8;
    Ok(GeneratorSpec {
        n_nodes: 3,
        t_len,
        schedule: vec![
            regime(1, eighth, &[(1, 2, 1, 0.5), (1, 2, 2, 0.25)]),
            regime(eighth + 1, t_len, &[(1, 3, 1, 0.5), (1, 3, 2, 0.25)]),
        ],
        noise_sd: 1.0,
        seed,
    })
}

/// Standard boundary benchmark: `model_c_with_len(1024, seed)`, change
/// point {128}.
pub fn model_c(seed: u64) -> GeneratorSpec {
    model_c_with_len(1024, seed).expect("1024 is valid")
}

/// The two-change-point process embedded in a larger vertex set: nodes
/// 1..3 follow `model_b`, nodes 4..n are pure noise.
pub fn model_b_scaled(n_nodes: usize, seed: u64) -> Result<GeneratorSpec> {
    model_b_scaled_with_len(n_nodes, 1024, seed)
}

/// Scaled variant with adjustable length.
pub fn model_b_scaled_with_len(
    n_nodes: usize,
    t_len: usize,
    seed: u64,
) -> Result<GeneratorSpec> {
    if n_nodes < 3 {
        return Err(Error::invalid_input(
            "the scaled process needs at least 3 nodes",
        ));
    }
    let mut spec = model_b_with_len(t_len, seed)?;
    spec.n_nodes = n_nodes;
    Ok(spec)
}

/// Per-trial scoring outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TrialScore {
    /// Number of estimated change points.
    pub cp_count: usize,
    /// Estimated change points matched one-to-one to true ones within the
    /// tolerance window.
    pub exact_count: usize,
    /// `(block, edge)` pairs whose source has no true nonzero coefficient
    /// anywhere in the block's time span.
    pub false_edge_count: usize,
}

/// Score one inference result against the generating truth.
///
/// Exact detections use a greedy one-to-one matching: estimates in
/// ascending order each claim the nearest unmatched true change point
/// within `tolerance`.
pub fn score_trial(
    result: &NeighborhoodModel,
    truth: &GeneratorSpec,
    tolerance: usize,
) -> TrialScore {
    let estimates = result.change_points();
    let true_cps = truth.change_points();
    let mut matched = vec![false; true_cps.len()];
    let mut exact_count = 0;
    for &est in estimates {
        let mut best: Option<(usize, usize)> = None;
        for (i, &truth_cp) in true_cps.iter().enumerate() {
            if matched[i] {
                continue;
            }
            let dist = est.abs_diff(truth_cp);
            if dist <= tolerance && best.map(|(_, d)| dist < d).unwrap_or(true) {
                best = Some((i, dist));
            }
        }
        if let Some((i, _)) = best {
            matched[i] = true;
            exact_count += 1;
        }
    }

    let mut false_edge_count = 0;
    for (block, edges) in result
        .partition
        .blocks
        .iter()
        .zip(&result.edges_per_block)
    {
        let truly_active = truth.active_sources_in(
            result.target,
            block.interval.start,
            block.interval.end,
        );
        for edge in edges {
            if !truly_active.contains(&edge.from) {
                false_edge_count += 1;
            }
        }
    }

    TrialScore {
        cp_count: estimates.len(),
        exact_count,
        false_edge_count,
    }
}

/// Aggregated study results in the shape of the benchmark tables: three
/// histograms over trials.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrialReport {
    pub trials: usize,
    /// Exactness window (time points) used for the detection histogram.
    pub tolerance: usize,
    pub cp_count_histogram: BTreeMap<usize, usize>,
    pub exact_detection_histogram: BTreeMap<usize, usize>,
    pub false_edge_histogram: BTreeMap<usize, usize>,
}

impl TrialReport {
    pub fn count(histogram: &BTreeMap<usize, usize>, value: usize) -> usize {
        histogram.get(&value).copied().unwrap_or(0)
    }

    /// Trials with exactly `value` detected change points.
    pub fn cp_count(&self, value: usize) -> usize {
        Self::count(&self.cp_count_histogram, value)
    }

    pub fn exact_count(&self, value: usize) -> usize {
        Self::count(&self.exact_detection_histogram, value)
    }

    pub fn false_edge_count(&self, value: usize) -> usize {
        Self::count(&self.false_edge_histogram, value)
    }

    /// CSV rendering: one row per `category,value,count`, preceded by
    /// metadata rows identifying the study.
    pub fn to_csv(&self, model: &str, method: &str) -> String {
        let mut out = String::new();
        out.push_str("format_version,model,method,trials,tolerance\n");
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            crate::network::FORMAT_VERSION,
            model,
            method,
            self.trials,
            self.tolerance
        ));
        out.push_str("category,value,count\n");
        let sections: [(&str, &BTreeMap<usize, usize>); 3] = [
            ("change_points", &self.cp_count_histogram),
            ("exact_detections", &self.exact_detection_histogram),
            ("false_edges", &self.false_edge_histogram),
        ];
        for (name, hist) in sections {
            for (value, count) in hist {
                out.push_str(&format!("{name},{value},{count}\n"));
            }
        }
        out
    }
}

/// Run `trials` seeded simulations of `factory`, infer the neighborhood of
/// `target` under `cfg`, and aggregate the scores. Trial `i` uses seed
/// `base_seed + i`; trials run in parallel and aggregate in index order,
/// so the report is deterministic.
pub fn run_study(
    factory: &(dyn Fn(u64) -> Result<GeneratorSpec> + Sync),
    target: usize,
    trials: usize,
    base_seed: u64,
    cfg: &InferenceConfig,
    tolerance: Option<usize>,
) -> Result<TrialReport> {
    if trials == 0 {
        return Err(Error::invalid_input("trials must be at least 1"));
    }
    cfg.validate()?;
    let tolerance = tolerance.unwrap_or_else(|| cfg.method.default_tolerance());
    let scores: Vec<Result<TrialScore>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let spec = factory(base_seed + i as u64)?;
            let series = simulate(&spec)?;
            let hood = infer_neighborhood(&series, target, cfg)?;
            Ok(score_trial(&hood, &spec, tolerance))
        })
        .collect();
    let mut cp_hist = BTreeMap::new();
    let mut exact_hist = BTreeMap::new();
    let mut false_hist = BTreeMap::new();
    for score in scores {
        let score = score?;
        *cp_hist.entry(score.cp_count).or_insert(0) += 1;
        *exact_hist.entry(score.exact_count).or_insert(0) += 1;
        *false_hist.entry(score.false_edge_count).or_insert(0) += 1;
    }
    Ok(TrialReport {
        trials,
        tolerance,
        cp_count_histogram: cp_hist,
        exact_detection_histogram: exact_hist,
        false_edge_histogram: false_hist,
    })
}
