//! Assembles per-node piecewise models into a time-indexed directed
//! network and serializes results.
//!
//! An edge `v -> u` is present on a block exactly when the fitted group
//! `theta(u, v)` is nonzero there; the solver's group thresholding makes
//! that an exact zero test, no epsilon involved.

use rayon::prelude::*;

use crate::config::InferenceConfig;
use crate::error::{Error, Result};
use crate::partition::{search, PartitionResult};
use crate::timeseries::MultivariateSeries;

/// One incoming edge of a block: source node, group norm, lag coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub norm: f64,
    pub coeffs: Vec<f64>,
}

/// A fitted neighborhood: the partition for one target node plus the
/// per-block incoming edge lists.
#[derive(Debug, Clone)]
pub struct NeighborhoodModel {
    pub target: usize,
    pub partition: PartitionResult,
    /// Incoming edges per block, aligned with `partition.blocks`.
    /// Blocks too short to model carry empty lists.
    pub edges_per_block: Vec<Vec<Edge>>,
}

impl NeighborhoodModel {
    pub fn change_points(&self) -> &[usize] {
        &self.partition.change_points
    }

    /// Incoming edges at time `t`.
    pub fn edges_at(&self, t: usize) -> Result<&[Edge]> {
        let idx = self
            .partition
            .blocks
            .iter()
            .position(|b| b.interval.contains(t))
            .ok_or_else(|| Error::invalid_input(format!("time {t} out of range")))?;
        Ok(&self.edges_per_block[idx])
    }
}

/// The assembled dynamic network over all target nodes.
#[derive(Debug, Clone)]
pub struct DynamicNetwork {
    pub n_nodes: usize,
    pub t_len: usize,
    pub labels: Vec<String>,
    pub neighborhoods: Vec<NeighborhoodModel>,
}

impl DynamicNetwork {
    /// Directed edge set at time `t` as sorted `(from, to)` pairs.
    pub fn edges_at(&self, t: usize) -> Result<Vec<(usize, usize)>> {
        if t < 1 || t > self.t_len {
            return Err(Error::invalid_input(format!(
                "time {t} outside 1..={}",
                self.t_len
            )));
        }
        let mut edges = Vec::new();
        for hood in &self.neighborhoods {
            for edge in hood.edges_at(t)? {
                edges.push((edge.from, hood.target));
            }
        }
        edges.sort_unstable();
        Ok(edges)
    }

    /// Union of all per-node change points, deduplicated and sorted. The
    /// method itself is per-neighborhood; this is a derived view.
    pub fn all_change_points(&self) -> Vec<usize> {
        let mut cps: Vec<usize> = self
            .neighborhoods
            .iter()
            .flat_map(|h| h.change_points().iter().copied())
            .collect();
        cps.sort_unstable();
        cps.dedup();
        cps
    }

    /// True when every block fit in every neighborhood converged.
    pub fn converged(&self) -> bool {
        self.neighborhoods.iter().all(|h| h.partition.converged)
    }
}

/// Infer the neighborhood of one target node: run the configured partition
/// search and materialize per-block edges.
pub fn infer_neighborhood(
    series: &MultivariateSeries,
    u: usize,
    cfg: &InferenceConfig,
) -> Result<NeighborhoodModel> {
    let partition = search(series, u, cfg)?;
    let edges_per_block = partition
        .blocks
        .iter()
        .map(|block| match &block.coeffs {
            None => Vec::new(),
            Some(coeffs) => coeffs
                .groups()
                .filter_map(|(v, range)| {
                    let norm = coeffs.node_norm(v).unwrap_or(0.0);
                    if norm > 0.0 {
                        Some(Edge {
                            from: v,
                            norm,
                            coeffs: coeffs.theta()[range].to_vec(),
                        })
                    } else {
                        None
                    }
                })
                .collect(),
        })
        .collect();
    Ok(NeighborhoodModel {
        target: u,
        partition,
        edges_per_block,
    })
}

/// Infer the whole network, one independent neighborhood per node. The
/// per-node searches run in parallel; results are assembled in node order,
/// so the output does not depend on scheduling.
pub fn infer_network(
    series: &MultivariateSeries,
    cfg: &InferenceConfig,
) -> Result<DynamicNetwork> {
    cfg.validate()?;
    let outcomes: Vec<Result<NeighborhoodModel>> = (1..=series.n_nodes())
        .into_par_iter()
        .map(|u| infer_neighborhood(series, u, cfg))
        .collect();
    let mut neighborhoods = Vec::with_capacity(outcomes.len());
    for (u, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(model) => neighborhoods.push(model),
            Err(err) => {
                return Err(Error::invalid_input(format!(
                    "node {} ({}): {err}",
                    u + 1,
                    series.labels()[u]
                )))
            }
        }
    }
    Ok(DynamicNetwork {
        n_nodes: series.n_nodes(),
        t_len: series.t_len(),
        labels: series.labels().to_vec(),
        neighborhoods,
    })
}

// --- serialized result document ---

/// Current version of the result document layout.
pub const FORMAT_VERSION: u32 = 1;

/// JSON result document. Field names and nesting are part of the public
/// interface; node references are emitted as labels.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct NetworkDocument {
    pub format_version: u32,
    pub nodes: Vec<String>,
    pub p: usize,
    pub alpha: f64,
    pub method: String,
    pub neighborhoods: Vec<NeighborhoodDocument>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct NeighborhoodDocument {
    pub target: String,
    pub change_points: Vec<usize>,
    pub blocks: Vec<BlockDocument>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BlockDocument {
    pub start: usize,
    pub end: usize,
    pub lambda: f64,
    pub pl: f64,
    pub edges: Vec<EdgeDocument>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct EdgeDocument {
    pub from: String,
    pub norm: f64,
    pub coeffs: Vec<f64>,
}

impl DynamicNetwork {
    pub fn to_document(&self, cfg: &InferenceConfig) -> NetworkDocument {
        NetworkDocument {
            format_version: FORMAT_VERSION,
            nodes: self.labels.clone(),
            p: cfg.p,
            alpha: cfg.alpha,
            method: cfg.method.as_str().to_string(),
            neighborhoods: self
                .neighborhoods
                .iter()
                .map(|hood| neighborhood_document(hood, &self.labels))
                .collect(),
        }
    }
}

/// Document for a single neighborhood; used both by the full network
/// document and by single-target CLI output.
pub fn neighborhood_document(
    hood: &NeighborhoodModel,
    labels: &[String],
) -> NeighborhoodDocument {
    NeighborhoodDocument {
        target: labels[hood.target - 1].clone(),
        change_points: hood.change_points().to_vec(),
        blocks: hood
            .partition
            .blocks
            .iter()
            .zip(&hood.edges_per_block)
            .map(|(block, edges)| BlockDocument {
                start: block.interval.start,
                end: block.interval.end,
                lambda: block.lambda_used,
                pl: block.pl,
                edges: edges
                    .iter()
                    .map(|e| EdgeDocument {
                        from: labels[e.from - 1].clone(),
                        norm: e.norm,
                        coeffs: e.coeffs.clone(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Document wrapper for a subset of neighborhoods (e.g. a single target).
pub fn partial_document(
    network_labels: &[String],
    hoods: &[NeighborhoodModel],
    cfg: &InferenceConfig,
) -> NetworkDocument {
    NetworkDocument {
        format_version: FORMAT_VERSION,
        nodes: network_labels.to_vec(),
        p: cfg.p,
        alpha: cfg.alpha,
        method: cfg.method.as_str().to_string(),
        neighborhoods: hoods
            .iter()
            .map(|h| neighborhood_document(h, network_labels))
            .collect(),
    }
}

/// Per-time edge-strength rows for plotting: for each block edge, the group
/// norm is constant over the block's interval.
pub fn norm_series(network: &DynamicNetwork) -> Vec<(usize, usize, usize, f64)> {
    let mut rows = Vec::new();
    for hood in &network.neighborhoods {
        for (block, edges) in hood.partition.blocks.iter().zip(&hood.edges_per_block) {
            for edge in edges {
                for t in block.interval.start..=block.interval.end {
                    rows.push((t, hood.target, edge.from, edge.norm));
                }
            }
        }
    }
    rows.sort_unstable_by(|a, b| (a.1, a.2, a.0).cmp(&(b.1, b.2, b.0)));
    rows
}
