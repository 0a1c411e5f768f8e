//! Inference configuration shared by the partition search, the network
//! assembly, and the CLI.

use crate::error::{Error, Result};
use crate::glasso::SolverConfig;

/// Which class of recursive partitions the change-point search explores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Recursive dyadic partitioning: splits only at interval midpoints,
    /// requires `T` to be a power of two. O(T) model fits.
    Rdp,
    /// General recursive partitioning: splits at every interior point.
    /// O(T^2) model fits.
    Rp,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Rdp => "rdp",
            Method::Rp => "rp",
        }
    }

    /// Count-penalty constant: 1/2 for the dyadic class, 3/2 for the
    /// richer general class.
    pub fn default_c3(&self) -> f64 {
        match self {
            Method::Rdp => 0.5,
            Method::Rp => 1.5,
        }
    }

    /// Exact-detection tolerance used when scoring simulation studies:
    /// dyadic boundaries must match exactly, general ones within +/-5.
    pub fn default_tolerance(&self) -> usize {
        match self {
            Method::Rdp => 0,
            Method::Rp => 5,
        }
    }

    /// Calibrated split-penalty multiplier (see `PenaltyConfig`).
    pub fn default_kappa_mult(&self) -> f64 {
        match self {
            Method::Rdp => 3.0,
            Method::Rp => 2.0,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rdp" => Ok(Method::Rdp),
            "rp" => Ok(Method::Rp),
            other => Err(Error::invalid_input(format!(
                "unknown method '{other}', expected 'rdp' or 'rp'"
            ))),
        }
    }
}

/// How the per-split penalty scales with the neighborhood size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountScale {
    /// One count term per extra block for the whole neighborhood.
    PerNeighborhood,
    /// One count term per extra block and per candidate source node,
    /// i.e. the per-neighborhood value times `N - 1`.
    PerNode,
}

/// Split-penalty configuration for the dynamic-programming search.
///
/// The per-split penalty is `kappa = kappa_mult * 2 * c3 * ln T`, times
/// `N - 1` under [`CountScale::PerNode`]; `kappa` can also be overridden
/// outright.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PenaltyConfig {
    /// Count-penalty constant; `None` uses the method default
    /// (1/2 for RDP, 3/2 for RP).
    pub c3: Option<f64>,
    /// Absolute override of the per-split penalty.
    pub kappa: Option<f64>,
    /// Neighborhood-size scaling of the count term.
    pub count_scale: CountScale,
    /// Extra multiplier on the derived `kappa`; `None` uses the
    /// method-calibrated default.
    pub kappa_mult: Option<f64>,
    /// Minimum block length admitted by the general search; `None` uses
    /// `p + 1`, the smallest interval a lag-p model can be fit on.
    pub min_segment: Option<usize>,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            c3: None,
            kappa: None,
            count_scale: CountScale::PerNode,
            kappa_mult: None,
            min_segment: None,
        }
    }
}

impl PenaltyConfig {
    pub fn effective_c3(&self, method: Method) -> f64 {
        self.c3.unwrap_or_else(|| method.default_c3())
    }

    /// Per-split penalty for a series of length `t_len` over `n_nodes`.
    pub fn kappa_for(&self, method: Method, t_len: usize, n_nodes: usize) -> f64 {
        if let Some(kappa) = self.kappa {
            return kappa;
        }
        let scale = match self.count_scale {
            CountScale::PerNeighborhood => 1.0,
            CountScale::PerNode => (n_nodes - 1) as f64,
        };
        let mult = self.kappa_mult.unwrap_or_else(|| method.default_kappa_mult());
        mult * 2.0 * self.effective_c3(method) * (t_len as f64).ln() * scale
    }

    pub fn min_segment_for(&self, p: usize) -> usize {
        self.min_segment.unwrap_or(p + 1).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(c3) = self.c3 {
            if !(c3 >= 0.0) || !c3.is_finite() {
                return Err(Error::invalid_input("c3 must be finite and >= 0"));
            }
        }
        if let Some(kappa) = self.kappa {
            if !(kappa >= 0.0) || !kappa.is_finite() {
                return Err(Error::invalid_input("kappa must be finite and >= 0"));
            }
        }
        if let Some(mult) = self.kappa_mult {
            if !(mult > 0.0) || !mult.is_finite() {
                return Err(Error::invalid_input("kappa_mult must be finite and > 0"));
            }
        }
        if self.min_segment == Some(0) {
            return Err(Error::invalid_input("min_segment must be at least 1"));
        }
        Ok(())
    }
}

/// How the theoretical level `lambda(alpha)` is translated into the working
/// penalty of each interval fit.
///
/// The closed-form level is derived from a worst-case variance bound that
/// grows with the sample size; dividing by the square root of the length
/// restores the scale at which the bound is tight. `Literal` applies the
/// formula value unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaScale {
    /// Divide `lambda(alpha)` by `sqrt(|I|)` of the interval being fit.
    InvSqrtLen,
    /// Divide `lambda(alpha)` by `sqrt(T)` of the whole series.
    InvSqrtT,
    /// Use the formula value unchanged.
    Literal,
}

/// Group-penalty configuration for the per-interval fits.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LambdaConfig {
    /// Fixed lambda for every interval, bypassing the alpha calibration.
    pub fixed: Option<f64>,
    /// Scale mode applied to `lambda(alpha)`.
    pub scale: LambdaScale,
    /// Extra multiplier on the calibrated value.
    pub mult: f64,
}

impl Default for LambdaConfig {
    fn default() -> Self {
        LambdaConfig {
            fixed: None,
            scale: LambdaScale::InvSqrtT,
            mult: 1.0,
        }
    }
}

impl LambdaConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(lambda) = self.fixed {
            if !(lambda >= 0.0) || !lambda.is_finite() {
                return Err(Error::invalid_input("lambda must be finite and >= 0"));
            }
        }
        if !(self.mult > 0.0) || !self.mult.is_finite() {
            return Err(Error::invalid_input("lambda mult must be finite and > 0"));
        }
        Ok(())
    }
}

/// Everything the inference pipeline needs to know.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InferenceConfig {
    /// VAR lag order.
    pub p: usize,
    /// Type-I error level for the neighborhood-selection calibration.
    pub alpha: f64,
    pub method: Method,
    pub solver: SolverConfig,
    pub penalty: PenaltyConfig,
    pub lambda: LambdaConfig,
    /// Relaxed fit: after group selection, re-estimate the active groups
    /// by least squares and score the block by the refit residual sum of
    /// squares. Removes the shrinkage bias from the reported coefficients
    /// and from the change-point score contrasts; selection itself stays
    /// penalty-calibrated.
    pub debias: bool,
    /// Worker threads for the parallel parts; `None` means the rayon
    /// default (all cores). Thread count never changes results.
    pub threads: Option<usize>,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            p: 2,
            alpha: 0.05,
            method: Method::Rdp,
            solver: SolverConfig::default(),
            penalty: PenaltyConfig::default(),
            lambda: LambdaConfig::default(),
            debias: true,
            threads: None,
        }
    }
}

impl InferenceConfig {
    pub fn with_method(method: Method) -> Self {
        InferenceConfig {
            method,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::invalid_input("lag order p must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid_input(format!(
                "alpha {} outside the open interval (0, 1)",
                self.alpha
            )));
        }
        self.solver.validate()?;
        self.penalty.validate()?;
        self.lambda.validate()?;
        Ok(())
    }
}
