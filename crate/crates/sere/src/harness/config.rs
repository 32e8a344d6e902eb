//! Flat TOML experiment configs.
//!
//! Every key sits at the top level; matrices are arrays-of-arrays values
//! on a single key. The `kind` selects which keys are consumed; unknown
//! keys are rejected so stale configs fail loudly.

use crate::error::{Result, SereError};
use crate::evolution::MatrixFamily;
use crate::hawkes::ExpHawkesKernel;
use crate::markov::FiniteMarkovChain;
use crate::swish::AffineRateFamily;
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Lln,
    AveragingTraffic,
    AveragingSummation,
    AveragingOperator,
    DiffusionSummation,
    DiffusionTraffic,
    DiffusionOperator,
    Ruin,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Lln => "lln",
            ExperimentKind::AveragingTraffic => "averaging_traffic",
            ExperimentKind::AveragingSummation => "averaging_summation",
            ExperimentKind::AveragingOperator => "averaging_operator",
            ExperimentKind::DiffusionSummation => "diffusion_summation",
            ExperimentKind::DiffusionTraffic => "diffusion_traffic",
            ExperimentKind::DiffusionOperator => "diffusion_operator",
            ExperimentKind::Ruin => "ruin",
        }
    }

    pub fn is_averaging(&self) -> bool {
        matches!(
            self,
            ExperimentKind::AveragingTraffic
                | ExperimentKind::AveragingSummation
                | ExperimentKind::AveragingOperator
        )
    }

    pub fn is_diffusion(&self) -> bool {
        matches!(
            self,
            ExperimentKind::DiffusionSummation
                | ExperimentKind::DiffusionTraffic
                | ExperimentKind::DiffusionOperator
        )
    }
}

fn default_ladder() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.02]
}

fn default_t() -> f64 {
    1.0
}

fn default_replicas() -> usize {
    1000
}

fn default_dt() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Hawkes baseline intensity.
    pub lambda: f64,
    /// Hawkes excitation jump.
    pub alpha: f64,
    /// Hawkes decay rate.
    pub beta: f64,
    /// Chain transition matrix, one row per state.
    pub transition: Vec<Vec<f64>>,
    #[serde(default)]
    pub x0: usize,
    /// Per-state jump marks `a(x)`.
    #[serde(default)]
    pub marks: Option<Vec<f64>>,
    /// Affine rate family `v(z, x) = c0(x) + c1(x) z` (traffic kinds).
    #[serde(default)]
    pub c0: Option<Vec<f64>>,
    #[serde(default)]
    pub c1: Option<Vec<f64>>,
    #[serde(default = "default_ladder")]
    pub epsilon_ladder: Vec<f64>,
    /// Macroscopic time of the scaled schemes.
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(default = "default_replicas")]
    pub n_replicas: usize,
    #[serde(default)]
    pub seed: u64,
    /// Inter-arrival moment overrides; estimated from the kernel when
    /// absent.
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub m2: Option<f64>,
    /// Observation horizons (lln kind; the report's epsilon column holds
    /// these).
    #[serde(default)]
    pub horizons: Option<Vec<f64>>,
    /// Initial capitals (ruin kind; the report's epsilon column holds
    /// these).
    #[serde(default)]
    pub u_values: Option<Vec<f64>>,
    #[serde(default)]
    pub premium: Option<f64>,
    /// Simulation horizon (simulate and ruin).
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub z0: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Per-state matrices, row-major (operator kinds).
    #[serde(default)]
    pub gamma: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default)]
    pub d1: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default)]
    pub d2: Option<Vec<Vec<Vec<f64>>>>,
    /// Initial vector the operator evolutions act on.
    #[serde(default)]
    pub f: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| SereError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    fn validate(&self) -> Result<()> {
        // shared invariants; domain invariants are re-checked by the
        // owning constructors when the experiment is assembled
        if self.epsilon_ladder.is_empty()
            || self
                .epsilon_ladder
                .windows(2)
                .any(|w| w[1] >= w[0])
            || self.epsilon_ladder.iter().any(|&e| !(0.0 < e && e <= 1.0))
        {
            return Err(SereError::InvalidConfig(
                "epsilon_ladder must be strictly decreasing within (0, 1]".into(),
            ));
        }
        if self.n_replicas < 100 {
            return Err(SereError::InsufficientSamples {
                available: self.n_replicas,
                required: 100,
            });
        }
        if !(self.t > 0.0) {
            return Err(SereError::NonPositiveParameter { name: "t", value: self.t });
        }
        self.kernel()?;
        let chain = self.chain()?;
        let n = chain.n_states();
        let check_len = |name: &'static str, len: usize| -> Result<()> {
            if len != n {
                return Err(SereError::InvalidConfig(format!(
                    "{name} must have one entry per state ({n}), got {len}"
                )));
            }
            Ok(())
        };
        if let Some(a) = &self.marks {
            check_len("marks", a.len())?;
        }
        if let Some(c0) = &self.c0 {
            check_len("c0", c0.len())?;
        }
        if let Some(c1) = &self.c1 {
            check_len("c1", c1.len())?;
        }
        match self.kind {
            ExperimentKind::AveragingSummation | ExperimentKind::DiffusionSummation => {
                if self.marks.is_none() {
                    return Err(SereError::InvalidConfig("summation kinds need marks".into()));
                }
            }
            ExperimentKind::AveragingTraffic | ExperimentKind::DiffusionTraffic => {
                self.rate_family()?;
            }
            ExperimentKind::AveragingOperator | ExperimentKind::DiffusionOperator => {
                let family = self.matrix_family()?;
                let f = self.initial_vector()?;
                if f.len() != family.dim() {
                    return Err(SereError::InvalidConfig(format!(
                        "f must have dimension {}, got {}",
                        family.dim(),
                        f.len()
                    )));
                }
            }
            ExperimentKind::Ruin => {
                if self.marks.is_none() || self.u_values.is_none() || self.premium.is_none() {
                    return Err(SereError::InvalidConfig(
                        "ruin kind needs marks, u_values and premium".into(),
                    ));
                }
            }
            ExperimentKind::Lln => {}
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<ExpHawkesKernel> {
        ExpHawkesKernel::new(self.lambda, self.alpha, self.beta)
    }

    pub fn chain(&self) -> Result<FiniteMarkovChain> {
        let n = self.transition.len();
        if n == 0 || self.transition.iter().any(|row| row.len() != n) {
            return Err(SereError::InvalidConfig("transition must be a square matrix".into()));
        }
        let m = DMatrix::from_fn(n, n, |i, j| self.transition[i][j]);
        FiniteMarkovChain::new(m)
    }

    pub fn rate_family(&self) -> Result<AffineRateFamily> {
        let c0 = self
            .c0
            .clone()
            .ok_or_else(|| SereError::InvalidConfig("traffic kinds need c0".into()))?;
        let c1 = self.c1.clone().unwrap_or_else(|| vec![0.0; c0.len()]);
        AffineRateFamily::new(c0, c1)
    }

    pub fn matrix_family(&self) -> Result<MatrixFamily> {
        let to_mats = |name: &'static str, raw: &Vec<Vec<Vec<f64>>>| -> Result<Vec<DMatrix<f64>>> {
            raw.iter()
                .map(|rows| {
                    let d = rows.len();
                    if d == 0 || rows.iter().any(|r| r.len() != d) {
                        return Err(SereError::InvalidConfig(format!(
                            "{name} entries must be square matrices"
                        )));
                    }
                    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
                })
                .collect()
        };
        let gamma = self
            .gamma
            .as_ref()
            .ok_or_else(|| SereError::InvalidConfig("operator kinds need gamma".into()))?;
        let d1 = self
            .d1
            .as_ref()
            .ok_or_else(|| SereError::InvalidConfig("operator kinds need d1".into()))?;
        MatrixFamily::new(
            to_mats("gamma", gamma)?,
            to_mats("d1", d1)?,
            self.d2.as_ref().map(|d2| to_mats("d2", d2)).transpose()?,
        )
    }

    pub fn initial_vector(&self) -> Result<DVector<f64>> {
        let f = self
            .f
            .as_ref()
            .ok_or_else(|| SereError::InvalidConfig("operator kinds need f".into()))?;
        Ok(DVector::from_row_slice(f))
    }

    pub fn moment_override(&self) -> Option<(f64, f64)> {
        match (self.m, self.m2) {
            (Some(m), Some(m2)) => Some((m, m2)),
            _ => None,
        }
    }
}
