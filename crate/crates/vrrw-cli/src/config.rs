//! Experiment configuration: JSON file schema, CLI overrides, defaults.
//!
//! The matrix comes either inline as row arrays or from a named generator;
//! state labels in the file (`start_vertex`) are 1-based, matching the
//! `v_1..v_d` column convention of the CSV outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vrrw::analysis::cayley_matrix;
use vrrw::model::{all_ones, complete, example2, LikelihoodMatrix};

use crate::HarnessError;

pub const DEFAULT_HORIZON: u64 = 100_000;
pub const DEFAULT_TRAJECTORIES: u64 = 1;
pub const DEFAULT_R_CLASS: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixSource {
    /// Inline symmetric nonnegative rows.
    Inline { rows: Vec<Vec<f64>> },
    /// Complete graph `R_ij = 1 - delta_ij` on `d` states.
    Complete { d: usize },
    /// All-ones matrix (the urn case) on `d` states.
    Ones { d: usize },
    /// Cayley-graph incidence matrix of `Z_n` with connection set `generators`.
    Cayley { n: u64, generators: Vec<u64> },
    /// The built-in 3-state example with a random limit split.
    Example2,
}

impl MatrixSource {
    pub fn build(&self) -> Result<LikelihoodMatrix, HarnessError> {
        match self {
            MatrixSource::Inline { rows } => {
                LikelihoodMatrix::validate(rows).map_err(HarnessError::invalid)
            }
            MatrixSource::Complete { d } => {
                if *d < 2 {
                    return Err(HarnessError::Invalid(
                        "complete(d) needs d >= 2".into(),
                    ));
                }
                Ok(complete(*d))
            }
            MatrixSource::Ones { d } => {
                if *d < 1 {
                    return Err(HarnessError::Invalid("ones(d) needs d >= 1".into()));
                }
                Ok(all_ones(*d))
            }
            MatrixSource::Cayley { n, generators } => {
                cayley_matrix(*n, generators).map_err(HarnessError::invalid)
            }
            MatrixSource::Example2 => Ok(example2()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Analyze,
    Simulate,
    Flow,
    Montecarlo,
    Spectra,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Mode::Analyze => "analyze",
            Mode::Simulate => "simulate",
            Mode::Flow => "flow",
            Mode::Montecarlo => "montecarlo",
            Mode::Spectra => "spectra",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSettings {
    /// Interior start point; the barycenter when absent.
    #[serde(default)]
    pub start: Option<Vec<f64>>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub s_max: Option<f64>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

/// On-disk experiment description. Every field except the matrix is
/// optional; CLI flags override file values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub matrix: MatrixSource,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub horizon: Option<u64>,
    #[serde(default)]
    pub trajectories: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub r_class: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Explicit checkpoint times (total time `n`); geometric when absent.
    #[serde(default)]
    pub checkpoints: Option<Vec<f64>>,
    /// Initial counts `S(0)` (all ones when absent).
    #[serde(default)]
    pub initial_counts: Option<Vec<f64>>,
    /// Starting vertex, 1-based (state 1 when absent).
    #[serde(default)]
    pub start_vertex: Option<usize>,
    #[serde(default)]
    pub flow: Option<FlowSettings>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| HarnessError::Invalid(format!("config {}: {e}", path.display())))
    }

    pub fn from_source(matrix: MatrixSource) -> Self {
        Self {
            matrix,
            mode: None,
            horizon: None,
            trajectories: None,
            seed: None,
            r_class: None,
            out: None,
            checkpoints: None,
            initial_counts: None,
            start_vertex: None,
            flow: None,
        }
    }
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub horizon: Option<u64>,
    pub trajectories: Option<u64>,
    pub out: Option<PathBuf>,
}

/// A validated, fully-defaulted experiment ready to run.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub source: MatrixSource,
    pub matrix: LikelihoodMatrix,
    pub mode: Mode,
    pub horizon: u64,
    pub trajectories: u64,
    pub seed: Option<u64>,
    pub r_class: f64,
    pub out: Option<PathBuf>,
    pub checkpoints: Option<Vec<f64>>,
    pub initial_counts: Vec<f64>,
    /// 0-based starting vertex.
    pub start_vertex: usize,
    pub flow: vrrw::flow::FlowConfig,
    pub flow_start: Option<Vec<f64>>,
}

pub fn resolve(
    config: &ExperimentConfig,
    mode: Mode,
    overrides: &Overrides,
) -> Result<ResolvedConfig, HarnessError> {
    let matrix = config.matrix.build()?;
    let d = matrix.dim();

    let r_class = config.r_class.unwrap_or(DEFAULT_R_CLASS);
    if !(r_class > 0.0 && r_class < 0.5) {
        return Err(HarnessError::Invalid(format!(
            "r_class must lie in (0, 0.5), got {r_class}"
        )));
    }
    let trajectories = overrides
        .trajectories
        .or(config.trajectories)
        .unwrap_or(DEFAULT_TRAJECTORIES);
    if mode == Mode::Montecarlo && trajectories < 1 {
        return Err(HarnessError::Invalid(
            "montecarlo needs at least one trajectory".into(),
        ));
    }
    let seed = overrides.seed.or(config.seed);
    if mode == Mode::Montecarlo && seed.is_none() {
        return Err(HarnessError::Invalid(
            "montecarlo requires an explicit --seed".into(),
        ));
    }

    let initial_counts = match &config.initial_counts {
        Some(counts) => {
            if counts.len() != d {
                return Err(HarnessError::Invalid(format!(
                    "initial_counts has length {}, matrix dimension is {d}",
                    counts.len()
                )));
            }
            if counts.iter().any(|&s| !(s > 0.0)) {
                return Err(HarnessError::Invalid(
                    "initial_counts must all be positive".into(),
                ));
            }
            counts.clone()
        }
        None => vec![1.0; d],
    };

    let start_vertex = match config.start_vertex {
        Some(v) => {
            if v < 1 || v > d {
                return Err(HarnessError::Invalid(format!(
                    "start_vertex {v} out of range 1..={d}"
                )));
            }
            v - 1
        }
        None => 0,
    };

    let defaults = vrrw::flow::FlowConfig::default();
    let (flow, flow_start) = match &config.flow {
        Some(settings) => {
            let flow = vrrw::flow::FlowConfig {
                step: settings.step.unwrap_or(defaults.step),
                s_max: settings.s_max.unwrap_or(defaults.s_max),
                tolerance: settings.tolerance.unwrap_or(defaults.tolerance),
            };
            if !(flow.step > 0.0 && flow.s_max > 0.0 && flow.tolerance > 0.0) {
                return Err(HarnessError::Invalid(
                    "flow step, s_max and tolerance must be positive".into(),
                ));
            }
            if let Some(start) = &settings.start {
                if start.len() != d {
                    return Err(HarnessError::Invalid(format!(
                        "flow start has length {}, matrix dimension is {d}",
                        start.len()
                    )));
                }
            }
            (flow, settings.start.clone())
        }
        None => (defaults, None),
    };

    Ok(ResolvedConfig {
        source: config.matrix.clone(),
        matrix,
        mode,
        horizon: overrides.horizon.or(config.horizon).unwrap_or(DEFAULT_HORIZON),
        trajectories,
        seed,
        r_class,
        out: overrides.out.clone().or_else(|| config.out.clone()),
        checkpoints: config.checkpoints.clone(),
        initial_counts,
        start_vertex,
        flow,
        flow_start,
    })
}
