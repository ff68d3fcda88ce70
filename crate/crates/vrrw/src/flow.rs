//! Mean-field flow of the occupation vector.
//!
//! In rescaled time `s = log t` the mean-field dynamics become the
//! autonomous field `dV/ds = pi(V) - V`, integrated here with a classical
//! 4th-order one-step scheme. `H` is a Lyapunov function: it must be
//! nondecreasing along every integral curve, and that is checked per step.

use thiserror::Error;

use crate::model::{LikelihoodMatrix, ModelError, SimplexPoint};
use crate::walk::distance_to_set;

/// Coordinates no lower than this are clipped to zero after a step.
const CLIP_THRESHOLD: f64 = -1e-12;
/// Coordinates below this abort the run: the step size is too large.
const REJECT_THRESHOLD: f64 = -1e-9;
/// Per-step slack allowed in the Lyapunov monotonicity check.
const MONOTONE_SLACK: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum FlowError {
    #[error("step at s = {s} produced coordinate {value} below {REJECT_THRESHOLD}; reduce the step size")]
    StepRejected { s: f64, value: f64 },
    #[error("H decreased by {drop} at s = {s}, beyond the {MONOTONE_SLACK} slack")]
    NonMonotone { s: f64, drop: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Integration parameters; see the defaults for the scales the examples
/// resolve comfortably at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    /// Step size in rescaled time.
    pub step: f64,
    /// Rescaled-time horizon.
    pub s_max: f64,
    /// Terminate once `max_i |pi(V) - V|_i` falls below this.
    pub tolerance: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            step: 0.01,
            s_max: 50.0,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSample {
    pub s: f64,
    pub point: SimplexPoint,
}

#[derive(Debug, Clone)]
pub struct FlowResult {
    /// One sample per accepted step, starting at `s = 0`.
    pub checkpoints: Vec<FlowSample>,
    /// `H` along the path, parallel to `checkpoints`.
    pub h_values: Vec<f64>,
    /// Final point of the path.
    pub limit: SimplexPoint,
    /// True when the residual tolerance was reached before `s_max`.
    pub converged: bool,
    /// `(index, distance)` of the nearest reference point, when reference
    /// points were supplied.
    pub nearest: Option<(usize, f64)>,
}

/// Integrate `dV/ds = pi(V) - V` from `start`.
///
/// `reference` points (typically the enumerated critical set) annotate the
/// limit with its nearest member; pass an empty slice to skip that.
///
/// A start placed exactly on an equilibrium stays there: the field
/// vanishes, and only the stochastic walk escapes unstable points.
pub fn integrate(
    r: &LikelihoodMatrix,
    start: &SimplexPoint,
    config: &FlowConfig,
    reference: &[SimplexPoint],
) -> Result<FlowResult, FlowError> {
    assert!(config.step > 0.0 && config.s_max > 0.0);
    let mut current = start.coords().to_vec();
    let mut s = 0.0;
    let mut checkpoints = vec![FlowSample {
        s,
        point: start.clone(),
    }];
    let mut h_values = vec![r.lyapunov_raw(&current)];
    let mut converged = residual(r, &current)? < config.tolerance;

    while !converged && s < config.s_max {
        let h_step = config.step.min(config.s_max - s);
        let next = rk4_step(r, &current, h_step)?;
        s += h_step;

        let mut cleaned = next;
        for (i, x) in cleaned.iter_mut().enumerate() {
            if *x < REJECT_THRESHOLD {
                return Err(FlowError::StepRejected {
                    s,
                    value: cleaned[i],
                });
            }
            if *x < 0.0 && *x >= CLIP_THRESHOLD {
                *x = 0.0;
            }
        }
        let sum: f64 = cleaned.iter().sum();
        for x in cleaned.iter_mut() {
            *x /= sum;
        }

        let h_now = r.lyapunov_raw(&cleaned);
        let h_prev = *h_values.last().expect("nonempty");
        if h_now < h_prev - MONOTONE_SLACK {
            return Err(FlowError::NonMonotone {
                s,
                drop: h_prev - h_now,
            });
        }

        let point = SimplexPoint::new(cleaned.clone()).map_err(|_| FlowError::StepRejected {
            s,
            value: cleaned.iter().cloned().fold(f64::INFINITY, f64::min),
        })?;
        checkpoints.push(FlowSample { s, point });
        h_values.push(h_now);
        current = cleaned;
        converged = residual(r, &current)? < config.tolerance;
    }

    let limit = checkpoints.last().expect("nonempty").point.clone();
    let nearest = if reference.is_empty() {
        None
    } else {
        Some(distance_to_set(&limit, reference).expect("nonempty reference"))
    };
    Ok(FlowResult {
        checkpoints,
        h_values,
        limit,
        converged,
        nearest,
    })
}

fn field(r: &LikelihoodMatrix, v: &[f64]) -> Result<Vec<f64>, FlowError> {
    let pi = r.pi_map_raw(v)?;
    Ok(pi.iter().zip(v).map(|(p, x)| p - x).collect())
}

fn residual(r: &LikelihoodMatrix, v: &[f64]) -> Result<f64, FlowError> {
    Ok(field(r, v)?
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs())))
}

fn rk4_step(r: &LikelihoodMatrix, v: &[f64], h: f64) -> Result<Vec<f64>, FlowError> {
    let k1 = field(r, v)?;
    let k2 = field(r, &combine(v, &k1, h / 2.0))?;
    let k3 = field(r, &combine(v, &k2, h / 2.0))?;
    let k4 = field(r, &combine(v, &k3, h))?;
    Ok(v.iter()
        .enumerate()
        .map(|(i, &x)| x + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

fn combine(v: &[f64], k: &[f64], scale: f64) -> Vec<f64> {
    v.iter().zip(k).map(|(x, dk)| x + scale * dk).collect()
}
