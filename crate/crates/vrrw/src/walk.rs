//! Exact simulation of the reinforced walk.
//!
//! The Markov pair is `(Y_n, S(n))`: a current vertex and one-plus-visit
//! counts. A step moves to vertex `j` with probability proportional to
//! `R[Y][j] * S_j` and increments `S_j` by one. The occupation vector
//! `V(n) = S(n) / n` is checkpointed on a configurable schedule.
//!
//! Reproducibility: every trajectory runs on its own counter-based stream
//! (ChaCha8) whose seed is derived by mixing `(master seed, trajectory
//! index)`, so Monte Carlo fan-out parallelizes without coordination.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{LikelihoodMatrix, ModelError, SimplexPoint};

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error("initial counts must all be positive")]
    NonPositiveInitialCounts,
    #[error("initial vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("checkpoint times must be strictly increasing")]
    NonIncreasingCheckpoints,
    #[error("dimension mismatch between matrix and initial counts")]
    DimensionMismatch,
    #[error("empty reference point list")]
    EmptyList,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Mutable per-trajectory state `(Y_n, S(n))` with `n = sum S_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    current: usize,
    counts: Vec<f64>,
    time: f64,
}

impl WalkState {
    pub fn new(current: usize, counts: Vec<f64>) -> Result<Self, WalkError> {
        if counts.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(WalkError::NonPositiveInitialCounts);
        }
        if current >= counts.len() {
            return Err(WalkError::VertexOutOfRange(current));
        }
        let time = counts.iter().sum();
        Ok(Self {
            current,
            counts,
            time,
        })
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    /// Total time `n = sum_i S_i`, maintained by +1 increments.
    pub fn time(&self) -> f64 {
        self.time
    }

    /// Occupation vector `V(n) = S(n) / n`.
    pub fn occupation(&self) -> SimplexPoint {
        SimplexPoint::normalized(&self.counts).expect("counts are positive")
    }
}

/// One transition of the walk: sample the next vertex by inverse-CDF over
/// the cumulative weights `R[Y][j] * S_j`, then reinforce it.
pub fn step(state: &mut WalkState, r: &LikelihoodMatrix, rng: &mut impl Rng) {
    let row = &r.rows()[state.current];
    let total: f64 = row.iter().zip(&state.counts).map(|(w, s)| w * s).sum();
    debug_assert!(total > 0.0, "column-sum positivity keeps the walk alive");
    let u = rng.random::<f64>() * total;
    let mut cum = 0.0;
    let mut chosen = None;
    for (j, (w, s)) in row.iter().zip(&state.counts).enumerate() {
        let weight = w * s;
        cum += weight;
        if weight > 0.0 && u < cum {
            chosen = Some(j);
            break;
        }
    }
    // Rounding in the cumulative sum can leave u just past the last
    // positive-weight entry; fall back to it.
    let next = chosen.unwrap_or_else(|| {
        row.iter()
            .zip(&state.counts)
            .enumerate()
            .rev()
            .find(|(_, (w, s))| *w * *s > 0.0)
            .map(|(j, _)| j)
            .expect("total > 0 implies a positive weight")
    });
    state.counts[next] += 1.0;
    state.time += 1.0;
    state.current = next;
}

/// Checkpoint schedule in units of total time `n`.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckpointSchedule {
    /// Times `ceil(d * 1.2^k)`, deduplicated; matches the walk's `1/n`
    /// movement scale.
    Geometric,
    /// Explicit strictly increasing times.
    Explicit(Vec<f64>),
}

impl Default for CheckpointSchedule {
    fn default() -> Self {
        CheckpointSchedule::Geometric
    }
}

/// Immutable description of a run. The matrix is passed to [`run`]
/// separately so one config can drive many trajectories.
#[derive(Debug, Clone)]
pub struct WalkConfig {
    /// Initial counts `S(0)`, all positive (default: all ones).
    pub initial_counts: Vec<f64>,
    /// Starting vertex (0-based; default 0).
    pub initial_vertex: usize,
    /// Number of steps to simulate.
    pub horizon: u64,
    pub schedule: CheckpointSchedule,
}

impl WalkConfig {
    pub fn new(dim: usize, horizon: u64) -> Self {
        Self {
            initial_counts: vec![1.0; dim],
            initial_vertex: 0,
            horizon,
            schedule: CheckpointSchedule::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub time: f64,
    pub occupation: SimplexPoint,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub seed: u64,
    pub checkpoints: Vec<Checkpoint>,
    pub final_state: WalkState,
}

impl Trajectory {
    pub fn final_occupation(&self) -> SimplexPoint {
        self.final_state.occupation()
    }
}

/// SplitMix64 finalizer; mixes `(master seed, index)` into the seed of
/// trajectory `index`, so Monte Carlo streams are independent yet fully
/// determined by the master seed.
pub fn trajectory_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9e3779b97f4a7c15)
        .wrapping_add(index.wrapping_mul(0xbf58476d1ce4e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Independent reproducible stream for trajectory `index` under `master`.
pub fn derive_stream(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trajectory_seed(master, index))
}

/// Run one trajectory. Deterministic given `(r, config, seed)`.
///
/// Checkpoints record the initial occupation, every scheduled time reached,
/// and the final occupation, with strictly increasing times.
pub fn run(r: &LikelihoodMatrix, config: &WalkConfig, seed: u64) -> Result<Trajectory, WalkError> {
    if config.initial_counts.len() != r.dim() {
        return Err(WalkError::DimensionMismatch);
    }
    let mut state = WalkState::new(config.initial_vertex, config.initial_counts.clone())?;
    let start_time = state.time();
    let final_time = start_time + config.horizon as f64;

    let times = match &config.schedule {
        CheckpointSchedule::Geometric => geometric_times(r.dim(), start_time, final_time),
        CheckpointSchedule::Explicit(times) => {
            if times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(WalkError::NonIncreasingCheckpoints);
            }
            times.clone()
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checkpoints = vec![Checkpoint {
        time: state.time(),
        occupation: state.occupation(),
    }];
    let mut next_idx = times.iter().position(|&t| t > start_time).unwrap_or(times.len());

    for _ in 0..config.horizon {
        step(&mut state, r, &mut rng);
        while next_idx < times.len() && state.time() >= times[next_idx] {
            checkpoints.push(Checkpoint {
                time: state.time(),
                occupation: state.occupation(),
            });
            next_idx += 1;
        }
    }
    if checkpoints.last().map(|c| c.time) != Some(state.time()) {
        checkpoints.push(Checkpoint {
            time: state.time(),
            occupation: state.occupation(),
        });
    }
    // Passing several scheduled times in one step records one checkpoint;
    // times stay strictly increasing.
    checkpoints.dedup_by(|a, b| a.time == b.time);

    Ok(Trajectory {
        seed,
        checkpoints,
        final_state: state,
    })
}

fn geometric_times(dim: usize, start: f64, end: f64) -> Vec<f64> {
    let mut times = Vec::new();
    let mut x = dim as f64;
    loop {
        let t = x.ceil();
        if t > end {
            break;
        }
        if t > start && times.last() != Some(&t) {
            times.push(t);
        }
        x *= 1.2;
    }
    times
}

/// Nearest point of a finite reference set in Euclidean distance;
/// ties go to the lowest index.
pub fn distance_to_set(
    v: &SimplexPoint,
    points: &[SimplexPoint],
) -> Result<(usize, f64), WalkError> {
    if points.is_empty() {
        return Err(WalkError::EmptyList);
    }
    let mut best = (0usize, f64::INFINITY);
    for (i, p) in points.iter().enumerate() {
        let d = v.euclidean_distance(p);
        if d < best.1 {
            best = (i, d);
        }
    }
    Ok(best)
}
