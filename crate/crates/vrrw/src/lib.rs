//! Vertex-reinforced random walk on a finite state space.
//!
//! A walk on states `{1, ..., d}` moves from `Y` to `j` with probability
//! proportional to `R[Y][j] * S_j`, where `S_j` counts one plus the visits
//! to `j` and `R` is a fixed symmetric nonnegative matrix. The occupation
//! vector `V(n) = S(n)/n` converges to the critical set of the quadratic
//! form `H(v) = v' R v` on the simplex, and the stable critical points are
//! the only limits seen with positive probability.
//!
//! The crate provides:
//! * [`model`] — the matrix `R`, simplex points, and the maps `N`, `H`,
//!   `pi`, `M(v)`;
//! * [`walk`] — exact simulation with reproducible per-trajectory streams;
//! * [`analysis`] — enumeration and stability classification of the
//!   critical set, including circulant (Cayley-graph) spectra;
//! * [`flow`] — the mean-field dynamics `dV/ds = pi(V) - V` in rescaled
//!   time, with `H` checked as a Lyapunov function;
//! * [`linalg`] — the small dense symmetric eigen/solve kernels backing it
//!   all.

pub mod analysis;
pub mod flow;
pub mod linalg;
pub mod model;
pub mod walk;

pub use analysis::{
    c0_empty, cayley_matrix, cayley_spectrum, classify, critical_points, is_critical,
    stability_spectrum, Classification, CriticalPoint, CriticalSetReport,
};
pub use flow::{integrate, FlowConfig, FlowResult};
pub use linalg::{solve_linear, sym_eigen, Signature, Spectrum, SquareMatrix};
pub use model::{Face, LikelihoodMatrix, SimplexPoint};
pub use walk::{distance_to_set, run, CheckpointSchedule, Trajectory, WalkConfig, WalkState};
