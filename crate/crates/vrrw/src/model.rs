//! Core objects of the reinforced-walk model: the likelihood matrix `R`,
//! points of the probability simplex, and the derived maps
//!
//! * local field `N_i(v) = sum_j R_ij v_j`,
//! * quadratic form `H(v) = v . N(v)`,
//! * reweighting `pi_i(v) = v_i N_i(v) / H(v)`,
//! * frozen transition matrix `M_ij(v) = R_ij v_j / N_i(v)`.
//!
//! `H` is a Lyapunov function for the mean-field vector field `pi - id`;
//! its critical points are enumerated in [`crate::analysis`].
//!
//! State indices are 0-based throughout the API; user-facing output (errors,
//! serialized faces) is labeled 1-based to match the `v_1..v_d` convention.

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::linalg::SquareMatrix;

/// Absolute tolerance on the coordinate sum of a simplex point.
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;
/// Below this, `H(v)` is treated as vanishing and `pi` is undefined.
pub const ZERO_H_THRESHOLD: f64 = 1e-300;
/// Asymmetry beyond this relative tolerance is rejected rather than averaged.
const SYMMETRIZE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("matrix entry ({i},{j}) differs from ({j},{i}) beyond tolerance (states {}, {})", i + 1, j + 1)]
    Asymmetric { i: usize, j: usize },
    #[error("negative entry at row {}, column {}", i + 1, j + 1)]
    NegativeEntry { i: usize, j: usize },
    #[error("column {} sums to zero", j + 1)]
    ZeroColumn { j: usize },
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("coordinates sum to {sum}, outside 1 +- {SIMPLEX_SUM_TOL}")]
    NotOnSimplex { sum: f64 },
    #[error("negative coordinate {value} at position {}", i + 1)]
    NegativeCoordinate { i: usize, value: f64 },
    #[error("non-finite coordinate at position {}", i + 1)]
    NonFiniteCoordinate { i: usize },
    #[error("H(v) vanishes; pi is undefined here")]
    ZeroH,
    #[error("transition row {} undefined: N_{}(v) = 0", i + 1, i + 1)]
    UndefinedRow { i: usize },
    #[error("no coordinate exceeds the face tolerance")]
    EmptyFace,
    #[error("dimension mismatch: matrix dim {dim}, point dim {len}")]
    DimensionMismatch { dim: usize, len: usize },
}

/// The symmetric nonnegative a-priori matrix driving the walk.
///
/// Stored exactly symmetric: near-symmetric input (relative deviation within
/// 1e-12) is averaged, anything worse is rejected. Every column must carry
/// positive total weight so the walk never stalls.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LikelihoodMatrix {
    dim: usize,
    rows: Vec<Vec<f64>>,
}

impl LikelihoodMatrix {
    pub fn validate(raw: &[Vec<f64>]) -> Result<Self, ModelError> {
        let dim = raw.len();
        if dim == 0 {
            return Err(ModelError::InvalidMatrix("empty matrix".into()));
        }
        for (i, row) in raw.iter().enumerate() {
            if row.len() != dim {
                return Err(ModelError::InvalidMatrix(format!(
                    "row {} has length {}, expected {}",
                    i + 1,
                    row.len(),
                    dim
                )));
            }
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() {
                    return Err(ModelError::InvalidMatrix(format!(
                        "non-finite entry at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                if x < 0.0 {
                    return Err(ModelError::NegativeEntry { i, j });
                }
            }
        }
        let scale = raw
            .iter()
            .flatten()
            .fold(0.0f64, |acc, x| acc.max(x.abs()));
        let mut rows = raw.to_vec();
        for i in 0..dim {
            for j in (i + 1)..dim {
                let a = rows[i][j];
                let b = rows[j][i];
                if (a - b).abs() > SYMMETRIZE_REL_TOL * scale {
                    return Err(ModelError::Asymmetric { i, j });
                }
                let avg = 0.5 * (a + b);
                rows[i][j] = avg;
                rows[j][i] = avg;
            }
        }
        for j in 0..dim {
            let col_sum: f64 = (0..dim).map(|i| rows[i][j]).sum();
            if col_sum <= 0.0 {
                return Err(ModelError::ZeroColumn { j });
            }
        }
        Ok(Self { dim, rows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn to_square(&self) -> SquareMatrix {
        SquareMatrix::from_rows(&self.rows).expect("validated matrix is square and finite")
    }

    /// Principal submatrix on a support face.
    pub fn restrict(&self, face: &Face) -> SquareMatrix {
        let idx = face.indices();
        let entries: Vec<f64> = idx
            .iter()
            .flat_map(|&i| idx.iter().map(move |&j| self.rows[i][j]))
            .collect();
        SquareMatrix::new(idx.len(), entries).expect("face is nonempty")
    }

    /// Local field `N(v)`: `N_i = sum_j R_ij v_j`, linear in `v`.
    pub fn local_field(&self, v: &SimplexPoint) -> Vec<f64> {
        self.local_field_raw(v.coords())
    }

    /// `local_field` on raw coordinates (used by the flow integrator, whose
    /// intermediate stages may sit slightly off the simplex).
    pub fn local_field_raw(&self, coords: &[f64]) -> Vec<f64> {
        assert_eq!(coords.len(), self.dim);
        self.rows
            .iter()
            .map(|row| row.iter().zip(coords).map(|(r, x)| r * x).sum())
            .collect()
    }

    /// The quadratic form `H(v) = sum_ij R_ij v_i v_j = v . N(v)`.
    pub fn lyapunov(&self, v: &SimplexPoint) -> f64 {
        self.lyapunov_raw(v.coords())
    }

    pub fn lyapunov_raw(&self, coords: &[f64]) -> f64 {
        self.local_field_raw(coords)
            .iter()
            .zip(coords)
            .map(|(n, x)| n * x)
            .sum()
    }

    /// The reweighting map `pi_i(v) = v_i N_i(v) / H(v)`, the stationary
    /// distribution of the frozen chain `M(v)`.
    pub fn pi_map(&self, v: &SimplexPoint) -> Result<SimplexPoint, ModelError> {
        let coords = self.pi_map_raw(v.coords())?;
        SimplexPoint::new(coords)
    }

    pub fn pi_map_raw(&self, coords: &[f64]) -> Result<Vec<f64>, ModelError> {
        let field = self.local_field_raw(coords);
        let h: f64 = field.iter().zip(coords).map(|(n, x)| n * x).sum();
        if h <= ZERO_H_THRESHOLD {
            return Err(ModelError::ZeroH);
        }
        Ok(field.iter().zip(coords).map(|(n, x)| n * x / h).collect())
    }

    /// Frozen transition matrix `M_ij(v) = R_ij v_j / N_i(v)`.
    pub fn transition_matrix(&self, v: &SimplexPoint) -> Result<SquareMatrix, ModelError> {
        let field = self.local_field(v);
        if let Some(i) = field.iter().position(|&n| n <= 0.0) {
            return Err(ModelError::UndefinedRow { i });
        }
        let mut m = SquareMatrix::identity(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.set(i, j, self.rows[i][j] * v.coords()[j] / field[i]);
            }
        }
        Ok(m)
    }

    /// Boolean support pattern of `M(v)` restricted to `face(v)`:
    /// an edge `i -> j` iff `R_ij v_j > 0`.
    pub fn support_on_face(&self, v: &SimplexPoint, face: &Face) -> Vec<Vec<bool>> {
        let idx = face.indices();
        idx.iter()
            .map(|&i| {
                idx.iter()
                    .map(|&j| self.rows[i][j] * v.coords()[j] > 0.0)
                    .collect()
            })
            .collect()
    }
}

/// A probability vector on the (d-1)-simplex.
///
/// Construction renormalizes when the coordinate sum is within 1e-12 of 1
/// and rejects otherwise; coordinates must be nonnegative and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self, ModelError> {
        if coords.is_empty() {
            return Err(ModelError::InvalidMatrix("empty coordinate vector".into()));
        }
        for (i, &x) in coords.iter().enumerate() {
            if !x.is_finite() {
                return Err(ModelError::NonFiniteCoordinate { i });
            }
            if x < 0.0 {
                return Err(ModelError::NegativeCoordinate { i, value: x });
            }
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(ModelError::NotOnSimplex { sum });
        }
        let coords = coords.into_iter().map(|x| x / sum).collect();
        Ok(Self { coords })
    }

    /// Normalize an arbitrary nonnegative vector with positive total mass.
    pub fn normalized(raw: &[f64]) -> Result<Self, ModelError> {
        let sum: f64 = raw.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(ModelError::NotOnSimplex { sum });
        }
        Self::new(raw.iter().map(|x| x / sum).collect())
    }

    pub fn uniform(dim: usize) -> Self {
        Self {
            coords: vec![1.0 / dim as f64; dim],
        }
    }

    pub fn vertex(dim: usize, i: usize) -> Self {
        let mut coords = vec![0.0; dim];
        coords[i] = 1.0;
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Support face `{ i : v_i > tol }`.
    pub fn face(&self, tol: f64) -> Result<Face, ModelError> {
        let indices: Vec<usize> = self
            .coords
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > tol)
            .map(|(i, _)| i)
            .collect();
        if indices.is_empty() {
            return Err(ModelError::EmptyFace);
        }
        Ok(Face { indices })
    }

    pub fn linf_distance(&self, other: &SimplexPoint) -> f64 {
        self.coords
            .iter()
            .zip(other.coords())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn euclidean_distance(&self, other: &SimplexPoint) -> f64 {
        self.coords
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Euclidean distance to the closed sub-simplex spanned by `face`,
    /// via projection of the restricted coordinates onto that simplex.
    pub fn distance_to_face(&self, face: &Face) -> f64 {
        let outside_sq: f64 = self
            .coords
            .iter()
            .enumerate()
            .filter(|(i, _)| !face.contains(*i))
            .map(|(_, &x)| x * x)
            .sum();
        let restricted: Vec<f64> = face.indices().iter().map(|&i| self.coords[i]).collect();
        let projected = project_to_unit_simplex(&restricted);
        let inside_sq: f64 = restricted
            .iter()
            .zip(&projected)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (outside_sq + inside_sq).sqrt()
    }
}

impl Serialize for SimplexPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.coords.serialize(serializer)
    }
}

/// Euclidean projection of a nonnegative-orthant vector onto the unit
/// simplex (sort-and-threshold algorithm).
fn project_to_unit_simplex(u: &[f64]) -> Vec<f64> {
    let mut sorted = u.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        cumsum += x;
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        if x - candidate > 0.0 {
            theta = candidate;
        }
    }
    u.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// A nonempty support set of coordinates: the closed face of the simplex
/// spanned by those coordinates. Indices are 0-based and sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    indices: Vec<usize>,
}

impl Face {
    pub fn new(mut indices: Vec<usize>) -> Result<Self, ModelError> {
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() {
            return Err(ModelError::EmptyFace);
        }
        Ok(Self { indices })
    }

    pub fn full(dim: usize) -> Self {
        Self {
            indices: (0..dim).collect(),
        }
    }

    pub fn singleton(i: usize) -> Self {
        Self { indices: vec![i] }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn is_full(&self, dim: usize) -> bool {
        self.indices.len() == dim
    }

    /// Lift coordinates given on this face to the ambient dimension.
    pub fn embed(&self, dim: usize, restricted: &[f64]) -> Vec<f64> {
        assert_eq!(restricted.len(), self.indices.len());
        let mut out = vec![0.0; dim];
        for (&i, &x) in self.indices.iter().zip(restricted) {
            out[i] = x;
        }
        out
    }
}

impl Serialize for Face {
    // 1-based state labels in serialized output.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.indices.len()))?;
        for &i in &self.indices {
            seq.serialize_element(&(i + 1))?;
        }
        seq.end()
    }
}

impl std::fmt::Display for Face {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (k, &i) in self.indices.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

/// Off-diagonal-wise positive matrices are exactly the ones with no
/// reducible frozen chain anywhere on the simplex.
pub fn all_ones(dim: usize) -> LikelihoodMatrix {
    LikelihoodMatrix::validate(&vec![vec![1.0; dim]; dim]).expect("all-ones matrix is valid")
}

/// Complete-graph matrix `R_ij = 1 - delta_ij`.
pub fn complete(dim: usize) -> LikelihoodMatrix {
    let rows: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
        .collect();
    LikelihoodMatrix::validate(&rows).expect("complete-graph matrix is valid for dim >= 2")
}

/// The 3-state matrix [[3,1,1],[1,2,4],[1,4,2]] whose walk has a
/// nondeterministic limit split between two local maxima.
pub fn example2() -> LikelihoodMatrix {
    LikelihoodMatrix::validate(&[
        vec![3.0, 1.0, 1.0],
        vec![1.0, 2.0, 4.0],
        vec![1.0, 4.0, 2.0],
    ])
    .expect("static matrix is valid")
}
