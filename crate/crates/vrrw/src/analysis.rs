//! Critical-set enumeration and stability classification.
//!
//! A point `p` is critical when `pi(p) = p`, equivalently when the local
//! field `N_i(p)` takes a common value `lambda` over the support of `p`.
//! On a face `F` with invertible principal submatrix `R_F` the only
//! candidate interior to `F` is the normalization of `(1,...,1) R_F^{-1}`,
//! so the whole set is enumerated face by face (at most `2^d - 1` points
//! when no face is degenerate).
//!
//! Classification per point:
//! * `LinearNonMaximum` — some outside-face direction `k` has
//!   `N_k(p) > lambda`: the walk converges there with probability zero.
//! * `InteriorUnstable` — interior point whose tangent stability spectrum
//!   has a positive entry (equivalently `R` has at least two positive
//!   eigenvalues); convergence probability zero.
//! * `LocalMaximum` — strict local maximum of `H`: a positive-probability
//!   limit.
//! * `Inconclusive` — margins or eigenvalues vanish within tolerance.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, LinalgError, SquareMatrix};
use crate::model::{Face, LikelihoodMatrix, SimplexPoint, ZERO_H_THRESHOLD};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("point is not interior: coordinate {} is not positive", i + 1)]
    NotInterior { i: usize },
    #[error("generator set is not closed under negation mod {n}: missing {missing}")]
    NotSymmetricSet { n: u64, missing: u64 },
    #[error("generator set does not generate Z_{n}")]
    NotGenerating { n: u64 },
    #[error("invalid generator {g} for Z_{n}")]
    GeneratorOutOfRange { n: u64, g: u64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// Stability verdict for a critical point, with the witnesses that earn it.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "tag")]
pub enum Classification {
    LocalMaximum {
        /// Largest within-face tangent eigenvalue (None for vertices,
        /// whose tangent space is trivial).
        max_tangent_eigenvalue: Option<f64>,
        /// Largest outside-face margin `N_k - lambda` (None for interior
        /// points).
        max_outside_margin: Option<f64>,
    },
    InteriorUnstable {
        positive_eigenvalue: f64,
    },
    LinearNonMaximum {
        /// Outside-face state (0-based internally, 1-based when serialized).
        #[serde(serialize_with = "crate::analysis::serialize_state_label")]
        witness: usize,
        margin: f64,
    },
    Inconclusive,
}

fn serialize_state_label<S: serde::Serializer>(
    idx: &usize,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    serializer.serialize_u64(*idx as u64 + 1)
}

impl Classification {
    pub fn tag(&self) -> &'static str {
        match self {
            Classification::LocalMaximum { .. } => "LocalMaximum",
            Classification::InteriorUnstable { .. } => "InteriorUnstable",
            Classification::LinearNonMaximum { .. } => "LinearNonMaximum",
            Classification::Inconclusive => "Inconclusive",
        }
    }

    pub fn is_local_maximum(&self) -> bool {
        matches!(self, Classification::LocalMaximum { .. })
    }
}

/// A critical point with its face, the common field value `lambda`, the
/// value of `H` there (equal to `lambda`), and its stability verdict.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    pub point: SimplexPoint,
    pub face: Face,
    pub lambda: f64,
    pub h_value: f64,
    pub classification: Classification,
}

/// Full description of the critical set of one matrix.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalSetReport {
    pub dim: usize,
    pub points: Vec<CriticalPoint>,
    /// Faces of size >= 2 whose principal submatrix is singular: each may
    /// carry a continuum of critical points that is flagged, not enumerated.
    pub degenerate_faces: Vec<Face>,
    /// True iff every off-diagonal entry of `R` is positive, i.e. the
    /// frozen chain is irreducible everywhere on the simplex.
    pub c0_empty: bool,
    /// Indices into `points` of the positive-probability limits
    /// (the local maxima of `H`).
    pub predicted_limits: Vec<usize>,
}

impl CriticalSetReport {
    pub fn point_locations(&self) -> Vec<SimplexPoint> {
        self.points.iter().map(|cp| cp.point.clone()).collect()
    }

    pub fn count_tag(&self, tag: &str) -> usize {
        self.points
            .iter()
            .filter(|cp| cp.classification.tag() == tag)
            .count()
    }

    /// Faces of the simplex on which the frozen chain is reducible
    /// (closed faces; empty iff `c0_empty`). Skipped above dimension 16
    /// where the 2^d enumeration stops being sensible.
    pub fn reducible_faces(&self, r: &LikelihoodMatrix) -> Vec<Face> {
        if self.c0_empty || r.dim() > 16 {
            return Vec::new();
        }
        let d = r.dim();
        let mut out = Vec::new();
        for mask in 1u32..(1u32 << d) {
            let indices: Vec<usize> = (0..d).filter(|&i| mask & (1 << i) != 0).collect();
            if indices.len() < 2 {
                continue;
            }
            let support: Vec<Vec<bool>> = indices
                .iter()
                .map(|&i| indices.iter().map(|&j| r.get(i, j) > 0.0).collect())
                .collect();
            if !linalg::is_irreducible(&support).unwrap_or(true) {
                out.push(Face::new(indices).expect("nonempty"));
            }
        }
        out
    }
}

/// `pi(v) = v` to within `tol` in sup norm.
///
/// When `H(v)` vanishes, `N` vanishes identically on the support of `v`
/// (every term of `H` is nonnegative), so the restricted derivative of `H`
/// is zero and `v` is critical; `pi` itself is undefined there.
pub fn is_critical(r: &LikelihoodMatrix, v: &SimplexPoint, tol: f64) -> bool {
    match r.pi_map(v) {
        Ok(pi) => pi.linf_distance(v) <= tol,
        Err(_) => r.lyapunov(v) <= ZERO_H_THRESHOLD,
    }
}

/// True iff `R_ij > 0` for all `i != j` — the necessary and sufficient
/// condition for no occupation vector to freeze a reducible chain.
pub fn c0_empty(r: &LikelihoodMatrix) -> bool {
    let d = r.dim();
    for i in 0..d {
        for j in 0..d {
            if i != j && r.get(i, j) <= 0.0 {
                return false;
            }
        }
    }
    true
}

/// Eigenvalues of the stability operator `T = diag(p) R / lambda`
/// restricted to the tangent space `W = simplex - p` (a list of `d - 1`
/// reals, descending).
///
/// Computed through the symmetric conjugate
/// `S = diag(sqrt p) R diag(sqrt p) / lambda`, which shares the spectrum of
/// `T` and carries the eigenvalue-1 eigenvector `(sqrt p_1, ..., sqrt p_d)`;
/// dropping that pair leaves the spectrum on `W`. The flow linearization
/// `D_p(pi - id)` acts identically on `W` (the two operators differ by a
/// constant-row matrix), so positive entries certify instability.
pub fn stability_spectrum(
    r: &LikelihoodMatrix,
    p: &SimplexPoint,
) -> Result<Vec<f64>, AnalysisError> {
    let d = r.dim();
    if let Some(i) = p.coords().iter().position(|&x| x <= 0.0) {
        return Err(AnalysisError::NotInterior { i });
    }
    let field = r.local_field(p);
    let lambda: f64 = field.iter().zip(p.coords()).map(|(n, x)| n * x).sum();
    let sqrt_p: Vec<f64> = p.coords().iter().map(|&x| x.sqrt()).collect();
    let mut s = SquareMatrix::identity(d);
    for i in 0..d {
        for j in 0..d {
            s.set(i, j, sqrt_p[i] * r.get(i, j) * sqrt_p[j] / lambda);
        }
    }
    let spectrum = linalg::sym_eigen(&s, None)?;

    // Locate the eigenpair aligned with sqrt(p); its eigenvalue is 1.
    let mut best = (0usize, -1.0f64);
    for k in 0..d {
        let dot: f64 = (0..d)
            .map(|row| spectrum.eigenvectors.get(row, k) * sqrt_p[row])
            .sum();
        if dot.abs() > best.1 {
            best = (k, dot.abs());
        }
    }
    debug_assert!(
        (spectrum.eigenvalues[best.0] - 1.0).abs() < 1e-6,
        "eigenpair aligned with sqrt(p) must carry eigenvalue 1, got {}",
        spectrum.eigenvalues[best.0]
    );
    let mut tangent: Vec<f64> = spectrum
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != best.0)
        .map(|(_, &x)| x)
        .collect();
    tangent.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(tangent)
}

/// Stability verdict for a critical point given its face and `lambda`.
///
/// Order of tests: outside-face margins first (a positive margin makes a
/// linear non-maximum regardless of tangent behavior), then the tangent
/// spectrum within the face. For interior points the tangent test is
/// cross-checked against the signature of `R`: the two must agree that
/// instability means at least two positive eigenvalues.
pub fn classify(
    r: &LikelihoodMatrix,
    point: &SimplexPoint,
    face: &Face,
    lambda: f64,
    tol: f64,
) -> Classification {
    let d = r.dim();
    let field = r.local_field(point);
    let margins: Vec<(usize, f64)> = (0..d)
        .filter(|i| !face.contains(*i))
        .map(|i| (i, field[i] - lambda))
        .collect();

    if let Some(&(witness, margin)) = margins
        .iter()
        .filter(|(_, m)| *m > tol)
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
    {
        return Classification::LinearNonMaximum { witness, margin };
    }

    // Within-face tangent spectrum; vertices have an empty tangent space.
    let tangent = if face.len() >= 2 {
        let restricted: Vec<f64> = face.indices().iter().map(|&i| point.coords()[i]).collect();
        let sub_r = restricted_matrix(r, face);
        let sub_p = SimplexPoint::new(restricted).expect("face coordinates of a simplex point");
        stability_spectrum(&sub_r, &sub_p).expect("interior of its face by construction")
    } else {
        Vec::new()
    };

    if face.is_full(d) {
        // Interior point: the dichotomy must agree with the signature of R.
        let positive_tangent = tangent.iter().filter(|&&x| x > tol).count();
        let r_signature = linalg::sym_eigen(&r.to_square(), Some(tol))
            .expect("validated matrix is symmetric")
            .signature;
        assert_eq!(
            r_signature.positive,
            positive_tangent + 1,
            "signature test and tangent-spectrum test disagree: \
             R has {} positive eigenvalues, tangent spectrum has {} positive entries",
            r_signature.positive,
            positive_tangent
        );
        if positive_tangent > 0 {
            return Classification::InteriorUnstable {
                positive_eigenvalue: tangent[0],
            };
        }
    }

    let tangent_ok = tangent.iter().all(|&x| x < -tol);
    let margins_ok = margins.iter().all(|(_, m)| *m < -tol);
    if tangent_ok && margins_ok {
        Classification::LocalMaximum {
            max_tangent_eigenvalue: tangent.first().copied(),
            max_outside_margin: margins
                .iter()
                .map(|(_, m)| *m)
                .max_by(|a, b| a.partial_cmp(b).unwrap()),
        }
    } else {
        Classification::Inconclusive
    }
}

fn restricted_matrix(r: &LikelihoodMatrix, face: &Face) -> LikelihoodMatrix {
    let rows: Vec<Vec<f64>> = face
        .indices()
        .iter()
        .map(|&i| face.indices().iter().map(|&j| r.get(i, j)).collect())
        .collect();
    LikelihoodMatrix::validate(&rows).expect(
        "a principal submatrix carrying a critical point has positive diagonal field, \
         hence positive column sums",
    )
}

/// Enumerate the critical set face by face.
///
/// Vertices are always critical (the restricted derivative condition is
/// vacuous on a zero-dimensional face). A face of size >= 2 contributes the
/// normalization of `(1,...,1) R_F^{-1}` when that candidate is strictly
/// positive on the face (coordinates above `tol` after normalization);
/// singular `R_F` marks the face degenerate.
pub fn critical_points(r: &LikelihoodMatrix, tol: f64) -> CriticalSetReport {
    let d = r.dim();
    assert!(d <= 30, "face enumeration is 2^d; dimension {d} is too large");
    let mut points = Vec::new();
    let mut degenerate_faces = Vec::new();

    for mask in 1u32..(1u32 << d) {
        let indices: Vec<usize> = (0..d).filter(|&i| mask & (1 << i) != 0).collect();
        let face = Face::new(indices).expect("mask is nonzero");

        let candidate = if face.len() == 1 {
            Some(SimplexPoint::vertex(d, face.indices()[0]))
        } else {
            let sub = r.restrict(&face);
            match linalg::solve_linear(&sub, &vec![1.0; face.len()]) {
                Ok(x) => {
                    let sum: f64 = x.iter().sum();
                    if sum > 0.0 && x.iter().all(|&xi| xi / sum > tol) {
                        let coords = face.embed(d, &x.iter().map(|xi| xi / sum).collect::<Vec<_>>());
                        Some(SimplexPoint::new(coords).expect("normalized positive vector"))
                    } else {
                        None
                    }
                }
                Err(LinalgError::Singular { .. }) => {
                    degenerate_faces.push(face.clone());
                    None
                }
                Err(e) => unreachable!("well-formed face system: {e}"),
            }
        };

        let Some(point) = candidate else { continue };
        let field = r.local_field(&point);
        let lambda = face
            .indices()
            .iter()
            .map(|&i| field[i] * point.coords()[i])
            .sum::<f64>();
        let h_value = r.lyapunov(&point);
        debug_assert!(
            is_critical(r, &point, 1e-8),
            "accepted candidate fails the fixed-point check on face {face}"
        );
        let classification = classify(r, &point, &face, lambda, tol.max(1e-12));
        points.push(CriticalPoint {
            point,
            face,
            lambda,
            h_value,
            classification,
        });
    }

    let predicted_limits = points
        .iter()
        .enumerate()
        .filter(|(_, cp)| cp.classification.is_local_maximum())
        .map(|(i, _)| i)
        .collect();

    CriticalSetReport {
        dim: d,
        points,
        degenerate_faces,
        c0_empty: c0_empty(r),
        predicted_limits,
    }
}

/// Incidence matrix of the Cayley graph of `Z_n` with connection set `T`:
/// `R_ij = 1` iff `(j - i) mod n` is in `T`. `T` must be closed under
/// negation mod `n` (symmetry) and generate `Z_n` (connectivity).
pub fn cayley_matrix(n: u64, generators: &[u64]) -> Result<LikelihoodMatrix, AnalysisError> {
    validate_cayley(n, generators)?;
    let d = n as usize;
    let set: std::collections::BTreeSet<u64> = generators.iter().copied().collect();
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let diff = ((j + d - i) % d) as u64;
                    if set.contains(&diff) {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    Ok(LikelihoodMatrix::validate(&rows)?)
}

/// Character-sum spectrum of the Cayley matrix:
/// `lambda_k = sum_{g in T} cos(2 pi k g / n)` for `k = 0..n-1`
/// (real because `T` is closed under inverse). As a multiset this equals
/// the eigenvalue spectrum of [`cayley_matrix`].
pub fn cayley_spectrum(n: u64, generators: &[u64]) -> Result<Vec<f64>, AnalysisError> {
    validate_cayley(n, generators)?;
    let set: std::collections::BTreeSet<u64> = generators.iter().copied().collect();
    Ok((0..n)
        .map(|k| {
            set.iter()
                .map(|&g| (std::f64::consts::TAU * k as f64 * g as f64 / n as f64).cos())
                .sum()
        })
        .collect())
}

fn validate_cayley(n: u64, generators: &[u64]) -> Result<(), AnalysisError> {
    if n == 0 || generators.is_empty() {
        return Err(AnalysisError::NotGenerating { n });
    }
    let set: std::collections::BTreeSet<u64> = generators.iter().copied().collect();
    if let Some(&g) = set.iter().find(|&&g| g >= n) {
        return Err(AnalysisError::GeneratorOutOfRange { n, g });
    }
    for &g in &set {
        let neg = (n - g) % n;
        if !set.contains(&neg) {
            return Err(AnalysisError::NotSymmetricSet { n, missing: neg });
        }
    }
    // T generates Z_n iff gcd(n, g_1, ..., g_m) = 1.
    let g = set.iter().fold(n, |acc, &x| gcd(acc, x));
    if g != 1 {
        return Err(AnalysisError::NotGenerating { n });
    }
    Ok(())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{all_ones, complete, example2};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn find_point<'a>(report: &'a CriticalSetReport, target: &[f64]) -> &'a CriticalPoint {
        report
            .points
            .iter()
            .find(|cp| {
                cp.point
                    .coords()
                    .iter()
                    .zip(target)
                    .all(|(a, b)| (a - b).abs() < 1e-10)
            })
            .unwrap_or_else(|| panic!("no critical point near {target:?}"))
    }

    #[test]
    fn example2_critical_set_is_exact() {
        let report = critical_points(&example2(), 1e-9);
        assert_eq!(report.points.len(), 7);
        assert!(report.degenerate_faces.is_empty());
        assert!(report.c0_empty);

        let third = 1.0 / 3.0;
        let expected: [(&[f64], &str); 7] = [
            (&[1.0, 0.0, 0.0], "LocalMaximum"),
            (&[0.0, 1.0, 0.0], "LinearNonMaximum"),
            (&[0.0, 0.0, 1.0], "LinearNonMaximum"),
            (&[third, 2.0 * third, 0.0], "LinearNonMaximum"),
            (&[third, 0.0, 2.0 * third], "LinearNonMaximum"),
            (&[0.0, 0.5, 0.5], "LocalMaximum"),
            (&[0.5, 0.25, 0.25], "InteriorUnstable"),
        ];
        for (coords, tag) in expected {
            let cp = find_point(&report, coords);
            assert_eq!(cp.classification.tag(), tag, "at {coords:?}");
            assert_close(cp.h_value, cp.lambda, 1e-8);
        }
        assert_eq!(report.predicted_limits.len(), 2);

        // Known field values: lambda = 3 at (1,0,0), 5/3 on the {1,2} edge,
        // 3 on the {2,3} edge, 2 at the interior point.
        assert_close(find_point(&report, &[1.0, 0.0, 0.0]).lambda, 3.0, 1e-12);
        assert_close(
            find_point(&report, &[third, 2.0 * third, 0.0]).lambda,
            5.0 / 3.0,
            1e-12,
        );
        assert_close(find_point(&report, &[0.0, 0.5, 0.5]).lambda, 3.0, 1e-12);
        assert_close(find_point(&report, &[0.5, 0.25, 0.25]).lambda, 2.0, 1e-12);
    }

    #[test]
    fn example2_witnesses() {
        let report = critical_points(&example2(), 1e-9);
        // At (0,1,0): N = (1, 2, 4), lambda = 2, so state 3 escapes.
        let cp = find_point(&report, &[0.0, 1.0, 0.0]);
        match &cp.classification {
            Classification::LinearNonMaximum { witness, margin } => {
                assert_eq!(*witness, 2);
                assert_close(*margin, 2.0, 1e-12);
            }
            other => panic!("expected LinearNonMaximum, got {other:?}"),
        }
        // At (0,0,1): N = (1, 4, 2), lambda = 2, so state 2 escapes.
        let cp = find_point(&report, &[0.0, 0.0, 1.0]);
        match &cp.classification {
            Classification::LinearNonMaximum { witness, margin } => {
                assert_eq!(*witness, 1);
                assert_close(*margin, 2.0, 1e-12);
            }
            other => panic!("expected LinearNonMaximum, got {other:?}"),
        }
    }

    #[test]
    fn complete_graph_critical_set_is_face_centroids() {
        // Centroids of all faces; every proper-face centroid is a linear
        // non-maximum and the barycenter is the unique local maximum.
        for d in [3usize, 4] {
            let report = critical_points(&complete(d), 1e-9);
            assert_eq!(report.points.len(), (1 << d) - 1);
            assert!(report.degenerate_faces.is_empty());
            for cp in &report.points {
                let m = cp.face.len() as f64;
                for &i in cp.face.indices() {
                    assert_close(cp.point.coords()[i], 1.0 / m, 1e-12);
                }
                if cp.face.len() == d {
                    assert_eq!(cp.classification.tag(), "LocalMaximum");
                } else {
                    assert_eq!(cp.classification.tag(), "LinearNonMaximum");
                }
            }
            assert_eq!(report.predicted_limits.len(), 1);
        }
    }

    #[test]
    fn all_ones_flags_continuum() {
        let report = critical_points(&all_ones(3), 1e-9);
        // Vertices are still enumerated; every face of size >= 2 is
        // degenerate (the continuum case).
        assert_eq!(report.points.len(), 3);
        assert_eq!(report.degenerate_faces.len(), 4);
        for cp in &report.points {
            assert_eq!(cp.face.len(), 1);
            assert_close(cp.lambda, 1.0, 1e-12);
        }
    }

    #[test]
    fn is_critical_examples() {
        let r = example2();
        assert!(is_critical(
            &r,
            &SimplexPoint::new(vec![0.5, 0.25, 0.25]).unwrap(),
            1e-9
        ));
        assert!(!is_critical(
            &r,
            &SimplexPoint::new(vec![0.4, 0.3, 0.3]).unwrap(),
            1e-9
        ));
        for i in 0..3 {
            assert!(is_critical(&r, &SimplexPoint::vertex(3, i), 1e-9));
        }
        // Vertices with vanishing H (zero diagonal) are critical: the field
        // vanishes on the support.
        assert!(is_critical(&complete(3), &SimplexPoint::vertex(3, 0), 1e-9));
    }

    #[test]
    fn c0_empty_examples() {
        assert!(c0_empty(&example2()));
        assert!(c0_empty(&complete(3)));
        let r = LikelihoodMatrix::validate(&[
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![1.0, 1.0, 1.0],
        ])
        .unwrap();
        assert!(!c0_empty(&r));
    }

    #[test]
    fn stability_spectrum_example2_interior() {
        // T has spectrum {1, a, b} with a + b = trace - 1 = 1/4 and
        // a b = det(T) = -1/8, giving {0.5, -0.25}.
        let p = SimplexPoint::new(vec![0.5, 0.25, 0.25]).unwrap();
        let spec = stability_spectrum(&example2(), &p).unwrap();
        assert_eq!(spec.len(), 2);
        assert_close(spec[0], 0.5, 1e-10);
        assert_close(spec[1], -0.25, 1e-10);
    }

    #[test]
    fn stability_spectrum_complete_graph() {
        // T = R/2 has spectrum {1, -1/2, -1/2}.
        let spec = stability_spectrum(&complete(3), &SimplexPoint::uniform(3)).unwrap();
        assert_close(spec[0], -0.5, 1e-10);
        assert_close(spec[1], -0.5, 1e-10);
    }

    #[test]
    fn stability_operator_fixes_critical_points() {
        // At an interior critical point, T p = diag(p) R p / lambda = p,
        // so eigenvalue 1 is present before the tangent restriction.
        let mut rng = StdRng::seed_from_u64(3);
        let mut found = 0;
        for _ in 0..200 {
            let d = rng.random_range(2..6);
            let mut rows = vec![vec![0.0; d]; d];
            for i in 0..d {
                for j in i..d {
                    let x = rng.random_range(0.1..2.0);
                    rows[i][j] = x;
                    rows[j][i] = x;
                }
            }
            let r = LikelihoodMatrix::validate(&rows).unwrap();
            let report = critical_points(&r, 1e-9);
            if let Some(cp) = report.points.iter().find(|cp| cp.face.len() == d) {
                found += 1;
                let f = r.local_field(&cp.point);
                for i in 0..d {
                    let tp_i = cp.point.coords()[i] * f[i] / cp.lambda;
                    assert_close(tp_i, cp.point.coords()[i], 1e-10);
                }
            }
        }
        assert!(found >= 20, "only {found} interior critical points sampled");
    }

    #[test]
    fn stability_spectrum_rejects_boundary() {
        let p = SimplexPoint::new(vec![0.5, 0.5, 0.0]).unwrap();
        assert_eq!(
            stability_spectrum(&example2(), &p),
            Err(AnalysisError::NotInterior { i: 2 })
        );
    }

    #[test]
    fn count_bound_on_random_matrices() {
        // At most 2^d - 1 points when all principal minors are invertible.
        let mut rng = StdRng::seed_from_u64(17);
        let mut checked = 0;
        while checked < 100 {
            let d = rng.random_range(2..6);
            let mut rows = vec![vec![0.0; d]; d];
            for i in 0..d {
                for j in i..d {
                    let x = rng.random_range(0.0..1.0) + if i == j { 1.5 } else { 0.0 };
                    rows[i][j] = x;
                    rows[j][i] = x;
                }
            }
            let r = LikelihoodMatrix::validate(&rows).unwrap();
            let report = critical_points(&r, 1e-9);
            if !report.degenerate_faces.is_empty() {
                continue;
            }
            checked += 1;
            assert!(report.points.len() <= (1 << d) - 1);
            for cp in &report.points {
                assert!(is_critical(&r, &cp.point, 1e-8));
                assert_close(cp.h_value, cp.lambda, 1e-8);
            }
        }
    }

    #[test]
    fn cayley_examples() {
        // Z_3 with T = {1,2} is the complete graph on 3 vertices.
        let r = cayley_matrix(3, &[1, 2]).unwrap();
        assert_eq!(r.rows(), complete(3).rows());
        let spec = cayley_spectrum(3, &[1, 2]).unwrap();
        assert_close(spec[0], 2.0, 1e-12);
        assert_close(spec[1], -1.0, 1e-12);
        assert_close(spec[2], -1.0, 1e-12);

        // Z_4 with T = {1,3}: spectrum {2, 0, -2, 0}.
        let spec = cayley_spectrum(4, &[1, 3]).unwrap();
        let expected = [2.0, 0.0, -2.0, 0.0];
        for (a, b) in spec.iter().zip(&expected) {
            assert_close(*a, *b, 1e-12);
        }

        // The trivial character always gives |T|.
        let spec = cayley_spectrum(6, &[1, 2, 4, 5]).unwrap();
        assert_close(spec[0], 4.0, 1e-12);
    }

    #[test]
    fn cayley_spectrum_matches_eigensolver() {
        for (n, t) in [
            (3u64, vec![1u64, 2]),
            (4, vec![1, 3]),
            (5, vec![1, 4]),
            (6, vec![1, 5]),
            (6, vec![1, 2, 4, 5]),
        ] {
            let r = cayley_matrix(n, &t).unwrap();
            let mut by_matrix = linalg::sym_eigen(&r.to_square(), None).unwrap().eigenvalues;
            let mut by_characters = cayley_spectrum(n, &t).unwrap();
            by_matrix.sort_by(|a, b| a.partial_cmp(b).unwrap());
            by_characters.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (a, b) in by_matrix.iter().zip(&by_characters) {
                assert_close(*a, *b, 1e-8);
            }
        }
    }

    #[test]
    fn cayley_validation() {
        assert_eq!(
            cayley_matrix(5, &[1]).unwrap_err(),
            AnalysisError::NotSymmetricSet { n: 5, missing: 4 }
        );
        assert_eq!(
            cayley_matrix(6, &[2, 4]).unwrap_err(),
            AnalysisError::NotGenerating { n: 6 }
        );
        assert_eq!(
            cayley_matrix(4, &[5, 1]).unwrap_err(),
            AnalysisError::GeneratorOutOfRange { n: 4, g: 5 }
        );
    }

    #[test]
    fn reducible_faces_located() {
        let r = LikelihoodMatrix::validate(&[
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![1.0, 1.0, 1.0],
        ])
        .unwrap();
        let report = critical_points(&r, 1e-9);
        assert!(!report.c0_empty);
        let faces = report.reducible_faces(&r);
        // Exactly the {1,2} edge splits into two components.
        assert_eq!(faces.len(), 1);
        assert_eq!(faces[0].indices(), &[0, 1]);
    }
}
