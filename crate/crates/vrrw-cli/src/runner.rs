//! Mode runners: analyze, simulate, flow, montecarlo, spectra.
//!
//! Each runner returns a typed outcome (which the acceptance suite consumes
//! directly), writes its file outputs when an output directory is
//! configured, and has a matching `render_*` for the human-readable text.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use vrrw::analysis::{critical_points, CriticalSetReport};
use vrrw::flow::FlowResult;
use vrrw::linalg;
use vrrw::model::{Face, SimplexPoint};
use vrrw::walk::{self, CheckpointSchedule, Trajectory, WalkConfig};

use crate::config::{MatrixSource, ResolvedConfig};
use crate::output::{flow_csv, to_json_bytes, trajectory_csv, unix_timestamp, write_json};
use crate::stats::wilson_interval;
use crate::HarnessError;

/// Interior-positivity and classification tolerance for the critical-set
/// enumeration.
pub const ANALYSIS_TOL: f64 = 1e-9;
/// Largest multiset mismatch tolerated between the character-sum spectrum
/// and the eigensolver before the run is declared inconsistent.
pub const SPECTRA_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeOutput {
    pub matrix: MatrixSource,
    /// Corollary verdict: no reducible freeze possible and no degenerate
    /// face, so the occupation vector converges almost surely to one of the
    /// enumerated points.
    pub converges_almost_surely: bool,
    pub report: CriticalSetReport,
}

pub fn run_analyze(cfg: &ResolvedConfig) -> Result<AnalyzeOutput, HarnessError> {
    let report = critical_points(&cfg.matrix, ANALYSIS_TOL);
    let converges_almost_surely = report.c0_empty && report.degenerate_faces.is_empty();
    let output = AnalyzeOutput {
        matrix: cfg.source.clone(),
        converges_almost_surely,
        report,
    };
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join("report.json"), &output)?;
    }
    Ok(output)
}

pub fn render_analyze(output: &AnalyzeOutput) -> String {
    let report = &output.report;
    let mut text = format!("critical set (d = {})\n", report.dim);
    let _ = writeln!(
        text,
        "  C0 empty: {}",
        if report.c0_empty {
            "yes (all off-diagonal entries positive)"
        } else {
            "no (some off-diagonal entry vanishes)"
        }
    );
    if report.degenerate_faces.is_empty() {
        text.push_str("  degenerate faces: none\n");
    } else {
        let faces: Vec<String> = report
            .degenerate_faces
            .iter()
            .map(|f| f.to_string())
            .collect();
        let _ = writeln!(
            text,
            "  WARNING: singular principal minor on faces {}; each may carry a \
             continuum of critical points that is flagged, not enumerated",
            faces.join(" ")
        );
    }
    if output.converges_almost_surely {
        text.push_str("  verdict: V(n) converges almost surely to a single critical point\n");
    }
    let _ = writeln!(text, "  {} critical points:", report.points.len());
    for (i, cp) in report.points.iter().enumerate() {
        let coords: Vec<String> = cp.point.coords().iter().map(|x| format!("{x:.6}")).collect();
        let _ = writeln!(
            text,
            "    #{i} face {} point ({}) lambda {:.6} H {:.6} {}",
            cp.face,
            coords.join(", "),
            cp.lambda,
            cp.h_value,
            cp.classification.tag()
        );
    }
    if !report.predicted_limits.is_empty() {
        let limits: Vec<String> = report
            .predicted_limits
            .iter()
            .map(|i| format!("#{i}"))
            .collect();
        let _ = writeln!(
            text,
            "  positive-probability limits: {}",
            limits.join(", ")
        );
    }
    text
}

fn walk_config(cfg: &ResolvedConfig) -> WalkConfig {
    WalkConfig {
        initial_counts: cfg.initial_counts.clone(),
        initial_vertex: cfg.start_vertex,
        horizon: cfg.horizon,
        schedule: match &cfg.checkpoints {
            Some(times) => CheckpointSchedule::Explicit(times.clone()),
            None => CheckpointSchedule::Geometric,
        },
    }
}

/// Batch sidecar: seeds and the walk parameters that produced a set of
/// trajectory CSVs.
#[derive(Debug, Clone, Serialize)]
struct TrajectoryMetadata<'a> {
    matrix: &'a MatrixSource,
    master_seed: Option<u64>,
    seeds: Vec<u64>,
    horizon: u64,
    initial_counts: &'a [f64],
    /// 1-based starting state.
    start_vertex: usize,
    checkpoints: Option<&'a [f64]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateOutput {
    pub seed: u64,
    pub final_time: f64,
    pub final_occupation: SimplexPoint,
    #[serde(skip)]
    pub trajectory: Trajectory,
}

pub fn run_simulate(cfg: &ResolvedConfig) -> Result<SimulateOutput, HarnessError> {
    let seed = cfg.seed.unwrap_or(0);
    let trajectory = walk::run(&cfg.matrix, &walk_config(cfg), seed)?;
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("trajectory.csv"), trajectory_csv(&trajectory))?;
        write_json(
            &dir.join("trajectory.meta.json"),
            &TrajectoryMetadata {
                matrix: &cfg.source,
                master_seed: None,
                seeds: vec![seed],
                horizon: cfg.horizon,
                initial_counts: &cfg.initial_counts,
                start_vertex: cfg.start_vertex + 1,
                checkpoints: cfg.checkpoints.as_deref(),
            },
        )?;
    }
    Ok(SimulateOutput {
        seed,
        final_time: trajectory.final_state.time(),
        final_occupation: trajectory.final_occupation(),
        trajectory,
    })
}

pub fn render_simulate(output: &SimulateOutput) -> String {
    let coords: Vec<String> = output
        .final_occupation
        .coords()
        .iter()
        .map(|x| format!("{x:.6}"))
        .collect();
    format!(
        "seed {} ran to n = {}; final V = ({})\n",
        output.seed,
        output.final_time,
        coords.join(", ")
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowOutput {
    pub converged: bool,
    pub final_s: f64,
    pub limit: SimplexPoint,
    /// Index into the analyze report and distance of the nearest critical
    /// point.
    pub nearest: Option<(usize, f64)>,
    #[serde(skip)]
    pub result: FlowResult,
    #[serde(skip)]
    pub analyze: AnalyzeOutput,
}

pub fn run_flow(cfg: &ResolvedConfig) -> Result<FlowOutput, HarnessError> {
    let analyze = run_analyze(&ResolvedConfig {
        out: None,
        ..cfg.clone()
    })?;
    let start = match &cfg.flow_start {
        Some(coords) => SimplexPoint::new(coords.clone()).map_err(HarnessError::invalid)?,
        None => SimplexPoint::uniform(cfg.matrix.dim()),
    };
    let locations = analyze.report.point_locations();
    let result = vrrw::flow::integrate(&cfg.matrix, &start, &cfg.flow, &locations)
        .map_err(|e| HarnessError::Invalid(e.to_string()))?;
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("flow.csv"), flow_csv(&result))?;
    }
    Ok(FlowOutput {
        converged: result.converged,
        final_s: result.checkpoints.last().map(|c| c.s).unwrap_or(0.0),
        limit: result.limit.clone(),
        nearest: result.nearest,
        result,
        analyze,
    })
}

pub fn render_flow(output: &FlowOutput) -> String {
    let coords: Vec<String> = output
        .limit
        .coords()
        .iter()
        .map(|x| format!("{x:.6}"))
        .collect();
    let mut text = format!(
        "flow {} at s = {:.4}; limit V = ({})\n",
        if output.converged {
            "converged"
        } else {
            "reached s_max"
        },
        output.final_s,
        coords.join(", ")
    );
    if let Some((idx, dist)) = output.nearest {
        let _ = writeln!(
            text,
            "  nearest critical point: #{idx} ({}) at distance {dist:.3e}",
            output.analyze.report.points[idx].classification.tag()
        );
    }
    text
}

#[derive(Debug, Clone, Serialize)]
pub struct PointEstimate {
    /// Index into the analyze report's point list.
    pub index: usize,
    pub point: SimplexPoint,
    pub face: Face,
    pub tag: String,
    pub hits: u64,
    pub probability: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRecord {
    pub index: u64,
    pub seed: u64,
    pub final_time: f64,
    pub final_occupation: SimplexPoint,
    /// Nearest enumerated critical point and its Euclidean distance.
    pub nearest_point: usize,
    pub nearest_distance: f64,
    /// Distance to the full limit set: enumerated points plus any
    /// degenerate or reducible faces.
    pub distance_to_limit_set: f64,
    /// The nearest point's index when within the classification radius.
    pub assigned: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloSummary {
    pub matrix: MatrixSource,
    pub master_seed: u64,
    pub horizon: u64,
    pub trajectory_count: u64,
    pub r_class: f64,
    /// Wall-clock seconds since the epoch; the one field excluded from
    /// byte-determinism comparisons.
    pub timestamp: u64,
    pub converges_almost_surely: bool,
    pub point_estimates: Vec<PointEstimate>,
    pub unresolved: u64,
    pub trajectories: Vec<TrajectoryRecord>,
}

pub fn run_montecarlo(
    cfg: &ResolvedConfig,
) -> Result<(MonteCarloSummary, AnalyzeOutput), HarnessError> {
    let master_seed = cfg
        .seed
        .ok_or_else(|| HarnessError::Invalid("montecarlo requires a seed".into()))?;
    let analyze = run_analyze(&ResolvedConfig {
        out: None,
        ..cfg.clone()
    })?;
    let locations = analyze.report.point_locations();
    if locations.is_empty() {
        return Err(HarnessError::Invalid(
            "no critical points to classify against".into(),
        ));
    }
    // Faces that absorb distance beyond the enumerated points: continua on
    // degenerate faces and the reducible part of the simplex.
    let mut limit_faces: Vec<Face> = analyze.report.degenerate_faces.clone();
    limit_faces.extend(analyze.report.reducible_faces(&cfg.matrix));

    let base = walk_config(cfg);
    let trajectories: Vec<Trajectory> = (0..cfg.trajectories)
        .into_par_iter()
        .map(|i| {
            walk::run(&cfg.matrix, &base, walk::trajectory_seed(master_seed, i))
                .expect("validated walk configuration")
        })
        .collect();

    let mut records = Vec::with_capacity(trajectories.len());
    for (i, trajectory) in trajectories.iter().enumerate() {
        let final_occupation = trajectory.final_occupation();
        let (nearest_point, nearest_distance) = walk::distance_to_set(&final_occupation, &locations)
            .expect("nonempty critical set");
        let distance_to_limit_set = limit_faces
            .iter()
            .map(|f| final_occupation.distance_to_face(f))
            .fold(nearest_distance, f64::min);
        records.push(TrajectoryRecord {
            index: i as u64,
            seed: trajectory.seed,
            final_time: trajectory.final_state.time(),
            final_occupation,
            nearest_point,
            nearest_distance,
            distance_to_limit_set,
            assigned: (nearest_distance <= cfg.r_class).then_some(nearest_point),
        });
    }

    // Hit assignments must be reproducible from the stored final vectors.
    for record in &records {
        let (idx, dist) = walk::distance_to_set(&record.final_occupation, &locations)
            .expect("nonempty critical set");
        let assigned = (dist <= cfg.r_class).then_some(idx);
        if idx != record.nearest_point || dist != record.nearest_distance
            || assigned != record.assigned
        {
            return Err(HarnessError::Consistency(format!(
                "trajectory {}: stored assignment {:?} disagrees with recomputed {:?}",
                record.index, record.assigned, assigned
            )));
        }
    }

    let mut hits = vec![0u64; locations.len()];
    for record in &records {
        if let Some(idx) = record.assigned {
            hits[idx] += 1;
        }
    }
    let unresolved = cfg.trajectories - hits.iter().sum::<u64>();
    let point_estimates = analyze
        .report
        .points
        .iter()
        .enumerate()
        .map(|(index, cp)| {
            let (wilson_low, wilson_high) = wilson_interval(hits[index], cfg.trajectories);
            PointEstimate {
                index,
                point: cp.point.clone(),
                face: cp.face.clone(),
                tag: cp.classification.tag().to_string(),
                hits: hits[index],
                probability: hits[index] as f64 / cfg.trajectories as f64,
                wilson_low,
                wilson_high,
            }
        })
        .collect();

    let summary = MonteCarloSummary {
        matrix: cfg.source.clone(),
        master_seed,
        horizon: cfg.horizon,
        trajectory_count: cfg.trajectories,
        r_class: cfg.r_class,
        timestamp: unix_timestamp(),
        converges_almost_surely: analyze.converges_almost_surely,
        point_estimates,
        unresolved,
        trajectories: records,
    };

    if let Some(dir) = &cfg.out {
        let traj_dir = dir.join("trajectories");
        std::fs::create_dir_all(&traj_dir)?;
        write_json(&dir.join("summary.json"), &summary)?;
        for (i, trajectory) in trajectories.iter().enumerate() {
            std::fs::write(
                traj_dir.join(format!("traj_{i:05}.csv")),
                trajectory_csv(trajectory),
            )?;
        }
        write_json(
            &traj_dir.join("metadata.json"),
            &TrajectoryMetadata {
                matrix: &cfg.source,
                master_seed: Some(master_seed),
                seeds: trajectories.iter().map(|t| t.seed).collect(),
                horizon: cfg.horizon,
                initial_counts: &cfg.initial_counts,
                start_vertex: cfg.start_vertex + 1,
                checkpoints: cfg.checkpoints.as_deref(),
            },
        )?;
    }
    Ok((summary, analyze))
}

pub fn render_montecarlo(summary: &MonteCarloSummary) -> String {
    let mut text = format!(
        "{} trajectories, horizon {} (finite-horizon estimate; no stopping rule \
         is implied), master seed {}, classification radius {}\n",
        summary.trajectory_count, summary.horizon, summary.master_seed, summary.r_class
    );
    for est in &summary.point_estimates {
        let coords: Vec<String> = est.point.coords().iter().map(|x| format!("{x:.4}")).collect();
        let _ = writeln!(
            text,
            "  #{} ({}) {}: {} hits, p = {:.4} [{:.4}, {:.4}]",
            est.index,
            coords.join(", "),
            est.tag,
            est.hits,
            est.probability,
            est.wilson_low,
            est.wilson_high
        );
    }
    let _ = writeln!(text, "  unresolved at horizon: {}", summary.unresolved);
    let max_dist = summary
        .trajectories
        .iter()
        .map(|t| t.distance_to_limit_set)
        .fold(0.0f64, f64::max);
    let _ = writeln!(
        text,
        "  max final distance to the limit set: {max_dist:.3e}"
    );
    text
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectraVerdict {
    /// All nontrivial character sums negative: the barycenter is stable and
    /// a positive-probability limit.
    BarycenterStable,
    /// Some nontrivial character sum positive: the walk almost never
    /// converges to the barycenter.
    BarycenterUnstable,
    /// Character sums vanish within tolerance; the dichotomy is silent.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectraOutput {
    pub n: u64,
    pub generators: Vec<u64>,
    /// Character sums indexed by `k = 0..n-1`.
    pub character_spectrum: Vec<f64>,
    /// Eigensolver spectrum, descending.
    pub matrix_spectrum: Vec<f64>,
    /// Multiset mismatch between the two spectra.
    pub residual: f64,
    pub verdict: SpectraVerdict,
}

pub fn run_spectra(cfg: &ResolvedConfig) -> Result<SpectraOutput, HarnessError> {
    let MatrixSource::Cayley { n, generators } = &cfg.source else {
        return Err(HarnessError::Invalid(
            "spectra requires a cayley matrix source".into(),
        ));
    };
    let character_spectrum =
        vrrw::analysis::cayley_spectrum(*n, generators).map_err(HarnessError::invalid)?;
    let matrix_spectrum = linalg::sym_eigen(&cfg.matrix.to_square(), None)
        .map_err(HarnessError::invalid)?
        .eigenvalues;

    let mut a = character_spectrum.clone();
    let mut b = matrix_spectrum.clone();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let residual = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    if residual > SPECTRA_RESIDUAL_TOL {
        return Err(HarnessError::Consistency(format!(
            "character-sum spectrum disagrees with the eigensolver: residual {residual:e}"
        )));
    }

    let scale = character_spectrum
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    let tol = 1e-9 * scale;
    let nontrivial = &character_spectrum[1..];
    let verdict = if nontrivial.iter().any(|&x| x > tol) {
        SpectraVerdict::BarycenterUnstable
    } else if nontrivial.iter().all(|&x| x < -tol) {
        SpectraVerdict::BarycenterStable
    } else {
        SpectraVerdict::Inconclusive
    };

    let output = SpectraOutput {
        n: *n,
        generators: generators.clone(),
        character_spectrum,
        matrix_spectrum,
        residual,
        verdict,
    };
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join("spectra.json"), &output)?;
    }
    Ok(output)
}

pub fn render_spectra(output: &SpectraOutput) -> String {
    let mut text = format!(
        "Cayley graph of Z_{} with generators {:?}\n  k  character sum\n",
        output.n, output.generators
    );
    for (k, x) in output.character_spectrum.iter().enumerate() {
        let _ = writeln!(text, "  {k}  {x:+.6}");
    }
    let sorted: Vec<String> = output
        .matrix_spectrum
        .iter()
        .map(|x| format!("{x:+.6}"))
        .collect();
    let _ = writeln!(text, "  eigensolver: [{}]", sorted.join(", "));
    let _ = writeln!(text, "  multiset residual: {:.3e}", output.residual);
    let verdict = match output.verdict {
        SpectraVerdict::BarycenterStable => {
            "barycenter stable: a positive-probability limit of the walk"
        }
        SpectraVerdict::BarycenterUnstable => {
            "barycenter unstable: the walk converges there with probability zero"
        }
        SpectraVerdict::Inconclusive => {
            "inconclusive: a nontrivial character sum vanishes"
        }
    };
    let _ = writeln!(text, "  verdict: {verdict}");
    text
}

/// Assert that two summary serializations agree byte-for-byte once the
/// timestamp field is normalized away.
pub fn summaries_identical_modulo_timestamp(
    a: &MonteCarloSummary,
    b: &MonteCarloSummary,
) -> Result<bool, HarnessError> {
    let normalize = |s: &MonteCarloSummary| -> Result<Vec<u8>, HarnessError> {
        let mut clone = s.clone();
        clone.timestamp = 0;
        to_json_bytes(&clone)
    };
    Ok(normalize(a)? == normalize(b)?)
}

/// Dispatch used by the binary.
pub fn run_and_render(cfg: &ResolvedConfig) -> Result<String, HarnessError> {
    match cfg.mode {
        crate::config::Mode::Analyze => Ok(render_analyze(&run_analyze(cfg)?)),
        crate::config::Mode::Simulate => Ok(render_simulate(&run_simulate(cfg)?)),
        crate::config::Mode::Flow => Ok(render_flow(&run_flow(cfg)?)),
        crate::config::Mode::Montecarlo => {
            let (summary, _) = run_montecarlo(cfg)?;
            Ok(render_montecarlo(&summary))
        }
        crate::config::Mode::Spectra => Ok(render_spectra(&run_spectra(cfg)?)),
    }
}
