//! Scenario runner: builds physics objects from a validated config, executes
//! the requested pipeline, and writes a self-contained run directory.
//!
//! Every run directory holds the canonical config echo, the artifacts the
//! pipeline produced, and a `manifest.json` recording the config hash, the
//! artifact list, any module errors, and the overall pass flag. A `.lock`
//! file guards the directory while a run is in flight; module errors are
//! recorded in the manifest rather than crashing the process, so a failed
//! run still leaves an inspectable directory behind.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::bohm::{
    equivariance_statistic, integrate_trajectories, ordering_violations, quantum_potential,
    quantum_potential_hj, sample_initial_positions, EnsembleMeta, Interpolation,
    TrajectoryEnsemble,
};
use crate::classical::{
    hamilton_flow, lyapunov_estimate, poincare_invariant, variational_flow,
    zero_characteristic_check, ClassicalState, ClassicalTrajectory, Flow, HamiltonianSpec,
    LyapunovEstimate, LyapunovOpts, VariationalState, VariationalTrajectory,
};
use crate::config::{canonical_toml, config_hash, ClassicalBlock, ScenarioConfig};
use crate::diagnostics::{
    chetaev_residual, continuity_residual, madelung_residuals, perturbation_action,
    uncertainty_check, DiagnosticsReport,
};
use crate::field::{ComplexField, RealField};
use crate::grid::{Boundary, Grid};
use crate::potential::{eval_potential, PotentialSpec};
use crate::qhdf;
use crate::states;
use crate::tdse::{
    discrete_energy, evolve, imaginary_time_ground_state, solve_eigenpairs, EvolutionConfig,
    ImaginaryTimeOpts, WaveTimeline,
};
use crate::tolerances as tol;
use crate::units::UnitSystem;

/// Everything checked out.
pub const EXIT_OK: i32 = 0;
/// The run completed but at least one diagnostic row failed its tolerance.
pub const EXIT_DIAGNOSTIC: i32 = 1;
/// The configuration was rejected before any run directory was touched.
pub const EXIT_CONFIG: i32 = 2;
/// A module reported an error mid-run; see the manifest.
pub const EXIT_RUNTIME: i32 = 3;

/// Histogram bins per axis for the equivariance statistic.
pub const EQUIVARIANCE_BINS: usize = 50;

/// Eigenpairs written by the spectrum pipeline (capped by the grid size).
pub const SPECTRUM_STATES: usize = 8;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("output directory {0} is locked by another run (remove `.lock` if it is stale)")]
    Locked(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub name: String,
    pub command: String,
    pub config_hash: String,
    pub pass: bool,
    pub errors: Vec<String>,
    pub artifacts: Vec<String>,
    pub wall_clock_seconds: f64,
    pub versions: BTreeMap<String, String>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub out_dir: PathBuf,
    pub exit_code: i32,
    /// Text summary for the console (empty when quiet has nothing to add).
    pub summary: String,
}

/// Default output directory: `./runs/<name>-<hash>`.
pub fn default_out_dir(cfg: &ScenarioConfig) -> PathBuf {
    if let Some(out) = &cfg.output {
        return PathBuf::from(out);
    }
    PathBuf::from("runs").join(format!("{}-{}", cfg.name, config_hash(cfg)))
}

// ---------------------------------------------------------------------------
// Run directory bookkeeping
// ---------------------------------------------------------------------------

struct RunDir {
    dir: PathBuf,
    artifacts: Vec<String>,
    started: Instant,
}

fn io_err(path: &Path, source: io::Error) -> RunError {
    RunError::Io { path: path.to_path_buf(), source }
}

impl RunDir {
    fn create(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let lock = dir.join(".lock");
        match fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(_) => {}
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                return Err(RunError::Locked(dir.to_path_buf()));
            }
            Err(e) => return Err(io_err(&lock, e)),
        }
        Ok(Self { dir: dir.to_path_buf(), artifacts: Vec::new(), started: Instant::now() })
    }

    fn write(&mut self, rel: &str, contents: &str) -> Result<(), RunError> {
        let path = self.dir.join(rel);
        fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
        self.artifacts.push(rel.to_string());
        Ok(())
    }

    fn write_snapshot(&mut self, rel: &str, field: &ComplexField) -> Result<(), RunError> {
        let path = self.dir.join(rel);
        qhdf::write_complex(&path, field).map_err(|e| match e {
            qhdf::QhdfError::Io(e) => io_err(&path, e),
            other => io_err(&path, io::Error::other(other.to_string())),
        })?;
        self.artifacts.push(rel.to_string());
        Ok(())
    }

    fn finish(
        mut self,
        cfg: &ScenarioConfig,
        command: &str,
        errors: Vec<String>,
        diagnostics_pass: bool,
    ) -> Result<(RunManifest, PathBuf), RunError> {
        let mut versions = BTreeMap::new();
        versions.insert("pilotwave".to_string(), env!("CARGO_PKG_VERSION").to_string());
        versions.insert("qhdf-format".to_string(), "1".to_string());
        self.artifacts.sort();
        let manifest = RunManifest {
            name: cfg.name.clone(),
            command: command.to_string(),
            config_hash: config_hash(cfg),
            pass: errors.is_empty() && diagnostics_pass,
            errors,
            artifacts: self.artifacts.clone(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            versions,
        };
        let path = self.dir.join("manifest.json");
        let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, body + "\n").map_err(|e| io_err(&path, e))?;
        let lock = self.dir.join(".lock");
        fs::remove_file(&lock).map_err(|e| io_err(&lock, e))?;
        Ok((manifest, self.dir))
    }
}

// ---------------------------------------------------------------------------
// Builders: config blocks to physics objects
// ---------------------------------------------------------------------------

fn build_units(cfg: &ScenarioConfig) -> Result<UnitSystem, String> {
    UnitSystem::new(cfg.units.hbar, cfg.units.mass).map_err(|e| format!("units: {e}"))
}

fn build_grid(cfg: &ScenarioConfig) -> Result<Arc<Grid>, String> {
    let g = &cfg.grid;
    let boundary = g.boundary_kind();
    let grid = match g.ndim() {
        1 => Grid::line(g.lower[0], g.upper[0], g.points[0], boundary),
        _ => Grid::rectangle(
            (g.lower[0], g.upper[0], g.points[0]),
            (g.lower[1], g.upper[1], g.points[1]),
            boundary,
        ),
    };
    grid.map(Arc::new).map_err(|e| format!("grid: {e}"))
}

fn build_potential_spec(cfg: &ScenarioConfig) -> PotentialSpec {
    let p = &cfg.potential;
    match p.kind.as_str() {
        "harmonic" => PotentialSpec::Harmonic { omega: p.omega.expect("validated") },
        "inverted-harmonic" => {
            PotentialSpec::InvertedHarmonic { kappa: p.kappa.expect("validated") }
        }
        "box" => PotentialSpec::BoxWell,
        "gaussian-barrier" => PotentialSpec::GaussianBarrier {
            height: p.height.expect("validated"),
            center: p.center.clone().expect("validated"),
            width: p.width.expect("validated"),
        },
        "double-slit" => {
            let c = p.slit_centers.clone().expect("validated");
            PotentialSpec::DoubleSlit {
                height: p.height.expect("validated"),
                wall_x: p.wall_x.expect("validated"),
                wall_thickness: p.wall_thickness.expect("validated"),
                slit_centers: [c[0], c[1]],
                slit_width: p.slit_width.expect("validated"),
            }
        }
        _ => PotentialSpec::Free,
    }
}

struct StateParams<'a> {
    kind: &'a str,
    center: Option<&'a [f64]>,
    sigma: Option<&'a [f64]>,
    momentum: Option<&'a [f64]>,
    n: Option<usize>,
    p: Option<&'a [f64]>,
}

fn build_single_state(
    params: &StateParams,
    grid: &Arc<Grid>,
    units: &UnitSystem,
    potential: &RealField,
) -> Result<ComplexField, String> {
    let zeros = vec![0.0; grid.ndim()];
    match params.kind {
        "gaussian" => states::gaussian(
            grid,
            units,
            params.center.expect("validated"),
            params.sigma.expect("validated"),
            params.momentum.unwrap_or(&zeros),
        )
        .map_err(|e| format!("initial state: {e}")),
        "plane-wave" => states::plane_wave(grid, units, params.p.expect("validated"))
            .map(|(psi, _)| psi)
            .map_err(|e| format!("initial state: {e}")),
        "eigenstate" => {
            let n = params.n.expect("validated");
            let solution = solve_eigenpairs(potential, units, n + 1)
                .map_err(|e| format!("initial state (eigensolver): {e}"))?;
            Ok(ComplexField::from_real(&solution.states[n]))
        }
        "ground-state" => {
            let ground = imaginary_time_ground_state(
                potential,
                units,
                &ImaginaryTimeOpts::default(),
                None,
            )
            .map_err(|e| format!("initial state (imaginary time): {e}"))?;
            Ok(ComplexField::from_real(&ground.state))
        }
        other => Err(format!("initial state kind {other} is not buildable")),
    }
}

fn build_state(
    cfg: &ScenarioConfig,
    grid: &Arc<Grid>,
    units: &UnitSystem,
    potential: &RealField,
) -> Result<ComplexField, String> {
    let s = &cfg.initial_state;
    if s.kind == "superposition" {
        let mut parts = Vec::with_capacity(s.components.len());
        for c in &s.components {
            let params = StateParams {
                kind: &c.kind,
                center: c.center.as_deref(),
                sigma: c.sigma.as_deref(),
                momentum: c.momentum.as_deref(),
                n: c.n,
                p: c.p.as_deref(),
            };
            let field = build_single_state(&params, grid, units, potential)?;
            parts.push((Complex64::new(c.weight[0], c.weight[1]), field));
        }
        let refs: Vec<(Complex64, &ComplexField)> =
            parts.iter().map(|(w, f)| (*w, f)).collect();
        states::superpose(&refs).map_err(|e| format!("initial state: {e}"))
    } else {
        let params = StateParams {
            kind: &s.kind,
            center: s.center.as_deref(),
            sigma: s.sigma.as_deref(),
            momentum: s.momentum.as_deref(),
            n: s.n,
            p: s.p.as_deref(),
        };
        build_single_state(&params, grid, units, potential)
    }
}

fn interpolation_kind(name: &str) -> Interpolation {
    match name {
        "linear" => Interpolation::Linear,
        _ => Interpolation::Cubic,
    }
}

// ---------------------------------------------------------------------------
// CSV writers
// ---------------------------------------------------------------------------

fn trajectories_csv(ensemble: &TrajectoryEnsemble) -> String {
    let ndim = ensemble.grid().ndim();
    let mut out =
        String::from(if ndim == 1 { "t,particle_id,x\n" } else { "t,particle_id,x,y\n" });
    for (ti, &t) in ensemble.times().iter().enumerate() {
        for (k, pos) in ensemble.at_time(ti).iter().enumerate() {
            if ndim == 1 {
                out.push_str(&format!("{t:.16e},{k},{:.16e}\n", pos[0]));
            } else {
                out.push_str(&format!("{t:.16e},{k},{:.16e},{:.16e}\n", pos[0], pos[1]));
            }
        }
    }
    out
}

fn spectrum_csv(energies: &[f64]) -> String {
    let mut out = String::from("n,energy\n");
    for (n, e) in energies.iter().enumerate() {
        out.push_str(&format!("{n},{e:.16e}\n"));
    }
    out
}

fn classical_csv(traj: &ClassicalTrajectory) -> String {
    let d = traj.dim();
    let mut out = String::from(if d == 1 { "t,q,p\n" } else { "t,q_x,q_y,p_x,p_y\n" });
    for s in traj.states() {
        out.push_str(&format!("{:.16e}", s.t));
        for &q in &s.q {
            out.push_str(&format!(",{q:.16e}"));
        }
        for &p in &s.p {
            out.push_str(&format!(",{p:.16e}"));
        }
        out.push('\n');
    }
    out
}

fn variational_csv(sol: &VariationalTrajectory, invariant: &[f64]) -> String {
    let d = sol.dim();
    let mut out = String::from(if d == 1 {
        "t,xi,eta,C\n"
    } else {
        "t,xi_x,xi_y,eta_x,eta_y,C\n"
    });
    for (i, t) in sol.times().iter().enumerate() {
        let z = &sol.states()[i];
        out.push_str(&format!("{t:.16e}"));
        for &x in &z.xi {
            out.push_str(&format!(",{x:.16e}"));
        }
        for &e in &z.eta {
            out.push_str(&format!(",{e:.16e}"));
        }
        out.push_str(&format!(",{:.16e}\n", invariant[i]));
    }
    out
}

fn lyapunov_csv(est: &LyapunovEstimate) -> String {
    let mut out = String::from("interval,log_growth,lambda_running\n");
    for row in &est.intervals {
        out.push_str(&format!(
            "{},{:.16e},{:.16e}\n",
            row.index, row.log_growth, row.lambda_running
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Diagnostics catalog
// ---------------------------------------------------------------------------

fn weighted_diff_norm(
    a: &crate::bohm::QField,
    b: &crate::bohm::QField,
    density: &RealField,
) -> f64 {
    let grid = density.grid();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..grid.len() {
        if a.mask.is_masked(i) || b.mask.is_masked(i) {
            continue;
        }
        let w = density.data()[i] * grid.quad_weight(i);
        let r = a.values.data()[i] - b.values.data()[i];
        num += r * r * w;
        den += w;
    }
    if den == 0.0 {
        return 0.0;
    }
    (num / den).sqrt()
}

/// Compute the configured diagnostic rows for a finished timeline.
///
/// The reported value is the raw statistic, shifted by the configured
/// expectation when one is present, so `pass` is always `|value| <= tol`
/// (except `uncertainty-product` without an expectation, which is the
/// one-sided bound check).
pub fn compute_diagnostics(
    cfg: &ScenarioConfig,
    timeline: &WaveTimeline,
    ensemble: Option<&TrajectoryEnsemble>,
) -> Result<DiagnosticsReport, String> {
    let mut report = DiagnosticsReport::new();
    let units = *timeline.units();
    let last = timeline.snapshot(timeline.len() - 1);
    for name in &cfg.diagnostics {
        let expected = cfg.expectations.get(name).copied();
        let custom_tol = cfg.tolerances.get(name).copied();
        let (raw, default_tol) = match name.as_str() {
            "norm-drift" => {
                let drift = timeline
                    .snapshots()
                    .iter()
                    .map(|s| (s.norm_sqr() - 1.0).abs())
                    .fold(0.0, f64::max);
                (drift, tol::NORM_DRIFT_PER_STEP * timeline.step_indices().last().map(|&s| s as f64).unwrap_or(1.0))
            }
            "energy-drift" => {
                let form = timeline.method().kinetic_form();
                let mut e0 = 0.0_f64;
                let mut drift = 0.0_f64;
                for (i, s) in timeline.snapshots().iter().enumerate() {
                    let e = discrete_energy(s, timeline.potential(), &units, form)
                        .map_err(|e| format!("energy-drift: {e}"))?;
                    if i == 0 {
                        e0 = e;
                    } else {
                        drift = drift.max((e - e0).abs());
                    }
                }
                (drift / e0.abs().max(1e-12), tol::ENERGY_DRIFT_REL)
            }
            "chetaev" => {
                let (_, norm) = chetaev_residual(last, &units);
                (norm, tol::CHETAEV_COHERENT)
            }
            "continuity" => {
                let rows =
                    continuity_residual(timeline).map_err(|e| format!("continuity: {e}"))?;
                let worst = rows.iter().map(|r| r.norm).fold(0.0, f64::max);
                (worst, tol::SOLVER_RESIDUAL)
            }
            "madelung-amplitude" | "madelung-phase" => {
                let rows =
                    madelung_residuals(timeline).map_err(|e| format!("{name}: {e}"))?;
                let worst = rows
                    .iter()
                    .map(|r| if name == "madelung-amplitude" { r.r_amp } else { r.r_phase })
                    .fold(0.0, f64::max);
                (worst, tol::SOLVER_RESIDUAL)
            }
            "quantum-potential" => {
                if timeline.len() < 3 {
                    return Err(
                        "quantum-potential: need at least 3 snapshots (snapshot_stride too coarse)"
                            .to_string(),
                    );
                }
                let idx = (timeline.len() / 2).clamp(1, timeline.len() - 2);
                let psi = timeline.snapshot(idx);
                let density = psi.density();
                let amplitude = density.map(f64::sqrt);
                let mask = psi.node_mask();
                let q = quantum_potential(&amplitude, &mask, &units)
                    .map_err(|e| format!("quantum-potential: {e}"))?;
                let q_hj = quantum_potential_hj(timeline, idx)
                    .map_err(|e| format!("quantum-potential: {e}"))?;
                (weighted_diff_norm(&q, &q_hj, &density), tol::SOLVER_RESIDUAL)
            }
            "uncertainty-product" => {
                let record = uncertainty_check(last, &units)
                    .map_err(|e| format!("uncertainty-product: {e}"))?;
                let raw = record.product - record.bound;
                let tolerance = custom_tol.unwrap_or(tol::UNCERTAINTY_BOUND_SLACK);
                match expected {
                    Some(e) => report.push(name, raw - e, tolerance),
                    // One-sided: the product may exceed the bound freely.
                    None => report.push_flag(name, raw, tolerance, raw >= -tolerance),
                }
                continue;
            }
            "uncertainty-decomposition" => {
                let record = uncertainty_check(last, &units)
                    .map_err(|e| format!("uncertainty-decomposition: {e}"))?;
                let gap =
                    record.var_p - record.grad_s_var - 2.0 * units.mass() * record.mean_q;
                (gap.abs(), tol::DECOMPOSITION_SOLVER)
            }
            "action-dual-route" => {
                let record = perturbation_action(last, &units)
                    .map_err(|e| format!("action-dual-route: {e}"))?;
                let rel = (record.action - record.fisher_form).abs()
                    / record.action.abs().max(1e-300);
                (rel, tol::ACTION_DUAL_ROUTE_REL)
            }
            "equivariance" => {
                let ensemble = ensemble.ok_or("equivariance: no trajectory ensemble")?;
                let stat = equivariance_statistic(ensemble, &last.density(), EQUIVARIANCE_BINS)
                    .map_err(|e| format!("equivariance: {e}"))?;
                (stat.tv_distance, tol::EQUIVARIANCE_TV)
            }
            "non-crossing" => {
                let ensemble = ensemble.ok_or("non-crossing: no trajectory ensemble")?;
                let violations =
                    ordering_violations(ensemble).map_err(|e| format!("non-crossing: {e}"))?;
                (violations as f64, 0.0)
            }
            other => return Err(format!("diagnostic {other} is not implemented")),
        };
        let tolerance = custom_tol.unwrap_or(default_tol);
        let value = raw - expected.unwrap_or(0.0);
        report.push(name, value, tolerance);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Classical suite
// ---------------------------------------------------------------------------

fn classical_suite(
    block: &ClassicalBlock,
    spec: PotentialSpec,
    cfg: &ScenarioConfig,
    dir: &mut RunDir,
    report: &mut DiagnosticsReport,
) -> Result<(), String> {
    let ham = HamiltonianSpec::new(spec, block.mass).map_err(|e| format!("classical: {e}"))?;
    let x0 = ClassicalState::new(&block.q0, &block.p0, 0.0)
        .map_err(|e| format!("classical: {e}"))?;
    let reference = hamilton_flow(&ham, &x0, block.dt, block.steps)
        .map_err(|e| format!("classical: {e}"))?;
    dir.write("classical.csv", &classical_csv(&reference))
        .map_err(|e| format!("classical.csv: {e}"))?;

    let e0 = ham.energy(reference.state(0)).map_err(|e| format!("classical: {e}"))?;
    let mut drift = 0.0_f64;
    for s in reference.states().iter().skip(1) {
        let e = ham.energy(s).map_err(|e| format!("classical: {e}"))?;
        drift = drift.max((e - e0).abs());
    }
    push_row(report, cfg, "classical-energy-drift", drift, tol::CLASSICAL_ENERGY_DRIFT);

    if block.variational {
        let d = x0.dim();
        let mut basis = Vec::with_capacity(2 * d);
        for unit in 0..2 * d {
            let mut xi = vec![0.0; d];
            let mut eta = vec![0.0; d];
            if unit < d {
                xi[unit] = 1.0;
            } else {
                eta[unit - d] = 1.0;
            }
            let v0 =
                VariationalState::new(&xi, &eta).map_err(|e| format!("variational: {e}"))?;
            basis.push(
                variational_flow(&ham, &reference, &v0)
                    .map_err(|e| format!("variational: {e}"))?,
            );
        }
        let mut invariant_drift = 0.0_f64;
        let mut first_pair = Vec::new();
        for a in 0..basis.len() {
            for b in (a + 1)..basis.len() {
                let c = poincare_invariant(&basis[a], &basis[b])
                    .map_err(|e| format!("variational: {e}"))?;
                let drift =
                    c.iter().map(|v| (v - c[0]).abs()).fold(0.0, f64::max);
                invariant_drift = invariant_drift.max(drift);
                if a == 0 && b == 1 {
                    first_pair = c;
                }
            }
        }
        dir.write("variational.csv", &variational_csv(&basis[0], &first_pair))
            .map_err(|e| format!("variational.csv: {e}"))?;
        push_row(report, cfg, "poincare-drift", invariant_drift, tol::POINCARE_INVARIANT_DRIFT);

        let verdict =
            zero_characteristic_check(&basis).map_err(|e| format!("stability: {e}"))?;
        // "stability" reports 1.0 for a stable verdict; the expectation
        // (default 1.0) selects which verdict the scenario requires.
        let stable = if verdict.stable { 1.0 } else { 0.0 };
        let expected = cfg.expectations.get("stability").copied().unwrap_or(1.0);
        report.push_flag(
            "stability",
            stable - expected,
            0.5,
            (stable - expected).abs() <= 0.5,
        );
    }

    if let Some(lyap) = &block.lyapunov {
        let opts = LyapunovOpts {
            dt: block.dt,
            horizon: lyap.horizon,
            renorm_interval: lyap.renorm_interval,
            seed: lyap.seed,
        };
        let mut x0_flat = block.q0.clone();
        x0_flat.extend_from_slice(&block.p0);
        let est = lyapunov_estimate(&Flow::Hamiltonian(&ham), &x0_flat, &opts)
            .map_err(|e| format!("lyapunov: {e}"))?;
        dir.write("lyapunov.csv", &lyapunov_csv(&est))
            .map_err(|e| format!("lyapunov.csv: {e}"))?;
        match cfg.expectations.get("lyapunov") {
            Some(e) => {
                let tolerance =
                    cfg.tolerances.get("lyapunov").copied().unwrap_or(tol::LYAPUNOV_REL);
                report.push("lyapunov", est.lambda_max - e, tolerance);
            }
            // Informational when no expectation pins the exponent.
            None => report.push_flag("lyapunov", est.lambda_max, f64::INFINITY, true),
        }
    }
    Ok(())
}

fn push_row(
    report: &mut DiagnosticsReport,
    cfg: &ScenarioConfig,
    name: &str,
    raw: f64,
    default_tol: f64,
) {
    let tolerance = cfg.tolerances.get(name).copied().unwrap_or(default_tol);
    let value = raw - cfg.expectations.get(name).copied().unwrap_or(0.0);
    report.push(name, value, tolerance);
}

// ---------------------------------------------------------------------------
// Pipelines
// ---------------------------------------------------------------------------

/// What a run directory should contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    /// Evolve, dump snapshots, run trajectories and diagnostics if configured,
    /// then the classical suite if configured.
    Full,
    /// Evolve and write trajectories only (requires a `[trajectories]` block).
    TrajectoriesOnly,
    /// Eigenpairs of the configured potential (1D dirichlet grids).
    Spectrum,
    /// Classical suite only (requires a `[classical]` block).
    ClassicalOnly,
}

impl Pipeline {
    fn command(&self) -> &'static str {
        match self {
            Pipeline::Full => "run",
            Pipeline::TrajectoriesOnly => "trajectories",
            Pipeline::Spectrum => "spectrum",
            Pipeline::ClassicalOnly => "classical",
        }
    }
}

/// Execute a pipeline into `out_dir`, returning the manifest and exit code.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    out_dir: &Path,
    pipeline: Pipeline,
) -> Result<RunOutcome, RunError> {
    let mut dir = RunDir::create(out_dir)?;
    dir.write("config.toml", &canonical_toml(cfg))?;

    let mut errors = Vec::new();
    let mut summary = String::new();
    let mut report = DiagnosticsReport::new();
    match execute(cfg, pipeline, &mut dir, &mut report) {
        Ok(()) => {}
        Err(e) => errors.push(e),
    }
    if !report.rows.is_empty() {
        dir.write("diagnostics.csv", &report.to_csv())?;
        summary = report.summary();
        dir.write("summary.txt", &summary)?;
    }
    let diagnostics_pass = report.all_pass();
    let (manifest, dir) = dir.finish(cfg, pipeline.command(), errors, diagnostics_pass)?;
    let exit_code = if !manifest.errors.is_empty() {
        EXIT_RUNTIME
    } else if !manifest.pass {
        EXIT_DIAGNOSTIC
    } else {
        EXIT_OK
    };
    Ok(RunOutcome { manifest, out_dir: dir, exit_code, summary })
}

fn execute(
    cfg: &ScenarioConfig,
    pipeline: Pipeline,
    dir: &mut RunDir,
    report: &mut DiagnosticsReport,
) -> Result<(), String> {
    let units = build_units(cfg)?;
    let spec = build_potential_spec(cfg);

    if pipeline == Pipeline::ClassicalOnly {
        let block = cfg
            .classical
            .as_ref()
            .ok_or("the classical pipeline needs a `[classical]` block")?;
        return classical_suite(block, spec, cfg, dir, report);
    }

    let grid = build_grid(cfg)?;
    let potential =
        eval_potential(&spec, &grid, &units).map_err(|e| format!("potential: {e}"))?;

    if pipeline == Pipeline::Spectrum {
        let n_states = SPECTRUM_STATES.min(grid.len() / 4).max(1);
        let solution = solve_eigenpairs(&potential, &units, n_states)
            .map_err(|e| format!("spectrum: {e}"))?;
        dir.write("spectrum.csv", &spectrum_csv(&solution.energies))
            .map_err(|e| format!("spectrum.csv: {e}"))?;
        return Ok(());
    }

    let psi0 = build_state(cfg, &grid, &units, &potential)?;
    let evolution = EvolutionConfig {
        dt: cfg.evolution.dt,
        steps: cfg.evolution.steps,
        method: cfg.evolution.method_kind(),
        snapshot_stride: cfg.evolution.snapshot_stride,
    };
    let timeline =
        evolve(&psi0, &potential, &units, &evolution).map_err(|e| format!("evolve: {e}"))?;
    for (i, step) in timeline.step_indices().iter().enumerate() {
        dir.write_snapshot(&format!("psi_{step}.qhdf"), timeline.snapshot(i))
            .map_err(|e| format!("snapshot: {e}"))?;
    }

    let mut ensemble = None;
    if let Some(t) = &cfg.trajectories {
        let p0 = timeline.snapshot(0).density();
        let positions = sample_initial_positions(&p0, t.count, t.seed)
            .map_err(|e| format!("trajectory sampling: {e}"))?;
        let mut ens = integrate_trajectories(
            &timeline,
            &positions,
            t.substeps,
            interpolation_kind(&t.interpolation),
        )
        .map_err(|e| format!("trajectories: {e}"))?;
        ens.meta.seed = Some(t.seed);
        dir.write("trajectories.csv", &trajectories_csv(&ens))
            .map_err(|e| format!("trajectories.csv: {e}"))?;
        ensemble = Some(ens);
    } else if pipeline == Pipeline::TrajectoriesOnly {
        return Err("the trajectories pipeline needs a `[trajectories]` block".to_string());
    }

    if pipeline == Pipeline::Full {
        *report = compute_diagnostics(cfg, &timeline, ensemble.as_ref())?;
        if let Some(block) = &cfg.classical {
            let spec = build_potential_spec(cfg);
            classical_suite(block, spec, cfg, dir, report)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Diagnose: recompute diagnostics from a stored run directory
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct DiagnoseOutcome {
    pub report: DiagnosticsReport,
    /// Recomputed CSV equals the stored `diagnostics.csv` byte for byte.
    pub matches: bool,
    pub exit_code: i32,
}

fn read_to_string(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// Rebuild the timeline (and trajectory ensemble, when stored) from a run
/// directory and recompute its quantum diagnostics.
///
/// Escape bookkeeping is not stored in `trajectories.csv`, so runs whose
/// particles left a dirichlet domain are not exactly reproducible here; the
/// bundled scenarios integrate trajectories on periodic grids only.
pub fn diagnose(run_dir: &Path) -> Result<DiagnoseOutcome, String> {
    let cfg = crate::config::parse_config(&read_to_string(&run_dir.join("config.toml"))?)
        .map_err(|e| format!("config.toml: {e}"))?;
    let units = build_units(&cfg)?;
    let grid = build_grid(&cfg)?;
    let spec = build_potential_spec(&cfg);
    let potential =
        eval_potential(&spec, &grid, &units).map_err(|e| format!("potential: {e}"))?;

    // Snapshot files, ordered by step index.
    let mut steps = Vec::new();
    let entries =
        fs::read_dir(run_dir).map_err(|e| format!("{}: {e}", run_dir.display()))?;
    for entry in entries {
        let entry = entry.map_err(|e| format!("{}: {e}", run_dir.display()))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(step) = name
            .strip_prefix("psi_")
            .and_then(|s| s.strip_suffix(".qhdf"))
            .and_then(|s| s.parse::<usize>().ok())
        {
            steps.push(step);
        }
    }
    steps.sort_unstable();
    if steps.is_empty() {
        return Err("no psi_<step>.qhdf snapshots in the run directory".to_string());
    }
    let boundary = grid.boundary();
    let mut snapshots = Vec::with_capacity(steps.len());
    for &step in &steps {
        let path = run_dir.join(format!("psi_{step}.qhdf"));
        let data = qhdf::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        snapshots
            .push(data.into_complex(boundary).map_err(|e| format!("{}: {e}", path.display()))?);
    }
    let timeline = WaveTimeline::from_parts(
        units,
        cfg.evolution.method_kind(),
        potential,
        cfg.evolution.dt,
        cfg.evolution.snapshot_stride,
        steps,
        snapshots,
    )
    .map_err(|e| format!("timeline: {e}"))?;

    let ensemble = match (&cfg.trajectories, run_dir.join("trajectories.csv").exists()) {
        (Some(t), true) => Some(read_trajectories(
            &read_to_string(&run_dir.join("trajectories.csv"))?,
            &timeline,
            t.count,
            t.seed,
            t.substeps,
            interpolation_kind(&t.interpolation),
        )?),
        _ => None,
    };

    let report = compute_diagnostics(&cfg, &timeline, ensemble.as_ref())?;
    let stored = read_to_string(&run_dir.join("diagnostics.csv"))?;
    let matches = report.to_csv() == stored;
    let exit_code = if !matches {
        EXIT_RUNTIME
    } else if !report.all_pass() {
        EXIT_DIAGNOSTIC
    } else {
        EXIT_OK
    };
    Ok(DiagnoseOutcome { report, matches, exit_code })
}

fn read_trajectories(
    csv: &str,
    timeline: &WaveTimeline,
    count: usize,
    seed: u64,
    substeps: usize,
    interp: Interpolation,
) -> Result<TrajectoryEnsemble, String> {
    let grid = timeline.grid().clone();
    let ndim = grid.ndim();
    let n_times = timeline.len();
    let mut positions = vec![vec![[0.0_f64; 2]; count]; n_times];
    let mut rows = 0usize;
    for (lineno, line) in csv.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 + ndim {
            return Err(format!("trajectories.csv line {}: bad field count", lineno + 1));
        }
        let parse =
            |s: &str| s.parse::<f64>().map_err(|e| format!("trajectories.csv: {e}"));
        let k: usize = fields[1]
            .parse()
            .map_err(|e| format!("trajectories.csv line {}: {e}", lineno + 1))?;
        let ti = rows / count;
        if ti >= n_times || k >= count {
            return Err("trajectories.csv does not match the config shape".to_string());
        }
        positions[ti][k][0] = parse(fields[2])?;
        if ndim == 2 {
            positions[ti][k][1] = parse(fields[3])?;
        }
        rows += 1;
    }
    if rows != n_times * count {
        return Err(format!(
            "trajectories.csv has {rows} rows, expected {}",
            n_times * count
        ));
    }
    let dt_sub = timeline.dt_snapshot() / substeps as f64;
    Ok(TrajectoryEnsemble::from_parts(
        grid.clone(),
        timeline.times().to_vec(),
        positions,
        vec![None; count],
        EnsembleMeta {
            dt_sub,
            substeps,
            interp,
            seed: Some(seed),
            boundary_policy: if grid.boundary() == Boundary::Periodic {
                "periodic-wrap"
            } else {
                "dirichlet-truncate"
            },
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn demo_config(extra: &str) -> ScenarioConfig {
        let text = format!(
            r#"
            name = "demo"
            diagnostics = ["norm-drift", "energy-drift", "chetaev", "continuity"]
            [grid]
            lower = [-10.0]
            upper = [10.0]
            points = [256]
            [potential]
            kind = "harmonic"
            omega = 1.0
            [initial_state]
            kind = "gaussian"
            center = [1.0]
            sigma = [0.7071067811865476]
            [evolution]
            dt = 0.0025
            steps = 80
            snapshot_stride = 4
            {extra}
            "#
        );
        parse_config(&text).unwrap()
    }

    #[test]
    fn full_pipeline_writes_expected_artifacts() {
        let cfg = demo_config(
            "[trajectories]\ncount = 20\nseed = 11\n\n[classical]\nq0 = [1.0]\np0 = [0.0]\ndt = 0.01\nsteps = 100\n[classical.lyapunov]\nhorizon = 1.0\nrenorm_interval = 0.5\nseed = 3\n",
        );
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("demo");
        let outcome = run_scenario(&cfg, &out, Pipeline::Full).unwrap();
        assert_eq!(
            outcome.exit_code,
            EXIT_OK,
            "errors: {:?}\nsummary:\n{}",
            outcome.manifest.errors,
            outcome.summary
        );
        assert!(outcome.manifest.pass);
        for rel in [
            "config.toml",
            "psi_0.qhdf",
            "psi_80.qhdf",
            "trajectories.csv",
            "diagnostics.csv",
            "summary.txt",
            "classical.csv",
            "variational.csv",
            "lyapunov.csv",
        ] {
            assert!(
                outcome.manifest.artifacts.contains(&rel.to_string()),
                "missing {rel}: {:?}",
                outcome.manifest.artifacts
            );
            assert!(out.join(rel).exists(), "{rel} not on disk");
        }
        assert!(out.join("manifest.json").exists());
        assert!(!out.join(".lock").exists(), "lock removed on completion");
        // 80 steps at stride 4 plus the initial snapshot.
        let snaps = outcome
            .manifest
            .artifacts
            .iter()
            .filter(|a| a.starts_with("psi_"))
            .count();
        assert_eq!(snaps, 21);
    }

    #[test]
    fn lock_file_guards_the_directory() {
        let cfg = demo_config("");
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("demo");
        fs::create_dir_all(&out).unwrap();
        fs::write(out.join(".lock"), "").unwrap();
        match run_scenario(&cfg, &out, Pipeline::Full) {
            Err(RunError::Locked(dir)) => assert_eq!(dir, out),
            other => panic!("expected Locked, got {other:?}"),
        }
    }

    #[test]
    fn module_errors_land_in_the_manifest() {
        // Split-spectral needs a periodic grid; the config parses but the
        // run must fail and say why.
        let text = r#"
            name = "bad-method"
            [grid]
            lower = [-10.0]
            upper = [10.0]
            points = [64]
            boundary = "dirichlet"
            [potential]
            kind = "free"
            [initial_state]
            kind = "gaussian"
            center = [0.0]
            sigma = [1.0]
            [evolution]
            method = "split-spectral"
            dt = 0.005
            steps = 10
        "#;
        let cfg = parse_config(text).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("bad");
        let outcome = run_scenario(&cfg, &out, Pipeline::Full).unwrap();
        assert_eq!(outcome.exit_code, EXIT_RUNTIME);
        assert!(!outcome.manifest.pass);
        assert_eq!(outcome.manifest.errors.len(), 1);
        let msg = &outcome.manifest.errors[0];
        assert!(
            msg.contains("split-spectral") && msg.contains("periodic"),
            "error should cite the method/boundary invariant: {msg}"
        );
        assert!(!out.join(".lock").exists(), "lock removed after failures too");
    }

    #[test]
    fn failing_expectation_gives_diagnostic_exit() {
        let mut cfg = demo_config("");
        cfg.expectations.insert("chetaev".into(), 0.5);
        cfg.tolerances.insert("chetaev".into(), 1e-3);
        let tmp = tempfile::tempdir().unwrap();
        let outcome = run_scenario(&cfg, &tmp.path().join("x"), Pipeline::Full).unwrap();
        assert_eq!(outcome.exit_code, EXIT_DIAGNOSTIC);
        assert!(outcome.manifest.errors.is_empty());
        assert!(!outcome.manifest.pass);
    }

    #[test]
    fn diagnose_matches_a_stored_run() {
        let cfg = demo_config("[trajectories]\ncount = 15\nseed = 5\n");
        let mut cfg = cfg;
        cfg.diagnostics.push("equivariance".into());
        cfg.tolerances.insert("equivariance".into(), 0.5);
        cfg.diagnostics.push("non-crossing".into());
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("demo");
        let outcome = run_scenario(&cfg, &out, Pipeline::Full).unwrap();
        assert_eq!(outcome.exit_code, EXIT_OK, "{}", outcome.summary);
        let diag = diagnose(&out).unwrap();
        assert!(diag.matches, "recomputed:\n{}", diag.report.to_csv());
        assert_eq!(diag.exit_code, EXIT_OK);
    }

    #[test]
    fn spectrum_pipeline_writes_energies() {
        let text = r#"
            name = "harmonic-spectrum"
            [grid]
            lower = [-12.0]
            upper = [12.0]
            points = [401]
            boundary = "dirichlet"
            [potential]
            kind = "harmonic"
            omega = 1.0
            [initial_state]
            kind = "eigenstate"
            n = 0
            [evolution]
            method = "crank-nicolson"
            dt = 0.01
            steps = 1
        "#;
        let cfg = parse_config(text).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("spec");
        let outcome = run_scenario(&cfg, &out, Pipeline::Spectrum).unwrap();
        assert_eq!(outcome.exit_code, EXIT_OK);
        let csv = fs::read_to_string(out.join("spectrum.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,energy"));
        let e0: f64 = lines.next().unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert!((e0 - 0.5).abs() < 1e-3, "ground state energy {e0}");
    }

    #[test]
    fn reruns_are_byte_identical() {
        let cfg = demo_config("[trajectories]\ncount = 25\nseed = 9\n");
        let tmp = tempfile::tempdir().unwrap();
        let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
        run_scenario(&cfg, &a, Pipeline::Full).unwrap();
        run_scenario(&cfg, &b, Pipeline::Full).unwrap();
        for rel in ["config.toml", "psi_80.qhdf", "trajectories.csv", "diagnostics.csv"] {
            let x = fs::read(a.join(rel)).unwrap();
            let y = fs::read(b.join(rel)).unwrap();
            assert_eq!(x, y, "{rel} differs between reruns");
        }
    }
}
