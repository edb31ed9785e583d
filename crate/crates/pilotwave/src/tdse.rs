//! Time-dependent Schrödinger solvers and stationary-state machinery.
//!
//! Two propagators:
//!
//! * **split-spectral** (periodic grids): Strang splitting
//!   exp(−iU dt/2ℏ)·F⁻¹ exp(−iℏk² dt/2m) F·exp(−iU dt/2ℏ) — every factor is
//!   exactly unitary, so norm is preserved to roundoff each step.
//! * **crank-nicolson** (dirichlet-zero grids): the Cayley form
//!   (1 + i dt H/2ℏ)ψ' = (1 − i dt H/2ℏ)ψ solved by a tridiagonal sweep. In
//!   2D the step is the unitary factor composition
//!   exp(−iU dt/2ℏ)·Cayley(T_x)·Cayley(T_y)·exp(−iU dt/2ℏ) (axis-wise
//!   splitting; each Cayley factor is itself unitary).
//!
//! `dt` may be negative (reverse evolution); only dt = 0 or non-finite dt is
//! rejected. Eigenpairs come from the dense symmetric interior Hamiltonian;
//! ground states may alternatively be found by imaginary-time contraction.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::field::{ComplexField, RealField};
use crate::grid::{Boundary, Grid};
use crate::spectral::{wavenumbers, Spectral};
use crate::units::UnitSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    SplitSpectral,
    CrankNicolson,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::SplitSpectral => "split-spectral",
            Method::CrankNicolson => "crank-nicolson",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub steps: usize,
    pub method: Method,
    /// Keep every `snapshot_stride`-th step (must divide `steps`).
    pub snapshot_stride: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum TdseError {
    #[error("{method} requires {want} boundaries, grid has {got}")]
    MethodBoundary { method: &'static str, want: &'static str, got: &'static str },
    #[error("dt must be finite and nonzero, got {0}")]
    BadDt(f64),
    #[error("steps must be >= 1")]
    BadSteps,
    #[error("snapshot_stride must be >= 1 and divide steps (stride {stride}, steps {steps})")]
    BadStride { stride: usize, steps: usize },
    #[error("initial state is not normalized: |psi|^2 integrates to {0}")]
    NotNormalized(f64),
    #[error("potential and state live on different grids")]
    GridMismatch,
    #[error("non-finite values detected at step {step}")]
    Blowup { step: usize },
    #[error("eigenpairs require a 1D dirichlet-zero grid")]
    EigenNeedsDirichlet1d,
    #[error("requested {requested} states but the grid supports at most {max} (count/4)")]
    TooManyStates { requested: usize, max: usize },
    #[error("imaginary-time iteration did not converge within {0} steps")]
    NoConvergence(usize),
    #[error("potential contains non-finite samples")]
    BadPotential,
}

/// Evolved wavefunction history: snapshots every `stride` steps, plus the
/// evolution metadata diagnostics need (potential, method, dt).
#[derive(Debug, Clone)]
pub struct WaveTimeline {
    grid: Arc<Grid>,
    units: UnitSystem,
    method: Method,
    potential: RealField,
    dt: f64,
    stride: usize,
    step_indices: Vec<usize>,
    times: Vec<f64>,
    snapshots: Vec<ComplexField>,
}

impl WaveTimeline {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    pub fn units(&self) -> &UnitSystem {
        &self.units
    }
    pub fn method(&self) -> Method {
        self.method
    }
    pub fn potential(&self) -> &RealField {
        &self.potential
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn stride(&self) -> usize {
        self.stride
    }
    /// Time between stored snapshots.
    pub fn dt_snapshot(&self) -> f64 {
        self.dt * self.stride as f64
    }
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }
    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn step_indices(&self) -> &[usize] {
        &self.step_indices
    }
    pub fn snapshot(&self, i: usize) -> &ComplexField {
        &self.snapshots[i]
    }
    pub fn snapshots(&self) -> &[ComplexField] {
        &self.snapshots
    }

    /// Reassemble a timeline from stored snapshots (used by `diagnose`).
    pub fn from_parts(
        units: UnitSystem,
        method: Method,
        potential: RealField,
        dt: f64,
        stride: usize,
        step_indices: Vec<usize>,
        snapshots: Vec<ComplexField>,
    ) -> Result<Self, TdseError> {
        let grid = potential.grid().clone();
        if snapshots.iter().any(|s| s.grid().as_ref() != grid.as_ref()) {
            return Err(TdseError::GridMismatch);
        }
        let times = step_indices.iter().map(|&s| s as f64 * dt).collect();
        Ok(Self { grid, units, method, potential, dt, stride, step_indices, times, snapshots })
    }
}

/// Which discrete kinetic operator a method diagonalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KineticForm {
    /// ℏ²k²/2m multiplier in Fourier space (split-spectral, periodic).
    Spectral,
    /// Three-point stencil with pinned walls (crank-nicolson, dirichlet).
    ThreePoint,
}

impl Method {
    pub fn kinetic_form(&self) -> KineticForm {
        match self {
            Method::SplitSpectral => KineticForm::Spectral,
            Method::CrankNicolson => KineticForm::ThreePoint,
        }
    }
}

/// Apply the discrete Hamiltonian H = T + U in the given kinetic form.
///
/// For the three-point form, wall rows are pinned (output 0), matching the
/// interior operator the Crank–Nicolson solver and eigensolver use.
pub fn apply_hamiltonian(
    psi: &ComplexField,
    potential: &RealField,
    units: &UnitSystem,
    form: KineticForm,
) -> Result<ComplexField, TdseError> {
    let grid = psi.grid();
    if potential.grid().as_ref() != grid.as_ref() {
        return Err(TdseError::GridMismatch);
    }
    let mut out = match form {
        KineticForm::Spectral => {
            if grid.boundary() != Boundary::Periodic {
                return Err(TdseError::MethodBoundary {
                    method: "spectral kinetic form",
                    want: "periodic",
                    got: grid.boundary().as_str(),
                });
            }
            let sp = Spectral::new(grid);
            let ks: Vec<Vec<f64>> = (0..grid.ndim())
                .map(|a| wavenumbers(grid.axis(a).count, grid.spacing(a)))
                .collect();
            let c = units.hbar() * units.hbar() / (2.0 * units.mass());
            let mut data = psi.data().to_vec();
            sp.forward(&mut data);
            match grid.ndim() {
                1 => {
                    for (j, v) in data.iter_mut().enumerate() {
                        *v *= c * ks[0][j] * ks[0][j];
                    }
                }
                _ => {
                    let n1 = grid.axis(1).count;
                    for (f, v) in data.iter_mut().enumerate() {
                        let (i, j) = (f / n1, f % n1);
                        *v *= c * (ks[0][i] * ks[0][i] + ks[1][j] * ks[1][j]);
                    }
                }
            }
            sp.inverse(&mut data);
            data
        }
        KineticForm::ThreePoint => {
            if grid.boundary() != Boundary::DirichletZero {
                return Err(TdseError::MethodBoundary {
                    method: "three-point kinetic form",
                    want: "dirichlet-zero",
                    got: grid.boundary().as_str(),
                });
            }
            let mut acc = vec![Complex64::new(0.0, 0.0); psi.len()];
            for axis in 0..grid.ndim() {
                let c = units.hbar() * units.hbar() / (2.0 * units.mass() * grid.spacing(axis).powi(2));
                kinetic_three_point_axis(grid, psi.data(), axis, c, &mut acc);
            }
            acc
        }
    };
    for (o, (&p, &u)) in out.iter_mut().zip(psi.data().iter().zip(potential.data())) {
        *o += p * u;
    }
    if form == KineticForm::ThreePoint {
        // Pinned walls: H acts on the interior subspace only.
        for i in 0..grid.len() {
            if grid.on_wall(i) {
                out[i] = Complex64::new(0.0, 0.0);
            }
        }
    }
    ComplexField::new(grid.clone(), out).map_err(|_| TdseError::GridMismatch)
}

/// Accumulate c·(2ψ_j − ψ_{j−1} − ψ_{j+1}) along `axis` with zero walls.
fn kinetic_three_point_axis(
    grid: &Grid,
    src: &[Complex64],
    axis: usize,
    c: f64,
    acc: &mut [Complex64],
) {
    let zero = Complex64::new(0.0, 0.0);
    let line = |src: &[Complex64], idx: &mut dyn FnMut(usize) -> usize, n: usize, acc: &mut [Complex64]| {
        for j in 0..n {
            let left = if j > 0 { src[idx(j - 1)] } else { zero };
            let right = if j + 1 < n { src[idx(j + 1)] } else { zero };
            acc[idx(j)] += (src[idx(j)] * 2.0 - left - right) * c;
        }
    };
    match (grid.ndim(), axis) {
        (1, 0) => line(src, &mut |j| j, grid.axis(0).count, acc),
        (2, 1) => {
            let (n0, n1) = (grid.axis(0).count, grid.axis(1).count);
            for i in 0..n0 {
                line(src, &mut |j| i * n1 + j, n1, acc);
            }
        }
        (2, 0) => {
            let (n0, n1) = (grid.axis(0).count, grid.axis(1).count);
            for j in 0..n1 {
                line(src, &mut |i| i * n1 + j, n0, acc);
            }
        }
        _ => unreachable!(),
    }
}

/// ⟨ψ|H|ψ⟩ with the method-consistent discrete Hamiltonian. This is the
/// quantity the propagators conserve (exactly for 1D Crank–Nicolson, to
/// O(dt²) bounded oscillation for split schemes).
pub fn discrete_energy(
    psi: &ComplexField,
    potential: &RealField,
    units: &UnitSystem,
    form: KineticForm,
) -> Result<f64, TdseError> {
    let hpsi = apply_hamiltonian(psi, potential, units, form)?;
    let e = psi.inner(&hpsi).map_err(|_| TdseError::GridMismatch)?;
    Ok(e.re)
}

// ---------------------------------------------------------------------------
// Tridiagonal machinery
// ---------------------------------------------------------------------------

/// Precomputed LU sweep for a symmetric tridiagonal system with constant
/// off-diagonal `off` and fixed diagonal: (diag_i)x_i + off·(x_{i−1}+x_{i+1}) = r_i.
struct TridiagLu {
    off: Complex64,
    /// c'_i = off / denom_i (forward-eliminated super-diagonal).
    cprime: Vec<Complex64>,
    inv_denom: Vec<Complex64>,
}

impl TridiagLu {
    fn new(diag: &[Complex64], off: Complex64) -> Self {
        let n = diag.len();
        let mut cprime = vec![Complex64::default(); n];
        let mut inv_denom = vec![Complex64::default(); n];
        let mut denom = diag[0];
        inv_denom[0] = denom.finv();
        cprime[0] = off * inv_denom[0];
        for i in 1..n {
            denom = diag[i] - off * cprime[i - 1];
            inv_denom[i] = denom.finv();
            cprime[i] = off * inv_denom[i];
        }
        Self { off, cprime, inv_denom }
    }

    /// Solve in place; `rhs` holds the solution afterwards.
    fn solve(&self, rhs: &mut [Complex64]) {
        let n = rhs.len();
        debug_assert_eq!(n, self.cprime.len());
        rhs[0] *= self.inv_denom[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.off * rhs[i - 1]) * self.inv_denom[i];
        }
        for i in (0..n - 1).rev() {
            let next = rhs[i + 1];
            rhs[i] -= self.cprime[i] * next;
        }
    }
}

/// One Cayley (Crank–Nicolson) sweep along a line for the operator with
/// interior diagonal `diag_h` and off-diagonal `off_h` (both real, in energy
/// units): solves (1 + iδH)ψ' = (1 − iδH)ψ on the line interior.
struct CayleyLine {
    delta: f64,
    diag_h: Vec<f64>,
    off_h: f64,
    lu: TridiagLu,
}

impl CayleyLine {
    /// `diag_h` is the interior Hamiltonian diagonal, `off_h` the constant
    /// off-diagonal, `delta` = dt/2ℏ.
    fn new(diag_h: Vec<f64>, off_h: f64, delta: f64) -> Self {
        let adiag: Vec<Complex64> =
            diag_h.iter().map(|&d| Complex64::new(1.0, delta * d)).collect();
        let aoff = Complex64::new(0.0, delta * off_h);
        let lu = TridiagLu::new(&adiag, aoff);
        Self { delta, diag_h, off_h, lu }
    }

    /// Apply to one full line including wall points (walls stay zero).
    /// `line` has length interior+2; scratch must match the interior length.
    fn step(&self, line: &mut [Complex64], scratch: &mut [Complex64]) {
        let n = line.len();
        let m = n - 2;
        debug_assert_eq!(m, self.diag_h.len());
        // rhs = (1 − iδH)ψ over the interior (wall neighbors are zero).
        for k in 0..m {
            let psi = line[k + 1];
            let left = if k > 0 { line[k] } else { Complex64::default() };
            let right = if k + 2 < n { line[k + 2] } else { Complex64::default() };
            let left = if k == 0 { Complex64::default() } else { left };
            let hpsi = self.diag_h[k] * psi + self.off_h * (left + right);
            scratch[k] = psi - Complex64::new(0.0, self.delta) * hpsi;
        }
        self.lu.solve(scratch);
        line[0] = Complex64::default();
        line[n - 1] = Complex64::default();
        line[1..n - 1].copy_from_slice(scratch);
    }
}

// ---------------------------------------------------------------------------
// evolve
// ---------------------------------------------------------------------------

/// Propagate `psi0` under `potential` for `cfg.steps` steps of `cfg.dt`.
pub fn evolve(
    psi0: &ComplexField,
    potential: &RealField,
    units: &UnitSystem,
    cfg: &EvolutionConfig,
) -> Result<WaveTimeline, TdseError> {
    let grid = psi0.grid().clone();
    if potential.grid().as_ref() != grid.as_ref() {
        return Err(TdseError::GridMismatch);
    }
    if !potential.is_finite() {
        return Err(TdseError::BadPotential);
    }
    if !(cfg.dt.is_finite() && cfg.dt != 0.0) {
        return Err(TdseError::BadDt(cfg.dt));
    }
    if cfg.steps == 0 {
        return Err(TdseError::BadSteps);
    }
    if cfg.snapshot_stride == 0 || cfg.steps % cfg.snapshot_stride != 0 {
        return Err(TdseError::BadStride { stride: cfg.snapshot_stride, steps: cfg.steps });
    }
    match (cfg.method, grid.boundary()) {
        (Method::SplitSpectral, Boundary::Periodic) => {}
        (Method::CrankNicolson, Boundary::DirichletZero) => {}
        (m, b) => {
            return Err(TdseError::MethodBoundary {
                method: m.as_str(),
                want: match m {
                    Method::SplitSpectral => "periodic",
                    Method::CrankNicolson => "dirichlet-zero",
                },
                got: b.as_str(),
            })
        }
    }
    let norm = psi0.norm_sqr();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
        return Err(TdseError::NotNormalized(norm));
    }

    let mut psi = psi0.clone();
    if cfg.method == Method::CrankNicolson {
        // Pin the walls; physical dirichlet states are already ~0 there.
        for i in 0..grid.len() {
            if grid.on_wall(i) {
                psi.data_mut()[i] = Complex64::default();
            }
        }
    }

    let n_snapshots = cfg.steps / cfg.snapshot_stride + 1;
    let mut snapshots = Vec::with_capacity(n_snapshots);
    let mut step_indices = Vec::with_capacity(n_snapshots);
    snapshots.push(psi.clone());
    step_indices.push(0);

    let mut stepper = make_stepper(&grid, potential, units, cfg)?;
    for step in 1..=cfg.steps {
        stepper.advance(psi.data_mut());
        if step % cfg.snapshot_stride == 0 {
            if !psi.is_finite() {
                return Err(TdseError::Blowup { step });
            }
            snapshots.push(psi.clone());
            step_indices.push(step);
        }
    }

    let times = step_indices.iter().map(|&s| s as f64 * cfg.dt).collect();
    Ok(WaveTimeline {
        grid,
        units: *units,
        method: cfg.method,
        potential: potential.clone(),
        dt: cfg.dt,
        stride: cfg.snapshot_stride,
        step_indices,
        times,
        snapshots,
    })
}

trait Stepper {
    fn advance(&mut self, psi: &mut [Complex64]);
}

fn make_stepper(
    grid: &Arc<Grid>,
    potential: &RealField,
    units: &UnitSystem,
    cfg: &EvolutionConfig,
) -> Result<Box<dyn Stepper>, TdseError> {
    match cfg.method {
        Method::SplitSpectral => Ok(Box::new(SplitSpectralStepper::new(grid, potential, units, cfg.dt))),
        Method::CrankNicolson => Ok(Box::new(CrankNicolsonStepper::new(grid, potential, units, cfg.dt))),
    }
}

struct SplitSpectralStepper {
    spectral: Spectral,
    vhalf: Vec<Complex64>,
    kinetic: Vec<Complex64>,
}

impl SplitSpectralStepper {
    fn new(grid: &Arc<Grid>, potential: &RealField, units: &UnitSystem, dt: f64) -> Self {
        let vhalf: Vec<Complex64> = potential
            .data()
            .iter()
            .map(|&u| Complex64::from_polar(1.0, -u * dt / (2.0 * units.hbar())))
            .collect();
        let ks: Vec<Vec<f64>> = (0..grid.ndim())
            .map(|a| wavenumbers(grid.axis(a).count, grid.spacing(a)))
            .collect();
        let c = units.hbar() * dt / (2.0 * units.mass());
        let kinetic = match grid.ndim() {
            1 => ks[0].iter().map(|&k| Complex64::from_polar(1.0, -c * k * k)).collect(),
            _ => {
                let n1 = grid.axis(1).count;
                (0..grid.len())
                    .map(|f| {
                        let (i, j) = (f / n1, f % n1);
                        Complex64::from_polar(1.0, -c * (ks[0][i] * ks[0][i] + ks[1][j] * ks[1][j]))
                    })
                    .collect()
            }
        };
        Self { spectral: Spectral::new(grid), vhalf, kinetic }
    }
}

impl Stepper for SplitSpectralStepper {
    fn advance(&mut self, psi: &mut [Complex64]) {
        for (p, v) in psi.iter_mut().zip(&self.vhalf) {
            *p *= v;
        }
        self.spectral.forward(psi);
        for (p, k) in psi.iter_mut().zip(&self.kinetic) {
            *p *= k;
        }
        self.spectral.inverse(psi);
        for (p, v) in psi.iter_mut().zip(&self.vhalf) {
            *p *= v;
        }
    }
}

enum CrankNicolsonStepper {
    /// 1D: U inside the Cayley tridiagonal solve.
    Line { solver: CayleyLine, scratch: Vec<Complex64> },
    /// 2D: exp(−iU dt/2ℏ)·Cayley(T_x)·Cayley(T_y)·exp(−iU dt/2ℏ).
    Plane {
        n0: usize,
        n1: usize,
        vhalf: Vec<Complex64>,
        solver_x: CayleyLine,
        solver_y: CayleyLine,
    },
}

impl CrankNicolsonStepper {
    fn new(grid: &Arc<Grid>, potential: &RealField, units: &UnitSystem, dt: f64) -> Self {
        let delta = dt / (2.0 * units.hbar());
        let kin = |axis: usize| units.hbar() * units.hbar() / (units.mass() * grid.spacing(axis).powi(2));
        match grid.ndim() {
            1 => {
                let n = grid.axis(0).count;
                let c = kin(0);
                let diag: Vec<f64> =
                    (1..n - 1).map(|j| c + potential.data()[j]).collect();
                let solver = CayleyLine::new(diag, -0.5 * c, delta);
                let scratch = vec![Complex64::default(); n - 2];
                CrankNicolsonStepper::Line { solver, scratch }
            }
            _ => {
                let (n0, n1) = (grid.axis(0).count, grid.axis(1).count);
                let vhalf = potential
                    .data()
                    .iter()
                    .map(|&u| Complex64::from_polar(1.0, -u * dt / (2.0 * units.hbar())))
                    .collect();
                let cx = kin(0);
                let cy = kin(1);
                let solver_x = CayleyLine::new(vec![cx; n0 - 2], -0.5 * cx, delta);
                let solver_y = CayleyLine::new(vec![cy; n1 - 2], -0.5 * cy, delta);
                CrankNicolsonStepper::Plane { n0, n1, vhalf, solver_x, solver_y }
            }
        }
    }
}

impl Stepper for CrankNicolsonStepper {
    fn advance(&mut self, psi: &mut [Complex64]) {
        match self {
            CrankNicolsonStepper::Line { solver, scratch } => solver.step(psi, scratch),
            CrankNicolsonStepper::Plane { n0, n1, vhalf, solver_x, solver_y } => {
                let (n0, n1) = (*n0, *n1);
                for (p, v) in psi.iter_mut().zip(vhalf.iter()) {
                    *p *= v;
                }
                // y-lines are contiguous rows.
                psi.par_chunks_exact_mut(n1).for_each_init(
                    || vec![Complex64::default(); n1 - 2],
                    |scratch, row| solver_y.step(row, scratch),
                );
                // x-lines via transpose.
                let mut t = vec![Complex64::default(); n0 * n1];
                for i in 0..n0 {
                    for j in 0..n1 {
                        t[j * n0 + i] = psi[i * n1 + j];
                    }
                }
                t.par_chunks_exact_mut(n0).for_each_init(
                    || vec![Complex64::default(); n0 - 2],
                    |scratch, col| solver_x.step(col, scratch),
                );
                for i in 0..n0 {
                    for j in 0..n1 {
                        psi[i * n1 + j] = t[j * n0 + i];
                    }
                }
                for (p, v) in psi.iter_mut().zip(vhalf.iter()) {
                    *p *= v;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Eigenpairs
// ---------------------------------------------------------------------------

/// The lowest `n_states` eigenpairs of H = −(ℏ²/2m)d²/dx² + U on a 1D
/// dirichlet grid, via dense diagonalization of the interior three-point
/// Hamiltonian.
///
/// States are normalized to ∫|φ|² dV = 1 and sign-fixed: positive spatial
/// mean, falling back (for odd states whose mean vanishes) to a positive
/// first significant sample.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub energies: Vec<f64>,
    pub states: Vec<RealField>,
    pub units: UnitSystem,
}

pub fn solve_eigenpairs(
    potential: &RealField,
    units: &UnitSystem,
    n_states: usize,
) -> Result<EigenSolution, TdseError> {
    let grid = potential.grid().clone();
    if grid.ndim() != 1 || grid.boundary() != Boundary::DirichletZero {
        return Err(TdseError::EigenNeedsDirichlet1d);
    }
    if !potential.is_finite() {
        return Err(TdseError::BadPotential);
    }
    let n = grid.axis(0).count;
    let max = n / 4;
    if n_states == 0 || n_states > max {
        return Err(TdseError::TooManyStates { requested: n_states, max });
    }
    let h = grid.spacing(0);
    let c = units.hbar() * units.hbar() / (2.0 * units.mass() * h * h);
    let m = n - 2;
    let mat = nalgebra::DMatrix::from_fn(m, m, |r, col| {
        if r == col {
            2.0 * c + potential.data()[r + 1]
        } else if r.abs_diff(col) == 1 {
            -c
        } else {
            0.0
        }
    });
    let eig = nalgebra::SymmetricEigen::new(mat);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let inv_sqrt_h = 1.0 / h.sqrt();
    let mut energies = Vec::with_capacity(n_states);
    let mut states = Vec::with_capacity(n_states);
    for &k in order.iter().take(n_states) {
        energies.push(eig.eigenvalues[k]);
        let col = eig.eigenvectors.column(k);
        let mut data = vec![0.0; n];
        for j in 0..m {
            data[j + 1] = col[j] * inv_sqrt_h;
        }
        fix_sign(&mut data, h);
        states.push(RealField::new(grid.clone(), data).expect("same grid"));
    }
    Ok(EigenSolution { energies, states, units: *units })
}

/// Sign convention: positive spatial mean; for states whose mean is
/// numerically zero (odd states), positive first significant sample.
fn fix_sign(data: &mut [f64], h: f64) {
    let mean: f64 = data.iter().sum::<f64>() * h;
    let max = data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let flip = if mean.abs() > 1e-8 {
        mean < 0.0
    } else {
        match data.iter().find(|v| v.abs() > 1e-3 * max) {
            Some(&v) => v < 0.0,
            None => false,
        }
    };
    if flip {
        for v in data.iter_mut() {
            *v = -*v;
        }
    }
}

// ---------------------------------------------------------------------------
// Imaginary time
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct ImaginaryTimeOpts {
    /// Imaginary-time step δτ.
    pub dtau: f64,
    /// Convergence threshold on the Rayleigh-quotient change per step.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for ImaginaryTimeOpts {
    fn default() -> Self {
        Self { dtau: 0.02, tol: 1e-12, max_steps: 200_000 }
    }
}

/// Result of the imaginary-time contraction.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: RealField,
    pub iterations: usize,
}

/// Ground state by imaginary-time contraction: substitute t → −iτ,
/// renormalize each step, and stop once the Rayleigh quotient of the true
/// discrete Hamiltonian changes by less than `tol` between steps.
///
/// Periodic grids use the split-spectral imaginary-time factors (exact
/// kinetic damping); dirichlet grids use the backward-Euler contraction
/// (1 + δτ·T_axis/ℏ)⁻¹ per axis with exp(−δτ·U/ℏ), which damps every mode
/// monotonically. The returned energy is always the Rayleigh quotient of the
/// full discrete Hamiltonian, so the splitting bias enters the energy only
/// at second order in the state error.
///
/// `initial` seeds the iteration; by default a broad positive Gaussian is
/// used, which overlaps any nodeless ground state.
pub fn imaginary_time_ground_state(
    potential: &RealField,
    units: &UnitSystem,
    opts: &ImaginaryTimeOpts,
    initial: Option<&RealField>,
) -> Result<GroundState, TdseError> {
    let grid = potential.grid().clone();
    if !potential.is_finite() {
        return Err(TdseError::BadPotential);
    }
    if !(opts.dtau.is_finite() && opts.dtau > 0.0) {
        return Err(TdseError::BadDt(opts.dtau));
    }
    let seed = match initial {
        Some(f) => {
            if f.grid().as_ref() != grid.as_ref() {
                return Err(TdseError::GridMismatch);
            }
            ComplexField::from_real(f)
        }
        None => {
            // Positive Gaussian seed overlapping any nodeless ground state.
            let widths: Vec<f64> = (0..grid.ndim())
                .map(|a| (grid.axis(a).upper - grid.axis(a).lower) / 8.0)
                .collect();
            let centers: Vec<f64> = (0..grid.ndim())
                .map(|a| 0.5 * (grid.axis(a).upper + grid.axis(a).lower))
                .collect();
            ComplexField::from_fn(grid.clone(), |p| {
                let expo: f64 =
                    (0..grid.ndim()).map(|a| -((p[a] - centers[a]) / widths[a]).powi(2)).sum();
                Complex64::new(expo.exp(), 0.0)
            })
        }
    };
    let mut psi = seed.normalized().map_err(|_| TdseError::Blowup { step: 0 })?;

    let form = match grid.boundary() {
        Boundary::Periodic => KineticForm::Spectral,
        Boundary::DirichletZero => KineticForm::ThreePoint,
    };

    enum Contraction {
        Spectral { spectral: Spectral, vhalf: Vec<f64>, kinetic: Vec<f64> },
        BackwardEuler { vfull: Vec<f64>, lus: Vec<TridiagLu> },
    }

    let contraction = match grid.boundary() {
        Boundary::Periodic => {
            let vhalf: Vec<f64> = potential
                .data()
                .iter()
                .map(|&u| (-u * opts.dtau / (2.0 * units.hbar())).exp())
                .collect();
            let ks: Vec<Vec<f64>> = (0..grid.ndim())
                .map(|a| wavenumbers(grid.axis(a).count, grid.spacing(a)))
                .collect();
            let c = units.hbar() * opts.dtau / (2.0 * units.mass());
            let kinetic: Vec<f64> = match grid.ndim() {
                1 => ks[0].iter().map(|&k| (-c * k * k).exp()).collect(),
                _ => {
                    let n1 = grid.axis(1).count;
                    (0..grid.len())
                        .map(|f| {
                            let (i, j) = (f / n1, f % n1);
                            (-c * (ks[0][i] * ks[0][i] + ks[1][j] * ks[1][j])).exp()
                        })
                        .collect()
                }
            };
            Contraction::Spectral { spectral: Spectral::new(&grid), vhalf, kinetic }
        }
        Boundary::DirichletZero => {
            let vfull: Vec<f64> = potential
                .data()
                .iter()
                .map(|&u| (-u * opts.dtau / units.hbar()).exp())
                .collect();
            let lus = (0..grid.ndim())
                .map(|axis| {
                    let n = grid.axis(axis).count;
                    let c = units.hbar() * units.hbar()
                        / (units.mass() * grid.spacing(axis).powi(2));
                    let s = opts.dtau / units.hbar();
                    let diag =
                        vec![Complex64::new(1.0 + s * c, 0.0); n - 2];
                    TridiagLu::new(&diag, Complex64::new(-0.5 * s * c, 0.0))
                })
                .collect();
            Contraction::BackwardEuler { vfull, lus }
        }
    };

    let mut energy = discrete_energy(&psi, potential, units, form)?;
    for step in 0..opts.max_steps {
        match &contraction {
            Contraction::Spectral { spectral, vhalf, kinetic } => {
                let data = psi.data_mut();
                for (p, v) in data.iter_mut().zip(vhalf) {
                    *p *= v;
                }
                spectral.forward(data);
                for (p, k) in data.iter_mut().zip(kinetic) {
                    *p *= k;
                }
                spectral.inverse(data);
                for (p, v) in data.iter_mut().zip(vhalf) {
                    *p *= v;
                }
            }
            Contraction::BackwardEuler { vfull, lus } => {
                let data = psi.data_mut();
                for (p, v) in data.iter_mut().zip(vfull) {
                    *p *= v;
                }
                backward_euler_sweep(&grid, data, lus);
            }
        }
        psi = psi.normalized().map_err(|_| TdseError::Blowup { step })?;
        let e = discrete_energy(&psi, potential, units, form)?;
        if !e.is_finite() {
            return Err(TdseError::Blowup { step });
        }
        let delta = (e - energy).abs();
        energy = e;
        if delta < opts.tol {
            let mut data: Vec<f64> = psi.data().iter().map(|v| v.re).collect();
            fix_sign(&mut data, grid.cell_volume());
            let state = RealField::new(grid, data).expect("same grid");
            // Imaginary-time iterates stay real; renormalize the real part.
            let nrm = state.zip_with(&state, |a, b| a * b).unwrap().integrate().sqrt();
            return Ok(GroundState {
                energy,
                state: state.map(|v| v / nrm),
                iterations: step + 1,
            });
        }
    }
    Err(TdseError::NoConvergence(opts.max_steps))
}

fn backward_euler_sweep(grid: &Grid, data: &mut [Complex64], lus: &[TridiagLu]) {
    match grid.ndim() {
        1 => {
            let n = grid.axis(0).count;
            let mut interior: Vec<Complex64> = data[1..n - 1].to_vec();
            lus[0].solve(&mut interior);
            data[0] = Complex64::default();
            data[n - 1] = Complex64::default();
            data[1..n - 1].copy_from_slice(&interior);
        }
        _ => {
            let (n0, n1) = (grid.axis(0).count, grid.axis(1).count);
            // y-lines.
            for row in data.chunks_exact_mut(n1) {
                let mut interior: Vec<Complex64> = row[1..n1 - 1].to_vec();
                lus[1].solve(&mut interior);
                row[0] = Complex64::default();
                row[n1 - 1] = Complex64::default();
                row[1..n1 - 1].copy_from_slice(&interior);
            }
            // x-lines.
            let mut line = vec![Complex64::default(); n0];
            for j in 0..n1 {
                for i in 0..n0 {
                    line[i] = data[i * n1 + j];
                }
                let mut interior: Vec<Complex64> = line[1..n0 - 1].to_vec();
                lus[0].solve(&mut interior);
                data[j] = Complex64::default();
                data[(n0 - 1) * n1 + j] = Complex64::default();
                for i in 1..n0 - 1 {
                    data[i * n1 + j] = interior[i - 1];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{eval_potential, PotentialSpec};
    use crate::states;
    use std::f64::consts::PI;

    fn units() -> UnitSystem {
        UnitSystem::natural()
    }

    #[test]
    fn plane_wave_free_step_is_global_phase() {
        // p = 2 on [−π, π): exact lattice momentum; one split-spectral step
        // multiplies by exp(−i·(p²/2m)·dt/ℏ) = exp(−0.02 i).
        let g = Arc::new(Grid::line(-PI, PI, 16, Boundary::Periodic).unwrap());
        let u = units();
        let (psi0, p) = states::plane_wave(&g, &u, &[2.0]).unwrap();
        assert!((p[0] - 2.0).abs() < 1e-12);
        let free = eval_potential(&PotentialSpec::Free, &g, &u).unwrap();
        let cfg = EvolutionConfig {
            dt: 0.01,
            steps: 1,
            method: Method::SplitSpectral,
            snapshot_stride: 1,
        };
        let tl = evolve(&psi0, &free, &u, &cfg).unwrap();
        let expect = Complex64::from_polar(1.0, -0.02);
        for (a, b) in tl.snapshot(1).data().iter().zip(psi0.data()) {
            let ratio = a / b;
            assert!((ratio - expect).norm() < 1e-10, "phase ratio {ratio}");
            assert!((a.norm() - b.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn norm_preserved_each_step_both_methods() {
        let u = units();
        // split-spectral, periodic, harmonic
        let gp = Arc::new(Grid::line(-8.0, 8.0, 128, Boundary::Periodic).unwrap());
        let up = eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &gp, &u).unwrap();
        let psi = states::gaussian(&gp, &u, &[1.0], &[0.7], &[0.0]).unwrap();
        let cfg = EvolutionConfig {
            dt: 0.005,
            steps: 50,
            method: Method::SplitSpectral,
            snapshot_stride: 1,
        };
        let tl = evolve(&psi, &up, &u, &cfg).unwrap();
        for s in tl.snapshots() {
            assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        }
        // crank-nicolson, dirichlet
        let gd = Arc::new(Grid::line(-8.0, 8.0, 129, Boundary::DirichletZero).unwrap());
        let ud = eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &gd, &u).unwrap();
        let psid = states::gaussian(&gd, &u, &[1.0], &[0.7], &[0.0]).unwrap();
        let cfgd = EvolutionConfig { method: Method::CrankNicolson, ..cfg };
        let tld = evolve(&psid, &ud, &u, &cfgd).unwrap();
        for s in tld.snapshots() {
            assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn crank_nicolson_time_reversal() {
        let u = units();
        let g = Arc::new(Grid::line(-8.0, 8.0, 129, Boundary::DirichletZero).unwrap());
        let pot = eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &g, &u).unwrap();
        let psi0 = states::gaussian(&g, &u, &[1.0], &[0.7], &[0.3]).unwrap();
        let fwd = EvolutionConfig {
            dt: 0.004,
            steps: 100,
            method: Method::CrankNicolson,
            snapshot_stride: 100,
        };
        let tl = evolve(&psi0, &pot, &u, &fwd).unwrap();
        let back = EvolutionConfig { dt: -0.004, ..fwd };
        let tl2 = evolve(tl.snapshot(1), &pot, &u, &back).unwrap();
        let mut err2 = 0.0;
        for (i, (a, b)) in tl2.snapshot(1).data().iter().zip(psi0.data()).enumerate() {
            err2 += (a - b).norm_sqr() * g.quad_weight(i);
        }
        assert!(err2.sqrt() < 1e-8, "time-reversal L2 error {}", err2.sqrt());
    }

    #[test]
    fn crank_nicolson_conserves_discrete_energy_exactly() {
        let u = units();
        let g = Arc::new(Grid::line(-8.0, 8.0, 257, Boundary::DirichletZero).unwrap());
        let pot = eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &g, &u).unwrap();
        let psi0 = states::gaussian(&g, &u, &[1.5], &[0.7], &[0.0]).unwrap();
        let cfg = EvolutionConfig {
            dt: 0.003,
            steps: 200,
            method: Method::CrankNicolson,
            snapshot_stride: 50,
        };
        let tl = evolve(&psi0, &pot, &u, &cfg).unwrap();
        let e0 = discrete_energy(tl.snapshot(0), &pot, &u, KineticForm::ThreePoint).unwrap();
        for s in tl.snapshots() {
            let e = discrete_energy(s, &pot, &u, KineticForm::ThreePoint).unwrap();
            assert!((e - e0).abs() < 1e-10, "CN energy drift {}", (e - e0).abs());
        }
    }

    #[test]
    fn eigenpairs_box_and_harmonic() {
        let u = units();
        // Box on [0,1]: E_n = n²π²/2.
        let gb = Arc::new(Grid::line(0.0, 1.0, 513, Boundary::DirichletZero).unwrap());
        let ub = eval_potential(&PotentialSpec::BoxWell, &gb, &u).unwrap();
        let sol = solve_eigenpairs(&ub, &u, 3).unwrap();
        for (n, &e) in sol.energies.iter().enumerate() {
            let exact = ((n + 1) as f64 * PI).powi(2) / 2.0;
            assert!((e - exact).abs() < 1e-4 * exact + 1e-6, "box E{n}: {e} vs {exact}");
        }
        // Harmonic on [−8,8], 512 points: E_n = n + 1/2 within 1e−3.
        let gh = Arc::new(Grid::line(-8.0, 8.0, 512, Boundary::DirichletZero).unwrap());
        let uh = eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &gh, &u).unwrap();
        let sol = solve_eigenpairs(&uh, &u, 4).unwrap();
        for (n, &e) in sol.energies.iter().enumerate() {
            assert!((e - (n as f64 + 0.5)).abs() < 1e-3, "harmonic E{n} = {e}");
        }
        // Orthonormality and residuals.
        for (i, a) in sol.states.iter().enumerate() {
            for (j, b) in sol.states.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = a.zip_with(b, |x, y| x * y).unwrap().integrate();
                assert!((got - want).abs() < 1e-8, "gram[{i}{j}] = {got}");
            }
            let phi = ComplexField::from_real(a);
            let hphi = apply_hamiltonian(&phi, &uh, &u, KineticForm::ThreePoint).unwrap();
            let mut r2 = 0.0;
            for (k, (hv, pv)) in hphi.data().iter().zip(phi.data()).enumerate() {
                r2 += (hv - pv * sol.energies[i]).norm_sqr() * gh.quad_weight(k);
            }
            let bound = 1e-6 * sol.energies[i].abs() + 1e-9;
            assert!(r2.sqrt() < bound, "residual {} vs {bound}", r2.sqrt());
        }
        // Sign convention: ground state positive mean, excited deterministic.
        assert!(sol.states[0].data().iter().sum::<f64>() > 0.0);
        let first_sig = sol.states[1]
            .data()
            .iter()
            .find(|v| v.abs() > 1e-3 * sol.states[1].max_abs())
            .copied()
            .unwrap();
        assert!(first_sig > 0.0);
    }

    #[test]
    fn eigen_rejects_bad_requests() {
        let u = units();
        let g = Arc::new(Grid::line(0.0, 1.0, 64, Boundary::DirichletZero).unwrap());
        let pot = eval_potential(&PotentialSpec::BoxWell, &g, &u).unwrap();
        assert!(matches!(
            solve_eigenpairs(&pot, &u, 17),
            Err(TdseError::TooManyStates { requested: 17, max: 16 })
        ));
        let gp = Arc::new(Grid::line(0.0, 1.0, 64, Boundary::Periodic).unwrap());
        let potp = eval_potential(&PotentialSpec::BoxWell, &gp, &u).unwrap();
        assert_eq!(solve_eigenpairs(&potp, &u, 2).unwrap_err(), TdseError::EigenNeedsDirichlet1d);
    }

    #[test]
    fn evolved_eigenstate_is_stationary() {
        let u = units();
        let g = Arc::new(Grid::line(-8.0, 8.0, 257, Boundary::DirichletZero).unwrap());
        let pot = eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &g, &u).unwrap();
        let sol = solve_eigenpairs(&pot, &u, 1).unwrap();
        let psi0 = ComplexField::from_real(&sol.states[0]);
        let cfg = EvolutionConfig {
            dt: 0.005,
            steps: 100,
            method: Method::CrankNicolson,
            snapshot_stride: 100,
        };
        let tl = evolve(&psi0, &pot, &u, &cfg).unwrap();
        let d0 = tl.snapshot(0).density();
        let d1 = tl.snapshot(1).density();
        for (a, b) in d0.data().iter().zip(d1.data()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn imaginary_time_harmonic_ground_state() {
        let u = units();
        // dirichlet backward-Euler route
        let gd = Arc::new(Grid::line(-8.0, 8.0, 257, Boundary::DirichletZero).unwrap());
        let pd = eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &gd, &u).unwrap();
        let gs =
            imaginary_time_ground_state(&pd, &u, &ImaginaryTimeOpts::default(), None).unwrap();
        assert!((gs.energy - 0.5).abs() < 1e-3, "dirichlet imaginary-time E0 = {}", gs.energy);
        let phi = &gs.state;
        assert!((phi.zip_with(phi, |a, b| a * b).unwrap().integrate() - 1.0).abs() < 1e-9);
        // matches the dense eigensolver state up to the O(δτ) splitting bias
        let sol = solve_eigenpairs(&pd, &u, 1).unwrap();
        let overlap = phi.zip_with(&sol.states[0], |a, b| a * b).unwrap().integrate();
        assert!(overlap > 1.0 - 1e-5, "overlap {overlap}");
        // periodic split-spectral route
        let gp = Arc::new(Grid::line(-8.0, 8.0, 128, Boundary::Periodic).unwrap());
        let pp = eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &gp, &u).unwrap();
        let gsp =
            imaginary_time_ground_state(&pp, &u, &ImaginaryTimeOpts::default(), None).unwrap();
        assert!((gsp.energy - 0.5).abs() < 1e-4, "periodic imaginary-time E0 = {}", gsp.energy);
    }

    #[test]
    fn imaginary_time_fixed_point_converges_immediately() {
        let u = units();
        let gd = Arc::new(Grid::line(-8.0, 8.0, 257, Boundary::DirichletZero).unwrap());
        let pd = eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &gd, &u).unwrap();
        let sol = solve_eigenpairs(&pd, &u, 1).unwrap();
        let opts = ImaginaryTimeOpts { dtau: 0.02, tol: 1e-6, max_steps: 100 };
        let gs = imaginary_time_ground_state(&pd, &u, &opts, Some(&sol.states[0])).unwrap();
        assert!(gs.iterations <= 2, "started at the ground state, took {}", gs.iterations);
        assert!((gs.energy - sol.energies[0]).abs() < 1e-6);
    }

    #[test]
    fn error_paths() {
        let u = units();
        let g = Arc::new(Grid::line(-8.0, 8.0, 64, Boundary::Periodic).unwrap());
        let pot = eval_potential(&PotentialSpec::Free, &g, &u).unwrap();
        let psi = states::gaussian(&g, &u, &[0.0], &[1.0], &[0.0]).unwrap();
        let base = EvolutionConfig {
            dt: 0.01,
            steps: 10,
            method: Method::SplitSpectral,
            snapshot_stride: 1,
        };
        // method/boundary mismatch
        let bad = EvolutionConfig { method: Method::CrankNicolson, ..base };
        assert!(matches!(evolve(&psi, &pot, &u, &bad), Err(TdseError::MethodBoundary { .. })));
        // dt = 0
        assert!(matches!(
            evolve(&psi, &pot, &u, &EvolutionConfig { dt: 0.0, ..base }),
            Err(TdseError::BadDt(_))
        ));
        // stride must divide steps
        assert!(matches!(
            evolve(&psi, &pot, &u, &EvolutionConfig { snapshot_stride: 3, ..base }),
            Err(TdseError::BadStride { .. })
        ));
        // non-normalized input
        let mut big = psi.clone();
        for v in big.data_mut() {
            *v *= 2.0;
        }
        assert!(matches!(evolve(&big, &pot, &u, &base), Err(TdseError::NotNormalized(_))));
        // NaN potential detected as blowup
        let mut nanpot = pot.clone();
        nanpot.data_mut()[3] = f64::NAN;
        assert!(matches!(evolve(&psi, &nanpot, &u, &base), Err(TdseError::BadPotential)));
    }
}
