//! The pilot-wave engine: quantum potential, guidance velocity field,
//! initial-condition sampling, and trajectory-ensemble integration.
//!
//! Velocities are always computed from the gauge-smooth quotient
//! v = (ℏ/m)·Im(ψ*∇ψ)/|ψ|², never from the wrapped phase. Node safety has
//! two layers: the quotient floors |ψ|² at δ_node·max, and trajectory steps
//! that would cross a masked cell are retried once with halved substeps.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::field::{ComplexField, NodeMask, RealField};
use crate::grid::{Boundary, Grid};
use crate::ops;
use crate::rng::{named_stream, STREAM_SAMPLING};
use crate::tdse::WaveTimeline;
use crate::units::UnitSystem;

#[derive(Debug, Error, PartialEq)]
pub enum BohmError {
    #[error("amplitude must be nonnegative (min sample {0})")]
    NegativeAmplitude(f64),
    #[error("snapshot {idx} has no centered time neighbors (timeline length {len})")]
    BoundarySnapshot { idx: usize, len: usize },
    #[error("phase anchor point is node-masked")]
    AnchorMasked,
    #[error("sampling density is not normalizable: integral = {0}")]
    NonNormalizable(f64),
    #[error("density contains negative samples beyond roundoff (min {0})")]
    NegativeDensity(f64),
    #[error("initial position {index} lies outside the grid bounds")]
    PositionOutOfBounds { index: usize },
    #[error("timeline needs at least {want} snapshots, has {got}")]
    TooFewSnapshots { want: usize, got: usize },
    #[error("substeps must be >= 1")]
    BadSubsteps,
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("histogram needs at least 2 bins per axis")]
    BadBins,
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("ordering check requires a 1D ensemble")]
    OrderingNeeds1d,
}

// ---------------------------------------------------------------------------
// Quantum potential
// ---------------------------------------------------------------------------

/// Pointwise energy field (the quantum potential) with its node mask.
/// Masked points carry no value (stored as 0).
#[derive(Debug, Clone)]
pub struct QField {
    pub values: RealField,
    pub mask: NodeMask,
}

/// Q = −(ℏ²/2m)·ΔA/A at unmasked points.
pub fn quantum_potential(
    amplitude: &RealField,
    mask: &NodeMask,
    units: &UnitSystem,
) -> Result<QField, BohmError> {
    let min = amplitude.data().iter().cloned().fold(f64::MAX, f64::min);
    if min < -1e-12 * amplitude.max_abs() {
        return Err(BohmError::NegativeAmplitude(min));
    }
    if mask.grid().as_ref() != amplitude.grid().as_ref() {
        return Err(BohmError::GridMismatch);
    }
    let lap = ops::laplacian(amplitude);
    let c = -units.hbar() * units.hbar() / (2.0 * units.mass());
    let data = amplitude
        .data()
        .iter()
        .zip(lap.data())
        .enumerate()
        .map(|(i, (&a, &d))| if mask.is_masked(i) { 0.0 } else { c * d / a })
        .collect();
    Ok(QField {
        values: RealField::new(amplitude.grid().clone(), data).expect("same grid"),
        mask: mask.clone(),
    })
}

/// ∂S/∂t per grid point via the centered snapshot difference
/// arg(ψ_{j+1}·conj(ψ_{j−1}))/2δt, with the arg branch anchored at the
/// max-|ψ| grid point of the central snapshot (the anchor chooses the
/// branch; no physical phase is removed). Masked entries are 0.
pub(crate) fn anchored_phase_rate(
    timeline: &WaveTimeline,
    idx: usize,
    mask: &NodeMask,
) -> Result<Vec<f64>, BohmError> {
    let len = timeline.len();
    if idx == 0 || idx + 1 >= len {
        return Err(BohmError::BoundarySnapshot { idx, len });
    }
    let psi = timeline.snapshot(idx);
    let before = timeline.snapshot(idx - 1);
    let after = timeline.snapshot(idx + 1);

    let anchor = psi
        .data()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .map(|(i, _)| i)
        .expect("nonempty field");
    if mask.is_masked(anchor) {
        return Err(BohmError::AnchorMasked);
    }
    let z_anchor = after.data()[anchor] * before.data()[anchor].conj();
    if z_anchor.norm_sqr() == 0.0 {
        return Err(BohmError::AnchorMasked);
    }
    let theta_star = z_anchor.arg();
    let unit_anchor = Complex64::from_polar(1.0, -theta_star);
    let scale = timeline.units().hbar() / (2.0 * timeline.dt_snapshot());

    Ok((0..psi.len())
        .map(|i| {
            if mask.is_masked(i) {
                return 0.0;
            }
            let z = after.data()[i] * before.data()[i].conj();
            // Branch centered on the anchor phase.
            scale * (theta_star + (z * unit_anchor).arg())
        })
        .collect())
}

/// Q from phase dynamics alone: Q = −∂S/∂t − U − (∇S)²/2m, with anchored
/// centered ∂S/∂t (see [`anchored_phase_rate`]).
pub fn quantum_potential_hj(timeline: &WaveTimeline, idx: usize) -> Result<QField, BohmError> {
    let len = timeline.len();
    if idx == 0 || idx + 1 >= len {
        return Err(BohmError::BoundarySnapshot { idx, len });
    }
    let units = *timeline.units();
    let psi = timeline.snapshot(idx);
    let mask = psi.node_mask();
    let ds_dt = anchored_phase_rate(timeline, idx, &mask)?;
    let vel = velocity_field(psi, &units);

    let u = timeline.potential();
    let m = units.mass();
    let grid = psi.grid().clone();
    let mut data = vec![0.0; grid.len()];
    for i in 0..grid.len() {
        if mask.is_masked(i) {
            continue;
        }
        let v2: f64 = vel.components.iter().map(|c| c.data()[i] * c.data()[i]).sum();
        data[i] = -ds_dt[i] - u.data()[i] - 0.5 * m * v2;
    }
    Ok(QField { values: RealField::new(grid, data).expect("same grid"), mask })
}

// ---------------------------------------------------------------------------
// Velocity field
// ---------------------------------------------------------------------------

/// Guidance velocity v = ∇S/m, computed as (ℏ/m)·Im(ψ*∇ψ)/|ψ|² with the
/// density floored at δ_node·max for the quotient. Per-axis components share
/// the node mask of ψ.
#[derive(Debug, Clone)]
pub struct VelocityField {
    grid: Arc<Grid>,
    pub components: Vec<RealField>,
    pub mask: NodeMask,
}

impl VelocityField {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
}

pub fn velocity_field(psi: &ComplexField, units: &UnitSystem) -> VelocityField {
    let grid = psi.grid().clone();
    let mask = psi.node_mask();
    let floor = mask.floor.max(f64::MIN_POSITIVE);
    let scale = units.hbar() / units.mass();
    // Im(ψ*∇ψ) = Re(ψ)·∇Im(ψ) − Im(ψ)·∇Re(ψ); the split form is exactly
    // zero for real ψ and exactly odd under conjugation.
    let re = RealField::new(grid.clone(), psi.data().iter().map(|z| z.re).collect())
        .expect("same grid");
    let im = RealField::new(grid.clone(), psi.data().iter().map(|z| z.im).collect())
        .expect("same grid");
    let components = (0..grid.ndim())
        .map(|axis| {
            let dre = ops::gradient(&re, axis).expect("axis in range");
            let dim = ops::gradient(&im, axis).expect("axis in range");
            let data = psi
                .data()
                .iter()
                .zip(dre.data().iter().zip(dim.data()))
                .map(|(&p, (&dr, &di))| {
                    let density = p.norm_sqr().max(floor);
                    scale * (p.re * di - p.im * dr) / density
                })
                .collect();
            RealField::new(grid.clone(), data).expect("same grid")
        })
        .collect();
    VelocityField { grid, components, mask }
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Piecewise-linear 1D density slice for inverse-CDF sampling.
struct LinearCdf {
    /// Cell cumulative masses, cum[k] = mass of cells 0..k (normalized).
    cum: Vec<f64>,
    /// Node values the density is linear between (wrapped for periodic).
    nodes: Vec<f64>,
    h: f64,
    lower: f64,
}

impl LinearCdf {
    /// `nodes` must have one more entry than there are cells.
    fn new(nodes: Vec<f64>, h: f64, lower: f64) -> Option<Self> {
        let cells = nodes.len() - 1;
        let mut cum = Vec::with_capacity(cells);
        let mut acc = 0.0;
        for k in 0..cells {
            acc += 0.5 * h * (nodes[k] + nodes[k + 1]);
            cum.push(acc);
        }
        let total = *cum.last()?;
        if !(total > 0.0) {
            return None;
        }
        for c in cum.iter_mut() {
            *c /= total;
        }
        Some(Self { cum, nodes, h, lower })
    }

    /// Invert the CDF at u ∈ [0,1).
    fn invert(&self, u: f64) -> f64 {
        // First cell whose cumulative mass exceeds u (zero-mass cells are
        // never selected because their cum equals the previous one).
        let k = self.cum.partition_point(|&c| c <= u).min(self.cum.len() - 1);
        let below = if k == 0 { 0.0 } else { self.cum[k - 1] };
        let cell_mass = self.cum[k] - below;
        let frac = if cell_mass > 0.0 { (u - below) / cell_mass } else { 0.5 };
        let (a, b) = (self.nodes[k], self.nodes[k + 1]);
        // Solve ∫₀^ξ (a + (b−a)s) ds = frac·(a+b)/2 for ξ ∈ [0,1].
        let target = frac * 0.5 * (a + b);
        let slope = b - a;
        let xi = if slope.abs() < 1e-14 * (a.abs() + b.abs() + 1e-300) {
            if a > 0.0 {
                target / a
            } else {
                frac
            }
        } else {
            let disc = (a * a + 2.0 * slope * target).max(0.0);
            (disc.sqrt() - a) / slope
        };
        self.lower + self.h * (k as f64 + xi.clamp(0.0, 1.0))
    }
}

/// Node values along one axis including the closing node (wrap for periodic,
/// last stored sample for dirichlet).
fn axis_nodes(grid: &Grid, values: impl Fn(usize) -> f64, count: usize) -> Vec<f64> {
    let mut nodes: Vec<f64> = (0..count).map(&values).collect();
    if grid.boundary() == Boundary::Periodic {
        nodes.push(values(0));
    }
    nodes
}

/// Draw `n` positions from the piecewise-(bi)linear density `p0` by
/// inverse-CDF sampling (marginal-then-conditional per axis in 2D).
/// Deterministic for a given seed: draws come sequentially from the
/// "sampling" stream.
pub fn sample_initial_positions(
    p0: &RealField,
    n: usize,
    seed: u64,
) -> Result<Vec<[f64; 2]>, BohmError> {
    let grid = p0.grid().clone();
    let min = p0.data().iter().cloned().fold(f64::MAX, f64::min);
    if min < -1e-9 * p0.max_abs().max(1e-300) {
        return Err(BohmError::NegativeDensity(min));
    }
    let total = p0.integrate();
    if !total.is_finite() || (total - 1.0).abs() > 1e-6 {
        return Err(BohmError::NonNormalizable(total));
    }
    let clip = |v: f64| v.max(0.0);
    let mut rng = named_stream(seed, STREAM_SAMPLING);
    let mut out = Vec::with_capacity(n);
    match grid.ndim() {
        1 => {
            let n0 = grid.axis(0).count;
            let nodes = axis_nodes(&grid, |i| clip(p0.data()[i]), n0);
            let cdf = LinearCdf::new(nodes, grid.spacing(0), grid.axis(0).lower)
                .ok_or(BohmError::NonNormalizable(total))?;
            for _ in 0..n {
                let u: f64 = rng.gen();
                out.push([cdf.invert(u), 0.0]);
            }
        }
        _ => {
            let (n0, n1) = (grid.axis(0).count, grid.axis(1).count);
            // Marginal over axis 1 (per-row quadrature with axis-1 weights).
            let w1 = |j: usize| -> f64 {
                let h = grid.spacing(1);
                match grid.boundary() {
                    Boundary::Periodic => h,
                    Boundary::DirichletZero => {
                        if j == 0 || j == n1 - 1 {
                            0.5 * h
                        } else {
                            h
                        }
                    }
                }
            };
            let marginal = |i: usize| -> f64 {
                (0..n1).map(|j| clip(p0.data()[i * n1 + j]) * w1(j)).sum::<f64>()
            };
            let mnodes = axis_nodes(&grid, marginal, n0);
            let mcdf = LinearCdf::new(mnodes, grid.spacing(0), grid.axis(0).lower)
                .ok_or(BohmError::NonNormalizable(total))?;
            for _ in 0..n {
                let ux: f64 = rng.gen();
                let x = mcdf.invert(ux);
                // Conditional slice at x: blend the two bracketing columns.
                let s = (x - grid.axis(0).lower) / grid.spacing(0);
                let i0 = (s.floor() as usize).min(n0 - 1);
                let t = (s - i0 as f64).clamp(0.0, 1.0);
                let i1 = match grid.boundary() {
                    Boundary::Periodic => (i0 + 1) % n0,
                    Boundary::DirichletZero => (i0 + 1).min(n0 - 1),
                };
                let col = |j: usize| {
                    (1.0 - t) * clip(p0.data()[i0 * n1 + j]) + t * clip(p0.data()[i1 * n1 + j])
                };
                let cnodes = axis_nodes(&grid, col, n1);
                match LinearCdf::new(cnodes, grid.spacing(1), grid.axis(1).lower) {
                    Some(ccdf) => {
                        let uy: f64 = rng.gen();
                        out.push([x, ccdf.invert(uy)]);
                    }
                    None => {
                        // Zero-mass slice (numerically impossible for sampled
                        // x, kept for safety): land on the axis midpoint.
                        let _ = rng.gen::<f64>();
                        out.push([x, 0.5 * (grid.axis(1).lower + grid.axis(1).upper)]);
                    }
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Field interpolation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    Cubic,
}

impl Interpolation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Interpolation::Linear => "linear",
            Interpolation::Cubic => "cubic",
        }
    }
}

fn wrap_index(grid: &Grid, axis: usize, i: isize) -> usize {
    let n = grid.axis(axis).count as isize;
    match grid.boundary() {
        Boundary::Periodic => i.rem_euclid(n) as usize,
        Boundary::DirichletZero => i.clamp(0, n - 1) as usize,
    }
}

/// Catmull–Rom cubic through f(−1), f(0), f(1), f(2) at parameter t ∈ [0,1].
fn catmull_rom(f: [f64; 4], t: f64) -> f64 {
    let [fm, f0, f1, f2] = f;
    0.5 * (2.0 * f0
        + (f1 - fm) * t
        + (2.0 * fm - 5.0 * f0 + 4.0 * f1 - f2) * t * t
        + (3.0 * (f0 - f1) + f2 - fm) * t * t * t)
}

/// Sample a real field at an arbitrary position (periodic wrap / dirichlet
/// clamp outside the stored samples).
pub(crate) fn sample_field(
    field: &RealField,
    grid: &Grid,
    pos: &[f64; 2],
    interp: Interpolation,
) -> f64 {
    // Fractional index per axis.
    let mut base = [0isize; 2];
    let mut frac = [0.0f64; 2];
    for a in 0..grid.ndim() {
        let ax = grid.axis(a);
        let h = grid.spacing(a);
        let s = match grid.boundary() {
            Boundary::Periodic => (pos[a] - ax.lower).rem_euclid(ax.upper - ax.lower) / h,
            Boundary::DirichletZero => {
                ((pos[a] - ax.lower) / h).clamp(0.0, (ax.count - 1) as f64)
            }
        };
        let b = s.floor();
        base[a] = b as isize;
        frac[a] = s - b;
    }
    let value_at = |i: isize, j: isize| -> f64 {
        let ii = wrap_index(grid, 0, i);
        match grid.ndim() {
            1 => field.data()[ii],
            _ => {
                let jj = wrap_index(grid, 1, j);
                field.data()[grid.flat(&[ii, jj])]
            }
        }
    };
    let line = |offsets: &[isize], axis0_idx: isize, t: f64, interp: Interpolation, along1: bool| -> f64 {
        match interp {
            Interpolation::Linear => {
                let f0 = if along1 { value_at(axis0_idx, offsets[0]) } else { value_at(offsets[0], axis0_idx) };
                let f1 = if along1 { value_at(axis0_idx, offsets[1]) } else { value_at(offsets[1], axis0_idx) };
                (1.0 - t) * f0 + t * f1
            }
            Interpolation::Cubic => {
                let mut f = [0.0; 4];
                for (k, &o) in offsets.iter().enumerate() {
                    f[k] = if along1 { value_at(axis0_idx, o) } else { value_at(o, axis0_idx) };
                }
                catmull_rom(f, t)
            }
        }
    };
    match grid.ndim() {
        1 => {
            let i = base[0];
            match interp {
                Interpolation::Linear => line(&[i, i + 1], 0, frac[0], interp, false),
                Interpolation::Cubic => line(&[i - 1, i, i + 1, i + 2], 0, frac[0], interp, false),
            }
        }
        _ => {
            // Interpolate along axis 1 for each needed axis-0 row, then along axis 0.
            let (i, j) = (base[0], base[1]);
            match interp {
                Interpolation::Linear => {
                    let r0 = line(&[j, j + 1], i, frac[1], interp, true);
                    let r1 = line(&[j, j + 1], i + 1, frac[1], interp, true);
                    (1.0 - frac[0]) * r0 + frac[0] * r1
                }
                Interpolation::Cubic => {
                    let mut rows = [0.0; 4];
                    for (k, io) in (i - 1..=i + 2).enumerate() {
                        rows[k] = line(&[j - 1, j, j + 1, j + 2], io, frac[1], interp, true);
                    }
                    catmull_rom(rows, frac[0])
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

/// Integrator metadata recorded with every ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleMeta {
    pub dt_sub: f64,
    pub substeps: usize,
    pub interp: Interpolation,
    pub seed: Option<u64>,
    /// How out-of-domain motion was handled ("periodic-wrap" / "dirichlet-truncate").
    pub boundary_policy: &'static str,
}

/// Trajectory bundle: positions[time][particle], with truncation bookkeeping
/// for particles that escaped a dirichlet domain (they keep their last valid
/// position afterwards).
#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    grid: Arc<Grid>,
    times: Vec<f64>,
    positions: Vec<Vec<[f64; 2]>>,
    escaped: Vec<Option<usize>>,
    pub meta: EnsembleMeta,
}

impl TrajectoryEnsemble {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn particle_count(&self) -> usize {
        self.positions.first().map(|p| p.len()).unwrap_or(0)
    }
    /// Positions at output time index `t` (one entry per particle).
    pub fn at_time(&self, t: usize) -> &[[f64; 2]] {
        &self.positions[t]
    }
    /// Snapshot index at which particle `k` escaped (dirichlet), if it did.
    pub fn escaped_at(&self, k: usize) -> Option<usize> {
        self.escaped[k]
    }
    pub fn escaped_count(&self) -> usize {
        self.escaped.iter().filter(|e| e.is_some()).count()
    }

    /// Rebuild an ensemble from stored rows (used by `diagnose`).
    pub fn from_parts(
        grid: Arc<Grid>,
        times: Vec<f64>,
        positions: Vec<Vec<[f64; 2]>>,
        escaped: Vec<Option<usize>>,
        meta: EnsembleMeta,
    ) -> Self {
        Self { grid, times, positions, escaped, meta }
    }
}

/// Integrate dq/dt = v(q,t) for every particle with RK4: `substeps` steps
/// per snapshot interval, velocity linear in time between snapshots and
/// interpolated in space with the chosen kind.
pub fn integrate_trajectories(
    timeline: &WaveTimeline,
    positions: &[[f64; 2]],
    substeps: usize,
    interp: Interpolation,
) -> Result<TrajectoryEnsemble, BohmError> {
    if timeline.len() < 2 {
        return Err(BohmError::TooFewSnapshots { want: 2, got: timeline.len() });
    }
    if substeps == 0 {
        return Err(BohmError::BadSubsteps);
    }
    let grid = timeline.grid().clone();
    for (k, p) in positions.iter().enumerate() {
        if !grid.contains(p) {
            return Err(BohmError::PositionOutOfBounds { index: k });
        }
    }
    let units = *timeline.units();
    // Velocity field per snapshot (read-only shared by all particles).
    let fields: Vec<VelocityField> =
        timeline.snapshots().iter().map(|s| velocity_field(s, &units)).collect();

    let n_times = timeline.len();
    let dt_snap = timeline.dt_snapshot();
    let dt_sub = dt_snap / substeps as f64;
    let ndim = grid.ndim();
    let periodic = grid.boundary() == Boundary::Periodic;

    struct Walker<'a> {
        grid: &'a Grid,
        fields: &'a [VelocityField],
        interp: Interpolation,
        ndim: usize,
    }
    impl Walker<'_> {
        /// Velocity at (q, θ) where θ blends snapshots j and j+1 linearly.
        fn velocity(&self, j: usize, theta: f64, q: &[f64; 2], out: &mut [f64; 2]) {
            let (a, b) = (&self.fields[j], &self.fields[j + 1]);
            for axis in 0..self.ndim {
                let va = sample_field(&a.components[axis], self.grid, q, self.interp);
                let vb = sample_field(&b.components[axis], self.grid, q, self.interp);
                out[axis] = (1.0 - theta) * va + theta * vb;
            }
        }
        /// One RK4 step from (q, θ0) with step dθ (fractions of the interval).
        fn rk4(&self, j: usize, theta0: f64, dtheta: f64, dt: f64, q: &[f64; 2]) -> [f64; 2] {
            let mut k1 = [0.0; 2];
            let mut k2 = [0.0; 2];
            let mut k3 = [0.0; 2];
            let mut k4 = [0.0; 2];
            self.velocity(j, theta0, q, &mut k1);
            let mut tmp = *q;
            for a in 0..self.ndim {
                tmp[a] = q[a] + 0.5 * dt * k1[a];
            }
            self.velocity(j, theta0 + 0.5 * dtheta, &tmp, &mut k2);
            for a in 0..self.ndim {
                tmp[a] = q[a] + 0.5 * dt * k2[a];
            }
            self.velocity(j, theta0 + 0.5 * dtheta, &tmp, &mut k3);
            for a in 0..self.ndim {
                tmp[a] = q[a] + dt * k3[a];
            }
            self.velocity(j, (theta0 + dtheta).min(1.0), &tmp, &mut k4);
            let mut next = *q;
            for a in 0..self.ndim {
                next[a] = q[a] + dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
            }
            next
        }
        /// True if the segment q → next touches a node-masked cell (checked
        /// at the segment midpoint and endpoint against snapshot j's mask).
        fn crosses_masked(&self, j: usize, q: &[f64; 2], next: &[f64; 2]) -> bool {
            let mask = &self.fields[j].mask;
            let probe = |p: &[f64; 2]| {
                let mut idx = [0usize; 2];
                for a in 0..self.ndim {
                    idx[a] = self.grid.nearest_index(a, p[a]);
                }
                mask.is_masked(self.grid.flat(&idx[..self.ndim]))
            };
            let mid = [0.5 * (q[0] + next[0]), 0.5 * (q[1] + next[1])];
            probe(&mid) || probe(next)
        }
    }

    let walker = Walker { grid: &grid, fields: &fields, interp, ndim };

    // Per-particle integration (data-parallel, deterministic order).
    let results: Vec<(Vec<[f64; 2]>, Option<usize>)> = positions
        .par_iter()
        .map(|&start| {
            let mut track = Vec::with_capacity(n_times);
            track.push(start);
            let mut q = start;
            let mut escaped: Option<usize> = None;
            'snapshots: for j in 0..n_times - 1 {
                if escaped.is_some() {
                    track.push(q);
                    continue;
                }
                for m in 0..substeps {
                    let theta0 = m as f64 / substeps as f64;
                    let dtheta = 1.0 / substeps as f64;
                    let mut next = walker.rk4(j, theta0, dtheta, dt_sub, &q);
                    if walker.crosses_masked(j, &q, &next) {
                        // Halve once: two RK4 steps across the same interval.
                        let half = walker.rk4(j, theta0, 0.5 * dtheta, 0.5 * dt_sub, &q);
                        next = walker.rk4(j, theta0 + 0.5 * dtheta, 0.5 * dtheta, 0.5 * dt_sub, &half);
                    }
                    if periodic {
                        for a in 0..ndim {
                            let ax = grid.axis(a);
                            next[a] = ax.lower + (next[a] - ax.lower).rem_euclid(ax.upper - ax.lower);
                        }
                    } else if !grid.contains(&next) {
                        // Escaped a dirichlet domain: truncate, keep last
                        // valid position, mark the next output index.
                        escaped = Some(j + 1);
                        track.push(q);
                        continue 'snapshots;
                    }
                    q = next;
                }
                track.push(q);
            }
            (track, escaped)
        })
        .collect();

    // Transpose to time-major layout.
    let n = positions.len();
    let mut by_time = vec![vec![[0.0; 2]; n]; n_times];
    let mut escaped = vec![None; n];
    for (k, (track, esc)) in results.into_iter().enumerate() {
        for (t, p) in track.into_iter().enumerate() {
            by_time[t][k] = p;
        }
        escaped[k] = esc;
    }
    Ok(TrajectoryEnsemble {
        grid: grid.clone(),
        times: timeline.times().to_vec(),
        positions: by_time,
        escaped,
        meta: EnsembleMeta {
            dt_sub,
            substeps,
            interp,
            seed: None,
            boundary_policy: if periodic { "periodic-wrap" } else { "dirichlet-truncate" },
        },
    })
}

/// Number of particle pairs whose 1D ordering at any output time differs
/// from the initial ordering (0 for a faithful guidance flow).
pub fn ordering_violations(ensemble: &TrajectoryEnsemble) -> Result<usize, BohmError> {
    if ensemble.grid.ndim() != 1 {
        return Err(BohmError::OrderingNeeds1d);
    }
    let n = ensemble.particle_count();
    let mut order: Vec<usize> = (0..n).collect();
    let first = &ensemble.positions[0];
    order.sort_by(|&a, &b| first[a][0].total_cmp(&first[b][0]));
    let mut violations = 0;
    for snapshot in &ensemble.positions {
        for w in order.windows(2) {
            if snapshot[w[0]][0] > snapshot[w[1]][0] + 1e-12 {
                violations += 1;
            }
        }
    }
    Ok(violations)
}

// ---------------------------------------------------------------------------
// Equivariance
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivarianceStat {
    pub tv_distance: f64,
    pub chi_square: f64,
    /// Particles included (escaped ones are excluded).
    pub counted: usize,
}

/// ∫(1−s)ds and ∫s ds over [s0,s1] — the bilinear shape-function moments.
fn shape_moments(s0: f64, s1: f64) -> (f64, f64) {
    let m1 = 0.5 * (s1 * s1 - s0 * s0);
    ((s1 - s0) - m1, m1)
}

/// Unnormalized bin masses of the clipped piecewise-(bi)linear density:
/// each grid cell's linear patch is integrated exactly over every bin it
/// overlaps, so a node sitting on a bin edge splits its mass correctly.
fn linear_bin_masses(p: &RealField, bins: usize) -> Vec<f64> {
    let grid = p.grid();
    let clip = |v: f64| v.max(0.0);
    let overlap = |cell_lo: f64, h: f64, lower: f64, w: f64| {
        let b_lo = (((cell_lo - lower) / w).floor() as isize).clamp(0, bins as isize - 1) as usize;
        let b_hi =
            (((cell_lo + h - lower) / w).floor() as isize).clamp(0, bins as isize - 1) as usize;
        (b_lo, b_hi)
    };
    let span = |cell_lo: f64, h: f64, lower: f64, w: f64, b: usize| {
        let lo = cell_lo.max(lower + b as f64 * w);
        let hi = (cell_lo + h).min(lower + (b + 1) as f64 * w);
        ((lo - cell_lo) / h, (hi - cell_lo) / h)
    };
    match grid.ndim() {
        1 => {
            let ax = grid.axis(0);
            let h = grid.spacing(0);
            let w = (ax.upper - ax.lower) / bins as f64;
            let nodes = axis_nodes(grid, |i| clip(p.data()[i]), ax.count);
            let mut masses = vec![0.0f64; bins];
            for k in 0..nodes.len() - 1 {
                let cell_lo = ax.lower + k as f64 * h;
                let (b_lo, b_hi) = overlap(cell_lo, h, ax.lower, w);
                for b in b_lo..=b_hi {
                    let (s0, s1) = span(cell_lo, h, ax.lower, w, b);
                    if s1 <= s0 {
                        continue;
                    }
                    let (a0, a1) = shape_moments(s0, s1);
                    masses[b] += h * (nodes[k] * a0 + nodes[k + 1] * a1);
                }
            }
            masses
        }
        _ => {
            let (ax0, ax1) = (grid.axis(0), grid.axis(1));
            let (h0, h1) = (grid.spacing(0), grid.spacing(1));
            let w0 = (ax0.upper - ax0.lower) / bins as f64;
            let w1 = (ax1.upper - ax1.lower) / bins as f64;
            let (n0, n1) = (ax0.count, ax1.count);
            let periodic = grid.boundary() == Boundary::Periodic;
            let (cells0, cells1) = if periodic { (n0, n1) } else { (n0 - 1, n1 - 1) };
            let at = |i: usize, j: usize| clip(p.data()[(i % n0) * n1 + (j % n1)]);
            let mut masses = vec![0.0f64; bins * bins];
            for ci in 0..cells0 {
                let cell_x = ax0.lower + ci as f64 * h0;
                let (bx_lo, bx_hi) = overlap(cell_x, h0, ax0.lower, w0);
                for cj in 0..cells1 {
                    let cell_y = ax1.lower + cj as f64 * h1;
                    let (c00, c10) = (at(ci, cj), at(ci + 1, cj));
                    let (c01, c11) = (at(ci, cj + 1), at(ci + 1, cj + 1));
                    let (by_lo, by_hi) = overlap(cell_y, h1, ax1.lower, w1);
                    for bx in bx_lo..=bx_hi {
                        let (s0, s1) = span(cell_x, h0, ax0.lower, w0, bx);
                        if s1 <= s0 {
                            continue;
                        }
                        let (a0s, a1s) = shape_moments(s0, s1);
                        for by in by_lo..=by_hi {
                            let (t0, t1) = span(cell_y, h1, ax1.lower, w1, by);
                            if t1 <= t0 {
                                continue;
                            }
                            let (a0t, a1t) = shape_moments(t0, t1);
                            masses[bx * bins + by] += h0
                                * h1
                                * (c00 * a0s * a0t
                                    + c10 * a1s * a0t
                                    + c01 * a0s * a1t
                                    + c11 * a1s * a1t);
                        }
                    }
                }
            }
            masses
        }
    }
}

/// Compare the final-time trajectory histogram against the quantum density:
/// TV distance ½Σ|p̂_b − p_b| and Pearson χ² over `bins` per axis covering
/// the grid bounding box.
pub fn equivariance_statistic(
    ensemble: &TrajectoryEnsemble,
    p_final: &RealField,
    bins: usize,
) -> Result<EquivarianceStat, BohmError> {
    if ensemble.particle_count() == 0 {
        return Err(BohmError::EmptyEnsemble);
    }
    if bins < 2 {
        return Err(BohmError::BadBins);
    }
    let grid = p_final.grid().clone();
    if grid.as_ref() != ensemble.grid.as_ref() {
        return Err(BohmError::GridMismatch);
    }
    let ndim = grid.ndim();
    let n_bins_total = if ndim == 1 { bins } else { bins * bins };
    let bin_of = |p: &[f64; 2]| -> usize {
        let mut idx = 0;
        for a in 0..ndim {
            let ax = grid.axis(a);
            let w = (ax.upper - ax.lower) / bins as f64;
            let b = (((p[a] - ax.lower) / w).floor() as isize).clamp(0, bins as isize - 1) as usize;
            idx = idx * bins + b;
        }
        idx
    };

    // Expected bin masses: exact bin integrals of the clipped piecewise-
    // (bi)linear density — the same law `sample_initial_positions` draws
    // from, so node placement relative to bin edges adds no quantization.
    let mut expected = linear_bin_masses(p_final, bins);
    let total: f64 = expected.iter().sum();
    if !(total > 0.0) {
        return Err(BohmError::NonNormalizable(total));
    }
    for e in expected.iter_mut() {
        *e /= total;
    }

    // Observed bin frequencies at the final time, escaped particles excluded.
    let final_idx = ensemble.times.len() - 1;
    let mut counts = vec![0usize; n_bins_total];
    let mut counted = 0usize;
    for (k, p) in ensemble.positions[final_idx].iter().enumerate() {
        if ensemble.escaped[k].is_some() {
            continue;
        }
        counts[bin_of(p)] += 1;
        counted += 1;
    }
    if counted == 0 {
        return Err(BohmError::EmptyEnsemble);
    }

    let mut tv = 0.0;
    let mut chi2 = 0.0;
    for (b, &e) in expected.iter().enumerate() {
        let obs = counts[b] as f64 / counted as f64;
        tv += (obs - e).abs();
        let expected_count = e * counted as f64;
        if expected_count > 1e-9 {
            let d = counts[b] as f64 - expected_count;
            chi2 += d * d / expected_count;
        }
    }
    Ok(EquivarianceStat { tv_distance: 0.5 * tv, chi_square: chi2, counted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{eval_potential, PotentialSpec};
    use crate::states;
    use crate::tdse::{evolve, EvolutionConfig, Method};

    fn units() -> UnitSystem {
        UnitSystem::natural()
    }

    #[test]
    fn quantum_potential_gaussian_values() {
        // A ∝ exp(−x²/4σ²), σ=1: Q = (ℏ²/2m)(1/2σ² − x²/4σ⁴) ⇒ Q(0)=0.25, Q(2)=−0.25.
        let g = Arc::new(Grid::line(-8.0, 8.0, 512, Boundary::Periodic).unwrap());
        let u = units();
        let psi = states::gaussian(&g, &u, &[0.0], &[1.0], &[0.0]).unwrap();
        let (a, _, mask) = psi.polar(&u);
        let q = quantum_potential(&a, &mask, &u).unwrap();
        let i0 = g.nearest_index(0, 0.0);
        let i2 = g.nearest_index(0, 2.0);
        assert!((g.coord(0, i0)).abs() < 1e-12);
        assert!((g.coord(0, i2) - 2.0).abs() < 1e-12);
        assert!((q.values.data()[i0] - 0.25).abs() < 1e-9, "Q(0) = {}", q.values.data()[i0]);
        assert!((q.values.data()[i2] + 0.25).abs() < 1e-9, "Q(2) = {}", q.values.data()[i2]);
    }

    #[test]
    fn quantum_potential_constant_amplitude_is_zero() {
        let g = Arc::new(Grid::line(-8.0, 8.0, 64, Boundary::Periodic).unwrap());
        let u = units();
        let a = RealField::from_fn(g.clone(), |_| 0.7);
        let psi = ComplexField::from_real(&a);
        let mask = psi.node_mask();
        let q = quantum_potential(&a, &mask, &u).unwrap();
        for v in q.values.data() {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn velocity_examples() {
        let u = units();
        // Real ψ ⇒ v ≡ 0 exactly.
        let g = Arc::new(Grid::line(-8.0, 8.0, 128, Boundary::Periodic).unwrap());
        let psi = states::gaussian(&g, &u, &[0.0], &[1.0], &[0.0]).unwrap();
        let v = velocity_field(&psi, &u);
        assert!(v.components[0].data().iter().all(|&x| x == 0.0));
        // Plane wave p=2 ⇒ v ≡ 2.
        let gp = Arc::new(
            Grid::line(-std::f64::consts::PI, std::f64::consts::PI, 32, Boundary::Periodic)
                .unwrap(),
        );
        let (pw, _) = states::plane_wave(&gp, &u, &[2.0]).unwrap();
        let vp = velocity_field(&pw, &u);
        for &x in vp.components[0].data() {
            assert!((x - 2.0).abs() < 1e-10, "plane-wave velocity {x}");
        }
        // Conjugation antisymmetry.
        let boosted = states::gaussian(&g, &u, &[1.0], &[0.9], &[1.3]).unwrap();
        let conj = ComplexField::new(
            g.clone(),
            boosted.data().iter().map(|z| z.conj()).collect(),
        )
        .unwrap();
        let va = velocity_field(&boosted, &u);
        let vb = velocity_field(&conj, &u);
        for (x, y) in va.components[0].data().iter().zip(vb.components[0].data()) {
            assert!((x + y).abs() < 1e-12);
        }
    }

    #[test]
    fn velocity_node_masked_neighbors_finite() {
        let u = units();
        let g = Arc::new(Grid::line(-10.0, 10.0, 256, Boundary::Periodic).unwrap());
        // Odd superposition with an exact node at x = 0.
        let a = states::gaussian(&g, &u, &[-2.0], &[1.0], &[0.0]).unwrap();
        let b = states::gaussian(&g, &u, &[2.0], &[1.0], &[0.0]).unwrap();
        let psi = states::superpose(&[
            (Complex64::new(1.0, 0.0), &a),
            (Complex64::new(-1.0, 0.0), &b),
        ])
        .unwrap();
        let v = velocity_field(&psi, &u);
        assert!(v.components[0].data().iter().all(|x| x.is_finite()));
        // Deep-tail points are masked; the node itself sits at x=0.
        assert!(v.mask.count_masked() > 0);
    }

    #[test]
    fn hj_route_plane_wave_q_vanishes() {
        let u = units();
        let gp = Arc::new(
            Grid::line(-std::f64::consts::PI, std::f64::consts::PI, 64, Boundary::Periodic)
                .unwrap(),
        );
        let (pw, _) = states::plane_wave(&gp, &u, &[2.0]).unwrap();
        let free = eval_potential(&PotentialSpec::Free, &gp, &u).unwrap();
        let cfg = EvolutionConfig {
            dt: 0.01,
            steps: 4,
            method: Method::SplitSpectral,
            snapshot_stride: 1,
        };
        let tl = evolve(&pw, &free, &u, &cfg).unwrap();
        let q = quantum_potential_hj(&tl, 2).unwrap();
        for (i, v) in q.values.data().iter().enumerate() {
            if !q.mask.is_masked(i) {
                assert!(v.abs() < 1e-10, "plane-wave Q_hj = {v}");
            }
        }
        // Boundary snapshots rejected.
        assert!(matches!(
            quantum_potential_hj(&tl, 0),
            Err(BohmError::BoundarySnapshot { .. })
        ));
        assert!(matches!(
            quantum_potential_hj(&tl, 4),
            Err(BohmError::BoundarySnapshot { .. })
        ));
    }

    #[test]
    fn hj_route_matches_direct_on_eigenstate() {
        let u = units();
        let g = Arc::new(Grid::line(-8.0, 8.0, 257, Boundary::DirichletZero).unwrap());
        let pot = eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &g, &u).unwrap();
        let sol = crate::tdse::solve_eigenpairs(&pot, &u, 1).unwrap();
        let psi0 = ComplexField::from_real(&sol.states[0]);
        let cfg = EvolutionConfig {
            dt: 0.002,
            steps: 8,
            method: Method::CrankNicolson,
            snapshot_stride: 2,
        };
        let tl = evolve(&psi0, &pot, &u, &cfg).unwrap();
        let qhj = quantum_potential_hj(&tl, 2).unwrap();
        let (a, _, mask) = tl.snapshot(2).polar(&u);
        let qdir = quantum_potential(&a, &mask, &u).unwrap();
        // Q from phase dynamics = E − U = Q from amplitude, pointwise.
        for i in 0..g.len() {
            if qhj.mask.is_masked(i) {
                continue;
            }
            let want = sol.energies[0] - pot.data()[i];
            assert!(
                (qhj.values.data()[i] - want).abs() < 1e-6,
                "hj {} vs E-U {}",
                qhj.values.data()[i],
                want
            );
            assert!((qdir.values.data()[i] - want).abs() < 1e-6);
        }
    }

    #[test]
    fn sampling_concentrated_and_deterministic() {
        let g = Arc::new(Grid::line(0.0, 1.0, 64, Boundary::DirichletZero).unwrap());
        // Density concentrated in one cell around x = 0.5.
        let mut data = vec![0.0; 64];
        let i = g.nearest_index(0, 0.5);
        data[i] = 1.0 / g.spacing(0); // unit mass triangle-ish
        let p0 = RealField::new(g.clone(), data).unwrap();
        let total = p0.integrate();
        let p0 = p0.map(|v| v / total);
        let xs = sample_initial_positions(&p0, 500, 7).unwrap();
        let x_i = g.coord(0, i);
        let h = g.spacing(0);
        for p in &xs {
            assert!((p[0] - x_i).abs() <= h, "sample {p:?} outside support");
        }
        let again = sample_initial_positions(&p0, 500, 7).unwrap();
        assert_eq!(xs, again);
        let other = sample_initial_positions(&p0, 500, 8).unwrap();
        assert_ne!(xs, other);
    }

    #[test]
    fn sampling_uniform_ks_statistic() {
        let g = Arc::new(Grid::line(0.0, 1.0, 128, Boundary::DirichletZero).unwrap());
        let p0 = RealField::from_fn(g.clone(), |_| 1.0);
        let n = 100_000;
        let samples = sample_initial_positions(&p0, n, 42).unwrap();
        let mut xs: Vec<f64> = samples.iter().map(|p| p[0]).collect();
        xs.sort_by(|a, b| a.total_cmp(b));
        let mut ks = 0.0f64;
        for (i, &x) in xs.iter().enumerate() {
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            ks = ks.max((x - lo).abs()).max((x - hi).abs());
        }
        assert!(ks < 0.006, "KS statistic {ks}");
    }

    #[test]
    fn sampling_rejects_bad_density() {
        let g = Arc::new(Grid::line(0.0, 1.0, 32, Boundary::DirichletZero).unwrap());
        let p0 = RealField::from_fn(g.clone(), |_| 2.0); // integrates to 2
        assert!(matches!(
            sample_initial_positions(&p0, 10, 1),
            Err(BohmError::NonNormalizable(_))
        ));
        let neg = RealField::from_fn(g.clone(), |p| if p[0] < 0.5 { -1.0 } else { 3.0 });
        assert!(matches!(
            sample_initial_positions(&neg, 10, 1),
            Err(BohmError::NegativeDensity(_))
        ));
    }

    #[test]
    fn sampling_2d_marginals() {
        let g = Arc::new(
            Grid::rectangle((-4.0, 4.0, 64), (-4.0, 4.0, 64), Boundary::Periodic).unwrap(),
        );
        let u = units();
        let psi = states::gaussian(&g, &u, &[1.0, -1.0], &[0.6, 0.9], &[0.0, 0.0]).unwrap();
        let p0 = psi.density();
        let n = 40_000;
        let xs = sample_initial_positions(&p0, n, 11).unwrap();
        let mean_x: f64 = xs.iter().map(|p| p[0]).sum::<f64>() / n as f64;
        let mean_y: f64 = xs.iter().map(|p| p[1]).sum::<f64>() / n as f64;
        let sd = |f: &dyn Fn(&[f64; 2]) -> f64, mean: f64| {
            (xs.iter().map(|p| (f(p) - mean).powi(2)).sum::<f64>() / n as f64).sqrt()
        };
        let sx = sd(&|p| p[0], mean_x);
        let sy = sd(&|p| p[1], mean_y);
        // 5σ statistical gates for N=40k.
        assert!((mean_x - 1.0).abs() < 5.0 * 0.6 / (n as f64).sqrt(), "mean_x {mean_x}");
        assert!((mean_y + 1.0).abs() < 5.0 * 0.9 / (n as f64).sqrt(), "mean_y {mean_y}");
        assert!((sx - 0.6).abs() < 0.02, "sd_x {sx}");
        assert!((sy - 0.9).abs() < 0.03, "sd_y {sy}");
    }

    #[test]
    fn eigenstate_trajectories_stationary() {
        let u = units();
        let g = Arc::new(Grid::line(-8.0, 8.0, 129, Boundary::DirichletZero).unwrap());
        let pot = eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &g, &u).unwrap();
        let sol = crate::tdse::solve_eigenpairs(&pot, &u, 1).unwrap();
        let psi0 = ComplexField::from_real(&sol.states[0]);
        let cfg = EvolutionConfig {
            dt: 0.01,
            steps: 20,
            method: Method::CrankNicolson,
            snapshot_stride: 5,
        };
        let tl = evolve(&psi0, &pot, &u, &cfg).unwrap();
        let starts: Vec<[f64; 2]> = vec![[-1.0, 0.0], [0.25, 0.0], [2.0, 0.0]];
        let ens = integrate_trajectories(&tl, &starts, 4, Interpolation::Cubic).unwrap();
        for t in 0..ens.times().len() {
            for (k, p) in ens.at_time(t).iter().enumerate() {
                assert!(
                    (p[0] - starts[k][0]).abs() <= 1e-10,
                    "drift {} at t index {t}",
                    (p[0] - starts[k][0]).abs()
                );
            }
        }
    }

    #[test]
    fn free_gaussian_bohmian_scaling_law() {
        // x(t) = x₀·σ(t)/σ₀ with σ(t) = σ₀√(1+(ℏt/2mσ₀²)²): x(2) = √2·x₀.
        let u = units();
        let g = Arc::new(Grid::line(-10.0, 10.0, 512, Boundary::Periodic).unwrap());
        let psi = states::gaussian(&g, &u, &[0.0], &[1.0], &[0.0]).unwrap();
        let free = eval_potential(&PotentialSpec::Free, &g, &u).unwrap();
        let cfg = EvolutionConfig {
            dt: 0.005,
            steps: 400,
            method: Method::SplitSpectral,
            snapshot_stride: 4,
        };
        let tl = evolve(&psi, &free, &u, &cfg).unwrap();
        let starts: Vec<[f64; 2]> = vec![[1.0, 0.0]];
        let ens = integrate_trajectories(&tl, &starts, 4, Interpolation::Cubic).unwrap();
        let last = ens.at_time(ens.times().len() - 1)[0][0];
        assert!(
            (last - 2.0f64.sqrt()).abs() < 2e-3,
            "x(2) = {last} vs {}",
            2.0f64.sqrt()
        );
    }

    #[test]
    fn equivariance_and_ordering_small_ensemble() {
        let u = units();
        let g = Arc::new(Grid::line(-10.0, 10.0, 256, Boundary::Periodic).unwrap());
        let psi = states::gaussian(&g, &u, &[0.0], &[1.0], &[0.0]).unwrap();
        let free = eval_potential(&PotentialSpec::Free, &g, &u).unwrap();
        let cfg = EvolutionConfig {
            dt: 0.01,
            steps: 100,
            method: Method::SplitSpectral,
            snapshot_stride: 5,
        };
        let tl = evolve(&psi, &free, &u, &cfg).unwrap();
        let p0 = tl.snapshot(0).density();
        let starts = sample_initial_positions(&p0, 4000, 3).unwrap();
        let ens = integrate_trajectories(&tl, &starts, 4, Interpolation::Cubic).unwrap();
        assert_eq!(ordering_violations(&ens).unwrap(), 0);
        let pf = tl.snapshot(tl.len() - 1).density();
        let stat = equivariance_statistic(&ens, &pf, 50).unwrap();
        // Loose gate for a 4k ensemble; the acceptance suite runs 1e5.
        assert!(stat.tv_distance < 0.08, "TV {}", stat.tv_distance);
        // Degenerate one-particle ensemble: well-defined, no crash.
        let one = integrate_trajectories(&tl, &starts[..1], 2, Interpolation::Linear).unwrap();
        let s1 = equivariance_statistic(&one, &pf, 50).unwrap();
        assert!(s1.tv_distance <= 1.0);
    }

    #[test]
    fn integrate_rejects_bad_input() {
        let u = units();
        let g = Arc::new(Grid::line(-10.0, 10.0, 64, Boundary::Periodic).unwrap());
        let psi = states::gaussian(&g, &u, &[0.0], &[1.0], &[0.0]).unwrap();
        let free = eval_potential(&PotentialSpec::Free, &g, &u).unwrap();
        let cfg = EvolutionConfig {
            dt: 0.01,
            steps: 2,
            method: Method::SplitSpectral,
            snapshot_stride: 1,
        };
        let tl = evolve(&psi, &free, &u, &cfg).unwrap();
        assert!(matches!(
            integrate_trajectories(&tl, &[[25.0, 0.0]], 2, Interpolation::Linear),
            Err(BohmError::PositionOutOfBounds { index: 0 })
        ));
        assert!(matches!(
            integrate_trajectories(&tl, &[[1.0, 0.0]], 0, Interpolation::Linear),
            Err(BohmError::BadSubsteps)
        ));
    }
}
