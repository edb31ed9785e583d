//! Classical mechanics companion: Hamilton flows, the Poincaré variational
//! (first-variation) equations along a reference trajectory, their bilinear
//! invariant, Benettin Lyapunov estimates, and a first-approximation
//! stability verdict from the characteristic exponents.
//!
//! Exponents are reported with the growth-rate sign convention: positive
//! λ means exponential divergence of nearby solutions. (The classical
//! characteristic value assigns decaying solutions a positive number; all
//! outputs here are its negative, and CSV/labels say "growth exponent".)

use rand::Rng;
use thiserror::Error;

use crate::bohm::{sample_field, Interpolation, VelocityField};
use crate::potential::{
    classical_gradient, classical_hessian, classical_value, PotentialError, PotentialSpec,
};
use crate::rng::{named_stream, STREAM_LYAPUNOV_OFFSET};
use crate::units::UnitSystem;

#[derive(Debug, Error, PartialEq)]
pub enum ClassicalError {
    #[error("state dimension must be 1 or 2, got {0}")]
    BadDimension(usize),
    #[error("position and momentum dimensions differ: {q} vs {p}")]
    MixedDimensions { q: usize, p: usize },
    #[error("state has a non-finite component")]
    NonFiniteState,
    #[error("mass must be finite and positive, got {0}")]
    BadMass(f64),
    #[error("time step must be finite and positive, got {0}")]
    BadTimeStep(f64),
    #[error("integration produced a non-finite state at step {step}")]
    NonFinite { step: usize },
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("trajectory needs at least {want} states, got {got}")]
    ShortTrajectory { want: usize, got: usize },
    #[error("variational dimension {got} does not match the reference dimension {want}")]
    VariationalDimension { got: usize, want: usize },
    #[error("trajectory lengths differ: {a} vs {b}")]
    MismatchedLengths { a: usize, b: usize },
    #[error("time stamps disagree at index {index}")]
    MismatchedStamps { index: usize },
    #[error("initial state dimension {got} does not match the flow dimension {want}")]
    FlowDimension { got: usize, want: usize },
    #[error("horizon must be at least one renormalization interval")]
    BadHorizon,
    #[error("separation underflowed to {separation:.3e} in interval {interval}; companions merged")]
    SeparationUnderflow { interval: usize, separation: f64 },
    #[error("separation overflowed to {separation:.3e} in interval {interval}; left the linear regime")]
    SeparationOverflow { interval: usize, separation: f64 },
    #[error("zero-characteristic check needs {want} independent solutions, got {got}")]
    IncompleteBasis { want: usize, got: usize },
    #[error("variational solutions are linearly dependent (normalized Gram determinant {det:.3e})")]
    DependentSolutions { det: f64 },
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// A point of phase space with its time stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl ClassicalState {
    pub fn new(q: &[f64], p: &[f64], t: f64) -> Result<Self, ClassicalError> {
        let state = Self { q: q.to_vec(), p: p.to_vec(), t };
        state.validate()?;
        Ok(state)
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    fn validate(&self) -> Result<(), ClassicalError> {
        if self.q.len() != self.p.len() {
            return Err(ClassicalError::MixedDimensions { q: self.q.len(), p: self.p.len() });
        }
        if self.q.is_empty() || self.q.len() > 2 {
            return Err(ClassicalError::BadDimension(self.q.len()));
        }
        let finite =
            self.t.is_finite() && self.q.iter().chain(&self.p).all(|v| v.is_finite());
        if !finite {
            return Err(ClassicalError::NonFiniteState);
        }
        Ok(())
    }
}

/// A first-variation vector (ξ, η) paired with a reference solution.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalState {
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
}

impl VariationalState {
    pub fn new(xi: &[f64], eta: &[f64]) -> Result<Self, ClassicalError> {
        if xi.len() != eta.len() {
            return Err(ClassicalError::MixedDimensions { q: xi.len(), p: eta.len() });
        }
        if xi.is_empty() || xi.len() > 2 {
            return Err(ClassicalError::BadDimension(xi.len()));
        }
        if !xi.iter().chain(eta).all(|v| v.is_finite()) {
            return Err(ClassicalError::NonFiniteState);
        }
        Ok(Self { xi: xi.to_vec(), eta: eta.to_vec() })
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    /// Euclidean norm of the stacked (ξ, η) vector.
    pub fn norm(&self) -> f64 {
        self.xi.iter().chain(&self.eta).map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Hamiltonian H = |p|²/2m + U(q) with U from the analytic potential catalog.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    potential: PotentialSpec,
    mass: f64,
    units: UnitSystem,
}

impl HamiltonianSpec {
    pub fn new(potential: PotentialSpec, mass: f64) -> Result<Self, ClassicalError> {
        potential.validate()?;
        if !(mass.is_finite() && mass > 0.0) {
            return Err(ClassicalError::BadMass(mass));
        }
        let units = UnitSystem::new(1.0, mass).expect("mass validated above");
        Ok(Self { potential, mass, units })
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Total energy of a state.
    pub fn energy(&self, state: &ClassicalState) -> Result<f64, ClassicalError> {
        state.validate()?;
        let u = classical_value(&self.potential, &state.q, &self.units)?;
        let ke = state.p.iter().map(|p| p * p).sum::<f64>() / (2.0 * self.mass);
        Ok(ke + u)
    }
}

/// Time-ordered sequence of classical states produced by `hamilton_flow`.
#[derive(Debug, Clone)]
pub struct ClassicalTrajectory {
    states: Vec<ClassicalState>,
}

impl ClassicalTrajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn states(&self) -> &[ClassicalState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &ClassicalState {
        &self.states[i]
    }

    pub fn last(&self) -> &ClassicalState {
        self.states.last().expect("trajectories hold at least the initial state")
    }
}

/// Time-ordered sequence of variational states on shared stamps.
#[derive(Debug, Clone)]
pub struct VariationalTrajectory {
    times: Vec<f64>,
    states: Vec<VariationalState>,
}

impl VariationalTrajectory {
    /// Assemble a trajectory from explicit stamps and states (e.g. analytic
    /// closures in tests); lengths and dimensions must agree.
    pub fn from_parts(
        times: Vec<f64>,
        states: Vec<VariationalState>,
    ) -> Result<Self, ClassicalError> {
        if times.len() != states.len() {
            return Err(ClassicalError::MismatchedLengths { a: times.len(), b: states.len() });
        }
        let first = states.first().ok_or(ClassicalError::ShortTrajectory { want: 1, got: 0 })?;
        let d = first.dim();
        if states.iter().any(|s| s.dim() != d || s.xi.len() != s.eta.len()) {
            return Err(ClassicalError::VariationalDimension { got: 0, want: d });
        }
        if !times.iter().all(|t| t.is_finite()) {
            return Err(ClassicalError::NonFiniteState);
        }
        Ok(Self { times, states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[VariationalState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &VariationalState {
        &self.states[i]
    }

    pub fn last(&self) -> &VariationalState {
        self.states.last().expect("trajectories hold at least the initial state")
    }
}

// ---------------------------------------------------------------------------
// Flows and the shared RK4 stepper
// ---------------------------------------------------------------------------

/// A dynamical flow the integrators can drive: full phase-space Hamilton
/// dynamics (state `[q.., p..]`), or configuration-space transport along a
/// frozen guidance velocity snapshot (state `[q..]`).
#[derive(Clone)]
pub enum Flow<'a> {
    Hamiltonian(&'a HamiltonianSpec),
    FrozenGuidance { velocity: &'a VelocityField, interpolation: Interpolation },
}

impl Flow<'_> {
    /// Length the flat state vector must have, if the flow pins it.
    fn check_state_len(&self, len: usize) -> Result<(), ClassicalError> {
        match self {
            Flow::Hamiltonian(_) => {
                if len == 2 || len == 4 {
                    Ok(())
                } else {
                    Err(ClassicalError::BadDimension(len / 2))
                }
            }
            Flow::FrozenGuidance { velocity, .. } => {
                let want = velocity.grid().ndim();
                if len == want {
                    Ok(())
                } else {
                    Err(ClassicalError::FlowDimension { got: len, want })
                }
            }
        }
    }

    fn derivative(&self, y: &[f64], dy: &mut [f64]) -> Result<(), ClassicalError> {
        match self {
            Flow::Hamiltonian(spec) => {
                let d = y.len() / 2;
                let (q, p) = y.split_at(d);
                for i in 0..d {
                    dy[i] = p[i] / spec.mass;
                }
                classical_gradient(&spec.potential, q, &spec.units, &mut dy[d..])?;
                for g in dy[d..].iter_mut() {
                    *g = -*g;
                }
                Ok(())
            }
            Flow::FrozenGuidance { velocity, interpolation } => {
                let grid = velocity.grid();
                let mut pos = [0.0; 2];
                pos[..y.len()].copy_from_slice(y);
                for (a, component) in velocity.components.iter().enumerate() {
                    dy[a] = sample_field(component, grid, &pos, *interpolation);
                }
                Ok(())
            }
        }
    }
}

/// One classical RK4 step of the autonomous flow, in place.
fn rk4_step(flow: &Flow, y: &mut [f64], h: f64) -> Result<(), ClassicalError> {
    let n = y.len();
    let mut k1 = [0.0; 4];
    let mut k2 = [0.0; 4];
    let mut k3 = [0.0; 4];
    let mut k4 = [0.0; 4];
    let mut tmp = [0.0; 4];
    flow.derivative(y, &mut k1[..n])?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    flow.derivative(&tmp[..n], &mut k2[..n])?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    flow.derivative(&tmp[..n], &mut k3[..n])?;
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    flow.derivative(&tmp[..n], &mut k4[..n])?;
    for i in 0..n {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Hamilton flow
// ---------------------------------------------------------------------------

/// Integrate the canonical equations q' = p/m, p' = −∇U(q) with RK4,
/// returning the states at every step (initial state included).
pub fn hamilton_flow(
    spec: &HamiltonianSpec,
    x0: &ClassicalState,
    dt: f64,
    steps: usize,
) -> Result<ClassicalTrajectory, ClassicalError> {
    x0.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(ClassicalError::BadTimeStep(dt));
    }
    let d = x0.dim();
    let flow = Flow::Hamiltonian(spec);
    let mut y = [0.0; 4];
    y[..d].copy_from_slice(&x0.q);
    y[d..2 * d].copy_from_slice(&x0.p);
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x0.clone());
    for step in 1..=steps {
        rk4_step(&flow, &mut y[..2 * d], dt)?;
        if !y[..2 * d].iter().all(|v| v.is_finite()) {
            return Err(ClassicalError::NonFinite { step });
        }
        states.push(ClassicalState {
            q: y[..d].to_vec(),
            p: y[d..2 * d].to_vec(),
            t: x0.t + step as f64 * dt,
        });
    }
    Ok(ClassicalTrajectory { states })
}

// ---------------------------------------------------------------------------
// Variational flow
// ---------------------------------------------------------------------------

/// Evaluate the potential Hessian at a point, into a fixed d×d buffer.
fn hessian_at(spec: &HamiltonianSpec, q: &[f64]) -> Result<[f64; 4], ClassicalError> {
    let d = q.len();
    let mut out = [0.0; 4];
    classical_hessian(&spec.potential, q, &spec.units, &mut out[..d * d])?;
    Ok(out)
}

/// Right-hand side of the linear variational system ξ' = η/m, η' = −U''(q)ξ.
fn variational_rhs(hess: &[f64; 4], d: usize, mass: f64, z: &[f64; 4], out: &mut [f64; 4]) {
    for i in 0..d {
        out[i] = z[d + i] / mass;
    }
    for i in 0..d {
        let mut acc = 0.0;
        for j in 0..d {
            acc += hess[i * d + j] * z[j];
        }
        out[d + i] = -acc;
    }
}

/// Integrate the first-variation equations along a reference trajectory.
///
/// The coefficient matrix U''(q) is evaluated analytically on the reference;
/// RK4 midpoints use a cubic Hermite interpolation of the reference position
/// (endpoint slopes q' = p/m), which preserves the integrator's order.
pub fn variational_flow(
    spec: &HamiltonianSpec,
    reference: &ClassicalTrajectory,
    v0: &VariationalState,
) -> Result<VariationalTrajectory, ClassicalError> {
    if reference.is_empty() {
        return Err(ClassicalError::ShortTrajectory { want: 1, got: 0 });
    }
    let d = reference.dim();
    if v0.dim() != d {
        return Err(ClassicalError::VariationalDimension { got: v0.dim(), want: d });
    }
    let m = spec.mass;
    let mut z = [0.0; 4];
    z[..d].copy_from_slice(&v0.xi);
    z[d..2 * d].copy_from_slice(&v0.eta);
    let mut times = Vec::with_capacity(reference.len());
    let mut states = Vec::with_capacity(reference.len());
    times.push(reference.state(0).t);
    states.push(v0.clone());
    let mut k1 = [0.0; 4];
    let mut k2 = [0.0; 4];
    let mut k3 = [0.0; 4];
    let mut k4 = [0.0; 4];
    let mut tmp = [0.0; 4];
    for k in 0..reference.len() - 1 {
        let s0 = reference.state(k);
        let s1 = reference.state(k + 1);
        let h = s1.t - s0.t;
        if !(h.is_finite() && h > 0.0) {
            return Err(ClassicalError::BadTimeStep(h));
        }
        let mut q_mid = [0.0; 2];
        for a in 0..d {
            q_mid[a] =
                0.5 * (s0.q[a] + s1.q[a]) + 0.125 * h * (s0.p[a] - s1.p[a]) / m;
        }
        let hess0 = hessian_at(spec, &s0.q)?;
        let hess_mid = hessian_at(spec, &q_mid[..d])?;
        let hess1 = hessian_at(spec, &s1.q)?;
        variational_rhs(&hess0, d, m, &z, &mut k1);
        for i in 0..2 * d {
            tmp[i] = z[i] + 0.5 * h * k1[i];
        }
        variational_rhs(&hess_mid, d, m, &tmp, &mut k2);
        for i in 0..2 * d {
            tmp[i] = z[i] + 0.5 * h * k2[i];
        }
        variational_rhs(&hess_mid, d, m, &tmp, &mut k3);
        for i in 0..2 * d {
            tmp[i] = z[i] + h * k3[i];
        }
        variational_rhs(&hess1, d, m, &tmp, &mut k4);
        for i in 0..2 * d {
            z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !z[..2 * d].iter().all(|v| v.is_finite()) {
            return Err(ClassicalError::NonFinite { step: k + 1 });
        }
        times.push(s1.t);
        states.push(VariationalState {
            xi: z[..d].to_vec(),
            eta: z[d..2 * d].to_vec(),
        });
    }
    Ok(VariationalTrajectory { times, states })
}

// ---------------------------------------------------------------------------
// Bilinear invariant
// ---------------------------------------------------------------------------

fn check_paired(
    a: &VariationalTrajectory,
    b: &VariationalTrajectory,
) -> Result<(), ClassicalError> {
    if a.len() != b.len() {
        return Err(ClassicalError::MismatchedLengths { a: a.len(), b: b.len() });
    }
    if a.dim() != b.dim() {
        return Err(ClassicalError::VariationalDimension { got: b.dim(), want: a.dim() });
    }
    for (index, (&ta, &tb)) in a.times.iter().zip(&b.times).enumerate() {
        if (ta - tb).abs() > 1e-12 * ta.abs().max(1.0) {
            return Err(ClassicalError::MismatchedStamps { index });
        }
    }
    Ok(())
}

/// Bilinear invariant C(t) = Σ_s (ξ_s η'_s − η_s ξ'_s) of two variational
/// solutions on the same reference, evaluated at every shared stamp.
/// C is antisymmetric in its arguments and constant along exact solutions.
pub fn poincare_invariant(
    sol_a: &VariationalTrajectory,
    sol_b: &VariationalTrajectory,
) -> Result<Vec<f64>, ClassicalError> {
    check_paired(sol_a, sol_b)?;
    let d = sol_a.dim();
    Ok(sol_a
        .states
        .iter()
        .zip(&sol_b.states)
        .map(|(a, b)| (0..d).map(|s| a.xi[s] * b.eta[s] - a.eta[s] * b.xi[s]).sum())
        .collect())
}

// ---------------------------------------------------------------------------
// Lyapunov estimate (Benettin)
// ---------------------------------------------------------------------------

/// Initial and renormalized companion separation.
pub const BENETTIN_OFFSET: f64 = 1e-8;
/// Below this separation the companions have numerically merged.
const SEPARATION_UNDERFLOW: f64 = 1e-14;
/// Above this separation the companion has left the linear regime.
const SEPARATION_OVERFLOW: f64 = 1e-2;

/// Knobs for the two-trajectory exponent estimator.
#[derive(Debug, Clone, Copy)]
pub struct LyapunovOpts {
    /// RK4 time step.
    pub dt: f64,
    /// Total integration time (rounded to whole renormalization intervals).
    pub horizon: f64,
    /// Time between separation renormalizations (rounded to whole steps).
    pub renorm_interval: f64,
    /// Scenario seed; the offset direction comes from the "lyapunov-offset" stream.
    pub seed: u64,
}

/// One renormalization interval of a Benettin run.
#[derive(Debug, Clone, Copy)]
pub struct LyapunovInterval {
    pub index: usize,
    /// ln(separation growth) accumulated over this interval.
    pub log_growth: f64,
    /// Running exponent estimate after this interval.
    pub lambda_running: f64,
}

/// Result of `lyapunov_estimate`: the exponent and its interval history.
#[derive(Debug, Clone)]
pub struct LyapunovEstimate {
    /// Largest growth exponent, (1/T)·Σ log growths.
    pub lambda_max: f64,
    pub intervals: Vec<LyapunovInterval>,
}

fn separation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Estimate the largest growth exponent of a flow by the Benettin
/// two-trajectory method: evolve a reference and a companion offset by
/// 1e−8, renormalize the separation back to 1e−8 every interval, and
/// average the logarithmic growth rates.
pub fn lyapunov_estimate(
    flow: &Flow,
    x0: &[f64],
    opts: &LyapunovOpts,
) -> Result<LyapunovEstimate, ClassicalError> {
    flow.check_state_len(x0.len())?;
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(ClassicalError::NonFiniteState);
    }
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return Err(ClassicalError::BadTimeStep(opts.dt));
    }
    if !(opts.renorm_interval.is_finite() && opts.renorm_interval > 0.0)
        || !opts.horizon.is_finite()
        || opts.horizon + 1e-12 < opts.renorm_interval
    {
        return Err(ClassicalError::BadHorizon);
    }
    let steps_per = ((opts.renorm_interval / opts.dt).round() as usize).max(1);
    let interval_len = steps_per as f64 * opts.dt;
    let n_intervals = ((opts.horizon / interval_len).round() as usize).max(1);

    let mut rng = named_stream(opts.seed, STREAM_LYAPUNOV_OFFSET);
    let n = x0.len();
    let mut dir = [0.0; 4];
    loop {
        for value in dir[..n].iter_mut() {
            *value = rng.gen_range(-1.0..1.0);
        }
        let norm = dir[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-2 {
            for value in dir[..n].iter_mut() {
                *value /= norm;
            }
            break;
        }
    }

    let mut y_ref = x0.to_vec();
    let mut y_off: Vec<f64> =
        x0.iter().zip(&dir[..n]).map(|(x, u)| x + BENETTIN_OFFSET * u).collect();
    let mut sum_logs = 0.0;
    let mut intervals = Vec::with_capacity(n_intervals);
    let mut global_step = 0usize;
    for index in 0..n_intervals {
        for _ in 0..steps_per {
            rk4_step(flow, &mut y_ref, opts.dt)?;
            rk4_step(flow, &mut y_off, opts.dt)?;
            global_step += 1;
            if !y_ref.iter().chain(&y_off).all(|v| v.is_finite()) {
                return Err(ClassicalError::NonFinite { step: global_step });
            }
            let sep = separation(&y_ref, &y_off);
            if sep < SEPARATION_UNDERFLOW {
                return Err(ClassicalError::SeparationUnderflow { interval: index, separation: sep });
            }
            if sep > SEPARATION_OVERFLOW {
                return Err(ClassicalError::SeparationOverflow { interval: index, separation: sep });
            }
        }
        let sep = separation(&y_ref, &y_off);
        let log_growth = (sep / BENETTIN_OFFSET).ln();
        sum_logs += log_growth;
        let lambda_running = sum_logs / ((index + 1) as f64 * interval_len);
        intervals.push(LyapunovInterval { index, log_growth, lambda_running });
        let scale = BENETTIN_OFFSET / sep;
        for (off, reference) in y_off.iter_mut().zip(&y_ref) {
            *off = reference + (*off - reference) * scale;
        }
    }
    let lambda_max = sum_logs / (n_intervals as f64 * interval_len);
    Ok(LyapunovEstimate { lambda_max, intervals })
}

// ---------------------------------------------------------------------------
// Zero-characteristic stability verdict
// ---------------------------------------------------------------------------

/// Exponent magnitude below which a variational solution counts as
/// non-growing in the first-approximation verdict.
pub const STABILITY_TOLERANCE: f64 = 0.02;

/// Independence threshold on the normalized Gram determinant.
const GRAM_TOLERANCE: f64 = 1e-10;

/// Verdict of `zero_characteristic_check`.
#[derive(Debug, Clone)]
pub struct StabilityVerdict {
    /// Growth exponent estimate per solution, in input order.
    pub exponents: Vec<f64>,
    /// Threshold the verdict applied to |exponent|.
    pub tolerance: f64,
    pub stable: bool,
}

impl StabilityVerdict {
    pub fn label(&self) -> &'static str {
        if self.stable {
            "stable (first approximation)"
        } else {
            "unstable"
        }
    }
}

/// Determinant by Gaussian elimination with partial pivoting (n ≤ 4).
fn determinant(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for c in 0..n {
                a.swap(pivot * n + c, col * n + c);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            for c in col..n {
                a[row * n + c] -= f * a[col * n + c];
            }
        }
    }
    det
}

/// Classify the reference orbit from a full basis of variational solutions:
/// estimate each solution's growth exponent (interval-logarithm average, the
/// same bookkeeping as `lyapunov_estimate`) and report stability in first
/// approximation iff every |exponent| is at most `STABILITY_TOLERANCE`.
///
/// The solutions must be independent: the Gram determinant of their
/// normalized initial vectors has to stay above 1e−10.
pub fn zero_characteristic_check(
    solutions: &[VariationalTrajectory],
) -> Result<StabilityVerdict, ClassicalError> {
    let first = solutions
        .first()
        .ok_or(ClassicalError::IncompleteBasis { want: 2, got: 0 })?;
    let d = first.dim();
    let want = 2 * d;
    if solutions.len() != want {
        return Err(ClassicalError::IncompleteBasis { want, got: solutions.len() });
    }
    for other in &solutions[1..] {
        check_paired(first, other)?;
    }
    if first.len() < 2 {
        return Err(ClassicalError::ShortTrajectory { want: 2, got: first.len() });
    }

    let initial: Vec<Vec<f64>> = solutions
        .iter()
        .map(|s| {
            let v = s.state(0);
            v.xi.iter().chain(&v.eta).copied().collect()
        })
        .collect();
    let norms: Vec<f64> =
        initial.iter().map(|z| z.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    if norms.iter().any(|&n| n == 0.0) {
        return Err(ClassicalError::DependentSolutions { det: 0.0 });
    }
    let mut gram = vec![0.0; want * want];
    for i in 0..want {
        for j in 0..want {
            let dot: f64 = initial[i].iter().zip(&initial[j]).map(|(a, b)| a * b).sum();
            gram[i * want + j] = dot / (norms[i] * norms[j]);
        }
    }
    let det = determinant(&mut gram, want);
    if det.abs() < GRAM_TOLERANCE {
        return Err(ClassicalError::DependentSolutions { det });
    }

    let t_total = first.times[first.len() - 1] - first.times[0];
    if !(t_total.is_finite() && t_total > 0.0) {
        return Err(ClassicalError::BadTimeStep(t_total));
    }
    let exponents: Vec<f64> = solutions
        .iter()
        .map(|s| {
            let mut sum = 0.0;
            for k in 0..s.len() - 1 {
                sum += (s.state(k + 1).norm() / s.state(k).norm()).ln();
            }
            sum / t_total
        })
        .collect();
    let stable = exponents
        .iter()
        .all(|l| l.is_finite() && l.abs() <= STABILITY_TOLERANCE);
    Ok(StabilityVerdict { exponents, tolerance: STABILITY_TOLERANCE, stable })
}
