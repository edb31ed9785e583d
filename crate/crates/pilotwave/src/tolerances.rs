//! Central registry of numerical tolerances.
//!
//! Every acceptance gate in the library references a named constant from
//! this module so that the tolerance budget is auditable in one place.
//! Constants fall into three classes: exact-identity gates (roundoff-level,
//! method-independent), discretization gates (tied to the reference
//! resolutions below), and statistical gates (tied to fixed seeds and
//! ensemble sizes).

/// Reference 1D resolution used by the discretization gates.
pub const REFERENCE_POINTS_1D: usize = 512;
/// Reference per-axis 2D resolution used by the discretization gates.
pub const REFERENCE_POINTS_2D: usize = 256;

/// Per-step norm drift allowed for a unitary propagator step.
pub const NORM_DRIFT_PER_STEP: f64 = 1e-10;
/// Relative drift allowed in the method-consistent discrete energy over a run.
pub const ENERGY_DRIFT_REL: f64 = 1e-6;
/// L² distance allowed between split-spectral and Crank–Nicolson states
/// evolved to t = 1 at the reference resolution.
pub const METHOD_CROSS_CHECK_L2: f64 = 1e-4;
/// Absolute accuracy of dense-eigensolver energies at the reference
/// resolution (harmonic trap, lowest four states).
pub const EIGEN_ENERGY_ABS: f64 = 1e-3;
/// Relative accuracy of the particle-in-a-box ground energy.
pub const BOX_ENERGY_REL: f64 = 1e-3;
/// Absolute energy accuracy of the imaginary-time ground state.
pub const IMAGINARY_TIME_ENERGY_ABS: f64 = 1e-3;

/// Residual norms that vanish identically on stationary eigenstates
/// (velocity, Chetaev condition, continuity, amplitude transport).
pub const EIGENSTATE_RESIDUAL: f64 = 1e-10;
/// Pointwise agreement of the two quantum-potential routes, and of
/// Q with E − U, on stationary eigenstates.
pub const EIGENSTATE_IDENTITY: f64 = 1e-6;
/// Phase-equation residual norm on stationary eigenstates (limited by the
/// O(dt²) effective-energy shift of the propagator).
pub const PHASE_RESIDUAL: f64 = 1e-6;
/// Residual norms for smooth solver output at the reference resolution.
pub const SOLVER_RESIDUAL: f64 = 1e-3;
/// Manufactured uniform-advection continuity residual.
pub const MANUFACTURED_TRANSPORT: f64 = 1e-4;
/// Expected residual reduction when (h, dt) → (h/2, dt/2) on smooth
/// scenarios: ratio must land in [3.5, 4.5] for second-order behavior.
pub const REFINEMENT_RATIO_LOW: f64 = 3.5;
pub const REFINEMENT_RATIO_HIGH: f64 = 4.5;

/// Chetaev residual of the analytically known free spreading Gaussian.
pub const CHETAEV_FREE_GAUSSIAN: f64 = 1e-3;
/// Chetaev residual norm of a coherent state (spatially uniform velocity).
pub const CHETAEV_COHERENT: f64 = 1e-6;

/// Uncertainty decomposition var_p = gradS_var + 2m⟨Q⟩ for analytic states.
pub const DECOMPOSITION_ANALYTIC: f64 = 1e-8;
/// Uncertainty decomposition for solver outputs at reference resolution.
pub const DECOMPOSITION_SOLVER: f64 = 1e-5;
/// Slack on the uncertainty product bound var_x·var_p ≥ ℏ²/4.
pub const UNCERTAINTY_BOUND_SLACK: f64 = 1e-12;
/// Relative agreement of the direct and integrated-by-parts perturbation
/// actions when the node mask is empty.
pub const ACTION_DUAL_ROUTE_REL: f64 = 1e-6;
/// Stationarity-probe derivative bound for a constrained extremum at
/// probe scale 1e−3.
pub const STATIONARITY_DERIVATIVE: f64 = 1e-4;

/// Total-variation gate for guided-ensemble equivariance
/// (N = 1e5 particles, 50 bins, fixed seed).
pub const EQUIVARIANCE_TV: f64 = 0.03;
/// Total-variation noise floor measured by resampling the target density.
pub const RESAMPLING_TV: f64 = 0.02;
/// Kolmogorov–Smirnov gate for inverse-CDF sampling of a uniform density
/// at N = 1e5.
pub const SAMPLING_KS: f64 = 0.006;
/// Position accuracy of the analytically known free-Gaussian trajectory.
pub const TRAJECTORY_FREE_GAUSSIAN: f64 = 2e-3;
/// Stationary-trajectory drift bound for eigenstate timelines.
pub const TRAJECTORY_STATIONARY: f64 = 1e-10;

/// Poincaré bilinear-invariant drift over long classical integrations.
pub const POINCARE_INVARIANT_DRIFT: f64 = 1e-8;
/// Relative accuracy of the leading Lyapunov characteristic value for the
/// inverted-harmonic benchmark.
pub const LYAPUNOV_REL: f64 = 0.02;
/// Energy drift of the classical RK4 Hamilton flow over the acceptance runs.
pub const CLASSICAL_ENERGY_DRIFT: f64 = 1e-8;
