//! Verification instruments: dissipation-condition residuals, transport and
//! phase-equation residuals, the uncertainty decomposition, the perturbation
//! action with its dual-route identity, and a stationarity probe.
//!
//! All residual norms are P-weighted L² norms over unmasked points —
//! unweighted norms would be dominated by meaningless values in exponential
//! tails and near nodes. Derivative stencils are only ever applied to smooth
//! fields (Re ψ, Im ψ, |ψ|, P); quotients by the floored density stay
//! pointwise so that node floors cannot leak into neighboring stencils.

use num_complex::Complex64;
use thiserror::Error;

use crate::bohm::{self, quantum_potential, velocity_field, BohmError};
use crate::field::{ComplexField, NodeMask, RealField};
use crate::grid::Boundary;
use crate::ops;
use crate::spectral::{wavenumbers, Spectral};
use crate::tdse::WaveTimeline;
use crate::units::UnitSystem;

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("timeline needs at least {want} snapshots, has {got}")]
    TooFewSnapshots { want: usize, got: usize },
    #[error("phase anchor point is node-masked")]
    AnchorMasked,
    #[error("state is not normalized: ∫|ψ|² = {0}")]
    NotNormalized(f64),
    #[error("diagnostic requires a 1D state")]
    Needs1d,
    #[error("probe requires a real state (max |Im ψ| = {0})")]
    NotReal(f64),
    #[error("bump support [{lo}, {hi}] reaches the domain boundary")]
    BumpTouchesBoundary { lo: f64, hi: f64 },
    #[error("bump width and probe scale must be positive and finite")]
    BadProbe,
}

impl From<BohmError> for DiagnosticsError {
    fn from(e: BohmError) -> Self {
        match e {
            BohmError::AnchorMasked => DiagnosticsError::AnchorMasked,
            BohmError::TooFewSnapshots { want, got } => {
                DiagnosticsError::TooFewSnapshots { want, got }
            }
            BohmError::BoundarySnapshot { len, .. } => {
                DiagnosticsError::TooFewSnapshots { want: 3, got: len }
            }
            other => panic!("unexpected guidance error in diagnostics: {other}"),
        }
    }
}

/// P-weighted L² norm of a residual field over unmasked points:
/// sqrt(Σ r²·P·w / Σ P·w).
pub fn weighted_norm(residual: &RealField, density: &RealField, mask: &NodeMask) -> f64 {
    let grid = residual.grid();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..grid.len() {
        if mask.is_masked(i) {
            continue;
        }
        let pw = density.data()[i].max(0.0) * grid.quad_weight(i);
        num += residual.data()[i] * residual.data()[i] * pw;
        den += pw;
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        0.0
    }
}

/// Shared per-state geometry for the residual diagnostics: velocity
/// components, density with its gradient, and L = ∇·v evaluated through the
/// product-rule expansion ΔS/m = [ℏ(aΔb − bΔa)/P − m v·∇P] / (m P).
struct FlowGeometry {
    velocity: Vec<RealField>,
    density: RealField,
    grad_density: Vec<RealField>,
    div_velocity: RealField,
    mask: NodeMask,
}

impl FlowGeometry {
    fn new(psi: &ComplexField, units: &UnitSystem) -> Self {
        let grid = psi.grid().clone();
        let mask = psi.node_mask();
        let floor = mask.floor.max(f64::MIN_POSITIVE);
        let vel = velocity_field(psi, units);
        let density = psi.density();
        let grad_density: Vec<RealField> = (0..grid.ndim())
            .map(|a| ops::gradient(&density, a).expect("axis in range"))
            .collect();
        let re = RealField::new(grid.clone(), psi.data().iter().map(|z| z.re).collect())
            .expect("same grid");
        let im = RealField::new(grid.clone(), psi.data().iter().map(|z| z.im).collect())
            .expect("same grid");
        let lap_re = ops::laplacian(&re);
        let lap_im = ops::laplacian(&im);
        let hbar_m = units.hbar() / units.mass();
        let div = (0..grid.len())
            .map(|i| {
                let p = density.data()[i].max(floor);
                let curl_free = hbar_m
                    * (re.data()[i] * lap_im.data()[i] - im.data()[i] * lap_re.data()[i])
                    / p;
                let advect: f64 = (0..grid.ndim())
                    .map(|a| vel.components[a].data()[i] * grad_density[a].data()[i])
                    .sum();
                curl_free - advect / p
            })
            .collect();
        FlowGeometry {
            velocity: vel.components,
            density,
            grad_density,
            div_velocity: RealField::new(grid, div).expect("same grid"),
            mask,
        }
    }
}

/// Dissipation-condition residual L = ∇·v = (1/m)·Σᵢ ∂/∂qᵢ(∂S/∂qᵢ), with
/// its P-weighted norm. L vanishes identically on stationary states and is
/// spatially uniform exactly when the velocity field is linear in position.
pub fn chetaev_residual(psi: &ComplexField, units: &UnitSystem) -> (RealField, f64) {
    let geom = FlowGeometry::new(psi, units);
    let norm = weighted_norm(&geom.div_velocity, &geom.density, &geom.mask);
    (geom.div_velocity, norm)
}

/// Kinetic-energy variation rate ε = (ℏ/2)·L for a given residual field L.
pub fn epsilon_from_residual(residual: &RealField, units: &UnitSystem) -> RealField {
    let half_hbar = 0.5 * units.hbar();
    residual.map(|l| half_hbar * l)
}

/// ε = (ℏ/2)·∇·v, the same array as [`chetaev_residual`] up to the scalar
/// factor; zero exactly where the residual is zero.
pub fn epsilon_field(psi: &ComplexField, units: &UnitSystem) -> RealField {
    let (l, _) = chetaev_residual(psi, units);
    epsilon_from_residual(&l, units)
}

/// One residual norm tagged with its snapshot time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedNorm {
    pub time: f64,
    pub norm: f64,
}

/// Continuity residual r = ∂P/∂t + ∇·(P v) on interior snapshots,
/// ∂P/∂t by centered differences, reported as P-weighted norms per time.
pub fn continuity_residual(timeline: &WaveTimeline) -> Result<Vec<TimedNorm>, DiagnosticsError> {
    let len = timeline.len();
    if len < 3 {
        return Err(DiagnosticsError::TooFewSnapshots { want: 3, got: len });
    }
    let units = *timeline.units();
    let densities: Vec<RealField> = timeline.snapshots().iter().map(|s| s.density()).collect();
    let two_dt = 2.0 * timeline.dt_snapshot();
    let mut out = Vec::with_capacity(len - 2);
    for idx in 1..len - 1 {
        let psi = timeline.snapshot(idx);
        let grid = psi.grid().clone();
        let geom = FlowGeometry::new(psi, &units);
        // ∇·(P v) = ∇P·v + P·(∇·v), smooth fields only.
        let data: Vec<f64> = (0..grid.len())
            .map(|i| {
                let dpdt =
                    (densities[idx + 1].data()[i] - densities[idx - 1].data()[i]) / two_dt;
                let advect: f64 = (0..grid.ndim())
                    .map(|a| geom.grad_density[a].data()[i] * geom.velocity[a].data()[i])
                    .sum();
                dpdt + advect + geom.density.data()[i] * geom.div_velocity.data()[i]
            })
            .collect();
        let r = RealField::new(grid, data).expect("same grid");
        out.push(TimedNorm {
            time: timeline.times()[idx],
            norm: weighted_norm(&r, &geom.density, &geom.mask),
        });
    }
    Ok(out)
}

/// Per-time residual norms of the polar-form equations of motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MadelungRow {
    pub time: f64,
    /// Amplitude-transport residual ∂A/∂t + (1/2m)[AΔS + 2∇A·∇S].
    pub r_amp: f64,
    /// Phase residual ∂S/∂t + (∇S)²/2m + U + Q.
    pub r_phase: f64,
}

/// Residuals of the amplitude-transport and phase (quantum Hamilton–Jacobi)
/// equations on interior snapshots. ∂S/∂t comes from the anchored centered
/// snapshot difference; Q is the amplitude-route quantum potential.
pub fn madelung_residuals(timeline: &WaveTimeline) -> Result<Vec<MadelungRow>, DiagnosticsError> {
    let len = timeline.len();
    if len < 3 {
        return Err(DiagnosticsError::TooFewSnapshots { want: 3, got: len });
    }
    let units = *timeline.units();
    let m = units.mass();
    let amps: Vec<RealField> = timeline
        .snapshots()
        .iter()
        .map(|s| s.density().map(f64::sqrt))
        .collect();
    let two_dt = 2.0 * timeline.dt_snapshot();
    let potential = timeline.potential();
    let mut out = Vec::with_capacity(len - 2);
    for idx in 1..len - 1 {
        let psi = timeline.snapshot(idx);
        let grid = psi.grid().clone();
        let geom = FlowGeometry::new(psi, &units);
        let amp = &amps[idx];
        let grad_amp: Vec<RealField> = (0..grid.ndim())
            .map(|a| ops::gradient(amp, a).expect("axis in range"))
            .collect();
        let ds_dt = bohm::anchored_phase_rate(timeline, idx, &geom.mask)?;
        let q = quantum_potential(amp, &geom.mask, &units).expect("amplitude is nonnegative");

        let mut amp_res = vec![0.0; grid.len()];
        let mut phase_res = vec![0.0; grid.len()];
        for i in 0..grid.len() {
            if geom.mask.is_masked(i) {
                continue;
            }
            let dadt = (amps[idx + 1].data()[i] - amps[idx - 1].data()[i]) / two_dt;
            // (1/2m)(A·ΔS + 2∇A·∇S) = A·(∇·v)/2 + ∇A·v.
            let transport: f64 = (0..grid.ndim())
                .map(|a| grad_amp[a].data()[i] * geom.velocity[a].data()[i])
                .sum();
            amp_res[i] =
                dadt + 0.5 * amp.data()[i] * geom.div_velocity.data()[i] + transport;
            let v2: f64 = (0..grid.ndim())
                .map(|a| geom.velocity[a].data()[i] * geom.velocity[a].data()[i])
                .sum();
            phase_res[i] =
                ds_dt[i] + 0.5 * m * v2 + potential.data()[i] + q.values.data()[i];
        }
        let r_amp = RealField::new(grid.clone(), amp_res).expect("same grid");
        let r_phase = RealField::new(grid, phase_res).expect("same grid");
        out.push(MadelungRow {
            time: timeline.times()[idx],
            r_amp: weighted_norm(&r_amp, &geom.density, &geom.mask),
            r_phase: weighted_norm(&r_phase, &geom.density, &geom.mask),
        });
    }
    Ok(out)
}

/// Moments entering the uncertainty identity
/// var_p = gradS_var + 2m⟨Q⟩ and the product bound var_x·var_p ≥ ℏ²/4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyRecord {
    pub var_x: f64,
    pub var_p: f64,
    pub mean_q: f64,
    pub grad_s_var: f64,
    pub product: f64,
    pub bound: f64,
}

fn check_normalized(norm: f64) -> Result<(), DiagnosticsError> {
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
        return Err(DiagnosticsError::NotNormalized(norm));
    }
    Ok(())
}

/// Position/momentum dispersions and their decomposition for a normalized
/// 1D state. var_p uses the Fourier transform on periodic grids and the
/// discrete-Hamiltonian quadratic form (pinned walls) on dirichlet grids so
/// that it stays consistent with the stencil behind Q.
pub fn uncertainty_check(
    psi: &ComplexField,
    units: &UnitSystem,
) -> Result<UncertaintyRecord, DiagnosticsError> {
    let grid = psi.grid().clone();
    if grid.ndim() != 1 {
        return Err(DiagnosticsError::Needs1d);
    }
    let norm = psi.norm_sqr();
    check_normalized(norm)?;
    let hbar = units.hbar();
    let density = psi.density();

    // Position moments from P.
    let mut mean_x = 0.0;
    for i in 0..grid.len() {
        mean_x += grid.coord(0, i) * density.data()[i] * grid.quad_weight(i);
    }
    mean_x /= norm;
    let mut var_x = 0.0;
    for i in 0..grid.len() {
        let d = grid.coord(0, i) - mean_x;
        var_x += d * d * density.data()[i] * grid.quad_weight(i);
    }
    var_x /= norm;

    // Momentum moments.
    let (mean_p, mean_p2) = match grid.boundary() {
        Boundary::Periodic => {
            let spectral = Spectral::new(&grid);
            let mut coeffs = psi.data().to_vec();
            spectral.forward(&mut coeffs);
            let ks = wavenumbers(grid.axis(0).count, grid.spacing(0));
            let mut wsum = 0.0;
            let mut p1 = 0.0;
            let mut p2 = 0.0;
            for (k, z) in ks.iter().zip(&coeffs) {
                let w = z.norm_sqr();
                wsum += w;
                p1 += k * w;
                p2 += k * k * w;
            }
            (hbar * p1 / wsum, hbar * hbar * p2 / wsum)
        }
        Boundary::DirichletZero => {
            // ⟨p⟩ = ℏ∫Im(ψ*∂ψ) via the split form; ⟨p²⟩ = −ℏ²⟨ψ, Δψ⟩ with
            // the pinned-wall three-point stencil (matches the eigensolver
            // and propagator Hamiltonian by summation by parts).
            let re = RealField::new(grid.clone(), psi.data().iter().map(|z| z.re).collect())
                .expect("same grid");
            let im = RealField::new(grid.clone(), psi.data().iter().map(|z| z.im).collect())
                .expect("same grid");
            let dre = ops::gradient(&re, 0).expect("axis in range");
            let dim = ops::gradient(&im, 0).expect("axis in range");
            let mut p1 = 0.0;
            for i in 0..grid.len() {
                p1 += (re.data()[i] * dim.data()[i] - im.data()[i] * dre.data()[i])
                    * grid.quad_weight(i);
            }
            let n = grid.len();
            let h2 = grid.spacing(0) * grid.spacing(0);
            let zero = Complex64::new(0.0, 0.0);
            let mut p2 = 0.0;
            for i in 0..n {
                let left = if i == 0 { zero } else { psi.data()[i - 1] };
                let right = if i + 1 == n { zero } else { psi.data()[i + 1] };
                let lap = (left - 2.0 * psi.data()[i] + right) / h2;
                p2 -= (psi.data()[i].conj() * lap).re * grid.quad_weight(i);
            }
            (hbar * p1 / norm, hbar * hbar * p2 / norm)
        }
    };
    let var_p = mean_p2 - mean_p * mean_p;

    // ⟨Q⟩ and the phase-gradient variance over unmasked points.
    let amp = density.map(f64::sqrt);
    let mask = psi.node_mask();
    let q = quantum_potential(&amp, &mask, units).expect("amplitude is nonnegative");
    let vel = velocity_field(psi, units);
    let m = units.mass();
    let mut mean_q = 0.0;
    let mut mean_grad_s = 0.0;
    let mut mean_grad_s2 = 0.0;
    for i in 0..grid.len() {
        if mask.is_masked(i) {
            continue;
        }
        let pw = density.data()[i] * grid.quad_weight(i);
        mean_q += q.values.data()[i] * pw;
        let gs = m * vel.components[0].data()[i];
        mean_grad_s += gs * pw;
        mean_grad_s2 += gs * gs * pw;
    }
    let grad_s_var = mean_grad_s2 - mean_grad_s * mean_grad_s;

    Ok(UncertaintyRecord {
        var_x,
        var_p,
        mean_q,
        grad_s_var,
        product: var_x * var_p,
        bound: 0.25 * hbar * hbar,
    })
}

/// The perturbation action computed two independent ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationAction {
    /// Direct route ∫Q·P dV over unmasked points.
    pub action: f64,
    /// Integrated-by-parts route (ℏ²/8m)·∫(∇P)²/P dV.
    pub fisher_form: f64,
    /// ∫P dV of the input state.
    pub normalization: f64,
}

/// Action of amplitude perturbations ∫Qψψ* dV for a normalized state,
/// reported alongside the integrated-by-parts form; the two agree to 1e−6
/// relative whenever the node mask is empty.
pub fn perturbation_action(
    psi: &ComplexField,
    units: &UnitSystem,
) -> Result<PerturbationAction, DiagnosticsError> {
    let norm = psi.norm_sqr();
    check_normalized(norm)?;
    let grid = psi.grid().clone();
    let density = psi.density();
    let amp = density.map(f64::sqrt);
    let mask = psi.node_mask();
    let q = quantum_potential(&amp, &mask, units).expect("amplitude is nonnegative");
    let floor = mask.floor.max(f64::MIN_POSITIVE);
    let grad_p: Vec<RealField> = (0..grid.ndim())
        .map(|a| ops::gradient(&density, a).expect("axis in range"))
        .collect();
    let mut action = 0.0;
    let mut fisher = 0.0;
    for i in 0..grid.len() {
        if mask.is_masked(i) {
            continue;
        }
        let w = grid.quad_weight(i);
        action += q.values.data()[i] * density.data()[i] * w;
        let gp2: f64 = grad_p.iter().map(|g| g.data()[i] * g.data()[i]).sum();
        fisher += gp2 / density.data()[i].max(floor) * w;
    }
    let hbar = units.hbar();
    fisher *= hbar * hbar / (8.0 * units.mass());
    Ok(PerturbationAction { action, fisher_form: fisher, normalization: norm })
}

/// Compactly supported smooth bump b(x) = exp(1 − 1/(1 − s²)) on |s| < 1,
/// s = (x − center)/width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSpec {
    pub center: f64,
    pub width: f64,
}

impl BumpSpec {
    fn value(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.width;
        if s.abs() < 1.0 {
            (1.0 - 1.0 / (1.0 - s * s)).exp()
        } else {
            0.0
        }
    }
}

/// Centered finite-difference Gateaux derivative of the perturbation action
/// under norm-preserving amplitude perturbations:
/// [J(A + h·b̂) − J(A − h·b̂)] / 2h with b̂ the bump projected orthogonal to
/// A in L² (both perturbed states are renormalized before evaluating J).
pub fn stationarity_probe(
    psi: &ComplexField,
    units: &UnitSystem,
    bump: &BumpSpec,
    scale: f64,
) -> Result<f64, DiagnosticsError> {
    let grid = psi.grid().clone();
    if grid.ndim() != 1 {
        return Err(DiagnosticsError::Needs1d);
    }
    if !(bump.width > 0.0) || !bump.width.is_finite() || !(scale > 0.0) || !scale.is_finite() {
        return Err(DiagnosticsError::BadProbe);
    }
    let max_im = psi.data().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let max_mod = psi.data().iter().map(|z| z.norm_sqr()).fold(0.0, f64::max).sqrt();
    if max_im > 1e-12 * max_mod {
        return Err(DiagnosticsError::NotReal(max_im));
    }
    let ax = grid.axis(0);
    let (lo, hi) = (bump.center - bump.width, bump.center + bump.width);
    if lo <= ax.lower || hi >= ax.upper {
        return Err(DiagnosticsError::BumpTouchesBoundary { lo, hi });
    }

    let a = RealField::new(grid.clone(), psi.data().iter().map(|z| z.re).collect())
        .expect("same grid");
    let b = RealField::from_fn(grid.clone(), |p| bump.value(p[0]));
    // Project onto the norm-preserving tangent space: b̂ = b − (⟨a,b⟩/⟨a,a⟩)·a.
    let dot = |f: &RealField, g: &RealField| -> f64 {
        (0..grid.len()).map(|i| f.data()[i] * g.data()[i] * grid.quad_weight(i)).sum()
    };
    let coef = dot(&a, &b) / dot(&a, &a);
    let b_hat = b.zip_with(&a, |bv, av| bv - coef * av).expect("same grid");

    let evaluate = |sign: f64| -> Result<f64, DiagnosticsError> {
        let perturbed = a
            .zip_with(&b_hat, |av, bv| av + sign * scale * bv)
            .expect("same grid");
        let nrm = dot(&perturbed, &perturbed).sqrt();
        let state = ComplexField::from_real(&perturbed.map(|v| v / nrm));
        Ok(perturbation_action(&state, units)?.action)
    };
    Ok((evaluate(1.0)? - evaluate(-1.0)?) / (2.0 * scale))
}

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

/// One named check with its measured value and tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRow {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Collection of diagnostic rows rendered as CSV (`name,value,tolerance,pass`)
/// and as an aligned text summary.
#[derive(Debug, Clone, Default)]
pub struct DiagnosticsReport {
    pub rows: Vec<DiagnosticRow>,
}

impl DiagnosticsReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record a magnitude-style check: passes when |value| ≤ tolerance.
    pub fn push(&mut self, name: &str, value: f64, tolerance: f64) {
        let pass = value.is_finite() && value.abs() <= tolerance;
        self.rows.push(DiagnosticRow { name: name.to_string(), value, tolerance, pass });
    }

    /// Record a check whose pass criterion the caller evaluated.
    pub fn push_flag(&mut self, name: &str, value: f64, tolerance: f64, pass: bool) {
        self.rows.push(DiagnosticRow {
            name: name.to_string(),
            value,
            tolerance,
            pass: pass && value.is_finite(),
        });
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value,tolerance,pass\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{}\n",
                r.name, r.value, r.tolerance, r.pass
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&format!(
                "{:width$}  {:>24.16e}  (tol {:>10.3e})  {}\n",
                r.name,
                r.value,
                r.tolerance,
                if r.pass { "pass" } else { "FAIL" },
                width = width
            ));
        }
        let failures = self.rows.iter().filter(|r| !r.pass).count();
        if failures == 0 {
            out.push_str(&format!("all {} checks passed\n", self.rows.len()));
        } else {
            out.push_str(&format!("{failures} of {} checks FAILED\n", self.rows.len()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::potential::{eval_potential, PotentialSpec};
    use crate::states;
    use crate::tdse::{evolve, solve_eigenpairs, EvolutionConfig, Method};
    use crate::tolerances as tol;
    use std::sync::Arc;

    fn units() -> UnitSystem {
        UnitSystem::natural()
    }

    fn free_gaussian_timeline(n: usize, dt: f64, steps: usize, stride: usize) -> WaveTimeline {
        let u = units();
        let g = Arc::new(Grid::line(-10.0, 10.0, n, crate::grid::Boundary::Periodic).unwrap());
        let psi = states::gaussian(&g, &u, &[0.0], &[1.0], &[0.0]).unwrap();
        let free = eval_potential(&PotentialSpec::Free, &g, &u).unwrap();
        let cfg = EvolutionConfig {
            dt,
            steps,
            method: Method::SplitSpectral,
            snapshot_stride: stride,
        };
        evolve(&psi, &free, &u, &cfg).unwrap()
    }

    #[test]
    fn chetaev_eigenstate_and_coherent() {
        let u = units();
        let g = Arc::new(Grid::line(-8.0, 8.0, 257, crate::grid::Boundary::DirichletZero).unwrap());
        let pot = eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &g, &u).unwrap();
        let sol = solve_eigenpairs(&pot, &u, 1).unwrap();
        let psi = ComplexField::from_real(&sol.states[0]);
        let (_, norm) = chetaev_residual(&psi, &u);
        assert!(norm <= tol::EIGENSTATE_RESIDUAL, "eigenstate residual {norm}");

        // Coherent state: uniform velocity p₀/m ⇒ ∇·v ≈ 0.
        let gp = Arc::new(Grid::line(-8.0, 8.0, 256, crate::grid::Boundary::Periodic).unwrap());
        let sigma = (0.5f64).sqrt();
        let coherent = states::gaussian(&gp, &u, &[1.0], &[sigma], &[1.0]).unwrap();
        let (_, cnorm) = chetaev_residual(&coherent, &u);
        assert!(cnorm <= tol::CHETAEV_COHERENT, "coherent residual {cnorm}");
    }

    #[test]
    fn chetaev_free_gaussian_value() {
        // σ₀=1, t=1: L = (ℏ²t/4m²σ₀⁴)/(1+(ℏt/2mσ₀²)²) = 0.25/1.25 = 0.2.
        let tl = free_gaussian_timeline(512, 0.005, 200, 200);
        let u = units();
        let psi = tl.snapshot(tl.len() - 1);
        let (l, norm) = chetaev_residual(psi, &u);
        assert!((norm - 0.2).abs() < tol::CHETAEV_FREE_GAUSSIAN, "norm {norm}");
        // ε shares the array up to the exact scalar factor, and ℏ scales it.
        let eps = epsilon_from_residual(&l, &u);
        for (e, lv) in eps.data().iter().zip(l.data()) {
            assert_eq!(*e, 0.5 * lv);
        }
        let eps_field = epsilon_field(psi, &u);
        let mid = psi.grid().nearest_index(0, 0.0);
        assert!((eps_field.data()[mid] - 0.1).abs() < tol::CHETAEV_FREE_GAUSSIAN);
        let u2 = UnitSystem::new(2.0, 1.0).unwrap();
        let eps2 = epsilon_from_residual(&l, &u2);
        for (e2, e1) in eps2.data().iter().zip(eps.data()) {
            assert_eq!(*e2, 2.0 * e1);
        }
    }

    #[test]
    fn continuity_eigenstate_and_solver() {
        let u = units();
        let g = Arc::new(Grid::line(-8.0, 8.0, 257, crate::grid::Boundary::DirichletZero).unwrap());
        let pot = eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &g, &u).unwrap();
        let sol = solve_eigenpairs(&pot, &u, 1).unwrap();
        let psi = ComplexField::from_real(&sol.states[0]);
        let cfg = EvolutionConfig {
            dt: 0.004,
            steps: 8,
            method: Method::CrankNicolson,
            snapshot_stride: 2,
        };
        let tl = evolve(&psi, &pot, &u, &cfg).unwrap();
        for row in continuity_residual(&tl).unwrap() {
            assert!(row.norm <= tol::EIGENSTATE_RESIDUAL, "eigenstate norm {}", row.norm);
        }

        // Free Gaussian at reference resolution: below 1e−3 with second-order
        // refinement between (h, dt) and (h/2, dt/2), compared at t = 0.5.
        let coarse = free_gaussian_timeline(256, 0.01, 100, 2);
        let fine = free_gaussian_timeline(512, 0.005, 200, 2);
        let at = |rows: &[TimedNorm], t: f64| {
            rows.iter().find(|r| (r.time - t).abs() < 1e-12).expect("row at time").norm
        };
        let rows_c = continuity_residual(&coarse).unwrap();
        let rows_f = continuity_residual(&fine).unwrap();
        let nc = at(&rows_c, 0.5);
        let nf = at(&rows_f, 0.5);
        assert!(nc < tol::SOLVER_RESIDUAL, "coarse norm {nc}");
        assert!(rows_f.iter().all(|r| r.norm < tol::SOLVER_RESIDUAL));
        let ratio = nc / nf;
        assert!(
            ratio >= tol::REFINEMENT_RATIO_LOW && ratio <= tol::REFINEMENT_RATIO_HIGH,
            "refinement ratio {ratio}"
        );
        let few = free_gaussian_timeline(64, 0.01, 1, 1);
        assert!(matches!(
            continuity_residual(&few),
            Err(DiagnosticsError::TooFewSnapshots { want: 3, got: 2 })
        ));
    }

    #[test]
    fn continuity_manufactured_advection() {
        // ψ(x,t) = A(x − ct)·exp(i m c x/ℏ): P advects uniformly, the
        // analytic residual is exactly zero.
        let u = units();
        let g = Arc::new(Grid::line(-10.0, 10.0, 256, crate::grid::Boundary::Periodic).unwrap());
        // Advection speed on the wavenumber lattice so e^{imcx/ℏ} is
        // periodic; the density stays strictly positive (no node kinks).
        let c = std::f64::consts::PI / 5.0;
        let dt = 0.01;
        // P(x,t) = (1.2 + cos(π(x−ct)/10))/24 advected at speed c; with
        // S = m·c·x the continuity residual is exactly zero.
        let density = |x: f64, t: f64| {
            let s = (x - c * t + 10.0).rem_euclid(20.0) - 10.0;
            (1.2 + (std::f64::consts::PI * s / 10.0).cos()) / 24.0
        };
        let snaps: Vec<ComplexField> = (0..5)
            .map(|j| {
                let t = j as f64 * dt;
                ComplexField::from_fn(g.clone(), |p| {
                    Complex64::from_polar(density(p[0], t).sqrt(), c * p[0])
                })
            })
            .collect();
        let free = eval_potential(&PotentialSpec::Free, &g, &u).unwrap();
        let tl = WaveTimeline::from_parts(
            u,
            Method::SplitSpectral,
            free,
            dt,
            1,
            (0..5).collect(),
            snaps,
        )
        .unwrap();
        for row in continuity_residual(&tl).unwrap() {
            assert!(row.norm < tol::MANUFACTURED_TRANSPORT, "norm {}", row.norm);
        }
    }

    #[test]
    fn madelung_eigenstate_and_plane_wave() {
        let u = units();
        let g = Arc::new(Grid::line(-8.0, 8.0, 257, crate::grid::Boundary::DirichletZero).unwrap());
        let pot = eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &g, &u).unwrap();
        let sol = solve_eigenpairs(&pot, &u, 1).unwrap();
        let psi = ComplexField::from_real(&sol.states[0]);
        let cfg = EvolutionConfig {
            dt: 0.002,
            steps: 8,
            method: Method::CrankNicolson,
            snapshot_stride: 2,
        };
        let tl = evolve(&psi, &pot, &u, &cfg).unwrap();
        for row in madelung_residuals(&tl).unwrap() {
            assert!(row.r_amp <= tol::EIGENSTATE_RESIDUAL, "r_amp {}", row.r_amp);
            assert!(row.r_phase <= tol::PHASE_RESIDUAL, "r_phase {}", row.r_phase);
        }

        let gp = Arc::new(Grid::line(
            -std::f64::consts::PI,
            std::f64::consts::PI,
            64,
            crate::grid::Boundary::Periodic,
        )
        .unwrap());
        let (pw, _) = states::plane_wave(&gp, &u, &[2.0]).unwrap();
        let free = eval_potential(&PotentialSpec::Free, &gp, &u).unwrap();
        let cfgp = EvolutionConfig {
            dt: 0.005,
            steps: 4,
            method: Method::SplitSpectral,
            snapshot_stride: 1,
        };
        let tlp = evolve(&pw, &free, &u, &cfgp).unwrap();
        for row in madelung_residuals(&tlp).unwrap() {
            assert!(row.r_amp <= 1e-12, "plane-wave r_amp {}", row.r_amp);
            assert!(row.r_phase <= 1e-10, "plane-wave r_phase {}", row.r_phase);
        }
    }

    #[test]
    fn madelung_solver_budget() {
        let tl = free_gaussian_timeline(512, 0.005, 200, 2);
        for row in madelung_residuals(&tl).unwrap() {
            assert!(row.r_amp <= tol::SOLVER_RESIDUAL, "r_amp {}", row.r_amp);
            assert!(row.r_phase <= tol::SOLVER_RESIDUAL, "r_phase {}", row.r_phase);
        }
    }

    #[test]
    fn uncertainty_gaussian_and_boost() {
        let u = units();
        let g = Arc::new(Grid::line(-8.0, 8.0, 256, crate::grid::Boundary::Periodic).unwrap());
        let psi = states::gaussian(&g, &u, &[0.0], &[1.0], &[0.0]).unwrap();
        let rec = uncertainty_check(&psi, &u).unwrap();
        assert!((rec.var_x - 1.0).abs() < 1e-9, "var_x {}", rec.var_x);
        assert!((rec.var_p - 0.25).abs() < 1e-9, "var_p {}", rec.var_p);
        assert!((2.0 * rec.mean_q - 0.25).abs() < 1e-9, "2m⟨Q⟩ {}", 2.0 * rec.mean_q);
        assert!((rec.product - 0.25).abs() < 1e-8, "product {}", rec.product);
        assert!(rec.product >= rec.bound - tol::UNCERTAINTY_BOUND_SLACK);
        let err = rec.var_p - rec.grad_s_var - 2.0 * rec.mean_q;
        assert!(err.abs() < tol::DECOMPOSITION_ANALYTIC, "decomposition {err}");

        // Momentum boost leaves var_p and the decomposition intact.
        let boosted = states::gaussian(&g, &u, &[0.0], &[1.0], &[3.0]).unwrap();
        let rb = uncertainty_check(&boosted, &u).unwrap();
        assert!((rb.var_p - 0.25).abs() < 1e-8, "boosted var_p {}", rb.var_p);
        assert!(rb.grad_s_var.abs() < 1e-9, "boosted gradS_var {}", rb.grad_s_var);
        let errb = rb.var_p - rb.grad_s_var - 2.0 * rb.mean_q;
        assert!(errb.abs() < tol::DECOMPOSITION_ANALYTIC, "boosted decomposition {errb}");
    }

    #[test]
    fn uncertainty_excited_harmonic() {
        // First excited harmonic state (ω=1): var_x = var_p = 3/2, so the
        // product is 2.25·ℏ² ≥ ℏ²/4. The node sits on a grid point (odd
        // count), keeping the decomposition identity at roundoff level.
        let u = units();
        let g = Arc::new(Grid::line(-10.0, 10.0, 513, crate::grid::Boundary::DirichletZero).unwrap());
        let pot = eval_potential(&PotentialSpec::Harmonic { omega: 1.0 }, &g, &u).unwrap();
        let sol = solve_eigenpairs(&pot, &u, 2).unwrap();
        let psi = ComplexField::from_real(&sol.states[1]);
        let rec = uncertainty_check(&psi, &u).unwrap();
        assert!((rec.var_x - 1.5).abs() < 5e-3, "var_x {}", rec.var_x);
        assert!((rec.var_p - 1.5).abs() < 5e-3, "var_p {}", rec.var_p);
        assert!((rec.product - 2.25).abs() < 1e-2, "product {}", rec.product);
        assert!(rec.product >= rec.bound - tol::UNCERTAINTY_BOUND_SLACK);
        assert!(rec.grad_s_var.abs() < 1e-12, "gradS_var {}", rec.grad_s_var);
        let err = rec.var_p - rec.grad_s_var - 2.0 * rec.mean_q;
        assert!(err.abs() < tol::DECOMPOSITION_ANALYTIC, "decomposition {err}");
    }

    #[test]
    fn uncertainty_rejects_bad_input() {
        let u = units();
        let g = Arc::new(Grid::line(-8.0, 8.0, 64, crate::grid::Boundary::Periodic).unwrap());
        let psi = states::gaussian(&g, &u, &[0.0], &[1.0], &[0.0]).unwrap();
        let doubled = ComplexField::new(
            g.clone(),
            psi.data().iter().map(|z| 2.0 * z).collect(),
        )
        .unwrap();
        assert!(matches!(
            uncertainty_check(&doubled, &u),
            Err(DiagnosticsError::NotNormalized(_))
        ));
        let g2 = Arc::new(
            Grid::rectangle((-4.0, 4.0, 32), (-4.0, 4.0, 32), crate::grid::Boundary::Periodic)
                .unwrap(),
        );
        let psi2 = states::gaussian(&g2, &u, &[0.0, 0.0], &[1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert!(matches!(uncertainty_check(&psi2, &u), Err(DiagnosticsError::Needs1d)));
    }

    #[test]
    fn action_dual_routes() {
        let u = units();
        // Mask-empty Gaussian: routes agree to 1e−6 relative, value 0.125.
        let g = Arc::new(Grid::line(-7.0, 7.0, 256, crate::grid::Boundary::Periodic).unwrap());
        let psi = states::gaussian(&g, &u, &[0.0], &[1.0], &[0.0]).unwrap();
        assert!(psi.node_mask().is_all_clear(), "tail mask should be empty");
        let pa = perturbation_action(&psi, &u).unwrap();
        assert!((pa.action - 0.125).abs() < 1e-8, "action {}", pa.action);
        let rel = (pa.action - pa.fisher_form).abs() / pa.action.abs();
        assert!(rel < tol::ACTION_DUAL_ROUTE_REL, "dual-route gap {rel}");
        assert!((pa.normalization - 1.0).abs() < 1e-12);

        // Plane wave: constant amplitude ⇒ zero action by both routes.
        let gp = Arc::new(Grid::line(
            -std::f64::consts::PI,
            std::f64::consts::PI,
            64,
            crate::grid::Boundary::Periodic,
        )
        .unwrap());
        let (pw, _) = states::plane_wave(&gp, &u, &[2.0]).unwrap();
        let pz = perturbation_action(&pw, &u).unwrap();
        assert!(pz.action.abs() < 1e-10, "plane-wave action {}", pz.action);
        assert!(pz.fisher_form.abs() < 1e-10, "plane-wave fisher {}", pz.fisher_form);
    }

    #[test]
    fn action_box_ground_state() {
        // L=1 box: ⟨Q⟩ = E₁ = π²/2 (U = 0, ∇S = 0).
        let u = units();
        let g = Arc::new(Grid::line(0.0, 1.0, 513, crate::grid::Boundary::DirichletZero).unwrap());
        let pot = eval_potential(&PotentialSpec::BoxWell, &g, &u).unwrap();
        let sol = solve_eigenpairs(&pot, &u, 1).unwrap();
        let psi = ComplexField::from_real(&sol.states[0]);
        let pa = perturbation_action(&psi, &u).unwrap();
        let want = std::f64::consts::PI * std::f64::consts::PI / 2.0;
        assert!((pa.action - want).abs() < tol::BOX_ENERGY_REL * want, "action {}", pa.action);
    }

    #[test]
    fn stationarity_probe_extremal_vs_not() {
        let u = units();
        let g = Arc::new(Grid::line(0.0, 1.0, 513, crate::grid::Boundary::DirichletZero).unwrap());
        let pot = eval_potential(&PotentialSpec::BoxWell, &g, &u).unwrap();
        let sol = solve_eigenpairs(&pot, &u, 2).unwrap();
        let ground = ComplexField::from_real(&sol.states[0]);
        let bump = BumpSpec { center: 0.5, width: 0.2 };
        let d = stationarity_probe(&ground, &u, &bump, 1e-3).unwrap();
        assert!(d.abs() <= tol::STATIONARITY_DERIVATIVE, "ground derivative {d}");

        // Saddle for the first excited state: finite, recorded only.
        let excited = ComplexField::from_real(&sol.states[1]);
        let de = stationarity_probe(&excited, &u, &bump, 1e-3).unwrap();
        assert!(de.is_finite());

        // Non-eigenstate: derivative is far from zero for a generic bump.
        let off = BumpSpec { center: 0.4, width: 0.2 };
        let gauss = ComplexField::from_fn(g.clone(), |p| {
            Complex64::new((-(p[0] - 0.5).powi(2) / (2.0 * 0.01)).exp(), 0.0)
        });
        let gauss = gauss.normalized().unwrap();
        let dg = stationarity_probe(&gauss, &u, &off, 1e-3).unwrap();
        assert!(dg.abs() > 1e-2, "non-extremal derivative {dg}");

        // Error paths: boundary-touching bump, complex state.
        let wide = BumpSpec { center: 0.5, width: 0.6 };
        assert!(matches!(
            stationarity_probe(&ground, &u, &wide, 1e-3),
            Err(DiagnosticsError::BumpTouchesBoundary { .. })
        ));
        let gp = Arc::new(Grid::line(-8.0, 8.0, 128, crate::grid::Boundary::Periodic).unwrap());
        let complex_state = states::gaussian(&gp, &u, &[0.0], &[1.0], &[2.0]).unwrap();
        assert!(matches!(
            stationarity_probe(&complex_state, &u, &BumpSpec { center: 0.0, width: 1.0 }, 1e-3),
            Err(DiagnosticsError::NotReal(_))
        ));
    }

    #[test]
    fn report_rendering() {
        let mut rep = DiagnosticsReport::new();
        rep.push("residual_a", 1e-12, 1e-10);
        rep.push("residual_b", 2e-3, 1e-3);
        rep.push_flag("bound_check", 0.25, 0.25, true);
        assert!(!rep.all_pass());
        let csv = rep.to_csv();
        assert!(csv.starts_with("name,value,tolerance,pass\n"));
        assert!(csv.contains("residual_b"));
        assert!(csv.contains("false"));
        let text = rep.summary();
        assert!(text.contains("FAIL"));
        assert!(text.contains("1 of 3 checks FAILED"));
    }
}
