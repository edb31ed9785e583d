//! Initial wavefunction constructors: Gaussian packets, lattice plane waves,
//! and normalized superpositions.
//!
//! Every constructor returns a state normalized to ∫|ψ|² dV = 1 on its grid.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::field::{ComplexField, FieldError};
use crate::grid::{Boundary, Grid};
use crate::units::UnitSystem;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("parameter {name} has wrong length: got {got}, grid has {want} axes")]
    WrongLength { name: &'static str, got: usize, want: usize },
    #[error("sigma must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("parameter {name} must be finite")]
    NotFinite { name: &'static str },
    #[error("plane waves require a periodic grid")]
    PlaneWaveNeedsPeriodic,
    #[error("superposition needs at least one component")]
    EmptySuperposition,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Gaussian packet with position-density standard deviation `sigma` per axis
/// and momentum boost `momentum`:
/// ψ ∝ exp(−Σ (x_a−c_a)²/(4σ_a²))·exp(i p·x/ℏ), normalized on the grid.
pub fn gaussian(
    grid: &Arc<Grid>,
    units: &UnitSystem,
    center: &[f64],
    sigma: &[f64],
    momentum: &[f64],
) -> Result<ComplexField, StateError> {
    let d = grid.ndim();
    check_len("center", center.len(), d)?;
    check_len("sigma", sigma.len(), d)?;
    check_len("momentum", momentum.len(), d)?;
    for &s in sigma {
        if !(s.is_finite() && s > 0.0) {
            return Err(StateError::BadSigma(s));
        }
    }
    if center.iter().chain(momentum).any(|v| !v.is_finite()) {
        return Err(StateError::NotFinite { name: "center/momentum" });
    }
    let inv_hbar = 1.0 / units.hbar();
    let psi = ComplexField::from_fn(grid.clone(), |p| {
        let mut expo = 0.0;
        let mut phase = 0.0;
        for a in 0..d {
            let dx = p[a] - center[a];
            expo -= dx * dx / (4.0 * sigma[a] * sigma[a]);
            phase += momentum[a] * p[a] * inv_hbar;
        }
        Complex64::from_polar(expo.exp(), phase)
    });
    Ok(psi.normalized()?)
}

/// Uniform-amplitude plane wave exp(i p·x/ℏ) on a periodic grid.
///
/// Only lattice momenta p = 2πℏ·n/L are periodic on a finite box, so the
/// requested momentum is snapped to the nearest lattice value, which is
/// returned alongside the state.
pub fn plane_wave(
    grid: &Arc<Grid>,
    units: &UnitSystem,
    momentum: &[f64],
) -> Result<(ComplexField, Vec<f64>), StateError> {
    if grid.boundary() != Boundary::Periodic {
        return Err(StateError::PlaneWaveNeedsPeriodic);
    }
    let d = grid.ndim();
    check_len("momentum", momentum.len(), d)?;
    if momentum.iter().any(|v| !v.is_finite()) {
        return Err(StateError::NotFinite { name: "momentum" });
    }
    let mut snapped = Vec::with_capacity(d);
    for a in 0..d {
        let span = grid.axis(a).upper - grid.axis(a).lower;
        let quantum = 2.0 * std::f64::consts::PI * units.hbar() / span;
        snapped.push((momentum[a] / quantum).round() * quantum);
    }
    let inv_hbar = 1.0 / units.hbar();
    let psi = ComplexField::from_fn(grid.clone(), |p| {
        let phase: f64 = (0..d).map(|a| snapped[a] * p[a] * inv_hbar).sum();
        Complex64::from_polar(1.0, phase)
    });
    Ok((psi.normalized()?, snapped))
}

/// Weighted superposition Σ w_c·ψ_c, renormalized.
pub fn superpose(components: &[(Complex64, &ComplexField)]) -> Result<ComplexField, StateError> {
    let (_, first) = components.first().ok_or(StateError::EmptySuperposition)?;
    let mut acc = ComplexField::zeros(first.grid().clone());
    for (w, psi) in components {
        if psi.grid().as_ref() != first.grid().as_ref() {
            return Err(StateError::Field(FieldError::GridMismatch));
        }
        for (a, b) in acc.data_mut().iter_mut().zip(psi.data()) {
            *a += w * b;
        }
    }
    Ok(acc.normalized()?)
}

fn check_len(name: &'static str, got: usize, want: usize) -> Result<(), StateError> {
    if got != want {
        return Err(StateError::WrongLength { name, got, want });
    }
    Ok(())
}
