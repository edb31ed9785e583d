//! Potential catalog: sampling onto grids for the quantum solvers, plus
//! analytic value/gradient/Hessian for the classical and variational flows.
//!
//! The box well is realized by dirichlet-zero walls with U ≡ 0 inside. The
//! double slit is a hard-edged, grid-cell-aligned barrier strip with two
//! apertures; it is intentionally non-smooth and therefore rejected by the
//! classical routines, as are tabulated potentials.

use std::sync::Arc;

use thiserror::Error;

use crate::field::RealField;
use crate::grid::Grid;
use crate::units::UnitSystem;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// U = 0 everywhere.
    Free,
    /// U = ½·m·ω²·|q − 0|².
    Harmonic { omega: f64 },
    /// U = −½·κ·|q|² (unstable hilltop).
    InvertedHarmonic { kappa: f64 },
    /// Hard box: U = 0 inside, confinement supplied by dirichlet walls.
    BoxWell,
    /// U = height·exp(−|q − center|²/(2·width²)).
    GaussianBarrier { height: f64, center: Vec<f64>, width: f64 },
    /// 2D hard barrier strip at x ≈ wall_x with two apertures along y.
    DoubleSlit {
        height: f64,
        wall_x: f64,
        wall_thickness: f64,
        slit_centers: [f64; 2],
        slit_width: f64,
    },
    /// Arbitrary sampled potential (quantum solvers only).
    Tabulated(RealField),
}

#[derive(Debug, Error, PartialEq)]
pub enum PotentialError {
    #[error("potential parameter {name} must be finite and positive, got {value}")]
    BadParameter { name: &'static str, value: f64 },
    #[error("{kind} potential is only defined on {want}-dimensional grids")]
    WrongDimension { kind: &'static str, want: usize },
    #[error("tabulated potential lives on a different grid")]
    GridMismatch,
    #[error("{kind} potential has no smooth derivatives; classical flows need an analytic catalog entry")]
    NotSmooth { kind: &'static str },
    #[error("classical state dimension {got} does not match potential dimension {want}")]
    DimensionMismatch { got: usize, want: usize },
}

impl PotentialSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            PotentialSpec::Free => "free",
            PotentialSpec::Harmonic { .. } => "harmonic",
            PotentialSpec::InvertedHarmonic { .. } => "inverted-harmonic",
            PotentialSpec::BoxWell => "box",
            PotentialSpec::GaussianBarrier { .. } => "gaussian-barrier",
            PotentialSpec::DoubleSlit { .. } => "double-slit",
            PotentialSpec::Tabulated(_) => "tabulated",
        }
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        let positive = |name: &'static str, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(PotentialError::BadParameter { name, value })
            }
        };
        match self {
            PotentialSpec::Free | PotentialSpec::BoxWell | PotentialSpec::Tabulated(_) => Ok(()),
            PotentialSpec::Harmonic { omega } => positive("omega", *omega),
            PotentialSpec::InvertedHarmonic { kappa } => positive("kappa", *kappa),
            PotentialSpec::GaussianBarrier { height, width, center } => {
                if !height.is_finite() {
                    return Err(PotentialError::BadParameter { name: "height", value: *height });
                }
                if center.iter().any(|c| !c.is_finite()) {
                    return Err(PotentialError::BadParameter { name: "center", value: f64::NAN });
                }
                positive("width", *width)
            }
            PotentialSpec::DoubleSlit { height, wall_thickness, slit_width, .. } => {
                positive("height", *height)?;
                positive("wall_thickness", *wall_thickness)?;
                positive("slit_width", *slit_width)
            }
        }
    }
}

/// Sample a potential onto a grid.
pub fn eval_potential(
    spec: &PotentialSpec,
    grid: &Arc<Grid>,
    units: &UnitSystem,
) -> Result<RealField, PotentialError> {
    spec.validate()?;
    match spec {
        PotentialSpec::Free | PotentialSpec::BoxWell => Ok(RealField::zeros(grid.clone())),
        PotentialSpec::Harmonic { omega } => {
            let c = 0.5 * units.mass() * omega * omega;
            Ok(RealField::from_fn(grid.clone(), |p| {
                c * (0..grid.ndim()).map(|a| p[a] * p[a]).sum::<f64>()
            }))
        }
        PotentialSpec::InvertedHarmonic { kappa } => {
            let c = -0.5 * kappa;
            Ok(RealField::from_fn(grid.clone(), |p| {
                c * (0..grid.ndim()).map(|a| p[a] * p[a]).sum::<f64>()
            }))
        }
        PotentialSpec::GaussianBarrier { height, center, width } => {
            if center.len() != grid.ndim() {
                return Err(PotentialError::WrongDimension {
                    kind: "gaussian-barrier",
                    want: center.len(),
                });
            }
            let inv2w2 = 1.0 / (2.0 * width * width);
            Ok(RealField::from_fn(grid.clone(), |p| {
                let r2: f64 = (0..grid.ndim()).map(|a| (p[a] - center[a]).powi(2)).sum();
                height * (-r2 * inv2w2).exp()
            }))
        }
        PotentialSpec::DoubleSlit { height, wall_x, wall_thickness, slit_centers, slit_width } => {
            if grid.ndim() != 2 {
                return Err(PotentialError::WrongDimension { kind: "double-slit", want: 2 });
            }
            // Snap the strip to whole grid cells so the barrier has exact,
            // reproducible hard edges.
            let h0 = grid.spacing(0);
            let i_lo = grid.nearest_index(0, wall_x - 0.5 * wall_thickness);
            let i_hi = grid.nearest_index(0, wall_x + 0.5 * wall_thickness);
            let half_slit = 0.5 * slit_width;
            let _ = h0;
            Ok(RealField::from_fn(grid.clone(), |p| {
                let i = grid.nearest_index(0, p[0]);
                let in_wall = i >= i_lo && i <= i_hi;
                if !in_wall {
                    return 0.0;
                }
                let open = slit_centers.iter().any(|c| (p[1] - c).abs() <= half_slit);
                if open {
                    0.0
                } else {
                    *height
                }
            }))
        }
        PotentialSpec::Tabulated(f) => {
            if f.grid().as_ref() != grid.as_ref() {
                return Err(PotentialError::GridMismatch);
            }
            Ok(f.clone())
        }
    }
}

/// Analytic U(q) for smooth catalog entries (classical flows).
pub fn classical_value(
    spec: &PotentialSpec,
    q: &[f64],
    units: &UnitSystem,
) -> Result<f64, PotentialError> {
    check_smooth_dim(spec, q.len())?;
    let r2: f64 = q.iter().map(|v| v * v).sum();
    Ok(match spec {
        PotentialSpec::Free => 0.0,
        PotentialSpec::Harmonic { omega } => 0.5 * units.mass() * omega * omega * r2,
        PotentialSpec::InvertedHarmonic { kappa } => -0.5 * kappa * r2,
        PotentialSpec::GaussianBarrier { height, center, width } => {
            let d2: f64 = q.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum();
            height * (-d2 / (2.0 * width * width)).exp()
        }
        _ => unreachable!("check_smooth_dim rejects non-smooth kinds"),
    })
}

/// Analytic ∇U(q) for smooth catalog entries.
pub fn classical_gradient(
    spec: &PotentialSpec,
    q: &[f64],
    units: &UnitSystem,
    out: &mut [f64],
) -> Result<(), PotentialError> {
    check_smooth_dim(spec, q.len())?;
    match spec {
        PotentialSpec::Free => out.fill(0.0),
        PotentialSpec::Harmonic { omega } => {
            let c = units.mass() * omega * omega;
            for (o, &x) in out.iter_mut().zip(q) {
                *o = c * x;
            }
        }
        PotentialSpec::InvertedHarmonic { kappa } => {
            for (o, &x) in out.iter_mut().zip(q) {
                *o = -kappa * x;
            }
        }
        PotentialSpec::GaussianBarrier { height, center, width } => {
            let w2 = width * width;
            let d2: f64 = q.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum();
            let e = height * (-d2 / (2.0 * w2)).exp();
            for ((o, &x), &c) in out.iter_mut().zip(q).zip(center) {
                *o = -e * (x - c) / w2;
            }
        }
        _ => unreachable!(),
    }
    Ok(())
}

/// Analytic Hessian ∂²U/∂q_i∂q_j (row-major d×d) for smooth catalog entries.
pub fn classical_hessian(
    spec: &PotentialSpec,
    q: &[f64],
    units: &UnitSystem,
    out: &mut [f64],
) -> Result<(), PotentialError> {
    check_smooth_dim(spec, q.len())?;
    let d = q.len();
    out.fill(0.0);
    match spec {
        PotentialSpec::Free => {}
        PotentialSpec::Harmonic { omega } => {
            let c = units.mass() * omega * omega;
            for i in 0..d {
                out[i * d + i] = c;
            }
        }
        PotentialSpec::InvertedHarmonic { kappa } => {
            for i in 0..d {
                out[i * d + i] = -kappa;
            }
        }
        PotentialSpec::GaussianBarrier { height, center, width } => {
            let w2 = width * width;
            let d2: f64 = q.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum();
            let e = height * (-d2 / (2.0 * w2)).exp();
            for i in 0..d {
                for j in 0..d {
                    let di = q[i] - center[i];
                    let dj = q[j] - center[j];
                    let mut v = e * di * dj / (w2 * w2);
                    if i == j {
                        v -= e / w2;
                    }
                    out[i * d + j] = v;
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(())
}

fn check_smooth_dim(spec: &PotentialSpec, dim: usize) -> Result<(), PotentialError> {
    match spec {
        PotentialSpec::BoxWell | PotentialSpec::DoubleSlit { .. } | PotentialSpec::Tabulated(_) => {
            return Err(PotentialError::NotSmooth { kind: spec.kind() });
        }
        PotentialSpec::GaussianBarrier { center, .. } => {
            if center.len() != dim {
                return Err(PotentialError::DimensionMismatch { got: dim, want: center.len() });
            }
        }
        _ => {}
    }
    if dim == 0 || dim > 2 {
        return Err(PotentialError::DimensionMismatch { got: dim, want: 1 });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;

    #[test]
    fn harmonic_uses_mass() {
        let g = Arc::new(Grid::line(-4.0, 4.0, 16, Boundary::Periodic).unwrap());
        let u2 = UnitSystem::new(1.0, 2.0).unwrap();
        let f = eval_potential(&PotentialSpec::Harmonic { omega: 3.0 }, &g, &u2).unwrap();
        let i = g.nearest_index(0, 1.0);
        let x = g.coord(0, i);
        assert!((f.data()[i] - 0.5 * 2.0 * 9.0 * x * x).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let units = UnitSystem::natural();
        let spec = PotentialSpec::GaussianBarrier {
            height: 2.5,
            center: vec![0.3, -0.4],
            width: 0.9,
        };
        let q = [0.7, 0.1];
        let mut grad = [0.0; 2];
        classical_gradient(&spec, &q, &units, &mut grad).unwrap();
        let mut hess = [0.0; 4];
        classical_hessian(&spec, &q, &units, &mut hess).unwrap();
        let eps = 1e-6;
        for a in 0..2 {
            let mut qp = q;
            let mut qm = q;
            qp[a] += eps;
            qm[a] -= eps;
            let fd = (classical_value(&spec, &qp, &units).unwrap()
                - classical_value(&spec, &qm, &units).unwrap())
                / (2.0 * eps);
            assert!((fd - grad[a]).abs() < 1e-8, "axis {a}: fd {fd} vs {g}", g = grad[a]);
            let mut gp = [0.0; 2];
            let mut gm = [0.0; 2];
            classical_gradient(&spec, &qp, &units, &mut gp).unwrap();
            classical_gradient(&spec, &qm, &units, &mut gm).unwrap();
            for b in 0..2 {
                let fd2 = (gp[b] - gm[b]) / (2.0 * eps);
                assert!((fd2 - hess[b * 2 + a]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn non_smooth_kinds_rejected_classically() {
        let units = UnitSystem::natural();
        assert!(matches!(
            classical_value(&PotentialSpec::BoxWell, &[0.1], &units),
            Err(PotentialError::NotSmooth { .. })
        ));
        let g = Arc::new(Grid::line(0.0, 1.0, 16, Boundary::Periodic).unwrap());
        let tab = PotentialSpec::Tabulated(RealField::zeros(g));
        assert!(matches!(
            classical_value(&tab, &[0.1], &units),
            Err(PotentialError::NotSmooth { .. })
        ));
    }

    #[test]
    fn double_slit_geometry_cell_aligned() {
        let g = Arc::new(
            Grid::rectangle((-6.0, 6.0, 64), (-6.0, 6.0, 64), Boundary::Periodic).unwrap(),
        );
        let units = UnitSystem::natural();
        let spec = PotentialSpec::DoubleSlit {
            height: 50.0,
            wall_x: 0.0,
            wall_thickness: 0.4,
            slit_centers: [-1.0, 1.0],
            slit_width: 0.5,
        };
        let u = eval_potential(&spec, &g, &units).unwrap();
        // Wall column blocked away from slits, open inside them.
        let iw = g.nearest_index(0, 0.0);
        let j_blocked = g.nearest_index(1, 3.0);
        let j_open = g.nearest_index(1, 1.0);
        assert_eq!(u.data()[g.flat(&[iw, j_blocked])], 50.0);
        assert_eq!(u.data()[g.flat(&[iw, j_open])], 0.0);
        // Far from the wall the potential vanishes.
        let far = g.nearest_index(0, 4.0);
        assert_eq!(u.data()[g.flat(&[far, j_blocked])], 0.0);
        // Hard edges: only the two values occur.
        assert!(u.data().iter().all(|&v| v == 0.0 || v == 50.0));
        // 1D grids are rejected.
        let g1 = Arc::new(Grid::line(-6.0, 6.0, 64, Boundary::Periodic).unwrap());
        assert!(eval_potential(&spec, &g1, &units).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(PotentialSpec::Harmonic { omega: 0.0 }.validate().is_err());
        assert!(PotentialSpec::InvertedHarmonic { kappa: f64::NAN }.validate().is_err());
        assert!(PotentialSpec::GaussianBarrier { height: 1.0, center: vec![0.0], width: -1.0 }
            .validate()
            .is_err());
    }
}
