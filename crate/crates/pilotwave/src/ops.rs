//! Differential operators on grid fields.
//!
//! Periodic grids use spectral differentiation (multiplication by ik / −k² in
//! Fourier space); dirichlet grids use second-order central differences with
//! one-sided second-order stencils at the walls. Both routes are exposed
//! uniformly through [`gradient`], [`laplacian`] and their complex variants.

use num_complex::Complex64;
use thiserror::Error;

use crate::field::{ComplexField, RealField};
use crate::grid::{Boundary, Grid};
use crate::spectral::{derivative_wavenumbers, wavenumbers, Spectral};

#[derive(Debug, Error, PartialEq)]
pub enum OpsError {
    #[error("axis {axis} out of range for a {ndim}-dimensional grid")]
    BadAxis { axis: usize, ndim: usize },
    #[error("velocity components live on different grids")]
    GridMismatch,
    #[error("divergence needs one component per grid axis: got {got}, grid has {want}")]
    ComponentCount { got: usize, want: usize },
}

/// Scalar types the finite-difference kernels operate on.
trait LineScalar: Copy + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> {
    fn scale(self, s: f64) -> Self;
    fn zero() -> Self;
}

impl LineScalar for f64 {
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn zero() -> Self {
        0.0
    }
}

impl LineScalar for Complex64 {
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

/// d/dx along one line: central interior, one-sided second-order at the ends.
fn fd_gradient_line<T: LineScalar>(src: &[T], dst: &mut [T], h: f64) {
    let n = src.len();
    let inv2h = 1.0 / (2.0 * h);
    dst[0] = (src[1].scale(4.0) - src[0].scale(3.0) - src[2]).scale(inv2h);
    for j in 1..n - 1 {
        dst[j] = (src[j + 1] - src[j - 1]).scale(inv2h);
    }
    dst[n - 1] = (src[n - 1].scale(3.0) - src[n - 2].scale(4.0) + src[n - 3]).scale(inv2h);
}

/// d²/dx² along one line: 3-point interior, one-sided second-order at the
/// ends (exact for cubics at interior points, quadratics at the walls).
fn fd_second_derivative_line<T: LineScalar>(src: &[T], dst: &mut [T], h: f64) {
    let n = src.len();
    let invh2 = 1.0 / (h * h);
    dst[0] =
        (src[0].scale(2.0) - src[1].scale(5.0) + src[2].scale(4.0) - src[3]).scale(invh2);
    for j in 1..n - 1 {
        dst[j] = (src[j + 1] - src[j].scale(2.0) + src[j - 1]).scale(invh2);
    }
    dst[n - 1] = (src[n - 1].scale(2.0) - src[n - 2].scale(5.0) + src[n - 3].scale(4.0)
        - src[n - 4])
        .scale(invh2);
}

/// Apply a line kernel along `axis` of row-major data.
fn apply_along_axis<T: LineScalar>(
    grid: &Grid,
    src: &[T],
    axis: usize,
    kernel: impl Fn(&[T], &mut [T], f64),
) -> Vec<T> {
    let h = grid.spacing(axis);
    let mut out = vec![T::zero(); src.len()];
    match (grid.ndim(), axis) {
        (1, 0) => kernel(src, &mut out, h),
        (2, 1) => {
            let n1 = grid.axis(1).count;
            for (s, d) in src.chunks_exact(n1).zip(out.chunks_exact_mut(n1)) {
                kernel(s, d, h);
            }
        }
        (2, 0) => {
            let (n0, n1) = (grid.axis(0).count, grid.axis(1).count);
            let mut line = vec![T::zero(); n0];
            let mut dline = vec![T::zero(); n0];
            for j in 0..n1 {
                for i in 0..n0 {
                    line[i] = src[i * n1 + j];
                }
                kernel(&line, &mut dline, h);
                for i in 0..n0 {
                    out[i * n1 + j] = dline[i];
                }
            }
        }
        _ => unreachable!(),
    }
    out
}

fn spectral_apply(
    psi: &ComplexField,
    multipliers: impl Fn(usize, &[usize]) -> Complex64,
) -> Vec<Complex64> {
    let grid = psi.grid();
    let sp = Spectral::new(grid);
    let mut data = psi.data().to_vec();
    sp.forward(&mut data);
    match grid.ndim() {
        1 => {
            for (j, v) in data.iter_mut().enumerate() {
                *v *= multipliers(0, &[j]);
            }
        }
        _ => {
            let n1 = grid.axis(1).count;
            for (f, v) in data.iter_mut().enumerate() {
                *v *= multipliers(0, &[f / n1, f % n1]);
            }
        }
    }
    sp.inverse(&mut data);
    data
}

fn check_axis(grid: &Grid, axis: usize) -> Result<(), OpsError> {
    if axis >= grid.ndim() {
        return Err(OpsError::BadAxis { axis, ndim: grid.ndim() });
    }
    Ok(())
}

/// ∂f/∂x_axis of a complex field.
pub fn gradient_complex(psi: &ComplexField, axis: usize) -> Result<ComplexField, OpsError> {
    let grid = psi.grid();
    check_axis(grid, axis)?;
    let data = match grid.boundary() {
        Boundary::Periodic => {
            let ks: Vec<Vec<f64>> = (0..grid.ndim())
                .map(|a| derivative_wavenumbers(grid.axis(a).count, grid.spacing(a)))
                .collect();
            spectral_apply(psi, |_, idx| Complex64::new(0.0, ks[axis][idx[axis]]))
        }
        Boundary::DirichletZero => {
            apply_along_axis(grid, psi.data(), axis, fd_gradient_line::<Complex64>)
        }
    };
    Ok(ComplexField::new(grid.clone(), data).expect("same grid"))
}

/// ∂f/∂x_axis of a real field.
pub fn gradient(f: &RealField, axis: usize) -> Result<RealField, OpsError> {
    let grid = f.grid();
    check_axis(grid, axis)?;
    match grid.boundary() {
        Boundary::Periodic => {
            let psi = ComplexField::from_real(f);
            let d = gradient_complex(&psi, axis)?;
            let data = d.data().iter().map(|v| v.re).collect();
            Ok(RealField::new(grid.clone(), data).expect("same grid"))
        }
        Boundary::DirichletZero => {
            let data = apply_along_axis(grid, f.data(), axis, fd_gradient_line::<f64>);
            Ok(RealField::new(grid.clone(), data).expect("same grid"))
        }
    }
}

/// Δf of a complex field (sum of second derivatives over all axes).
pub fn laplacian_complex(psi: &ComplexField) -> ComplexField {
    let grid = psi.grid();
    match grid.boundary() {
        Boundary::Periodic => {
            let ks: Vec<Vec<f64>> = (0..grid.ndim())
                .map(|a| wavenumbers(grid.axis(a).count, grid.spacing(a)))
                .collect();
            let data = spectral_apply(psi, |_, idx| {
                let k2: f64 = (0..grid.ndim()).map(|a| ks[a][idx[a]].powi(2)).sum();
                Complex64::new(-k2, 0.0)
            });
            ComplexField::new(grid.clone(), data).expect("same grid")
        }
        Boundary::DirichletZero => {
            let mut acc = vec![Complex64::new(0.0, 0.0); psi.len()];
            for axis in 0..grid.ndim() {
                let d =
                    apply_along_axis(grid, psi.data(), axis, fd_second_derivative_line::<Complex64>);
                for (a, v) in acc.iter_mut().zip(d) {
                    *a += v;
                }
            }
            ComplexField::new(grid.clone(), acc).expect("same grid")
        }
    }
}

/// Δf of a real field.
pub fn laplacian(f: &RealField) -> RealField {
    let grid = f.grid();
    match grid.boundary() {
        Boundary::Periodic => {
            let psi = ComplexField::from_real(f);
            let d = laplacian_complex(&psi);
            let data = d.data().iter().map(|v| v.re).collect();
            RealField::new(grid.clone(), data).expect("same grid")
        }
        Boundary::DirichletZero => {
            let mut acc = vec![0.0; f.len()];
            for axis in 0..grid.ndim() {
                let d = apply_along_axis(grid, f.data(), axis, fd_second_derivative_line::<f64>);
                for (a, v) in acc.iter_mut().zip(d) {
                    *a += v;
                }
            }
            RealField::new(grid.clone(), acc).expect("same grid")
        }
    }
}

/// ∇·F of a vector field given per-axis components.
pub fn divergence(components: &[RealField]) -> Result<RealField, OpsError> {
    let want = components
        .first()
        .map(|c| c.grid().ndim())
        .unwrap_or(0);
    if components.is_empty() || components.len() != want {
        return Err(OpsError::ComponentCount { got: components.len(), want });
    }
    let grid = components[0].grid().clone();
    for c in components {
        if c.grid().as_ref() != grid.as_ref() {
            return Err(OpsError::GridMismatch);
        }
    }
    let mut acc = RealField::zeros(grid);
    for (axis, c) in components.iter().enumerate() {
        let d = gradient(c, axis)?;
        acc = acc.zip_with(&d, |a, b| a + b).expect("same grid");
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn l2(grid: &Grid, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..a.len() {
            acc += (a[i] - b[i]).powi(2) * grid.quad_weight(i);
        }
        acc.sqrt()
    }

    #[test]
    fn spectral_gradient_exact_for_band_limited() {
        let g = Arc::new(Grid::line(-10.0, 10.0, 64, Boundary::Periodic).unwrap());
        let f = RealField::from_fn(g.clone(), |p| (3.0 * PI * p[0] / 10.0).sin());
        let d = gradient(&f, 0).unwrap();
        let exact = RealField::from_fn(g.clone(), |p| {
            3.0 * PI / 10.0 * (3.0 * PI * p[0] / 10.0).cos()
        });
        assert!(l2(&g, d.data(), exact.data()) < 1e-11);
        let lap = laplacian(&f);
        let exact2 = RealField::from_fn(g.clone(), |p| {
            -(3.0 * PI / 10.0).powi(2) * (3.0 * PI * p[0] / 10.0).sin()
        });
        assert!(l2(&g, lap.data(), exact2.data()) < 1e-10);
    }

    #[test]
    fn fd_gradient_second_order_refinement() {
        // Error ratio under h → h/2 must sit in [3.6, 4.4].
        let err = |n: usize| {
            let g = Arc::new(Grid::line(0.0, 2.0, n, Boundary::DirichletZero).unwrap());
            let f = RealField::from_fn(g.clone(), |p| (1.3 * p[0]).sin());
            let d = gradient(&f, 0).unwrap();
            let exact = RealField::from_fn(g.clone(), |p| 1.3 * (1.3 * p[0]).cos());
            let diff: Vec<f64> = d.data().iter().zip(exact.data()).map(|(a, b)| a - b).collect();
            diff.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        };
        let ratio = err(129) / err(257);
        assert!((3.6..=4.4).contains(&ratio), "gradient refinement ratio {ratio}");
    }

    #[test]
    fn fd_laplacian_second_order_refinement() {
        let err = |n: usize| {
            let g = Arc::new(Grid::line(0.0, 2.0, n, Boundary::DirichletZero).unwrap());
            let f = RealField::from_fn(g.clone(), |p| (1.3 * p[0]).sin());
            let d = laplacian(&f);
            let exact = RealField::from_fn(g.clone(), |p| -1.69 * (1.3 * p[0]).sin());
            let diff: Vec<f64> = d.data().iter().zip(exact.data()).map(|(a, b)| a - b).collect();
            diff.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        };
        let ratio = err(129) / err(257);
        assert!((3.6..=4.4).contains(&ratio), "laplacian refinement ratio {ratio}");
    }

    #[test]
    fn fd_stencils_exact_for_quadratics() {
        let g = Arc::new(Grid::line(-1.0, 3.0, 33, Boundary::DirichletZero).unwrap());
        let f = RealField::from_fn(g.clone(), |p| 2.0 * p[0] * p[0] - p[0] + 1.0);
        let d = gradient(&f, 0).unwrap();
        let lap = laplacian(&f);
        for i in 0..g.len() {
            let x = g.position(i)[0];
            assert!((d.data()[i] - (4.0 * x - 1.0)).abs() < 1e-10, "gradient at wall/interior");
            assert!((lap.data()[i] - 4.0).abs() < 1e-8);
        }
    }

    #[test]
    fn gradient_2d_acts_per_axis() {
        let g = Arc::new(
            Grid::rectangle((-5.0, 5.0, 32), (-5.0, 5.0, 64), Boundary::Periodic).unwrap(),
        );
        let f = RealField::from_fn(g.clone(), |p| {
            (PI * p[0] / 5.0).sin() * (2.0 * PI * p[1] / 5.0).cos()
        });
        let d0 = gradient(&f, 0).unwrap();
        let d1 = gradient(&f, 1).unwrap();
        let e0 = RealField::from_fn(g.clone(), |p| {
            PI / 5.0 * (PI * p[0] / 5.0).cos() * (2.0 * PI * p[1] / 5.0).cos()
        });
        let e1 = RealField::from_fn(g.clone(), |p| {
            -2.0 * PI / 5.0 * (PI * p[0] / 5.0).sin() * (2.0 * PI * p[1] / 5.0).sin()
        });
        assert!(l2(&g, d0.data(), e0.data()) < 1e-10);
        assert!(l2(&g, d1.data(), e1.data()) < 1e-10);
        assert_eq!(gradient(&f, 2).unwrap_err(), OpsError::BadAxis { axis: 2, ndim: 2 });
    }

    #[test]
    fn divergence_of_rotation_free_flow() {
        // F = (x, y) has divergence 2 (use a dirichlet grid: x, y are not periodic).
        let g = Arc::new(
            Grid::rectangle((-1.0, 1.0, 33), (-1.0, 1.0, 31), Boundary::DirichletZero).unwrap(),
        );
        let fx = RealField::from_fn(g.clone(), |p| p[0]);
        let fy = RealField::from_fn(g.clone(), |p| p[1]);
        let div = divergence(&[fx, fy]).unwrap();
        for v in div.data() {
            assert!((v - 2.0).abs() < 1e-9);
        }
    }
}
