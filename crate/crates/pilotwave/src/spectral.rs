//! FFT plumbing for periodic grids: plan caching, axis-wise transforms on
//! row-major data, and wavenumber tables.
//!
//! Forward transforms are unscaled; inverse transforms include the 1/N
//! factor, so `inverse(forward(x)) == x` up to roundoff. Each grid line is
//! transformed inside a single rayon task, so results are bit-identical
//! regardless of thread count.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

/// Angular wavenumbers k_j = 2π·f_j/L in FFT bin order, with
/// f_j = j for j ≤ n/2 and j − n beyond (even n puts +n/2 at the Nyquist bin).
pub fn wavenumbers(count: usize, spacing: f64) -> Vec<f64> {
    let span = count as f64 * spacing;
    let scale = 2.0 * std::f64::consts::PI / span;
    (0..count)
        .map(|j| {
            let f = if j <= count / 2 { j as isize } else { j as isize - count as isize };
            scale * f as f64
        })
        .collect()
}

/// Wavenumbers for first derivatives: identical to [`wavenumbers`] except the
/// Nyquist bin is zeroed (an even-length real signal has no well-defined odd
/// derivative there, and zeroing keeps derivatives of real fields real).
pub fn derivative_wavenumbers(count: usize, spacing: f64) -> Vec<f64> {
    let mut k = wavenumbers(count, spacing);
    if count % 2 == 0 {
        k[count / 2] = 0.0;
    }
    k
}

/// Cached FFT plans for one grid.
pub struct Spectral {
    counts: Vec<usize>,
    fwd: Vec<Arc<dyn Fft<f64>>>,
    inv: Vec<Arc<dyn Fft<f64>>>,
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let counts: Vec<usize> = grid.axes().iter().map(|a| a.count).collect();
        let fwd = counts.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inv = counts.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Self { counts, fwd, inv }
    }

    fn plan(&self, axis: usize, forward: bool) -> &Arc<dyn Fft<f64>> {
        if forward {
            &self.fwd[axis]
        } else {
            &self.inv[axis]
        }
    }

    /// Transform along one axis of row-major data (in place, unscaled).
    fn transform_axis(&self, data: &mut [Complex64], axis: usize, forward: bool) {
        let ndim = self.counts.len();
        let plan = self.plan(axis, forward);
        match (ndim, axis) {
            (1, 0) => {
                let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
                plan.process_with_scratch(data, &mut scratch);
            }
            (2, 1) => {
                let n1 = self.counts[1];
                data.par_chunks_exact_mut(n1).for_each_init(
                    || vec![Complex64::default(); plan.get_inplace_scratch_len()],
                    |scratch, row| plan.process_with_scratch(row, scratch),
                );
            }
            (2, 0) => {
                // Transpose, transform rows, transpose back.
                let (n0, n1) = (self.counts[0], self.counts[1]);
                let mut t = vec![Complex64::default(); n0 * n1];
                for i in 0..n0 {
                    for j in 0..n1 {
                        t[j * n0 + i] = data[i * n1 + j];
                    }
                }
                t.par_chunks_exact_mut(n0).for_each_init(
                    || vec![Complex64::default(); plan.get_inplace_scratch_len()],
                    |scratch, col| plan.process_with_scratch(col, scratch),
                );
                for i in 0..n0 {
                    for j in 0..n1 {
                        data[i * n1 + j] = t[j * n0 + i];
                    }
                }
            }
            _ => unreachable!("grids are 1- or 2-dimensional"),
        }
    }

    /// Full forward transform over all axes (unscaled).
    pub fn forward(&self, data: &mut [Complex64]) {
        for axis in 0..self.counts.len() {
            self.transform_axis(data, axis, true);
        }
    }

    /// Full inverse transform over all axes, scaled by 1/N.
    pub fn inverse(&self, data: &mut [Complex64]) {
        for axis in 0..self.counts.len() {
            self.transform_axis(data, axis, false);
        }
        let scale = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Forward transform along a single axis (unscaled).
    pub fn forward_axis(&self, data: &mut [Complex64], axis: usize) {
        self.transform_axis(data, axis, true);
    }

    /// Inverse transform along a single axis, scaled by 1/n_axis.
    pub fn inverse_axis(&self, data: &mut [Complex64], axis: usize) {
        self.transform_axis(data, axis, false);
        let scale = 1.0 / self.counts[axis] as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}
