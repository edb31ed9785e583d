//! Scalar fields sampled on a [`Grid`](crate::grid::Grid), the polar
//! (Madelung) decomposition, and node masks.
//!
//! The node mask marks samples where |ψ|² falls below `DELTA_NODE` times its
//! grid maximum; downstream quotients (velocity, quantum potential) are either
//! floored or skipped there.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::grid::Grid;
use crate::units::UnitSystem;

/// Relative |ψ|² threshold below which a sample counts as a node.
pub const DELTA_NODE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("data length {got} does not match grid size {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("cannot normalize a field with zero norm")]
    ZeroNorm,
    #[error("field contains non-finite samples")]
    NotFinite,
}

/// Real scalar field on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Arc<Grid>,
    data: Vec<f64>,
}

/// Complex scalar field on a grid (wavefunctions, intermediate spectra).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Arc<Grid>,
    data: Vec<Complex64>,
}

/// Marks grid samples where |ψ|² < DELTA_NODE · max|ψ|².
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMask {
    grid: Arc<Grid>,
    masked: Vec<bool>,
    /// Absolute |ψ|² floor the mask was built with.
    pub floor: f64,
}

pub(crate) fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl RealField {
    pub fn new(grid: Arc<Grid>, data: Vec<f64>) -> Result<Self, FieldError> {
        if data.len() != grid.len() {
            return Err(FieldError::LengthMismatch { got: data.len(), want: grid.len() });
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self { grid, data: vec![0.0; n] }
    }

    /// Sample a function of position onto the grid.
    pub fn from_fn(grid: Arc<Grid>, mut f: impl FnMut(&[f64; 2]) -> f64) -> Self {
        let data = (0..grid.len()).map(|i| f(&grid.position(i))).collect();
        Self { grid, data }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// ∫ f dV with the grid's native quadrature (Riemann on periodic grids,
    /// trapezoid on dirichlet grids).
    pub fn integrate(&self) -> f64 {
        integrate_weighted(&self.grid, |i| self.data[i])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Pointwise map into a new field.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid.clone(), data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise combination with another field on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self, FieldError> {
        if !same_grid(&self.grid, &other.grid) {
            return Err(FieldError::GridMismatch);
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid.clone(), data })
    }
}

impl ComplexField {
    pub fn new(grid: Arc<Grid>, data: Vec<Complex64>) -> Result<Self, FieldError> {
        if data.len() != grid.len() {
            return Err(FieldError::LengthMismatch { got: data.len(), want: grid.len() });
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self { grid, data: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_fn(grid: Arc<Grid>, mut f: impl FnMut(&[f64; 2]) -> Complex64) -> Self {
        let data = (0..grid.len()).map(|i| f(&grid.position(i))).collect();
        Self { grid, data }
    }

    /// Lift a real field (e.g. an eigenstate amplitude) to a complex one.
    pub fn from_real(re: &RealField) -> Self {
        Self {
            grid: re.grid.clone(),
            data: re.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Probability density |ψ|² as a real field.
    pub fn density(&self) -> RealField {
        RealField {
            grid: self.grid.clone(),
            data: self.data.iter().map(|v| v.norm_sqr()).collect(),
        }
    }

    /// ∫ |ψ|² dV.
    pub fn norm_sqr(&self) -> f64 {
        integrate_weighted(&self.grid, |i| self.data[i].norm_sqr())
    }

    /// L² inner product ⟨self, other⟩ = ∫ self* · other dV.
    pub fn inner(&self, other: &Self) -> Result<Complex64, FieldError> {
        if !same_grid(&self.grid, &other.grid) {
            return Err(FieldError::GridMismatch);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.data.len() {
            acc += self.data[i].conj() * other.data[i] * self.grid.quad_weight(i);
        }
        Ok(acc)
    }

    /// Rescale so that ∫|ψ|² dV = 1.
    pub fn normalized(&self) -> Result<Self, FieldError> {
        if !self.is_finite() {
            return Err(FieldError::NotFinite);
        }
        let n2 = self.norm_sqr();
        if !(n2 > 0.0) {
            return Err(FieldError::ZeroNorm);
        }
        let s = 1.0 / n2.sqrt();
        Ok(Self { grid: self.grid.clone(), data: self.data.iter().map(|&v| v * s).collect() })
    }

    /// Node mask: samples with |ψ|² < DELTA_NODE · max|ψ|².
    pub fn node_mask(&self) -> NodeMask {
        let max = self.data.iter().fold(0.0f64, |m, v| m.max(v.norm_sqr()));
        let floor = DELTA_NODE * max;
        NodeMask {
            grid: self.grid.clone(),
            masked: self.data.iter().map(|v| v.norm_sqr() < floor).collect(),
            floor,
        }
    }

    /// Madelung (polar) decomposition ψ = A·exp(i S/ℏ).
    ///
    /// A = |ψ| ≥ 0 and S = ℏ·arg ψ on the principal branch (−πℏ, πℏ]. The
    /// returned S is *not* unwrapped; anything physical must go through
    /// gradients of the phase computed as Im(ψ*∇ψ)/|ψ|², never through
    /// differences of this wrapped S.
    pub fn polar(&self, units: &UnitSystem) -> (RealField, RealField, NodeMask) {
        let mask = self.node_mask();
        let amp = RealField {
            grid: self.grid.clone(),
            data: self.data.iter().map(|v| v.norm()).collect(),
        };
        let hbar = units.hbar();
        let phase = RealField {
            grid: self.grid.clone(),
            data: self.data.iter().map(|v| hbar * v.arg()).collect(),
        };
        (amp, phase, mask)
    }

    /// Rebuild ψ from amplitude and action fields: ψ = A·exp(i S/ℏ).
    pub fn from_polar(
        amp: &RealField,
        action: &RealField,
        units: &UnitSystem,
    ) -> Result<Self, FieldError> {
        if !same_grid(&amp.grid, &action.grid) {
            return Err(FieldError::GridMismatch);
        }
        let k = units.wave_k();
        let data = amp
            .data
            .iter()
            .zip(&action.data)
            .map(|(&a, &s)| Complex64::from_polar(a, k * s))
            .collect();
        Ok(Self { grid: amp.grid.clone(), data })
    }
}

impl NodeMask {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn is_masked(&self, i: usize) -> bool {
        self.masked[i]
    }

    pub fn masked(&self) -> &[bool] {
        &self.masked
    }

    pub fn count_masked(&self) -> usize {
        self.masked.iter().filter(|&&m| m).count()
    }

    pub fn is_all_clear(&self) -> bool {
        self.count_masked() == 0
    }
}

fn integrate_weighted(grid: &Grid, f: impl Fn(usize) -> f64) -> f64 {
    // Fixed summation order keeps results bit-identical across runs.
    (0..grid.len()).map(|i| f(i) * grid.quad_weight(i)).sum()
}
