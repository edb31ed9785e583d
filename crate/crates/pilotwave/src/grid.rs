//! Uniform rectangular grids in one or two dimensions.
//!
//! A grid owns per-axis bounds and sample counts plus a boundary treatment
//! shared by every axis. Periodic axes treat `upper` as identified with
//! `lower` (spacing (upper−lower)/n, the point at `upper` is not stored);
//! dirichlet-zero axes store both walls (spacing (upper−lower)/(n−1)) and
//! fields are pinned to zero there.
//!
//! Flat storage is row-major with axis 0 slowest: `flat = i0·n1 + i1`.

use thiserror::Error;

pub const MIN_POINTS_PER_AXIS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    DirichletZero,
}

impl Boundary {
    pub fn as_str(&self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::DirichletZero => "dirichlet-zero",
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One grid axis: half-open `[lower, upper)` for periodic boundaries,
/// closed `[lower, upper]` for dirichlet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("axis {axis}: bounds must satisfy lower < upper and be finite, got [{lower}, {upper}]")]
    BadBounds { axis: usize, lower: f64, upper: f64 },
    #[error("axis {axis}: need at least {MIN_POINTS_PER_AXIS} points, got {count}")]
    TooFewPoints { axis: usize, count: usize },
    #[error("grids must be 1- or 2-dimensional, got {0} axes")]
    BadDimension(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
    boundary: Boundary,
    spacings: Vec<f64>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>, boundary: Boundary) -> Result<Self, GridError> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(GridError::BadDimension(axes.len()));
        }
        for (i, ax) in axes.iter().enumerate() {
            if !(ax.lower.is_finite() && ax.upper.is_finite() && ax.lower < ax.upper) {
                return Err(GridError::BadBounds { axis: i, lower: ax.lower, upper: ax.upper });
            }
            if ax.count < MIN_POINTS_PER_AXIS {
                return Err(GridError::TooFewPoints { axis: i, count: ax.count });
            }
        }
        let spacings = axes
            .iter()
            .map(|ax| {
                let cells = match boundary {
                    Boundary::Periodic => ax.count,
                    Boundary::DirichletZero => ax.count - 1,
                };
                (ax.upper - ax.lower) / cells as f64
            })
            .collect();
        Ok(Self { axes, boundary, spacings })
    }

    pub fn line(lower: f64, upper: f64, count: usize, boundary: Boundary) -> Result<Self, GridError> {
        Self::new(vec![Axis { lower, upper, count }], boundary)
    }

    pub fn rectangle(
        x: (f64, f64, usize),
        y: (f64, f64, usize),
        boundary: Boundary,
    ) -> Result<Self, GridError> {
        Self::new(
            vec![
                Axis { lower: x.0, upper: x.1, count: x.2 },
                Axis { lower: y.0, upper: y.1, count: y.2 },
            ],
            boundary,
        )
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    /// Grid spacing along axis `a`.
    pub fn spacing(&self, a: usize) -> f64 {
        self.spacings[a]
    }

    /// Total number of stored sample points.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|ax| ax.count).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of one grid cell (product of spacings).
    pub fn cell_volume(&self) -> f64 {
        self.spacings.iter().product()
    }

    /// Coordinate of sample `i` along axis `a`.
    pub fn coord(&self, a: usize, i: usize) -> f64 {
        self.axes[a].lower + self.spacings[a] * i as f64
    }

    /// Flat index from per-axis indices (row-major, axis 0 slowest).
    pub fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.ndim());
        match self.ndim() {
            1 => idx[0],
            _ => idx[0] * self.axes[1].count + idx[1],
        }
    }

    /// Per-axis indices from a flat index.
    pub fn unflat(&self, flat: usize) -> [usize; 2] {
        match self.ndim() {
            1 => [flat, 0],
            _ => {
                let n1 = self.axes[1].count;
                [flat / n1, flat % n1]
            }
        }
    }

    /// Position of the sample at flat index `flat`; unused components are 0.
    pub fn position(&self, flat: usize) -> [f64; 2] {
        let ij = self.unflat(flat);
        let mut p = [0.0; 2];
        for a in 0..self.ndim() {
            p[a] = self.coord(a, ij[a]);
        }
        p
    }

    /// Index of the stored sample nearest to coordinate `x` along axis `a`
    /// (periodic axes wrap, dirichlet axes clamp).
    pub fn nearest_index(&self, a: usize, x: f64) -> usize {
        let ax = &self.axes[a];
        let h = self.spacings[a];
        match self.boundary {
            Boundary::Periodic => {
                let span = ax.upper - ax.lower;
                let mut s = (x - ax.lower).rem_euclid(span) / h;
                if s >= ax.count as f64 - 0.5 {
                    s = 0.0; // nearest wraps to the first sample
                }
                (s + 0.5).floor() as usize % ax.count
            }
            Boundary::DirichletZero => {
                let s = ((x - ax.lower) / h + 0.5).floor();
                (s.max(0.0) as usize).min(ax.count - 1)
            }
        }
    }

    /// True if `x` lies inside the grid's bounding box (closed on both ends).
    pub fn contains(&self, x: &[f64; 2]) -> bool {
        (0..self.ndim()).all(|a| x[a] >= self.axes[a].lower && x[a] <= self.axes[a].upper)
    }

    /// Quadrature weight of the sample at flat index `flat`:
    /// Riemann (cell volume) on periodic grids, trapezoid on dirichlet grids.
    pub fn quad_weight(&self, flat: usize) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.cell_volume(),
            Boundary::DirichletZero => {
                let ij = self.unflat(flat);
                let mut w = 1.0;
                for a in 0..self.ndim() {
                    let edge = ij[a] == 0 || ij[a] == self.axes[a].count - 1;
                    w *= self.spacings[a] * if edge { 0.5 } else { 1.0 };
                }
                w
            }
        }
    }

    /// True if the sample touches a dirichlet wall (always false on periodic grids).
    pub fn on_wall(&self, flat: usize) -> bool {
        if self.boundary == Boundary::Periodic {
            return false;
        }
        let ij = self.unflat(flat);
        (0..self.ndim()).any(|a| ij[a] == 0 || ij[a] == self.axes[a].count - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_conventions() {
        let p = Grid::line(-10.0, 10.0, 512, Boundary::Periodic).unwrap();
        assert!((p.spacing(0) - 20.0 / 512.0).abs() < 1e-15);
        let d = Grid::line(-10.0, 10.0, 513, Boundary::DirichletZero).unwrap();
        assert!((d.spacing(0) - 20.0 / 512.0).abs() < 1e-15);
        // periodic grids do not store the upper bound
        assert!((p.coord(0, 511) - (10.0 - p.spacing(0))).abs() < 1e-12);
        // dirichlet grids store both walls
        assert!((d.coord(0, 512) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn count_floor_enforced() {
        assert_eq!(
            Grid::line(0.0, 1.0, 7, Boundary::Periodic),
            Err(GridError::TooFewPoints { axis: 0, count: 7 })
        );
        assert!(Grid::line(0.0, 1.0, 8, Boundary::Periodic).is_ok());
    }

    #[test]
    fn bad_bounds_rejected() {
        assert!(Grid::line(1.0, 1.0, 16, Boundary::Periodic).is_err());
        assert!(Grid::line(2.0, -1.0, 16, Boundary::Periodic).is_err());
        assert!(Grid::line(0.0, f64::INFINITY, 16, Boundary::Periodic).is_err());
    }

    #[test]
    fn row_major_indexing() {
        let g = Grid::rectangle((0.0, 1.0, 8), (0.0, 2.0, 16), Boundary::Periodic).unwrap();
        assert_eq!(g.len(), 128);
        assert_eq!(g.flat(&[3, 5]), 3 * 16 + 5);
        assert_eq!(g.unflat(3 * 16 + 5), [3, 5]);
        let p = g.position(3 * 16 + 5);
        assert!((p[0] - 3.0 / 8.0).abs() < 1e-15);
        assert!((p[1] - 5.0 * 2.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_weights() {
        let d = Grid::line(0.0, 1.0, 9, Boundary::DirichletZero).unwrap();
        let h = 0.125;
        assert!((d.quad_weight(0) - h / 2.0).abs() < 1e-15);
        assert!((d.quad_weight(4) - h).abs() < 1e-15);
        assert!((d.quad_weight(8) - h / 2.0).abs() < 1e-15);
        // weights sum to the domain length
        let total: f64 = (0..d.len()).map(|i| d.quad_weight(i)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nearest_index_wraps_and_clamps() {
        let p = Grid::line(0.0, 1.0, 10, Boundary::Periodic).unwrap();
        assert_eq!(p.nearest_index(0, 0.96), 0); // wraps past the last sample
        assert_eq!(p.nearest_index(0, 0.34), 3);
        assert_eq!(p.nearest_index(0, -0.06), 9);
        let d = Grid::line(0.0, 1.0, 11, Boundary::DirichletZero).unwrap();
        assert_eq!(d.nearest_index(0, -0.3), 0);
        assert_eq!(d.nearest_index(0, 1.3), 10);
        assert_eq!(d.nearest_index(0, 0.52), 5);
    }

    #[test]
    fn dimension_limits() {
        let ax = Axis { lower: 0.0, upper: 1.0, count: 8 };
        assert!(Grid::new(vec![ax; 3], Boundary::Periodic).is_err());
        assert!(Grid::new(vec![], Boundary::Periodic).is_err());
    }
}
