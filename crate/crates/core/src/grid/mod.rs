//! Uniform periodic grids and the functions sampled on them.
//!
//! The flat torus `[0, L)^dim` stands in for `R^dim`. Nodes sit at
//! `x_i = i * h` with `h = L / n`; every integral in the crate is the
//! rectangle rule on these nodes.

mod domain;
pub mod io;
mod presets;

pub use domain::{Domain, GridBox};
pub use presets::{make_preset, preset_params, Preset, PresetParams, SupportBox, PRESET_NAMES};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduce::pairwise_sum;

/// A point on the torus. Only the first `dim` coordinates are meaningful.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length must be > 0, got {length}"
            )));
        }
        Ok(Self { dim, n, length })
    }

    /// One-dimensional grid on `[0, 1)`.
    pub fn unit_1d(n: usize) -> Result<Self> {
        Self::new(1, n, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Total number of nodes, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of a single node, `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Per-axis indices of a flat node index (row-major, x slowest).
    #[inline]
    pub fn axis_indices(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    #[inline]
    pub fn flat_index(&self, ix: usize, iy: usize) -> usize {
        if self.dim == 1 {
            ix
        } else {
            ix * self.n + iy
        }
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Point {
        let h = self.spacing();
        let [ix, iy] = self.axis_indices(idx);
        [ix as f64 * h, iy as f64 * h]
    }

    /// Index of the periodic displacement `a - b` in a table of size `len()`.
    #[inline]
    pub fn displacement(&self, a: usize, b: usize) -> usize {
        let n = self.n;
        if self.dim == 1 {
            (a + n - b) & (n - 1)
        } else {
            let (ax, ay) = (a / n, a % n);
            let (bx, by) = (b / n, b % n);
            ((ax + n - bx) & (n - 1)) * n + ((ay + n - by) & (n - 1))
        }
    }

    /// Length of the shortest periodic image of the displacement with flat index `d`.
    pub fn displacement_norm(&self, d: usize) -> f64 {
        let h = self.spacing();
        let [dx, dy] = self.axis_indices(d);
        let fold = |k: usize| k.min(self.n - k) as f64 * h;
        if self.dim == 1 {
            fold(dx)
        } else {
            fold(dx).hypot(fold(dy))
        }
    }

    /// Torus distance: minimum over periodic images.
    pub fn torus_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let l = self.length;
        let mut acc = 0.0;
        for k in 0..self.dim {
            let mut d = (x[k] - y[k]).abs() % l;
            if d > 0.5 * l {
                d = l - d;
            }
            acc += d * d;
        }
        acc.sqrt()
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Values of a real function on every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "value at node {i} is {}",
                values[i]
            )));
        }
        Ok(Self { grid, values })
    }

    /// Trusted constructor for values produced by internal, finite arithmetic.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn from_fn<F: Fn(&Point) -> f64>(grid: Grid, f: F) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self::from_raw(grid, vec![value; grid.len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| a * v).collect())
    }

    pub fn add_constant(&self, c: f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| v + c).collect())
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &SampledFunction) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x + a * y)
                .collect(),
        ))
    }

    pub fn add(&self, other: &SampledFunction) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SampledFunction) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &SampledFunction) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x * y)
                .collect(),
        ))
    }

    /// Cyclic shift by whole cells along each axis.
    pub fn shift(&self, by: [usize; 2]) -> Self {
        let g = self.grid;
        let n = g.n_points();
        let mut out = vec![0.0; g.len()];
        for (i, v) in self.values.iter().enumerate() {
            let [ix, iy] = g.axis_indices(i);
            let j = if g.dim() == 1 {
                (ix + by[0]) % n
            } else {
                g.flat_index((ix + by[0]) % n, (iy + by[1]) % n)
            };
            out[j] = *v;
        }
        Self::from_raw(g, out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫ u` over the whole torus by the rectangle rule.
    pub fn integral(&self) -> f64 {
        pairwise_sum(&self.values) * self.grid.cell_volume()
    }

    /// Grid `L^p` norm over the whole torus.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let terms: Vec<f64> = self.values.iter().map(|v| v.abs().powf(p)).collect();
        (pairwise_sum(&terms) * self.grid.cell_volume()).powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        let terms: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        (pairwise_sum(&terms) * self.grid.cell_volume()).sqrt()
    }

    /// `∫ u v` by the rectangle rule.
    pub fn inner(&self, other: &SampledFunction) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let terms: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(pairwise_sum(&terms) * self.grid.cell_volume())
    }
}

/// `|D|^{-1} ∫_D u` by the grid rectangle rule.
pub fn mean_value(u: &SampledFunction, domain: &Domain) -> Result<f64> {
    let nodes = domain.nodes(u.grid())?;
    if nodes.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let vals: Vec<f64> = nodes.iter().map(|&i| u.values()[i]).collect();
    Ok(pairwise_sum(&vals) / nodes.len() as f64)
}
