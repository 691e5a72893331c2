use serde::{Deserialize, Serialize};

use super::Grid;
use crate::error::{Error, Result};

const ALIGN_TOL: f64 = 1e-9;

/// Half-open, axis-aligned box `[lo, hi)` in node-index coordinates.
///
/// Boxes never wrap around the torus. In 1D only the first axis is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridBox {
    pub lo: [usize; 2],
    pub hi: [usize; 2],
}

impl GridBox {
    pub fn new(grid: &Grid, lo: [usize; 2], hi: [usize; 2]) -> Result<Self> {
        let b = Self { lo, hi };
        b.check(grid)?;
        Ok(b)
    }

    /// Box from real coordinates; endpoints must be multiples of `h`.
    pub fn from_coords(grid: &Grid, lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != grid.dim() || hi.len() != grid.dim() {
            return Err(Error::InvalidDomain(format!(
                "box needs {} coordinates per corner",
                grid.dim()
            )));
        }
        let h = grid.spacing();
        let snap = |x: f64| -> Result<usize> {
            let k = x / h;
            let r = k.round();
            if (k - r).abs() > ALIGN_TOL || r < 0.0 {
                return Err(Error::InvalidDomain(format!(
                    "endpoint {x} is not a non-negative multiple of h = {h}"
                )));
            }
            Ok(r as usize)
        };
        let mut b = Self {
            lo: [0, 0],
            hi: [1, 1],
        };
        for k in 0..grid.dim() {
            b.lo[k] = snap(lo[k])?;
            b.hi[k] = snap(hi[k])?;
        }
        b.check(grid)?;
        Ok(b)
    }

    pub fn full(grid: &Grid) -> Self {
        let n = grid.n_points();
        if grid.dim() == 1 {
            Self {
                lo: [0, 0],
                hi: [n, 1],
            }
        } else {
            Self {
                lo: [0, 0],
                hi: [n, n],
            }
        }
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        let n = grid.n_points();
        for k in 0..grid.dim() {
            if self.lo[k] >= self.hi[k] {
                return Err(Error::InvalidDomain(format!("empty box {self:?}")));
            }
            if self.hi[k] > n {
                return Err(Error::InvalidDomain(format!(
                    "box {self:?} leaves the torus box [0, {n})"
                )));
            }
        }
        if grid.dim() == 1 && (self.lo[1], self.hi[1]) != (0, 1) {
            return Err(Error::InvalidDomain("1D box with a second axis".into()));
        }
        Ok(())
    }

    /// Side length in cells along axis `k`.
    pub fn cells(&self, k: usize) -> usize {
        self.hi[k] - self.lo[k]
    }

    pub fn contains(&self, grid: &Grid, idx: usize) -> bool {
        let a = grid.axis_indices(idx);
        (0..grid.dim()).all(|k| a[k] >= self.lo[k] && a[k] < self.hi[k])
    }

    pub fn contains_box(&self, other: &GridBox, dim: usize) -> bool {
        (0..dim).all(|k| other.lo[k] >= self.lo[k] && other.hi[k] <= self.hi[k])
    }

    pub fn intersects(&self, other: &GridBox, dim: usize) -> bool {
        (0..dim).all(|k| self.lo[k] < other.hi[k] && other.lo[k] < self.hi[k])
    }

    pub fn intersection(&self, other: &GridBox, dim: usize) -> Option<GridBox> {
        if !self.intersects(other, dim) {
            return None;
        }
        let mut out = *self;
        for k in 0..dim {
            out.lo[k] = self.lo[k].max(other.lo[k]);
            out.hi[k] = self.hi[k].min(other.hi[k]);
        }
        Some(out)
    }

    pub fn nodes(&self, grid: &Grid) -> Vec<usize> {
        if grid.dim() == 1 {
            (self.lo[0]..self.hi[0]).collect()
        } else {
            let mut out = Vec::with_capacity(self.cells(0) * self.cells(1));
            for ix in self.lo[0]..self.hi[0] {
                for iy in self.lo[1]..self.hi[1] {
                    out.push(grid.flat_index(ix, iy));
                }
            }
            out
        }
    }

    pub fn center(&self, grid: &Grid) -> [f64; 2] {
        let h = grid.spacing();
        [
            0.5 * (self.lo[0] + self.hi[0]) as f64 * h,
            0.5 * (self.lo[1] + self.hi[1]) as f64 * h,
        ]
    }

    /// Euclidean diameter of the box.
    pub fn diam(&self, grid: &Grid) -> f64 {
        let h = grid.spacing();
        (0..grid.dim())
            .map(|k| (self.cells(k) as f64 * h).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn measure(&self, grid: &Grid) -> f64 {
        (0..grid.dim())
            .map(|k| self.cells(k) as f64)
            .product::<f64>()
            * grid.cell_volume()
    }

    /// Concentric box with `lambda` times the half-widths, endpoints rounded
    /// to the nearest node. Fails when the result leaves `[0, L)^dim`.
    pub fn scaled(&self, grid: &Grid, lambda: f64) -> Result<GridBox> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(crate::error::invalid("lambda", lambda, "must be > 0"));
        }
        let mut out = *self;
        for k in 0..grid.dim() {
            let c = 0.5 * (self.lo[k] + self.hi[k]) as f64;
            let r = 0.5 * self.cells(k) as f64 * lambda;
            let lo = (c - r).round();
            let hi = (c + r).round();
            if lo < 0.0 || hi > grid.n_points() as f64 {
                return Err(Error::Geometry(format!(
                    "{lambda}x box {self:?} exceeds the torus box"
                )));
            }
            out.lo[k] = lo as usize;
            out.hi[k] = (hi as usize).max(out.lo[k] + 1);
        }
        Ok(out)
    }

    /// Sub-box strictly inside `outer` with at least `margin` cells on every side.
    pub fn inside_with_margin(&self, outer: &GridBox, dim: usize, margin: usize) -> bool {
        (0..dim).all(|k| self.lo[k] >= outer.lo[k] + margin && self.hi[k] + margin <= outer.hi[k])
    }
}

/// Finite union of disjoint grid-aligned boxes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    boxes: Vec<GridBox>,
}

impl Domain {
    pub fn new(grid: &Grid, boxes: Vec<GridBox>) -> Result<Self> {
        if boxes.is_empty() {
            return Err(Error::EmptyDomain);
        }
        for b in &boxes {
            b.check(grid)?;
        }
        for (i, a) in boxes.iter().enumerate() {
            for b in &boxes[i + 1..] {
                if a.intersects(b, grid.dim()) {
                    return Err(Error::InvalidDomain(format!(
                        "boxes {a:?} and {b:?} overlap"
                    )));
                }
            }
        }
        Ok(Self { boxes })
    }

    /// The whole torus.
    pub fn full(grid: &Grid) -> Self {
        Self {
            boxes: vec![GridBox::full(grid)],
        }
    }

    pub fn from_box(b: GridBox) -> Self {
        Self { boxes: vec![b] }
    }

    /// 1D convenience: intervals `[lo, hi)` in real coordinates.
    pub fn from_coords(grid: &Grid, intervals: &[[f64; 2]]) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::UnsupportedDim {
                dim: grid.dim(),
                what: "interval list",
            });
        }
        let boxes = intervals
            .iter()
            .map(|[a, b]| GridBox::from_coords(grid, &[*a], &[*b]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, boxes)
    }

    pub fn boxes(&self) -> &[GridBox] {
        &self.boxes
    }

    /// Sorted node indices covered by the domain.
    pub fn nodes(&self, grid: &Grid) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for b in &self.boxes {
            b.check(grid)?;
            out.extend(b.nodes(grid));
        }
        out.sort_unstable();
        Ok(out)
    }

    pub fn mask(&self, grid: &Grid) -> Result<Vec<bool>> {
        let mut m = vec![false; grid.len()];
        for i in self.nodes(grid)? {
            m[i] = true;
        }
        Ok(m)
    }

    pub fn is_full(&self, grid: &Grid) -> bool {
        self.boxes.len() == 1 && self.boxes[0] == GridBox::full(grid)
    }

    pub fn measure(&self, grid: &Grid) -> f64 {
        self.boxes.iter().map(|b| b.measure(grid)).sum()
    }

    /// True when every box of `other` lies inside some box of `self`.
    pub fn contains_box(&self, b: &GridBox, dim: usize) -> bool {
        self.boxes.iter().any(|a| a.contains_box(b, dim))
    }
}
