use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::grid::{Grid, SampledFunction};

/// Unnormalized DFT of a sampled function. The inverse divides by `n^dim`.
#[derive(Clone)]
pub(crate) struct Spectrum {
    grid: Grid,
    data: Vec<Complex64>,
}

fn transform(grid: &Grid, data: &mut [Complex64], dir: FftDirection) {
    let n = grid.n_points();
    let fft = FftPlanner::new().plan_fft(n, dir);
    // processes every contiguous chunk of length n: the last axis
    fft.process(data);
    if grid.dim() == 2 {
        transpose(data, n);
        fft.process(data);
        transpose(data, n);
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

impl Spectrum {
    pub fn forward(f: &SampledFunction) -> Self {
        let grid = *f.grid();
        let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        transform(&grid, &mut data, FftDirection::Forward);
        Self { grid, data }
    }

    /// `|ξ|` of the mode stored at flat index `idx`.
    pub fn xi_norm(&self, idx: usize) -> f64 {
        let n = self.grid.n_points();
        let w = 2.0 * std::f64::consts::PI / self.grid.length();
        let signed = |k: usize| {
            if k <= n / 2 {
                k as f64
            } else {
                k as f64 - n as f64
            }
        };
        let [kx, ky] = self.grid.axis_indices(idx);
        if self.grid.dim() == 1 {
            w * signed(kx).abs()
        } else {
            w * signed(kx).hypot(signed(ky))
        }
    }

    /// Pairs `(|ξ|, coefficient)` in storage order.
    pub fn modes(&self) -> impl Iterator<Item = (f64, &Complex64)> + '_ {
        self.data
            .iter()
            .enumerate()
            .map(|(i, c)| (self.xi_norm(i), c))
    }

    /// Applies a radial multiplier `m(|ξ|)`.
    pub fn multiply(&self, m: impl Fn(f64) -> f64) -> Self {
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, c)| c * m(self.xi_norm(i)))
            .collect();
        Self {
            grid: self.grid,
            data,
        }
    }

    /// Real part of the inverse transform.
    pub fn inverse(mut self) -> SampledFunction {
        transform(&self.grid, &mut self.data, FftDirection::Inverse);
        let scale = 1.0 / self.grid.len() as f64;
        let values = self.data.iter().map(|c| c.re * scale).collect();
        SampledFunction::from_raw(self.grid, values)
    }
}
