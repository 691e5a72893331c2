use std::f64::consts::PI;

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use super::lambda_pow;
use crate::error::{invalid, Result};
use crate::grid::SampledFunction;
use crate::kernel::cos_power_integral;
use crate::reduce::{pairwise_sum, seq_sum};

#[derive(Debug, Clone)]
pub struct RieszPotential {
    pub potential: SampledFunction,
    /// Mean of the input, removed before inversion.
    pub removed_mean: f64,
}

fn check_order(dim: usize, t: f64) -> Result<()> {
    if !(t > 0.0 && t < dim as f64) {
        return Err(invalid(
            "t",
            t,
            format!("Riesz order must lie in (0, {dim})"),
        ));
    }
    Ok(())
}

/// `Λ^{-t} g`; the mean of `g` is subtracted first and reported.
pub fn riesz_potential(g: &SampledFunction, t: f64) -> Result<RieszPotential> {
    check_order(g.grid().dim(), t)?;
    let removed_mean = pairwise_sum(g.values()) / g.grid().len() as f64;
    let potential = lambda_pow(g, -t);
    Ok(RieszPotential {
        potential,
        removed_mean,
    })
}

/// `Γ((n - t)/2) / (2^t π^{n/2} Γ(t/2))`, the constant with `Λ^{-t} g = c |x|^{t-n} * g` on `R^n`.
pub fn riesz_constant(dim: usize, t: f64) -> f64 {
    let n = dim as f64;
    gamma(0.5 * (n - t)) / (2f64.powf(t) * PI.powf(0.5 * n) * gamma(0.5 * t))
}

/// Real-space convolution `c(n,t) Σ_z d(x,z)^{t-n} g(z) h^n` with the
/// torus distance `d`.
///
/// The singular cell `z = x` is replaced by `g(x) ∫_cell |r|^{t-n} dr`.
/// The result differs from [`riesz_potential`] by the periodization error
/// of the kernel, which is small for compactly supported, mean-zero `g`.
pub fn riesz_potential_real_space(g: &SampledFunction, t: f64) -> Result<SampledFunction> {
    let grid = *g.grid();
    let dim = grid.dim();
    check_order(dim, t)?;
    let n = dim as f64;
    let h = grid.spacing();
    let table: Vec<f64> = (0..grid.len())
        .map(|d| {
            if d == 0 {
                0.0
            } else {
                grid.displacement_norm(d).powf(t - n)
            }
        })
        .collect();
    let cell = if dim == 1 {
        2.0 * (0.5 * h).powf(t) / t
    } else {
        8.0 * (0.5 * h).powf(t) / t * cos_power_integral(-t)
    };
    let c = riesz_constant(dim, t);
    let vol = grid.cell_volume();
    let cols: Vec<usize> = (0..grid.len()).collect();
    let v = g.values();
    let values: Vec<f64> = cols
        .par_iter()
        .map(|&x| {
            let row = seq_sum(&cols, |z| table[grid.displacement(x, z)] * v[z]);
            c * (row * vol + cell * v[x])
        })
        .collect();
    SampledFunction::new(grid, values)
}
