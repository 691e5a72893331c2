//! Three-point kernels of the commutator argument.
//!
//! All distances are torus distances. With `n = dim`:
//!
//! ```text
//! κ_ε(x,y,z) = (|x-z|^{t+εp-n} - |y-z|^{t+εp-n}) / |x-y|^{εp} - (|x-z|^{t-n} - |y-z|^{t-n})
//! k_δ(x,y,z) = |x-y|^{δp} ∂_δ κ_δ(x,y,z)
//!            = p (|x-z|^{t+δp-n} log(|x-z|/|x-y|) - |y-z|^{t+δp-n} log(|y-z|/|x-y|))
//! k(x,y,z)   = |x-z|^{α-n} log(|x-z|/|x-y|) - |y-z|^{α-n} log(|y-z|/|x-y|)
//! ```
//!
//! so that `κ_0 ≡ 0` and `k_δ = p k` with `α = t + δp`.

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Torus distances `(|x-z|, |y-z|, |x-y|)`, rejecting coincident points.
fn distances(grid: &Grid, x: &[f64], y: &[f64], z: &[f64]) -> Result<(f64, f64, f64)> {
    let xz = grid.torus_distance(x, z);
    let yz = grid.torus_distance(y, z);
    let xy = grid.torus_distance(x, y);
    if xz == 0.0 || yz == 0.0 || xy == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok((xz, yz, xy))
}

pub(crate) fn kappa_from(xz: f64, yz: f64, xy: f64, n: f64, t: f64, eps: f64, p: f64) -> f64 {
    let a = t + eps * p - n;
    (xz.powf(a) - yz.powf(a)) / xy.powf(eps * p) - (xz.powf(t - n) - yz.powf(t - n))
}

pub(crate) fn k_log_from(xz: f64, yz: f64, xy: f64, n: f64, alpha: f64) -> f64 {
    xz.powf(alpha - n) * (xz / xy).ln() - yz.powf(alpha - n) * (yz / xy).ln()
}

pub fn kappa_eps(
    grid: &Grid,
    x: &[f64],
    y: &[f64],
    z: &[f64],
    t: f64,
    eps: f64,
    p: f64,
) -> Result<f64> {
    let (xz, yz, xy) = distances(grid, x, y, z)?;
    Ok(kappa_from(xz, yz, xy, grid.dim() as f64, t, eps, p))
}

pub fn k_delta(
    grid: &Grid,
    x: &[f64],
    y: &[f64],
    z: &[f64],
    t: f64,
    delta: f64,
    p: f64,
) -> Result<f64> {
    let (xz, yz, xy) = distances(grid, x, y, z)?;
    Ok(p * k_log_from(xz, yz, xy, grid.dim() as f64, t + delta * p))
}

pub fn k_log(grid: &Grid, x: &[f64], y: &[f64], z: &[f64], alpha: f64) -> Result<f64> {
    let (xz, yz, xy) = distances(grid, x, y, z)?;
    Ok(k_log_from(xz, yz, xy, grid.dim() as f64, alpha))
}
