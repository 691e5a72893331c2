use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::SampledFunction;
use crate::reduce::par_row_sum;
use crate::spectral::lambda_pow;

/// Largest grid accepted by [`log_potential_a`]; the sum is cubic in `n`.
pub const LOGPOT_MAX_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogKernelParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl LogKernelParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let k = Self { alpha, beta, gamma };
        if let Some(v) = k.violations(1).into_iter().next() {
            return Err(invalid("log kernel", k.s(), v));
        }
        Ok(k)
    }

    /// `s = γ + β - α`.
    pub fn s(&self) -> f64 {
        self.gamma + self.beta - self.alpha
    }

    pub fn violations(&self, dim: usize) -> Vec<String> {
        let n = dim as f64;
        let mut out = Vec::new();
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v < n) {
                out.push(format!(
                    "log-potential hypothesis: {name} = {v} must lie in (0, {n})"
                ));
            }
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            out.push(format!(
                "log-potential hypothesis: gamma = {} must lie in (0, 1)",
                self.gamma
            ));
        }
        let s = self.s();
        if !(s > 0.0 && s < 1.0) {
            out.push(format!(
                "log-potential hypothesis: s = gamma + beta - alpha = {s} must lie in (0, 1)"
            ));
        }
        out
    }
}

/// `A(φ) = (Σ_{x≠y} |Σ_{z∉{x,y}} k(x,y,z) Λ^β φ(z) h|^p d(x,y)^{-1-γp} h²)^{1/p}`
/// by direct triple summation. One-dimensional grids only.
pub fn log_potential_a(phi: &SampledFunction, params: &LogKernelParams, p: f64) -> Result<f64> {
    let grid = *phi.grid();
    if grid.dim() != 1 {
        return Err(Error::UnsupportedDim {
            dim: grid.dim(),
            what: "log-potential functional",
        });
    }
    if grid.n_points() > LOGPOT_MAX_POINTS {
        return Err(Error::InvalidGrid(format!(
            "log-potential functional is limited to n_points <= {LOGPOT_MAX_POINTS}"
        )));
    }
    if let Some(v) = params.violations(1).into_iter().next() {
        return Err(invalid("log kernel", params.s(), v));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", p, "must lie in (1, ∞)"));
    }
    let n = grid.n_points();
    let h = grid.spacing();
    let g = lambda_pow(phi, params.beta).into_values();
    // tables over the displacement index; entry 0 is never read
    let dist: Vec<f64> = (0..n).map(|d| grid.displacement_norm(d)).collect();
    let pw: Vec<f64> = dist.iter().map(|d| d.powf(params.alpha - 1.0)).collect();
    let lg: Vec<f64> = dist.iter().map(|d| d.ln()).collect();
    let weight: Vec<f64> = dist
        .iter()
        .map(|d| d.powf(-1.0 - params.gamma * p))
        .collect();
    let rows: Vec<usize> = (0..n).collect();
    let disp = |a: usize, b: usize| (a + n - b) & (n - 1);
    let total = par_row_sum(&rows, |x| {
        let mut acc = 0.0;
        for y in 0..n {
            if y == x {
                continue;
            }
            let l_xy = lg[disp(x, y)];
            let mut inner = 0.0;
            for z in 0..n {
                if z == x || z == y {
                    continue;
                }
                let (xz, yz) = (disp(x, z), disp(y, z));
                let k = pw[xz] * (lg[xz] - l_xy) - pw[yz] * (lg[yz] - l_xy);
                inner += k * g[z];
            }
            acc += (inner * h).abs().powf(p) * weight[disp(x, y)];
        }
        acc
    });
    Ok((total * h * h).powf(1.0 / p))
}
