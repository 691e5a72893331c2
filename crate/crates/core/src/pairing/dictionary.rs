use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plap_pairing_with;
use crate::error::{Error, Result};
use crate::grid::{Domain, GridBox, SampledFunction};
use crate::kernel::PairKernel;
use crate::params::check_s;
use crate::sobolev::pow_sum;

/// Parameters of a seeded test-function dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSpace {
    /// Smoothness `t` of the normalizing seminorm `[φ]_{W^{t,p}}`.
    pub order: f64,
    pub size: usize,
    pub seed: u64,
}

const MIN_CELLS: usize = 4;

fn cutoff(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

/// `size` bumps and modulated bumps supported inside `d`, each scaled to
/// unit `W^{order,p}` seminorm over the whole torus.
///
/// Functions are drawn one after another from a single stream, so the
/// dictionary of size `m` is a prefix of every larger one with the same seed.
pub fn dictionary(
    d: &Domain,
    grid: &crate::grid::Grid,
    space: &TestSpace,
    p: f64,
) -> Result<Vec<SampledFunction>> {
    check_s(space.order)?;
    if space.size == 0 {
        return Err(Error::EmptyDictionary);
    }
    let boxes: Vec<GridBox> = d.boxes().to_vec();
    for b in &boxes {
        if (0..grid.dim()).any(|k| b.cells(k) < MIN_CELLS) {
            return Err(Error::InvalidDomain(format!(
                "box {b:?} is too thin to carry test functions (< {MIN_CELLS} cells)"
            )));
        }
    }
    let h = grid.spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(space.seed);
    let mut shapes = Vec::with_capacity(space.size);
    for _ in 0..space.size {
        let b = boxes[rng.random_range(0..boxes.len())];
        let mut center = [0.0; 2];
        let mut radius = [1.0; 2];
        for k in 0..2 {
            let (lo, hi) = (b.lo[k] as f64 * h, b.hi[k] as f64 * h);
            let half = 0.5 * (hi - lo);
            let r = half * rng.random_range(0.25..1.0);
            let c = rng.random_range(lo + r..=hi - r);
            if k < grid.dim() {
                center[k] = c;
                radius[k] = r;
            }
        }
        let freq = rng.random_range(0..4u32) as f64;
        let phase = rng.random_range(0.0..2.0 * PI);
        shapes.push((center, radius, freq, phase));
    }
    let kernel = PairKernel::gagliardo(grid, space.order, p)?;
    let all: Vec<usize> = (0..grid.len()).collect();
    shapes
        .iter()
        .map(|&(center, radius, freq, phase)| {
            let f = SampledFunction::from_fn(*grid, |x| {
                let mut v = 1.0;
                for k in 0..grid.dim() {
                    v *= cutoff((x[k] - center[k]) / radius[k]);
                }
                if freq > 0.0 {
                    v *= (PI * freq * (x[0] - center[0]) / radius[0] + phase).cos();
                }
                v
            })?;
            let norm = pow_sum(&kernel, &f, &all, &all, p).powf(1.0 / p);
            if norm == 0.0 {
                return Err(Error::InvalidDomain(
                    "test function vanishes on the grid".into(),
                ));
            }
            Ok(f.scale(1.0 / norm))
        })
        .collect()
}

/// `max_φ |ℓ(φ)|` over a dictionary. A lower bound for the dual norm.
pub fn dual_norm_of<L>(dict: &[SampledFunction], functional: L) -> Result<f64>
where
    L: Fn(&SampledFunction) -> Result<f64> + Sync + Send,
{
    if dict.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    let values = dict
        .par_iter()
        .map(|phi| functional(phi).map(f64::abs))
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Dictionary lower bound for the dual norm of `(-Δ_p)^s_D u` over test
/// functions with `[φ]_{W^{t,p}(torus)} ≤ 1`.
pub fn dual_norm_estimate(
    u: &SampledFunction,
    d: &Domain,
    s: f64,
    p: f64,
    space: &TestSpace,
) -> Result<f64> {
    check_s(s)?;
    crate::params::check_p(p, 2.0)?;
    let dict = dictionary(d, u.grid(), space, p)?;
    let kernel = PairKernel::gagliardo(u.grid(), s, p)?;
    dual_norm_of(&dict, |phi| {
        Ok(plap_pairing_with(&kernel, u, phi, d, s, p)?.value)
    })
}
