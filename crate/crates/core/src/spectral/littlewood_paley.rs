use std::collections::BTreeMap;

use serde::Serialize;

use super::{lambda_pow, Spectrum};
use crate::error::{invalid, Result};
use crate::grid::{Grid, SampledFunction};
use crate::params::check_s;
use crate::reduce::pairwise_sum;

/// `e^{-1/x}` for `x > 0`, else 0.
fn smooth_step_seed(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth cutoff: 1 on `[0, 1]`, 0 on `[3/2, ∞)`.
fn chi(r: f64) -> f64 {
    if r <= 1.0 {
        return 1.0;
    }
    if r >= 1.5 {
        return 0.0;
    }
    let u = (r - 1.0) / 0.5;
    let a = smooth_step_seed(1.0 - u);
    a / (a + smooth_step_seed(u))
}

/// Dyadic filter bank built from `profile(r) = χ(r) - χ(2r)`.
///
/// The profile is supported in `(1/2, 3/2)` and equals 1 on `[3/4, 1]`;
/// its dyadic dilates telescope to exactly 1 on the covered frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FilterBank {
    j_min: i32,
    j_max: i32,
}

impl FilterBank {
    pub fn new(j_min: i32, j_max: i32) -> Result<Self> {
        if j_min > j_max {
            return Err(invalid("j_min", j_min as f64, "level range is empty"));
        }
        Ok(Self { j_min, j_max })
    }

    /// Smallest bank whose levels cover every nonzero frequency of `grid`.
    pub fn for_grid(grid: &Grid) -> Self {
        let w = 2.0 * std::f64::consts::PI / grid.length();
        let half = (grid.n_points() / 2) as f64;
        let xi_min = w;
        let xi_max = w * half * (grid.dim() as f64).sqrt();
        Self {
            j_min: xi_min.log2().floor() as i32,
            j_max: xi_max.log2().ceil() as i32,
        }
    }

    pub fn profile(r: f64) -> f64 {
        chi(r) - chi(2.0 * r)
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn weight(&self, j: i32, xi: f64) -> f64 {
        Self::profile(xi / 2f64.powi(j))
    }

    /// `Σ_j profile(|ξ| / 2^j)` over the bank.
    pub fn total(&self, xi: f64) -> f64 {
        self.levels().map(|j| self.weight(j, xi)).sum()
    }
}

#[derive(Debug, Clone)]
pub struct LPDecomposition {
    pub pieces: BTreeMap<i32, SampledFunction>,
    /// Frequencies not covered by the bank, including the mean.
    pub residual: SampledFunction,
}

impl LPDecomposition {
    /// `Σ_j f_j + residual`.
    pub fn reconstruct(&self) -> SampledFunction {
        let mut acc = self.residual.clone();
        for f in self.pieces.values() {
            acc = acc.add(f).expect("pieces share one grid");
        }
        acc
    }
}

pub fn lp_project(f: &SampledFunction, bank: &FilterBank) -> LPDecomposition {
    let spec = Spectrum::forward(f);
    let pieces = bank
        .levels()
        .map(|j| (j, spec.multiply(|xi| bank.weight(j, xi)).inverse()))
        .collect();
    let residual = spec.multiply(|xi| 1.0 - bank.total(xi)).inverse();
    LPDecomposition { pieces, residual }
}

/// `(Σ_j 2^{j s p} ‖f_j‖_p^p)^{1/p}`.
pub fn triebel_norm(f: &SampledFunction, s: f64, p: f64, bank: &FilterBank) -> Result<f64> {
    check_s(s)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", p, "must lie in (1, ∞)"));
    }
    let lp = lp_project(f, bank);
    let terms: Vec<f64> = lp
        .pieces
        .iter()
        .map(|(&j, fj)| 2f64.powf(j as f64 * s * p) * fj.lp_norm(p).powf(p))
        .collect();
    Ok(pairwise_sum(&terms).powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BandConstant {
    pub level: i32,
    /// `‖Λ^{-σ} |Λ^t f_j|‖_p`.
    pub lhs: f64,
    /// `2^{j(t-σ)} (‖f_{j-1}‖_p + ‖f_j‖_p + ‖f_{j+1}‖_p)`.
    pub rhs: f64,
    pub constant: Option<f64>,
}

/// Per-level constants of the band estimate for Riesz potentials of
/// differentiated pieces.
pub fn band_riesz_constants(
    f: &SampledFunction,
    t: f64,
    sigma: f64,
    p: f64,
    bank: &FilterBank,
) -> Result<Vec<BandConstant>> {
    let dim = f.grid().dim() as f64;
    if !(sigma > 0.0 && sigma < dim) {
        return Err(invalid("sigma", sigma, format!("must lie in (0, {dim})")));
    }
    if !(t >= 0.0 && t <= 2.0) {
        return Err(invalid("t", t, "must lie in [0, 2]"));
    }
    let lp = lp_project(f, bank);
    let norm = |j: i32| lp.pieces.get(&j).map_or(0.0, |g| g.lp_norm(p));
    let mut out = Vec::new();
    for (&j, fj) in &lp.pieces {
        let abs = lambda_pow(fj, t).map(f64::abs)?;
        let lhs = lambda_pow(&abs, -sigma).lp_norm(p);
        let rhs = 2f64.powf(j as f64 * (t - sigma)) * (norm(j - 1) + norm(j) + norm(j + 1));
        out.push(BandConstant {
            level: j,
            lhs,
            rhs,
            constant: crate::sobolev::ratio(lhs, rhs),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_preset, preset_params};
    use std::f64::consts::PI;

    #[test]
    fn profile_shape() {
        assert_eq!(FilterBank::profile(0.5), 0.0);
        assert_eq!(FilterBank::profile(1.5), 0.0);
        assert_eq!(FilterBank::profile(0.8), 1.0);
        assert_eq!(FilterBank::profile(1.0), 1.0);
        for k in 0..200 {
            let r = 0.4 + k as f64 * 0.006;
            let v = FilterBank::profile(r);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn partition_of_unity_on_grid_frequencies() {
        for g in [
            Grid::unit_1d(512).unwrap(),
            Grid::new(1, 256, 7.3).unwrap(),
            Grid::new(2, 32, 1.0).unwrap(),
        ] {
            let bank = FilterBank::for_grid(&g);
            let spec = Spectrum::forward(&SampledFunction::zeros(g));
            for i in 1..g.len() {
                let xi = spec.xi_norm(i);
                assert!((bank.total(xi) - 1.0).abs() < 1e-10, "xi = {xi}");
            }
        }
    }

    #[test]
    fn pure_frequency_lands_in_one_piece() {
        let g = Grid::unit_1d(256).unwrap();
        // |ξ| = 2π·10 ≈ 62.8 = 0.98 · 2^6, where the level-6 profile is 1
        let f = make_preset("sine", &g, &preset_params(&[("k", 10.0)])).unwrap();
        let lp = lp_project(&f, &FilterBank::for_grid(&g));
        for (&j, fj) in &lp.pieces {
            if j == 6 {
                assert!(fj.sub(&f).unwrap().max_abs() < 1e-12);
            } else {
                assert!(fj.max_abs() < 1e-12, "level {j}");
            }
        }
        assert!((2.0 * PI * 10.0 / 64.0 - 0.98).abs() < 0.01);
    }

    #[test]
    fn reconstruction() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let f = make_preset("random_trig", &g, &preset_params(&[("seed", 11.0)]))
            .unwrap()
            .add_constant(1.5);
        let lp = lp_project(&f, &FilterBank::for_grid(&g));
        let err = lp.reconstruct().sub(&f).unwrap().l2_norm();
        assert!(err < 1e-10 * f.l2_norm());
        assert!((lp.residual.values()[0] - 1.5).abs() < 1e-10);
    }

    #[test]
    fn triebel_constant_and_homogeneity() {
        let g = Grid::unit_1d(128).unwrap();
        let bank = FilterBank::for_grid(&g);
        assert!(triebel_norm(&SampledFunction::constant(g, 3.0), 0.5, 2.0, &bank).unwrap() < 1e-12);
        let f = make_preset("random_trig", &g, &preset_params(&[("seed", 2.0)])).unwrap();
        let a = triebel_norm(&f, 0.5, 3.0, &bank).unwrap();
        let b = triebel_norm(&f.scale(2.0), 0.5, 3.0, &bank).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12 * a);
    }
}
