//! Fourier multipliers on the torus.
//!
//! Convention: `Λ^t` has symbol `|ξ|^t` with `ξ = 2πk / L`, so the classical
//! `(-Δ)^s` is `Λ^{2s}`. Homogeneous operators send the mean to zero.

mod fft;
mod littlewood_paley;
mod riesz;

pub use littlewood_paley::{
    band_riesz_constants, lp_project, triebel_norm, BandConstant, FilterBank, LPDecomposition,
};
pub use riesz::{riesz_constant, riesz_potential, riesz_potential_real_space, RieszPotential};

use crate::error::{invalid, Result};
use crate::grid::SampledFunction;
use crate::reduce::pairwise_sum;

pub(crate) use fft::Spectrum;

/// `Λ^t f` for `t ∈ (0, 2]`.
pub fn frac_laplacian(f: &SampledFunction, t: f64) -> Result<SampledFunction> {
    if !(t > 0.0 && t <= 2.0) {
        return Err(invalid(
            "t",
            t,
            "fractional Laplacian order must lie in (0, 2]",
        ));
    }
    Ok(lambda_pow(f, t))
}

/// `Λ^t f` for any real `t`, zero mode mapped to 0.
///
/// `t = 0` is the projection onto mean-zero functions and is computed
/// without a transform, so it is exact to rounding.
pub fn lambda_pow(f: &SampledFunction, t: f64) -> SampledFunction {
    if t == 0.0 {
        let mean = pairwise_sum(f.values()) / f.grid().len() as f64;
        return f.add_constant(-mean);
    }
    Spectrum::forward(f)
        .multiply(|xi| if xi == 0.0 { 0.0 } else { xi.powf(t) })
        .inverse()
}

/// `‖Λ^t f‖_2` evaluated on the frequency side (Parseval).
pub fn lambda_pow_l2_spectral(f: &SampledFunction, t: f64) -> f64 {
    let spec = Spectrum::forward(f);
    let g = f.grid();
    let scale = g.volume() / (g.len() as f64).powi(2);
    let terms: Vec<f64> = spec
        .modes()
        .map(|(xi, c)| {
            if xi == 0.0 {
                0.0
            } else {
                xi.powf(2.0 * t) * c.norm_sqr()
            }
        })
        .collect();
    (pairwise_sum(&terms) * scale).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_preset, preset_params, Grid};
    use std::f64::consts::PI;

    fn trig(g: &Grid, seed: f64) -> SampledFunction {
        make_preset("random_trig", g, &preset_params(&[("seed", seed)])).unwrap()
    }

    fn rel_l2(a: &SampledFunction, b: &SampledFunction) -> f64 {
        a.sub(b).unwrap().l2_norm() / b.l2_norm()
    }

    #[test]
    fn constant_goes_to_zero() {
        let g = Grid::new(2, 16, 3.0).unwrap();
        let f = frac_laplacian(&SampledFunction::constant(g, 4.0), 0.7).unwrap();
        assert!(f.max_abs() < 1e-13);
    }

    #[test]
    fn sine_eigenfunction() {
        let g = Grid::new(1, 64, 2.5).unwrap();
        let u = make_preset("sine", &g, &preset_params(&[("k", 1.0)])).unwrap();
        for t in [0.3, 1.0, 2.0] {
            let lu = frac_laplacian(&u, t).unwrap();
            let want = u.scale((2.0 * PI / 2.5).powf(t));
            assert!(lu.sub(&want).unwrap().max_abs() < 1e-12 * want.max_abs());
        }
    }

    #[test]
    fn two_dimensional_eigenfunction() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let u = make_preset("sine", &g, &preset_params(&[("k", 2.0), ("ky", 1.0)])).unwrap();
        let lu = frac_laplacian(&u, 0.6).unwrap();
        let xi = 2.0 * PI * 5f64.sqrt();
        assert!(lu.sub(&u.scale(xi.powf(0.6))).unwrap().max_abs() < 1e-11);
    }

    #[test]
    fn semigroup_and_linearity() {
        let g = Grid::unit_1d(256).unwrap();
        let f = lambda_pow(&trig(&g, 2.0), 0.0);
        let ab = lambda_pow(&lambda_pow(&f, 0.4), 0.9);
        assert!(rel_l2(&ab, &lambda_pow(&f, 1.3)) < 1e-10);
        let h = trig(&g, 3.0);
        let lhs = frac_laplacian(&f.axpy(2.5, &h).unwrap(), 0.8).unwrap();
        let rhs = frac_laplacian(&f, 0.8)
            .unwrap()
            .axpy(2.5, &frac_laplacian(&h, 0.8).unwrap())
            .unwrap();
        assert!(rel_l2(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn parseval() {
        for g in [Grid::unit_1d(128).unwrap(), Grid::new(2, 32, 2.0).unwrap()] {
            let f = trig(&g, 6.0);
            let real = frac_laplacian(&f, 0.7).unwrap().l2_norm();
            let freq = lambda_pow_l2_spectral(&f, 0.7);
            assert!((real - freq).abs() < 1e-10 * freq);
        }
    }

    #[test]
    fn zero_order_is_mean_removal() {
        let g = Grid::unit_1d(64).unwrap();
        let f = trig(&g, 1.0).add_constant(3.0);
        let z = lambda_pow(&f, 0.0);
        assert!(z.integral().abs() < 1e-14);
        assert!(frac_laplacian(&f, 0.0).is_err());
        assert!(frac_laplacian(&f, 2.5).is_err());
    }
}
