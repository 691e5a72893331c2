//! Pair-weight tables for the singular kernels `|x - y|^{-a}` on the torus.
//!
//! A periodic function on the torus is a periodic function on `R^dim`, so
//! its double integrals over `R^dim` fold onto one period with the
//! image-summed kernel `Σ_m |x - y + mL|^{-a}`. That is the kernel used by
//! every seminorm and pairing in the crate; the min-image variant is kept for
//! comparison.

use crate::error::{invalid, Result};
use crate::grid::Grid;
use crate::reduce::{par_row_sum, seq_sum};

const EM_TERMS: usize = 16;
// B_{2j} / (2j)!
const BERNOULLI_OVER_FACT: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
];

/// Hurwitz zeta `ζ(a, q) = Σ_{k≥0} (q + k)^{-a}` for `a > 1`, `q > 0`,
/// by Euler–Maclaurin summation.
pub fn hurwitz_zeta(a: f64, q: f64) -> f64 {
    debug_assert!(a > 1.0 && q > 0.0);
    let mut head = 0.0;
    for k in 0..EM_TERMS {
        head += (q + k as f64).powf(-a);
    }
    let x = q + EM_TERMS as f64;
    let mut tail = x.powf(1.0 - a) / (a - 1.0) + 0.5 * x.powf(-a);
    // rising factorial a (a+1) ... (a+2j-2) times x^{-a-2j+1}
    let mut rising = a;
    let mut xpow = x.powf(-a - 1.0);
    for (j, c) in BERNOULLI_OVER_FACT.iter().enumerate() {
        tail += c * rising * xpow;
        let k = (2 * j) as f64;
        rising *= (a + k + 1.0) * (a + k + 2.0);
        xpow /= x * x;
    }
    head + tail
}

/// `Σ_{m ∈ Z^2} |v + m L|^{-a}` for `a > 2`.
fn lattice_sum_2d(v: [f64; 2], length: f64, a: f64) -> f64 {
    const M: i64 = 12;
    let mut acc = 0.0;
    for mx in -M..=M {
        for my in -M..=M {
            let x = v[0] + mx as f64 * length;
            let y = v[1] + my as f64 * length;
            let r2 = x * x + y * y;
            if r2 > 0.0 {
                acc += r2.powf(-0.5 * a);
            }
        }
    }
    // lattice points outside the square of half-side (M + 1/2) L, replaced by
    // the integral of |y|^{-a} over that region
    let r = M as f64 + 0.5;
    let tail = 8.0 * r.powf(2.0 - a) / (a - 2.0) * cos_power_integral(a - 2.0);
    acc + tail * length.powf(-a)
}

/// `∫_0^{π/4} cos(θ)^k dθ` by composite Simpson.
pub(crate) fn cos_power_integral(k: f64) -> f64 {
    let n = 256;
    let h = std::f64::consts::FRAC_PI_4 / n as f64;
    let f = |t: f64| t.cos().powf(k);
    let mut acc = f(0.0) + f(std::f64::consts::FRAC_PI_4);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    acc * h / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMetric {
    /// Image-summed kernel; the default everywhere.
    Periodic,
    /// `d(x, y)^{-a}` with `d` the shortest-image distance.
    MinImage,
}

/// Weights `K(d)` of a translation-invariant kernel indexed by periodic
/// displacement, with `K(0) = 0` so the diagonal drops out of pair sums.
#[derive(Debug, Clone)]
pub struct PairKernel {
    grid: Grid,
    exponent: f64,
    metric: KernelMetric,
    weights: Vec<f64>,
}

impl PairKernel {
    /// Kernel `|x - y|^{-exponent}` summed over periodic images. Needs `exponent > dim`.
    pub fn periodic(grid: &Grid, exponent: f64) -> Result<Self> {
        Self::build(grid, exponent, KernelMetric::Periodic)
    }

    pub fn min_image(grid: &Grid, exponent: f64) -> Result<Self> {
        Self::build(grid, exponent, KernelMetric::MinImage)
    }

    /// The kernel of the `W^{s,p}` seminorm, exponent `dim + s p`.
    pub fn gagliardo(grid: &Grid, s: f64, p: f64) -> Result<Self> {
        Self::periodic(grid, grid.dim() as f64 + s * p)
    }

    pub fn build(grid: &Grid, exponent: f64, metric: KernelMetric) -> Result<Self> {
        let dim = grid.dim() as f64;
        if !(exponent.is_finite() && exponent > dim) {
            return Err(invalid(
                "exponent",
                exponent,
                format!("kernel exponent must exceed dim = {dim}"),
            ));
        }
        let n = grid.n_points();
        let l = grid.length();
        let mut weights = vec![0.0; grid.len()];
        for (d, w) in weights.iter_mut().enumerate().skip(1) {
            *w = match metric {
                KernelMetric::MinImage => grid.displacement_norm(d).powf(-exponent),
                KernelMetric::Periodic => {
                    let [dx, dy] = grid.axis_indices(d);
                    if grid.dim() == 1 {
                        // fold so that K(d) and K(n - d) are bit-identical
                        let k = dx.min(n - dx) as f64 / n as f64;
                        l.powf(-exponent)
                            * (hurwitz_zeta(exponent, k) + hurwitz_zeta(exponent, 1.0 - k))
                    } else {
                        let fold = |k: usize| k.min(n - k) as f64 * grid.spacing();
                        lattice_sum_2d([fold(dx), fold(dy)], l, exponent)
                    }
                }
            };
        }
        Ok(Self {
            grid: *grid,
            exponent,
            metric,
            weights,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn metric(&self) -> KernelMetric {
        self.metric
    }

    #[inline]
    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.weights[self.grid.displacement(a, b)]
    }

    pub fn table(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ_{i ∈ rows} Σ_{j ∈ cols, j ≠ i} f(i, j) K(x_i, x_j) h^{2 dim}`.
    ///
    /// Rows are distributed over the rayon pool; each row is summed in
    /// column order, so the result does not depend on the pool size.
    pub fn pair_sum<F>(&self, rows: &[usize], cols: &[usize], f: F) -> f64
    where
        F: Fn(usize, usize) -> f64 + Sync + Send,
    {
        weighted_pair_sum(&self.grid, rows, cols, |i, j| self.weight(i, j), f)
    }
}

/// `Σ_{i ∈ rows} Σ_{j ∈ cols, j ≠ i} f(i, j) w(i, j) h^{2 dim}` for an arbitrary weight.
pub fn weighted_pair_sum<W, F>(grid: &Grid, rows: &[usize], cols: &[usize], w: W, f: F) -> f64
where
    W: Fn(usize, usize) -> f64 + Sync + Send,
    F: Fn(usize, usize) -> f64 + Sync + Send,
{
    let h2 = grid.cell_volume().powi(2);
    par_row_sum(rows, |i| {
        seq_sum(cols, |j| if i == j { 0.0 } else { f(i, j) * w(i, j) })
    }) * h2
}

/// `|a|^{p-2} a`, with the common integer cases spelled out.
#[inline]
pub fn phi_p(a: f64, p: f64) -> f64 {
    if p == 2.0 {
        a
    } else if p == 3.0 {
        a * a.abs()
    } else if a == 0.0 {
        0.0
    } else {
        a.abs().powf(p - 2.0) * a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hurwitz_known_values() {
        assert!((hurwitz_zeta(2.0, 1.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((hurwitz_zeta(4.0, 1.0) - PI.powi(4) / 90.0).abs() < 1e-14);
        // ζ(a, 1/2) = (2^a - 1) ζ(a)
        let a = 1.7;
        let z = hurwitz_zeta(a, 1.0);
        assert!((hurwitz_zeta(a, 0.5) - (2f64.powf(a) - 1.0) * z).abs() < 1e-12 * z);
        // ζ(a, q) = q^{-a} + ζ(a, q + 1)
        let q = 0.013;
        let lhs = hurwitz_zeta(1.3, q);
        let rhs = q.powf(-1.3) + hurwitz_zeta(1.3, q + 1.0);
        assert!((lhs - rhs).abs() < 1e-12 * lhs);
    }

    #[test]
    fn periodic_1d_matches_direct_image_sum() {
        let g = Grid::new(1, 16, 2.0).unwrap();
        let a = 2.4;
        let k = PairKernel::periodic(&g, a).unwrap();
        for d in 1..16 {
            let r = d as f64 * g.spacing();
            let mut direct = 0.0;
            for m in -200000i64..=200000 {
                direct += (r + m as f64 * 2.0).abs().powf(-a);
            }
            // remaining tail ~ 2 ∫_{M L}^∞ x^{-a} dx
            direct += 2.0 * (200000.5f64 * 2.0).powf(1.0 - a) / ((a - 1.0) * 2.0);
            assert!((k.table()[d] - direct).abs() < 1e-9 * direct, "d = {d}");
        }
    }

    #[test]
    fn periodic_2d_close_to_brute_force() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let a = 2.0 + 0.5 * 2.0;
        let k = PairKernel::periodic(&g, a).unwrap();
        let d = g.flat_index(3, 1);
        let v = [3.0 / 8.0, 1.0 / 8.0];
        let mut brute = 0.0;
        let m = 400i64;
        for mx in -m..=m {
            for my in -m..=m {
                brute += ((v[0] + mx as f64).powi(2) + (v[1] + my as f64).powi(2)).powf(-a / 2.0);
            }
        }
        brute += 8.0 * (m as f64 + 0.5).powf(2.0 - a) / (a - 2.0) * cos_power_integral(a - 2.0);
        assert!((k.table()[d] - brute).abs() < 1e-6 * brute);
    }

    #[test]
    fn tables_symmetric_and_dominate_min_image() {
        for g in [Grid::unit_1d(32).unwrap(), Grid::new(2, 8, 1.0).unwrap()] {
            let a = g.dim() as f64 + 0.9;
            let per = PairKernel::periodic(&g, a).unwrap();
            let min = PairKernel::min_image(&g, a).unwrap();
            for x in 0..g.len() {
                for y in 0..g.len() {
                    assert_eq!(per.weight(x, y).to_bits(), per.weight(y, x).to_bits());
                    assert!(per.weight(x, y) >= min.weight(x, y));
                }
            }
        }
    }

    #[test]
    fn exponent_must_exceed_dim() {
        let g = Grid::unit_1d(8).unwrap();
        assert!(PairKernel::periodic(&g, 1.0).is_err());
    }
}
