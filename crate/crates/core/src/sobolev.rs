//! Gagliardo seminorms and the inequalities built on them.
//!
//! All double sums exclude the diagonal `i = j`. For Lipschitz `u` the
//! omitted cells carry `O(h^{(1-s)p})` of the integral.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{mean_value, Domain, GridBox, SampledFunction};
use crate::kernel::{phi_p, PairKernel};
use crate::params::{check_p, check_s};
use crate::reduce::pairwise_sum;

#[derive(Debug, Clone, Serialize)]
pub struct SeminormResult {
    /// `[u]_{W^{s,p}(D)}`.
    pub value: f64,
    /// `[u]^p`, the raw double sum.
    pub pow_p: f64,
    pub s: f64,
    pub p: f64,
    pub domain: Domain,
    pub grid_resolution: usize,
}

/// `Σ_{i ∈ rows, j ∈ cols, i ≠ j} |u_i - u_j|^p K_ij h^{2 dim}`.
///
/// The summand is written as `φ_p(a) a` so that it coincides term by term
/// with the pairing of `u` against itself.
pub(crate) fn pow_sum(
    kernel: &PairKernel,
    u: &SampledFunction,
    rows: &[usize],
    cols: &[usize],
    p: f64,
) -> f64 {
    let v = u.values();
    kernel.pair_sum(rows, cols, |i, j| {
        let a = v[i] - v[j];
        phi_p(a, p) * a
    })
}

/// `[u]_{W^{s,p}(D)}` with kernel exponent `dim + s p`.
pub fn gagliardo_seminorm(
    u: &SampledFunction,
    d: &Domain,
    s: f64,
    p: f64,
) -> Result<SeminormResult> {
    check_s(s)?;
    check_p(p, 1.0)?;
    let kernel = PairKernel::gagliardo(u.grid(), s, p)?;
    seminorm_with(&kernel, u, d, s, p)
}

/// Same as [`gagliardo_seminorm`] with a prebuilt kernel of exponent `dim + s p`.
pub fn seminorm_with(
    kernel: &PairKernel,
    u: &SampledFunction,
    d: &Domain,
    s: f64,
    p: f64,
) -> Result<SeminormResult> {
    u.grid().ensure_same(kernel.grid())?;
    let nodes = d.nodes(u.grid())?;
    if nodes.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let pow_p = pow_sum(kernel, u, &nodes, &nodes, p);
    Ok(SeminormResult {
        value: pow_p.powf(1.0 / p),
        pow_p,
        s,
        p,
        domain: d.clone(),
        grid_resolution: u.grid().n_points(),
    })
}

/// `[u]^p` on the whole torus.
pub fn torus_seminorm_pow(u: &SampledFunction, s: f64, p: f64) -> Result<f64> {
    Ok(gagliardo_seminorm(u, &Domain::full(u.grid()), s, p)?.pow_p)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PoincareReport {
    /// `∫_{λB} |u - (u)_B|^p`.
    pub lhs: f64,
    /// `λ^{dim + t p} diam(B)^{t p} [u]^p_{W^{t,p}(λB)}`.
    pub rhs: f64,
    /// `lhs / rhs`; `None` when both vanish.
    pub ratio: Option<f64>,
}

/// Poincaré-type comparison on a box and its `λ`-dilate. Asserts nothing.
pub fn poincare_check(
    u: &SampledFunction,
    b: &GridBox,
    lambda: f64,
    t: f64,
    p: f64,
) -> Result<PoincareReport> {
    check_s(t)?;
    check_p(p, 1.0)?;
    if !(lambda >= 1.0) {
        return Err(crate::error::invalid("lambda", lambda, "must be >= 1"));
    }
    let g = u.grid();
    let big = b.scaled(g, lambda)?;
    let mean = mean_value(u, &Domain::from_box(*b))?;
    let nodes = big.nodes(g);
    let terms: Vec<f64> = nodes
        .iter()
        .map(|&i| (u.values()[i] - mean).abs().powf(p))
        .collect();
    let lhs = pairwise_sum(&terms) * g.cell_volume();
    let semi = gagliardo_seminorm(u, &Domain::from_box(big), t, p)?.pow_p;
    let n = g.dim() as f64;
    let rhs = lambda.powf(n + t * p) * b.diam(g).powf(t * p) * semi;
    Ok(PoincareReport {
        lhs,
        rhs,
        ratio: ratio(lhs, rhs),
    })
}

pub(crate) fn ratio(num: f64, den: f64) -> Option<f64> {
    if den > 0.0 {
        Some(num / den)
    } else if num == 0.0 {
        None
    } else {
        Some(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxSplit {
    pub cover_box: GridBox,
    /// `[u]^p_{W^{s+ε,p}(2B_k ∩ D)}`.
    pub near: f64,
    /// `∫_{D \ 2B_k} ∫_{B_k} |u(x) - u(y)|^p / |x - y|^{n + (s+ε)p}`.
    pub tail: f64,
    /// `tail / (diam(B_k)^{-εp} [u]^p_{W^{s,p}(D)})`.
    pub constant: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    /// `[u]^p_{W^{s+ε,p}(D)}`.
    pub total: f64,
    /// `[u]^p_{W^{s,p}(D)}`.
    pub base: f64,
    /// `Σ_k near_k`.
    pub covered: f64,
    /// `Σ_k tail_k`.
    pub tail: f64,
    pub boxes: Vec<BoxSplit>,
    /// Largest per-box tail constant.
    pub constant: Option<f64>,
}

/// Splits `[u]^p_{W^{s+ε,p}(D)}` along a cover into near-diagonal pieces on
/// the doubled boxes and the far interaction of each box with the rest of `D`.
///
/// Each doubled box is clipped to `D`, so only the cover boxes themselves
/// have to lie in `D`.
pub fn localized_seminorm_split(
    u: &SampledFunction,
    cover: &[GridBox],
    d: &Domain,
    s: f64,
    eps: f64,
    p: f64,
) -> Result<SplitReport> {
    check_s(s)?;
    check_p(p, 1.0)?;
    if !(eps >= 0.0 && s + eps < 1.0) {
        return Err(crate::error::invalid(
            "eps",
            eps,
            "need eps >= 0 and s + eps < 1",
        ));
    }
    let g = u.grid();
    let dim = g.dim();
    let d_nodes = d.nodes(g)?;
    if d_nodes.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let k_shift = PairKernel::gagliardo(g, s + eps, p)?;
    let k_base = PairKernel::gagliardo(g, s, p)?;
    let total = pow_sum(&k_shift, u, &d_nodes, &d_nodes, p);
    let base = pow_sum(&k_base, u, &d_nodes, &d_nodes, p);

    let mut boxes = Vec::with_capacity(cover.len());
    for b in cover {
        if !d.contains_box(b, dim) {
            return Err(Error::Geometry(format!(
                "cover box {b:?} is not inside the domain"
            )));
        }
        let doubled = doubled_within(g, b, d)?;
        let mut in_double = vec![false; g.len()];
        for &i in &doubled {
            in_double[i] = true;
        }
        let outside: Vec<usize> = d_nodes.iter().copied().filter(|&i| !in_double[i]).collect();
        let near = pow_sum(&k_shift, u, &doubled, &doubled, p);
        let inner = b.nodes(g);
        let tail = pow_sum(&k_shift, u, &inner, &outside, p);
        let scale = b.diam(g).powf(-eps * p) * base;
        boxes.push(BoxSplit {
            cover_box: *b,
            near,
            tail,
            constant: ratio(tail, scale),
        });
    }
    let covered = pairwise_sum(&boxes.iter().map(|b| b.near).collect::<Vec<_>>());
    let tail = pairwise_sum(&boxes.iter().map(|b| b.tail).collect::<Vec<_>>());
    let constant = boxes
        .iter()
        .filter_map(|b| b.constant)
        .fold(None, |m: Option<f64>, c| Some(m.map_or(c, |m| m.max(c))));
    Ok(SplitReport {
        total,
        base,
        covered,
        tail,
        boxes,
        constant,
    })
}

/// Nodes of `2B ∩ D`, where `2B` is clipped to the torus box first.
fn doubled_within(g: &crate::grid::Grid, b: &GridBox, d: &Domain) -> Result<Vec<usize>> {
    let mut big = *b;
    for k in 0..g.dim() {
        let w = b.cells(k) / 2;
        big.lo[k] = b.lo[k].saturating_sub(w);
        big.hi[k] = (b.hi[k] + (b.cells(k) - w)).min(g.n_points());
    }
    let mut out = Vec::new();
    for piece in d.boxes() {
        if let Some(x) = big.intersection(piece, g.dim()) {
            out.extend(x.nodes(g));
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_preset, preset_params, Grid};

    fn trig(g: &Grid, seed: f64) -> SampledFunction {
        make_preset("random_trig", g, &preset_params(&[("seed", seed)])).unwrap()
    }

    #[test]
    fn constant_has_zero_seminorm() {
        let g = Grid::unit_1d(64).unwrap();
        let u = SampledFunction::constant(g, 5.0);
        let r = gagliardo_seminorm(&u, &Domain::full(&g), 0.4, 2.5).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn homogeneity_and_triangle() {
        let g = Grid::unit_1d(128).unwrap();
        let u = trig(&g, 1.0);
        let v = trig(&g, 2.0);
        let d = Domain::from_coords(&g, &[[0.125, 0.75]]).unwrap();
        for (s, p) in [(0.3, 2.0), (0.6, 3.0), (0.5, 1.5)] {
            let a = gagliardo_seminorm(&u, &d, s, p).unwrap().value;
            let a2 = gagliardo_seminorm(&u.scale(2.0), &d, s, p).unwrap().value;
            assert!((a2 - 2.0 * a).abs() < 1e-12 * a);
            let b = gagliardo_seminorm(&v, &d, s, p).unwrap().value;
            let ab = gagliardo_seminorm(&u.add(&v).unwrap(), &d, s, p)
                .unwrap()
                .value;
            assert!(ab <= (a + b) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn monotone_in_domain() {
        let g = Grid::unit_1d(128).unwrap();
        let u = trig(&g, 3.0);
        let small = Domain::from_coords(&g, &[[0.25, 0.5]]).unwrap();
        let union = Domain::from_coords(&g, &[[0.25, 0.5], [0.625, 0.75]]).unwrap();
        let a = gagliardo_seminorm(&u, &small, 0.5, 2.0).unwrap().value;
        let b = gagliardo_seminorm(&u, &union, 0.5, 2.0).unwrap().value;
        let c = gagliardo_seminorm(&u, &Domain::full(&g), 0.5, 2.0)
            .unwrap()
            .value;
        assert!(a <= b && b <= c);
    }

    #[test]
    fn translation_invariant_on_torus() {
        for g in [Grid::unit_1d(128).unwrap(), Grid::new(2, 16, 1.0).unwrap()] {
            let u = trig(&g, 9.0);
            let full = Domain::full(&g);
            let a = gagliardo_seminorm(&u, &full, 0.4, 2.0).unwrap().value;
            let b = gagliardo_seminorm(&u.shift([5, 3]), &full, 0.4, 2.0)
                .unwrap()
                .value;
            assert!((a - b).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn parameter_ranges() {
        let g = Grid::unit_1d(16).unwrap();
        let u = SampledFunction::zeros(g);
        let d = Domain::full(&g);
        assert!(gagliardo_seminorm(&u, &d, 1.0, 2.0).is_err());
        assert!(gagliardo_seminorm(&u, &d, 0.5, 0.5).is_err());
    }

    #[test]
    fn poincare_constant_and_locality() {
        let g = Grid::unit_1d(128).unwrap();
        let b = GridBox::from_coords(&g, &[0.4375], &[0.5625]).unwrap();
        let r = poincare_check(&SampledFunction::constant(g, 2.0), &b, 2.0, 0.4, 2.0).unwrap();
        assert_eq!((r.lhs, r.rhs, r.ratio), (0.0, 0.0, None));
        // bump living outside λB
        let v = make_preset(
            "hat",
            &g,
            &preset_params(&[("box_lo", 0.75), ("box_hi", 0.9)]),
        )
        .unwrap();
        let r = poincare_check(&v.add_constant(1.0), &b, 2.0, 0.4, 2.0).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(poincare_check(&v, &b, 9.0, 0.4, 2.0).is_err());
    }

    #[test]
    fn split_trivial_cases() {
        let g = Grid::unit_1d(128).unwrap();
        let d = Domain::from_coords(&g, &[[0.25, 0.75]]).unwrap();
        let b = d.boxes()[0];
        let u = trig(&g, 5.0);
        let r = localized_seminorm_split(&u, &[b], &d, 0.3, 0.1, 2.0).unwrap();
        assert_eq!(r.tail, 0.0);
        assert_eq!(r.covered.to_bits(), r.total.to_bits());
        let c = SampledFunction::constant(g, 1.0);
        let r = localized_seminorm_split(&c, &[b], &d, 0.3, 0.1, 2.0).unwrap();
        assert_eq!((r.total, r.covered, r.tail), (0.0, 0.0, 0.0));
        let outside = GridBox::from_coords(&g, &[0.0], &[0.25]).unwrap();
        assert!(localized_seminorm_split(&u, &[outside], &d, 0.3, 0.1, 2.0).is_err());
    }
}
