//! Localization, the interior estimate and the differentiability probe.

use serde::Serialize;

use super::DirichletProblem;
use crate::error::{invalid, Error, Result};
use crate::grid::{mean_value, Domain, Grid, GridBox, SampledFunction};
use crate::kernel::PairKernel;
use crate::pairing::{dictionary, dual_norm_of, plap_pairing_with, TestSpace};
use crate::report::{ExperimentReport, Fitted, Table};
use crate::sobolev::{gagliardo_seminorm, ratio};

const MIN_MARGIN: usize = 2;

/// `6x⁵ - 15x⁴ + 10x³`, clamped to `[0, 1]`.
fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

/// Largest slope of the quintic smoothstep on `[0, 1]`.
const SMOOTHSTEP_SLOPE: f64 = 1.875;

fn single_box(d: &Domain, what: &str) -> Result<GridBox> {
    match d.boxes() {
        [b] => Ok(*b),
        _ => Err(Error::InvalidDomain(format!("{what} must be a single box"))),
    }
}

#[derive(Debug, Clone)]
pub struct Cutoff {
    pub eta: SampledFunction,
    /// Lipschitz constant of the continuous profile.
    pub lipschitz: f64,
}

/// Tensor-product cutoff equal to 1 on `inner` and 0 off `outer`, with a
/// quintic smoothstep across each margin.
pub fn cutoff(grid: &Grid, inner: &GridBox, outer: &GridBox) -> Result<Cutoff> {
    let n = grid.n_points();
    let h = grid.spacing();
    if !inner.inside_with_margin(outer, grid.dim(), MIN_MARGIN) {
        return Err(Error::Geometry(format!(
            "{inner:?} needs a margin of at least {MIN_MARGIN} cells inside {outer:?}"
        )));
    }
    if (0..grid.dim()).any(|k| outer.lo[k] == 0 || outer.hi[k] == n) {
        return Err(Error::Geometry(format!(
            "{outer:?} must lie strictly inside the torus box"
        )));
    }
    let mut profiles = Vec::new();
    let mut lipschitz: f64 = 0.0;
    for k in 0..grid.dim() {
        // ramps run from the last node outside `outer` to the first node of `inner`
        let left = (inner.lo[k] - outer.lo[k] + 1) as f64;
        let right = (outer.hi[k] - inner.hi[k] + 1) as f64;
        lipschitz = lipschitz.max(SMOOTHSTEP_SLOPE / (left.min(right) * h));
        let prof: Vec<f64> = (0..n)
            .map(|i| {
                if i < outer.lo[k] || i >= outer.hi[k] {
                    0.0
                } else if i >= inner.lo[k] && i < inner.hi[k] {
                    1.0
                } else if i < inner.lo[k] {
                    smoothstep((i + 1 - outer.lo[k]) as f64 / left)
                } else {
                    smoothstep((outer.hi[k] - i) as f64 / right)
                }
            })
            .collect();
        profiles.push(prof);
    }
    let eta: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let ax = grid.axis_indices(idx);
            (0..grid.dim()).map(|k| profiles[k][ax[k]]).product()
        })
        .collect();
    Ok(Cutoff {
        eta: SampledFunction::from_raw(*grid, eta),
        lipschitz,
    })
}

/// `ũ = η (u - (u)_{Ω1})` with `η` from [`cutoff`]. Both domains are single boxes.
pub fn localize(u: &SampledFunction, omega1: &Domain, omega2: &Domain) -> Result<SampledFunction> {
    let grid = *u.grid();
    let inner = single_box(omega1, "Ω1")?;
    let outer = single_box(omega2, "Ω2")?;
    let eta = cutoff(&grid, &inner, &outer)?.eta;
    let m = mean_value(u, omega1)?;
    let vals = u
        .values()
        .iter()
        .zip(eta.values())
        .map(|(&v, &e)| if e == 0.0 { 0.0 } else { e * (v - m) })
        .collect();
    Ok(SampledFunction::from_raw(grid, vals))
}

#[derive(Debug, Clone, Serialize)]
pub struct CaccioppoliReport {
    /// `[u]^p_{W^{s,p}(B)}`.
    pub lhs: f64,
    /// `δ^p [u]^p_{4B}`, `δ^{-p'} (sup_φ pairing)^{p'}`, `δ^{-p'} diam(B)^{-sp} ∫_{4B} |u - (u)_B|^p`.
    pub rhs_parts: [f64; 3],
    /// Smallest `C ≥ 0` with `lhs ≤ part₀ + C (part₁ + part₂)`; `None` when no finite `C` works.
    pub satisfied_constant: Option<f64>,
    /// The dictionary supremum; a lower bound, so the constant is an upper estimate.
    pub pairing_sup: f64,
}

/// Interior estimate of `[u]_{W^{s,p}(B)}` on the box `b`. The supremum
/// runs over a dictionary supported in `2B`; the pairing is over `4B × 4B`.
pub fn caccioppoli_check(
    u: &SampledFunction,
    b: &GridBox,
    s: f64,
    p: f64,
    delta: f64,
    space: &TestSpace,
) -> Result<CaccioppoliReport> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta", delta, "must be > 0"));
    }
    crate::params::check_s(s)?;
    crate::params::check_p(p, 2.0)?;
    let grid = *u.grid();
    let b4 = b.scaled(&grid, 4.0)?;
    let b2 = b.scaled(&grid, 2.0)?;
    let (d1, d2, d4) = (
        Domain::from_box(*b),
        Domain::from_box(b2),
        Domain::from_box(b4),
    );
    let kernel = PairKernel::gagliardo(&grid, s, p)?;
    let lhs = crate::sobolev::seminorm_with(&kernel, u, &d1, s, p)?.pow_p;
    let outer = crate::sobolev::seminorm_with(&kernel, u, &d4, s, p)?.pow_p;
    let dict = dictionary(&d2, &grid, space, p)?;
    let sup = dual_norm_of(&dict, |phi| {
        Ok(plap_pairing_with(&kernel, u, phi, &d4, s, p)?.value)
    })?;
    let q = p / (p - 1.0);
    let mb = mean_value(u, &d1)?;
    let nodes = d4.nodes(&grid)?;
    let osc: Vec<f64> = nodes
        .iter()
        .map(|&i| (u.values()[i] - mb).abs().powf(p))
        .collect();
    let osc = crate::reduce::pairwise_sum(&osc) * grid.cell_volume();
    let parts = [
        delta.powf(p) * outer,
        delta.powf(-q) * sup.powf(q),
        delta.powf(-q) * b.diam(&grid).powf(-s * p) * osc,
    ];
    let excess = lhs - parts[0];
    let satisfied_constant = if excess <= 0.0 {
        Some(0.0)
    } else {
        ratio(excess, parts[1] + parts[2])
    };
    Ok(CaccioppoliReport {
        lhs,
        rhs_parts: parts,
        satisfied_constant: satisfied_constant.filter(|c| c.is_finite()),
        pairing_sup: sup,
    })
}

pub const PROBE_COLUMNS: [(&str, &str); 5] = [
    ("eps", "1"),
    ("shifted_seminorm", "1"),
    ("base_seminorm", "1"),
    ("forcing_dual", "1"),
    ("implied_constant", "1"),
];

/// For each `ε`: `[u]_{W^{s+ε,p}(Ω1)}`, `[u]_{W^{s,p}(Ω)}`, the dictionary
/// estimate of `‖f‖` in the dual of `W^{s-ε(p-1),p}_0(Ω)` and the implied
/// constant `C = [u]_{s+ε,Ω1} / (‖f‖_* + [u]_{s,Ω})`.
pub fn differentiability_probe(
    prob: &DirichletProblem,
    u: &SampledFunction,
    omega1: &Domain,
    eps_list: &[f64],
    space: &TestSpace,
) -> Result<ExperimentReport> {
    let grid = *prob.grid();
    let (s, p) = (prob.params.s, prob.params.p);
    for b in omega1.boxes() {
        if !prob
            .domain
            .boxes()
            .iter()
            .any(|o| b.inside_with_margin(o, grid.dim(), 1))
        {
            return Err(Error::Geometry(format!(
                "{b:?} is not strictly inside the solver domain"
            )));
        }
    }
    let base = gagliardo_seminorm(u, &prob.domain, s, p)?.value;
    let mut table = Table::new("probe", &PROBE_COLUMNS);
    for &eps in eps_list {
        if !(eps > 0.0 && s + eps < 1.0) {
            return Err(invalid(
                "eps",
                eps,
                format!("need 0 < eps and s + eps < 1 (s = {s})"),
            ));
        }
        let order = s - eps * (p - 1.0);
        if order <= 0.0 {
            return Err(invalid(
                "eps",
                eps,
                format!("dual order s - eps (p - 1) = {order} must be > 0"),
            ));
        }
        let shifted = gagliardo_seminorm(u, omega1, s + eps, p)?.value;
        let dict = dictionary(&prob.domain, &grid, &TestSpace { order, ..*space }, p)?;
        let fd = dual_norm_of(&dict, |phi| prob.forcing.inner(phi))?;
        let c = ratio(shifted, fd + base);
        table.push(vec![Some(eps), Some(shifted), Some(base), Some(fd), c]);
    }
    let mut report = ExperimentReport::new("probe", &grid);
    report.measurements.push(table);
    Ok(report)
}

/// Relative change of the probe columns between two resolutions, and the
/// largest `ε` whose shifted seminorm moves by less than `threshold`.
pub fn compare_resolutions(
    coarse: &ExperimentReport,
    fine: &ExperimentReport,
    threshold: f64,
) -> Result<Table> {
    let get = |r: &ExperimentReport, c: &str| -> Result<Vec<Option<f64>>> {
        r.table("probe")
            .and_then(|t| t.column(c))
            .ok_or_else(|| Error::Format(format!("probe report lacks column {c}")))
    };
    let eps = get(coarse, "eps")?;
    if eps != get(fine, "eps")? {
        return Err(Error::Format(
            "probe reports use different eps lists".into(),
        ));
    }
    let rel = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => ratio((b - a).abs(), a.abs()),
        _ => None,
    };
    let (s0, s1) = (
        get(coarse, "shifted_seminorm")?,
        get(fine, "shifted_seminorm")?,
    );
    let (c0, c1) = (
        get(coarse, "implied_constant")?,
        get(fine, "implied_constant")?,
    );
    let mut t = Table::new(
        "refinement",
        &[
            ("eps", "1"),
            ("seminorm_change", "1"),
            ("constant_change", "1"),
            ("stable", "bool"),
        ],
    );
    for k in 0..eps.len() {
        let ds = rel(s0[k], s1[k]);
        let stable = ds.map(|x| if x < threshold { 1.0 } else { 0.0 });
        t.push(vec![eps[k], ds, rel(c0[k], c1[k]), stable]);
    }
    Ok(t)
}

/// Largest `ε` flagged stable in a refinement table.
pub fn largest_stable_eps(t: &Table) -> Fitted {
    let eps = t.column("eps").unwrap_or_default();
    let stable = t.column("stable").unwrap_or_default();
    eps.iter()
        .zip(&stable)
        .filter(|(_, s)| **s == Some(1.0))
        .filter_map(|(e, _)| *e)
        .fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.max(e))))
        .map_or(Fitted::undefined(), Fitted::exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_preset, preset_params};

    fn setup() -> (Grid, Domain, Domain) {
        let g = Grid::unit_1d(128).unwrap();
        let o1 = Domain::from_coords(&g, &[[0.375, 0.625]]).unwrap();
        let o2 = Domain::from_coords(&g, &[[0.25, 0.75]]).unwrap();
        (g, o1, o2)
    }

    #[test]
    fn localize_properties_exact() {
        let (g, o1, o2) = setup();
        let u = make_preset("random_trig", &g, &preset_params(&[("seed", 3.0)])).unwrap();
        let t = localize(&u, &o1, &o2).unwrap();
        let m = mean_value(&u, &o1).unwrap();
        let (m1, m2) = (o1.mask(&g).unwrap(), o2.mask(&g).unwrap());
        for i in 0..g.len() {
            if m1[i] {
                assert_eq!(t.values()[i], u.values()[i] - m);
            }
            if !m2[i] {
                assert_eq!(t.values()[i].to_bits(), 0.0f64.to_bits());
            }
        }
        let c = localize(&SampledFunction::constant(g, 4.0), &o1, &o2).unwrap();
        assert_eq!(c.max_abs(), 0.0);
    }

    #[test]
    fn localize_ignores_constants() {
        let (g, o1, o2) = setup();
        let u = make_preset("random_trig", &g, &preset_params(&[("seed", 8.0)])).unwrap();
        let a = localize(&u, &o1, &o2).unwrap();
        let b = localize(&u.add_constant(3.5), &o1, &o2).unwrap();
        let diff = a.sub(&b).unwrap().max_abs();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn cutoff_margin_enforced() {
        let g = Grid::unit_1d(64).unwrap();
        let inner = GridBox::new(&g, [20, 0], [40, 1]).unwrap();
        let tight = GridBox::new(&g, [19, 0], [42, 1]).unwrap();
        assert!(cutoff(&g, &inner, &tight).is_err());
        let ok = GridBox::new(&g, [18, 0], [42, 1]).unwrap();
        let c = cutoff(&g, &inner, &ok).unwrap();
        let e = c.eta.values();
        assert!(e[18] > 0.0 && e[18] < 1.0 && e[17] == 0.0 && e[20] == 1.0);
        assert!(c.lipschitz > 0.0);
    }

    #[test]
    fn caccioppoli_trivial_cases() {
        let g = Grid::unit_1d(128).unwrap();
        let b = GridBox::from_coords(&g, &[0.4375], &[0.5625]).unwrap();
        let space = TestSpace {
            order: 0.5,
            size: 8,
            seed: 2,
        };
        let c = caccioppoli_check(
            &SampledFunction::constant(g, 1.5),
            &b,
            0.5,
            2.0,
            0.5,
            &space,
        )
        .unwrap();
        assert_eq!(c.lhs, 0.0);
        assert_eq!(c.rhs_parts, [0.0; 3]);
        assert_eq!(c.satisfied_constant, Some(0.0));
        // supported in [0, 0.125), away from 4B = [0.25, 0.75)
        let far = SampledFunction::from_fn(g, |x| {
            if x[0] < 0.125 {
                (8.0 * x[0]).sin()
            } else {
                0.0
            }
        })
        .unwrap();
        let c = caccioppoli_check(&far, &b, 0.5, 2.0, 0.5, &space).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert_eq!(c.rhs_parts, [0.0; 3]);
    }

    #[test]
    fn caccioppoli_constant_finite() {
        let g = Grid::unit_1d(128).unwrap();
        let b = GridBox::from_coords(&g, &[0.4375], &[0.5625]).unwrap();
        let space = TestSpace {
            order: 0.5,
            size: 16,
            seed: 2,
        };
        let u = make_preset("random_trig", &g, &preset_params(&[("seed", 1.0)])).unwrap();
        let c = caccioppoli_check(&u, &b, 0.5, 2.0, 0.5, &space).unwrap();
        assert!(c.lhs > 0.0);
        assert!(c.satisfied_constant.unwrap().is_finite());
    }

    #[test]
    fn probe_zero_solution() {
        let g = Grid::unit_1d(128).unwrap();
        let z = SampledFunction::zeros(g);
        let dom = Domain::from_coords(&g, &[[0.25, 0.75]]).unwrap();
        let prob =
            DirichletProblem::new(dom, z.clone(), z.clone(), crate::FracParams::new(0.5, 2.0))
                .unwrap();
        let o1 = Domain::from_coords(&g, &[[0.375, 0.625]]).unwrap();
        let space = TestSpace {
            order: 0.5,
            size: 8,
            seed: 0,
        };
        let r = differentiability_probe(&prob, &z, &o1, &[0.02, 0.05], &space).unwrap();
        let col = r
            .table("probe")
            .unwrap()
            .column("shifted_seminorm")
            .unwrap();
        assert!(col.iter().all(|v| *v == Some(0.0)));
        let t = compare_resolutions(&r, &r, 0.1).unwrap();
        // 0 -> 0 is an undefined relative change
        assert_eq!(largest_stable_eps(&t), Fitted::undefined());
    }
}
