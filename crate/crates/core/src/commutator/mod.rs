//! The nonlinear commutator
//! `R(u, φ) = (-Δ_p)^{s+ε}_B u[φ] - c (-Δ_p)^s_B u[Λ^{εp} φ]`,
//! its kernels, the ε-sweep harness and the logarithmic potential functional.

mod kernels;
mod logpot;

pub use kernels::{k_delta, k_log, kappa_eps};
pub use logpot::{log_potential_a, LogKernelParams, LOGPOT_MAX_POINTS};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{make_preset, preset_params, Domain, Grid, SampledFunction};
use crate::kernel::PairKernel;
use crate::pairing::{dictionary, plap_sum, TestSpace};
use crate::params::FracParams;
use crate::report::{loglog_slope, ExperimentReport, Fitted, Table};
use crate::sobolev::pow_sum;
use crate::spectral::lambda_pow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CMode {
    Analytic,
    Calibrated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorConfig {
    pub s: f64,
    pub p: f64,
    pub eps: f64,
    /// Internal Riesz exponent (resolved, never defaulted here).
    pub t: f64,
    pub c_mode: CMode,
    pub c_value: f64,
}

/// `γ(n, t) = π^{n/2} 2^t Γ(t/2) / Γ((n - t)/2)`, the inverse Riesz constant.
pub fn riesz_gamma(dim: usize, t: f64) -> f64 {
    let n = dim as f64;
    std::f64::consts::PI.powf(0.5 * n) * 2f64.powf(t) * gamma(0.5 * t) / gamma(0.5 * (n - t))
}

/// `γ(n, t) / γ(n, t + εp)`.
pub fn analytic_c(dim: usize, t: f64, eps: f64, p: f64) -> f64 {
    if eps == 0.0 {
        return 1.0;
    }
    riesz_gamma(dim, t) / riesz_gamma(dim, t + eps * p)
}

fn validated(dim: usize, s: f64, p: f64, eps: f64, t: Option<f64>) -> Result<f64> {
    let fp = FracParams { s, p, eps, t };
    let v = fp.violations(dim);
    if !v.is_empty() {
        return Err(Error::InvalidParameter {
            name: "commutator config",
            value: eps,
            reason: v.join("; "),
        });
    }
    Ok(fp.resolved_t(dim))
}

impl CommutatorConfig {
    pub fn analytic(dim: usize, s: f64, p: f64, eps: f64, t: Option<f64>) -> Result<Self> {
        let t = validated(dim, s, p, eps, t)?;
        Ok(Self {
            s,
            p,
            eps,
            t,
            c_mode: CMode::Analytic,
            c_value: analytic_c(dim, t, eps, p),
        })
    }

    /// `c` fitted by least squares on the fixed probe family in `b`.
    pub fn calibrated(
        grid: &Grid,
        b: &Domain,
        s: f64,
        p: f64,
        eps: f64,
        t: Option<f64>,
    ) -> Result<Self> {
        let t = validated(grid.dim(), s, p, eps, t)?;
        Ok(Self {
            s,
            p,
            eps,
            t,
            c_mode: CMode::Calibrated,
            c_value: calibrate_c(grid, b, s, p, eps)?,
        })
    }

    pub fn new(
        grid: &Grid,
        b: &Domain,
        mode: CMode,
        s: f64,
        p: f64,
        eps: f64,
        t: Option<f64>,
    ) -> Result<Self> {
        match mode {
            CMode::Analytic => Self::analytic(grid.dim(), s, p, eps, t),
            CMode::Calibrated => Self::calibrated(grid, b, s, p, eps, t),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CommutatorParts {
    /// `(-Δ_p)^{s+ε}_B u[φ]`.
    pub shifted: f64,
    /// `(-Δ_p)^s_B u[Λ^{εp} φ]`.
    pub base: f64,
    pub c_value: f64,
    /// `shifted - c_value * base`.
    pub value: f64,
}

struct PairingKernels {
    shifted: PairKernel,
    base: PairKernel,
}

impl PairingKernels {
    fn new(grid: &Grid, s: f64, p: f64, eps: f64) -> Result<Self> {
        Ok(Self {
            shifted: PairKernel::gagliardo(grid, s + eps, p)?,
            base: PairKernel::gagliardo(grid, s, p)?,
        })
    }

    fn pairings(
        &self,
        u: &SampledFunction,
        phi: &SampledFunction,
        nodes: &[usize],
        eps: f64,
        p: f64,
    ) -> (f64, f64) {
        let moved = lambda_pow(phi, eps * p);
        (
            plap_sum(&self.shifted, u, phi, nodes, nodes, p),
            plap_sum(&self.base, u, &moved, nodes, nodes, p),
        )
    }
}

fn check_support(phi: &SampledFunction, mask: &[bool]) -> Result<()> {
    if let Some(i) = phi
        .values()
        .iter()
        .zip(mask)
        .position(|(v, &m)| !m && *v != 0.0)
    {
        return Err(Error::Geometry(format!(
            "test function is nonzero at node {i}, outside the pairing domain"
        )));
    }
    Ok(())
}

fn probe_family(
    grid: &Grid,
    b: &Domain,
    s: f64,
    p: f64,
) -> Result<Vec<(SampledFunction, SampledFunction)>> {
    let phis = dictionary(
        b,
        grid,
        &TestSpace {
            order: s,
            size: 4,
            seed: 7331,
        },
        p,
    )?;
    phis.into_iter()
        .enumerate()
        .map(|(k, phi)| {
            let params = preset_params(&[("seed", 9001.0 + k as f64), ("modes", 4.0)]);
            Ok((make_preset("random_trig", grid, &params)?, phi))
        })
        .collect()
}

/// Least-squares `c` minimizing `Σ |R|²` over a fixed 4-pair probe family.
pub fn calibrate_c(grid: &Grid, b: &Domain, s: f64, p: f64, eps: f64) -> Result<f64> {
    let nodes = b.nodes(grid)?;
    let kernels = PairingKernels::new(grid, s, p, eps)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (u, phi) in probe_family(grid, b, s, p)? {
        let (p1, p2) = kernels.pairings(&u, &phi, &nodes, eps, p);
        num += p1 * p2;
        den += p2 * p2;
    }
    Ok(if den > 0.0 { num / den } else { 1.0 })
}

pub fn commutator_parts(
    u: &SampledFunction,
    phi: &SampledFunction,
    b: &Domain,
    cfg: &CommutatorConfig,
) -> Result<CommutatorParts> {
    let grid = u.grid();
    grid.ensure_same(phi.grid())?;
    validated(grid.dim(), cfg.s, cfg.p, cfg.eps, Some(cfg.t))?;
    check_support(phi, &b.mask(grid)?)?;
    let nodes = b.nodes(grid)?;
    if nodes.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let kernels = PairingKernels::new(grid, cfg.s, cfg.p, cfg.eps)?;
    let (shifted, base) = kernels.pairings(u, phi, &nodes, cfg.eps, cfg.p);
    Ok(CommutatorParts {
        shifted,
        base,
        c_value: cfg.c_value,
        value: shifted - cfg.c_value * base,
    })
}

#[allow(non_snake_case)]
pub fn commutator_R(
    u: &SampledFunction,
    phi: &SampledFunction,
    b: &Domain,
    cfg: &CommutatorConfig,
) -> Result<f64> {
    Ok(commutator_parts(u, phi, b, cfg)?.value)
}

/// Inputs of [`eps_sweep_experiment`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub s: f64,
    pub p: f64,
    pub eps_list: Vec<f64>,
    pub c_mode: CMode,
    /// Fixed internal exponent; `None` uses `(dim - εp)/2` at each ε.
    pub t: Option<f64>,
}

pub const SWEEP_COLUMNS: [(&str, &str); 8] = [
    ("eps", "1"),
    ("R", "pairing"),
    ("u_seminorm", "seminorm"),
    ("phi_seminorm", "seminorm"),
    ("normalized_ratio", "1"),
    ("c_value", "1"),
    ("t", "1"),
    ("shifted_pairing", "pairing"),
];

/// Runs the commutator at each ε and fits `log|R|` against `log ε`.
///
/// Per-ε columns: `R`, `[u]_{W^{s+ε,p}(B)}`, `[φ]_{W^{s+ε,p}(torus)}`, the
/// normalized ratio `|R| / (ε [u]^{p-1} [φ])`, the constant and `t` used.
pub fn eps_sweep_experiment(
    u: &SampledFunction,
    phi: &SampledFunction,
    b: &Domain,
    cfg: &SweepConfig,
) -> Result<ExperimentReport> {
    let grid = *u.grid();
    if cfg.eps_list.is_empty() {
        return Err(crate::error::invalid(
            "eps_list",
            f64::NAN,
            "needs at least one value",
        ));
    }
    if cfg.eps_list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(crate::error::invalid(
            "eps_list",
            f64::NAN,
            "must be strictly increasing",
        ));
    }
    let configs = cfg
        .eps_list
        .iter()
        .map(|&eps| CommutatorConfig::new(&grid, b, cfg.c_mode, cfg.s, cfg.p, eps, cfg.t))
        .collect::<Result<Vec<_>>>()?;
    let nodes = b.nodes(&grid)?;
    let all: Vec<usize> = (0..grid.len()).collect();
    let p = cfg.p;
    let rows = configs
        .par_iter()
        .map(|c| -> Result<Vec<Option<f64>>> {
            let parts = commutator_parts(u, phi, b, c)?;
            let k = PairKernel::gagliardo(&grid, c.s + c.eps, p)?;
            let su = pow_sum(&k, u, &nodes, &nodes, p).powf(1.0 / p);
            let sphi = pow_sum(&k, phi, &all, &all, p).powf(1.0 / p);
            let den = c.eps * su.powf(p - 1.0) * sphi;
            let ratio = (den > 0.0).then(|| parts.value.abs() / den);
            Ok(vec![
                Some(c.eps),
                Some(parts.value),
                Some(su),
                Some(sphi),
                ratio,
                Some(c.c_value),
                Some(c.t),
                Some(parts.shifted),
            ])
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new("sweep", &SWEEP_COLUMNS);
    let (mut xs, mut ys, mut ratios) = (Vec::new(), Vec::new(), Vec::new());
    for row in rows {
        let (eps, r) = (row[0].unwrap(), row[1].unwrap());
        if eps > 0.0 {
            xs.push(eps);
            ys.push(r);
        }
        if let Some(q) = row[4] {
            ratios.push(q);
        }
        table.push(row);
    }
    let mut report = ExperimentReport::new("commutator-sweep", &grid);
    report.config_echo = serde_json::to_value(cfg)?;
    report.fitted.insert("slope".into(), loglog_slope(&xs, &ys));
    let spread =
        if ratios.len() == xs.len() && !ratios.is_empty() && ratios.iter().all(|&q| q > 0.0) {
            let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
            let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
            Fitted::exact(max / min)
        } else {
            Fitted::undefined()
        };
    report.fitted.insert("ratio_spread".into(), spread);
    report.measurements.push(table);
    Ok(report)
}
