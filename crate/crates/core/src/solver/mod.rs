//! Variational solver for `(-Δ_p)^s u = f` in `Ω` with `u = g` outside `Ω`.
//!
//! The unknowns are the node values inside `Ω`. The energy counts every
//! ordered pair with at least one node in `Ω`,
//!
//! ```text
//! E(u) = (1/p) ([u]^p_{torus} - [u]^p_{Ω^c}) - ∫_Ω f u,
//! ```
//!
//! so that its gradient at an interior node `i` is the full-torus pairing of
//! `u` against the indicator of node `i`, minus `f_i h^dim`.

mod local;

pub use local::{
    caccioppoli_check, compare_resolutions, cutoff, differentiability_probe, largest_stable_eps,
    localize, CaccioppoliReport, Cutoff, PROBE_COLUMNS,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{Domain, SampledFunction};
use crate::kernel::{phi_p, PairKernel};
use crate::pairing::{dictionary, dual_norm_of, TestSpace};
use crate::params::FracParams;
use crate::reduce::{pairwise_sum, par_row_sum, seq_sum};
use crate::sobolev::pow_sum;

#[derive(Debug, Clone)]
pub struct DirichletProblem {
    pub domain: Domain,
    /// Forcing, acting through `φ ↦ ∫_Ω f φ`.
    pub forcing: SampledFunction,
    /// Exterior data; only its values outside `Ω` matter.
    pub exterior: SampledFunction,
    pub params: FracParams,
}

impl DirichletProblem {
    pub fn new(
        domain: Domain,
        forcing: SampledFunction,
        exterior: SampledFunction,
        params: FracParams,
    ) -> Result<Self> {
        let grid = *forcing.grid();
        grid.ensure_same(exterior.grid())?;
        let n = grid.n_points();
        for b in domain.boxes() {
            if (0..grid.dim()).any(|k| b.lo[k] == 0 || b.hi[k] == n) {
                return Err(Error::Geometry(format!(
                    "box {b:?} of the solver domain touches the boundary of the torus box"
                )));
            }
        }
        domain.nodes(&grid)?;
        if let Some(i) = forcing.values().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("forcing at node {i}")));
        }
        if let Some(i) = exterior.values().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("exterior data at node {i}")));
        }
        if let Some(v) = params.violations(grid.dim()).into_iter().next() {
            return Err(invalid("params", params.s, v));
        }
        crate::params::check_p(params.p, 2.0)?;
        Ok(Self {
            domain,
            forcing,
            exterior,
            params,
        })
    }

    pub fn grid(&self) -> &crate::grid::Grid {
        self.forcing.grid()
    }

    /// The exterior data with the interior values kept as the initial guess.
    pub fn initial_guess(&self) -> SampledFunction {
        self.exterior.clone()
    }
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub u: SampledFunction,
    pub energy: f64,
    /// Dictionary lower bound for the dual norm of `(-Δ_p)^s u - f`.
    pub dual_residual: f64,
    pub iteration: usize,
    pub converged: bool,
    /// `‖∇E‖ / ‖∇E(u_0)‖`, gradients measured as densities in `L²(Ω)`.
    pub grad_norm: f64,
    /// Energy after each accepted step, starting with the initial guess.
    /// Updated by exactly evaluated increments, so it never rises.
    pub energy_history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Dictionary for the reported dual residual.
    pub residual_space: TestSpace,
}

impl SolverOptions {
    pub fn new(tol: f64, max_iter: usize, s: f64) -> Self {
        Self {
            tol,
            max_iter,
            residual_space: TestSpace {
                order: s,
                size: 32,
                seed: 0,
            },
        }
    }
}

const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

/// Precomputed index sets and kernel of a problem.
struct Setup {
    kernel: PairKernel,
    inside: Vec<usize>,
    outside: Vec<usize>,
    mask: Vec<bool>,
    all: Vec<usize>,
}

impl Setup {
    fn new(prob: &DirichletProblem) -> Result<Self> {
        let grid = prob.grid();
        let kernel = PairKernel::gagliardo(grid, prob.params.s, prob.params.p)?;
        let mask = prob.domain.mask(grid)?;
        let inside: Vec<usize> = (0..grid.len()).filter(|&i| mask[i]).collect();
        let outside: Vec<usize> = (0..grid.len()).filter(|&i| !mask[i]).collect();
        Ok(Self {
            kernel,
            inside,
            outside,
            mask,
            all: (0..grid.len()).collect(),
        })
    }

    fn check_exterior(&self, u: &SampledFunction, prob: &DirichletProblem) -> Result<()> {
        u.grid().ensure_same(prob.grid())?;
        let g = prob.exterior.values();
        for &i in &self.outside {
            let v = u.values()[i];
            if v.to_bits() != g[i].to_bits() {
                return Err(Error::ExteriorConstraint {
                    node: i,
                    value: v,
                    expected: g[i],
                });
            }
        }
        Ok(())
    }

    fn forcing_term(&self, prob: &DirichletProblem, u: &[f64]) -> f64 {
        let f = prob.forcing.values();
        let terms: Vec<f64> = self.inside.iter().map(|&i| f[i] * u[i]).collect();
        pairwise_sum(&terms) * prob.grid().cell_volume()
    }

    fn energy(&self, prob: &DirichletProblem, u: &SampledFunction) -> f64 {
        let p = prob.params.p;
        let pairs = pow_sum(&self.kernel, u, &self.inside, &self.all, p)
            + pow_sum(&self.kernel, u, &self.inside, &self.outside, p);
        pairs / p - self.forcing_term(prob, u.values())
    }

    /// Gradient as a density on the interior nodes, in the order of `inside`.
    fn gradient(&self, prob: &DirichletProblem, u: &SampledFunction) -> Vec<f64> {
        use rayon::prelude::*;
        let grid = prob.grid();
        let hn = grid.cell_volume();
        let p = prob.params.p;
        let v = u.values();
        let f = prob.forcing.values();
        self.inside
            .par_iter()
            .map(|&i| {
                let row = seq_sum(&self.all, |j| {
                    if i == j {
                        0.0
                    } else {
                        phi_p(v[i] - v[j], p) * self.kernel.weight(i, j)
                    }
                });
                2.0 * row * hn - f[i]
            })
            .collect()
    }

    /// `E(u + d) - E(u)` summed term by term, each pair difference evaluated
    /// without cancellation. `d` vanishes outside `Ω`.
    fn energy_increment(&self, prob: &DirichletProblem, u: &[f64], d: &[f64]) -> f64 {
        let p = prob.params.p;
        let h2 = prob.grid().cell_volume().powi(2);
        let pairs = par_row_sum(&self.inside, |i| {
            seq_sum(&self.all, |j| {
                if i == j {
                    return 0.0;
                }
                let w = if self.mask[j] { 1.0 } else { 2.0 };
                w * pow_increment(u[i] - u[j], d[i] - d[j], p) * self.kernel.weight(i, j)
            })
        }) * h2;
        pairs / p - self.forcing_term(prob, d)
    }
}

/// `|a + d|^p - |a|^p` with full relative accuracy when `|d| ≪ |a|`.
fn pow_increment(a: f64, d: f64, p: f64) -> f64 {
    let b = a + d;
    if a == 0.0 {
        return d.abs().powf(p);
    }
    if b == 0.0 || (b > 0.0) != (a > 0.0) {
        return b.abs().powf(p) - a.abs().powf(p);
    }
    let rel = d / a;
    a.abs().powf(p) * (p * rel.ln_1p()).exp_m1()
}

/// `E(u)`. Fails if `u` differs from the exterior data outside `Ω`.
pub fn energy(u: &SampledFunction, prob: &DirichletProblem) -> Result<f64> {
    let setup = Setup::new(prob)?;
    setup.check_exterior(u, prob)?;
    Ok(setup.energy(prob, u))
}

/// Interior gradient of `E` as a density: `(-Δ_p)^s u (x_i) - f_i` for `x_i ∈ Ω`.
pub fn residual_density(u: &SampledFunction, prob: &DirichletProblem) -> Result<SampledFunction> {
    let setup = Setup::new(prob)?;
    let r = setup.gradient(prob, u);
    let mut out = vec![0.0; prob.grid().len()];
    for (k, &i) in setup.inside.iter().enumerate() {
        out[i] = r[k];
    }
    Ok(SampledFunction::from_raw(*prob.grid(), out))
}

/// Dictionary estimate of `‖(-Δ_p)^s u - f‖` in the dual of `W^{order,p}_0(Ω)`.
pub fn dual_residual(
    u: &SampledFunction,
    prob: &DirichletProblem,
    space: &TestSpace,
) -> Result<f64> {
    let r = residual_density(u, prob)?;
    let dict = dictionary(&prob.domain, prob.grid(), space, prob.params.p)?;
    dual_norm_of(&dict, |phi| r.inner(phi))
}

pub fn solve(prob: &DirichletProblem, tol: f64, max_iter: usize) -> Result<SolverState> {
    solve_with(prob, &SolverOptions::new(tol, max_iter, prob.params.s))
}

/// Gradient descent on the interior values. The trial step is the
/// Barzilai-Borwein length, halved until the Armijo condition holds.
/// Stops when the gradient has shrunk by `tol` relative to the initial
/// guess, after `max_iter` steps, or when no decrease can be found.
pub fn solve_with(prob: &DirichletProblem, opts: &SolverOptions) -> Result<SolverState> {
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(invalid("tol", opts.tol, "must be > 0"));
    }
    let setup = Setup::new(prob)?;
    let grid = *prob.grid();
    let hn = grid.cell_volume();
    let norm = |r: &[f64]| (pairwise_sum(&r.iter().map(|x| x * x).collect::<Vec<_>>()) * hn).sqrt();

    let mut u = prob.initial_guess();
    let mut e = setup.energy(prob, &u);
    let mut history = vec![e];
    let mut r = setup.gradient(prob, &u);
    let r0 = norm(&r);
    let mut rel = if r0 == 0.0 { 0.0 } else { 1.0 };
    // inverse of the diagonal of the p = 2 Hessian, as a density
    let row: f64 = seq_sum(&setup.all, |j| setup.kernel.table()[j]);
    let mut step = 1.0 / (2.0 * row * hn);
    let mut iteration = 0;
    let mut converged = rel <= opts.tol;
    let mut d = vec![0.0; grid.len()];

    while !converged && iteration < opts.max_iter {
        let rr = norm(&r).powi(2);
        let mut alpha = step;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            for (k, &i) in setup.inside.iter().enumerate() {
                d[i] = -alpha * r[k];
            }
            let de = setup.energy_increment(prob, u.values(), &d);
            if de <= -ARMIJO_C * alpha * rr {
                accepted = Some(de);
                break;
            }
            alpha *= 0.5;
        }
        let Some(de) = accepted else { break };
        let mut next = u.values().to_vec();
        for &i in &setup.inside {
            next[i] += d[i];
        }
        u = SampledFunction::from_raw(grid, next);
        e += de;
        history.push(e);
        let r_new = setup.gradient(prob, &u);
        // BB1 step: <s,s>/<s,y> with s = -alpha r, y = r_new - r
        let ss: f64 = alpha * alpha * rr;
        let sy: f64 = -alpha
            * pairwise_sum(
                &r.iter()
                    .zip(&r_new)
                    .map(|(a, b)| a * (b - a))
                    .collect::<Vec<_>>(),
            )
            * hn;
        step = if sy > 0.0 && (ss / sy).is_finite() {
            ss / sy
        } else {
            2.0 * alpha
        };
        r = r_new;
        iteration += 1;
        rel = norm(&r) / r0;
        converged = rel <= opts.tol;
    }
    if !e.is_finite() {
        return Err(Error::NonFinite("solver energy".into()));
    }
    let dual_residual = if setup.inside.is_empty() {
        0.0
    } else {
        let dict = dictionary(&prob.domain, &grid, &opts.residual_space, prob.params.p)?;
        let mut dens = vec![0.0; grid.len()];
        for (k, &i) in setup.inside.iter().enumerate() {
            dens[i] = r[k];
        }
        let dens = SampledFunction::from_raw(grid, dens);
        dual_norm_of(&dict, |phi| dens.inner(phi))?
    };
    Ok(SolverState {
        energy: setup.energy(prob, &u),
        u,
        dual_residual,
        iteration,
        converged,
        grad_norm: rel,
        energy_history: history,
    })
}
