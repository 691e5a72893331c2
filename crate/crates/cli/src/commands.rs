//! Experiment preparation (all validation) and execution.

use std::fmt::Display;

use clap::ValueEnum;
use fracp_core::commutator::{
    eps_sweep_experiment, log_potential_a, LogKernelParams, SweepConfig, LOGPOT_MAX_POINTS,
};
use fracp_core::grid::{make_preset, PresetParams};
use fracp_core::pairing::{plap_pairing, TestSpace};
use fracp_core::report::{ExperimentReport, Fitted, Table};
use fracp_core::sobolev::{gagliardo_seminorm, poincare_check};
use fracp_core::solver::{
    caccioppoli_check, compare_resolutions, differentiability_probe, largest_stable_eps,
    solve_with, DirichletProblem, SolverOptions,
};
use fracp_core::spectral::{lp_project, triebel_norm, FilterBank};
use fracp_core::{Domain, Error, FracParams, Grid, GridBox, SampledFunction};
use serde_json::json;

use crate::config::{BoxSection, Config, FunctionSection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Seminorm,
    Pairing,
    CommutatorSweep,
    Logpot,
    LpEquiv,
    Solve,
    Probe,
    Poincare,
    Caccioppoli,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::Seminorm => "seminorm",
            Self::Pairing => "pairing",
            Self::CommutatorSweep => "commutator-sweep",
            Self::Logpot => "logpot",
            Self::LpEquiv => "lp-equiv",
            Self::Solve => "solve",
            Self::Probe => "probe",
            Self::Poincare => "poincare",
            Self::Caccioppoli => "caccioppoli",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::value_variants()
            .iter()
            .copied()
            .find(|e| e.name() == name)
    }
}

#[derive(Debug)]
pub enum Failure {
    /// Invalid input; nothing was written.
    Validation(Vec<String>),
    /// NaN or infinity in a result.
    Numerical(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite(_) => Failure::Numerical(e.to_string()),
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => Failure::Io(e.to_string()),
            _ => Failure::Validation(vec![e.to_string()]),
        }
    }
}

/// Collects every problem instead of stopping at the first.
#[derive(Default)]
struct Checks(Vec<String>);

impl Checks {
    fn take<T, E: Display>(&mut self, r: Result<T, E>) -> Option<T> {
        r.map_err(|e| self.0.push(e.to_string())).ok()
    }

    fn require(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.0.push(msg());
        }
    }
}

enum Kind {
    Seminorm {
        u: SampledFunction,
        domain: Domain,
    },
    Pairing {
        u: SampledFunction,
        phi: SampledFunction,
        domain: Domain,
    },
    Sweep {
        u: SampledFunction,
        phi: SampledFunction,
        domain: Domain,
        sweep: SweepConfig,
    },
    Logpot {
        phi: SampledFunction,
        kernel: LogKernelParams,
    },
    LpEquiv {
        u: SampledFunction,
    },
    Solve {
        prob: DirichletProblem,
    },
    Probe {
        levels: Vec<(DirichletProblem, Domain)>,
    },
    Poincare {
        u: SampledFunction,
        b: GridBox,
    },
    Caccioppoli {
        u: SampledFunction,
        b: GridBox,
    },
}

pub struct Job {
    exp: Experiment,
    cfg: Config,
    grid: Grid,
    kind: Kind,
}

fn function(
    c: &mut Checks,
    grid: &Grid,
    f: &Option<FunctionSection>,
    name: &str,
) -> Option<SampledFunction> {
    let Some(f) = f else {
        c.0.push(format!("missing [{name}] section"));
        return None;
    };
    let params: PresetParams = f.params.iter().map(|(k, v)| (k.clone(), *v)).collect();
    c.take(make_preset(&f.preset, grid, &params).map_err(|e| format!("[{name}]: {e}")))
}

fn grid_box(
    c: &mut Checks,
    grid: &Grid,
    lo: &Option<Vec<f64>>,
    hi: &Option<Vec<f64>>,
    what: &str,
) -> Option<GridBox> {
    match (lo, hi) {
        (Some(lo), Some(hi)) => {
            if lo.len() != grid.dim() || hi.len() != grid.dim() {
                c.0.push(format!(
                    "{what}: need {} coordinates per corner",
                    grid.dim()
                ));
                return None;
            }
            c.take(GridBox::from_coords(grid, lo, hi).map_err(|e| format!("{what}: {e}")))
        }
        (None, None) => None,
        _ => {
            c.0.push(format!("{what}: give both corners"));
            None
        }
    }
}

fn domain(c: &mut Checks, grid: &Grid, b: &BoxSection) -> Option<Domain> {
    if b.lo.is_none() && b.hi.is_none() {
        return Some(Domain::full(grid));
    }
    grid_box(c, grid, &b.lo, &b.hi, "[domain]").map(Domain::from_box)
}

fn required_box(
    c: &mut Checks,
    grid: &Grid,
    lo: &Option<Vec<f64>>,
    hi: &Option<Vec<f64>>,
    what: &str,
) -> Option<GridBox> {
    if lo.is_none() && hi.is_none() {
        c.0.push(format!("{what}: box_lo and box_hi are required"));
        return None;
    }
    grid_box(c, grid, lo, hi, what)
}

fn check_exponents(c: &mut Checks, s: f64, p: f64, p_min: f64) {
    c.require(s > 0.0 && s < 1.0, || {
        format!("differentiability order: s = {s} must lie in (0, 1)")
    });
    c.require(p.is_finite() && p >= p_min, || {
        format!("integrability: p = {p} must be finite and >= {p_min}")
    });
}

fn problem(c: &mut Checks, cfg: &Config, grid: &Grid) -> Option<DirichletProblem> {
    let f = function(c, grid, &cfg.forcing, "forcing");
    let g = match &cfg.exterior {
        Some(_) => function(c, grid, &cfg.exterior, "exterior"),
        None => Some(SampledFunction::zeros(*grid)),
    };
    if cfg.domain.lo.is_none() && cfg.domain.hi.is_none() {
        c.0.push("[domain]: the solver needs a box strictly inside the torus".into());
    }
    let d = domain(c, grid, &cfg.domain)?;
    let params = FracParams::new(cfg.params.s, cfg.params.p);
    c.take(DirichletProblem::new(d, f?, g?, params))
}

/// Builds every input of the experiment, reporting all problems found.
pub fn prepare(exp: Experiment, cfg: Config) -> Result<Job, Vec<String>> {
    let mut c = Checks::default();
    let gs = cfg.grid;
    let Some(grid) = c.take(Grid::new(gs.dim, gs.n, gs.length)) else {
        return Err(c.0);
    };
    let (s, p) = (cfg.params.s, cfg.params.p);
    let p_min = match exp {
        Experiment::Seminorm | Experiment::Poincare | Experiment::LpEquiv => 1.0,
        Experiment::Logpot => f64::MIN_POSITIVE,
        _ => 2.0,
    };
    if exp != Experiment::Logpot {
        check_exponents(&mut c, s, p, p_min);
    }
    let kind = match exp {
        Experiment::Seminorm => {
            let u = function(&mut c, &grid, &cfg.u, "u");
            let d = domain(&mut c, &grid, &cfg.domain);
            u.zip(d).map(|(u, domain)| Kind::Seminorm { u, domain })
        }
        Experiment::Pairing => {
            let u = function(&mut c, &grid, &cfg.u, "u");
            let phi = function(&mut c, &grid, &cfg.phi, "phi");
            let d = domain(&mut c, &grid, &cfg.domain);
            match (u, phi, d) {
                (Some(u), Some(phi), Some(domain)) => Some(Kind::Pairing { u, phi, domain }),
                _ => None,
            }
        }
        Experiment::CommutatorSweep => {
            let cs = &cfg.commutator;
            c.require(!cs.eps_list.is_empty(), || {
                "[commutator] eps_list is empty".into()
            });
            c.require(cs.eps_list.windows(2).all(|w| w[0] < w[1]), || {
                "[commutator] eps_list must be strictly increasing".into()
            });
            for &eps in &cs.eps_list {
                let fp = FracParams { s, p, eps, t: cs.t };
                for v in fp.violations(grid.dim()) {
                    c.0.push(format!("eps = {eps}: {v}"));
                }
            }
            let u = function(&mut c, &grid, &cfg.u, "u");
            let phi = function(&mut c, &grid, &cfg.phi, "phi");
            let d = domain(&mut c, &grid, &cfg.domain);
            match (u, phi, d) {
                (Some(u), Some(phi), Some(domain)) => {
                    let mask = c.take(domain.mask(&grid)).unwrap_or_default();
                    let outside = phi
                        .values()
                        .iter()
                        .zip(&mask)
                        .position(|(v, &m)| !m && *v != 0.0);
                    c.require(outside.is_none(), || {
                        format!(
                            "[phi] is nonzero at node {} outside the pairing domain",
                            outside.unwrap()
                        )
                    });
                    let sweep = SweepConfig {
                        s,
                        p,
                        eps_list: cs.eps_list.clone(),
                        c_mode: cs.c_mode,
                        t: cs.t,
                    };
                    Some(Kind::Sweep {
                        u,
                        phi,
                        domain,
                        sweep,
                    })
                }
                _ => None,
            }
        }
        Experiment::Logpot => {
            let lp = cfg.logpot;
            let kernel = LogKernelParams {
                alpha: lp.alpha,
                beta: lp.beta,
                gamma: lp.gamma,
            };
            c.0.extend(kernel.violations(grid.dim()));
            c.require(grid.dim() == 1, || {
                "log-potential functional: dim must be 1".into()
            });
            c.require(grid.n_points() <= LOGPOT_MAX_POINTS, || {
                format!(
                    "log-potential functional: n = {} exceeds {LOGPOT_MAX_POINTS}",
                    grid.n_points()
                )
            });
            c.require(p > 1.0 && p.is_finite(), || {
                format!("integrability: p = {p} must lie in (1, inf)")
            });
            function(&mut c, &grid, &cfg.phi, "phi").map(|phi| Kind::Logpot { phi, kernel })
        }
        Experiment::LpEquiv => {
            c.require(p > 1.0, || format!("integrability: p = {p} must exceed 1"));
            function(&mut c, &grid, &cfg.u, "u").map(|u| Kind::LpEquiv { u })
        }
        Experiment::Solve => {
            check_solver(&mut c, &cfg);
            problem(&mut c, &cfg, &grid).map(|prob| Kind::Solve { prob })
        }
        Experiment::Probe => {
            check_solver(&mut c, &cfg);
            let pr = &cfg.probe;
            c.require(!pr.eps_list.is_empty(), || {
                "[probe] eps_list is empty".into()
            });
            for &eps in &pr.eps_list {
                c.require(eps > 0.0 && s + eps < 1.0, || {
                    format!("[probe] eps = {eps}: need eps > 0 and s + eps < 1")
                });
                c.require(s - eps * (p - 1.0) > 0.0, || {
                    format!("[probe] eps = {eps}: dual order s - eps (p - 1) must be > 0")
                });
            }
            let mut grids = vec![grid];
            if pr.refine {
                grids.extend(c.take(Grid::new(gs.dim, 2 * gs.n, gs.length)));
            }
            let mut levels = Vec::new();
            for g in &grids {
                let prob = problem(&mut c, &cfg, g);
                let inner = required_box(&mut c, g, &pr.inner_lo, &pr.inner_hi, "[probe] inner");
                if let (Some(prob), Some(inner)) = (prob, inner) {
                    let inside = prob
                        .domain
                        .boxes()
                        .iter()
                        .any(|o| inner.inside_with_margin(o, g.dim(), 1));
                    c.require(inside, || {
                        "[probe] inner box must lie strictly inside [domain]".into()
                    });
                    levels.push((prob, Domain::from_box(inner)));
                }
            }
            (levels.len() == grids.len()).then_some(Kind::Probe { levels })
        }
        Experiment::Poincare => {
            let pc = &cfg.poincare;
            c.require(pc.lambda >= 1.0, || {
                format!("[poincare] lambda = {} must be >= 1", pc.lambda)
            });
            c.require(pc.t > 0.0 && pc.t < 1.0, || {
                format!("[poincare] t = {} must lie in (0, 1)", pc.t)
            });
            let u = function(&mut c, &grid, &cfg.u, "u");
            let b = required_box(&mut c, &grid, &pc.box_lo, &pc.box_hi, "[poincare]");
            if let Some(b) = b {
                if pc.lambda >= 1.0 {
                    c.take(
                        b.scaled(&grid, pc.lambda)
                            .map_err(|e| format!("[poincare] dilate: {e}")),
                    );
                }
            }
            u.zip(b).map(|(u, b)| Kind::Poincare { u, b })
        }
        Experiment::Caccioppoli => {
            let cc = &cfg.caccioppoli;
            c.require(cc.delta > 0.0 && cc.delta.is_finite(), || {
                format!("[caccioppoli] delta = {} must be > 0", cc.delta)
            });
            c.require(cfg.dictionary.size > 0, || {
                "[dictionary] size must be > 0".into()
            });
            let u = function(&mut c, &grid, &cfg.u, "u");
            let b = required_box(&mut c, &grid, &cc.box_lo, &cc.box_hi, "[caccioppoli]");
            if let Some(b) = b {
                c.take(
                    b.scaled(&grid, 4.0)
                        .map_err(|e| format!("[caccioppoli] 4B: {e}")),
                );
            }
            u.zip(b).map(|(u, b)| Kind::Caccioppoli { u, b })
        }
    };
    match kind {
        Some(kind) if c.0.is_empty() => Ok(Job {
            exp,
            cfg,
            grid,
            kind,
        }),
        _ => Err(c.0),
    }
}

fn check_solver(c: &mut Checks, cfg: &Config) {
    let sv = cfg.solver;
    c.require(sv.tol > 0.0 && sv.tol.is_finite(), || {
        format!("[solver] tol = {} must be > 0", sv.tol)
    });
    c.require(cfg.dictionary.size > 0, || {
        "[dictionary] size must be > 0".into()
    });
}

fn dict_space(cfg: &Config) -> TestSpace {
    TestSpace {
        order: cfg.params.s,
        size: cfg.dictionary.size,
        seed: cfg.dictionary.seed.unwrap_or(cfg.seed),
    }
}

fn solver_options(cfg: &Config) -> SolverOptions {
    SolverOptions {
        tol: cfg.solver.tol,
        max_iter: cfg.solver.max_iter,
        residual_space: dict_space(cfg),
    }
}

/// The resolved configuration: the sections this experiment reads, with defaults filled in.
fn echo(job: &Job) -> serde_json::Value {
    let cfg = &job.cfg;
    let mut v = json!({
        "command": job.exp.name(),
        "seed": cfg.seed,
        "grid": cfg.grid,
        "params": cfg.params,
    });
    let obj = v.as_object_mut().unwrap();
    let mut put = |k: &str, x: serde_json::Value| {
        obj.insert(k.to_string(), x);
    };
    let domain = json!({ "lo": cfg.domain.lo, "hi": cfg.domain.hi });
    match job.exp {
        Experiment::Seminorm => {
            put("u", json!(cfg.u));
            put("domain", domain);
        }
        Experiment::Pairing => {
            put("u", json!(cfg.u));
            put("phi", json!(cfg.phi));
            put("domain", domain);
        }
        Experiment::CommutatorSweep => {
            put("u", json!(cfg.u));
            put("phi", json!(cfg.phi));
            put("domain", domain);
            let dim = job.grid.dim();
            let ts: Vec<f64> = cfg
                .commutator
                .eps_list
                .iter()
                .map(|&eps| {
                    FracParams {
                        s: cfg.params.s,
                        p: cfg.params.p,
                        eps,
                        t: cfg.commutator.t,
                    }
                    .resolved_t(dim)
                })
                .collect();
            put(
                "commutator",
                json!({
                    "eps_list": cfg.commutator.eps_list,
                    "c_mode": cfg.commutator.c_mode,
                    "t": cfg.commutator.t,
                    "t_resolved": ts,
                }),
            );
        }
        Experiment::Logpot => {
            put("phi", json!(cfg.phi));
            put("logpot", json!(cfg.logpot));
        }
        Experiment::LpEquiv => put("u", json!(cfg.u)),
        Experiment::Solve | Experiment::Probe => {
            put("forcing", json!(cfg.forcing));
            put(
                "exterior",
                json!(cfg.exterior.clone().unwrap_or(FunctionSection {
                    preset: "constant".into(),
                    params: [("value".to_string(), 0.0)].into(),
                })),
            );
            put("domain", domain);
            put("solver", json!(cfg.solver));
            put("dictionary", json!(cfg.dictionary));
            if job.exp == Experiment::Probe {
                put("probe", json!(cfg.probe));
            }
        }
        Experiment::Poincare => {
            put("u", json!(cfg.u));
            put("poincare", json!(cfg.poincare));
        }
        Experiment::Caccioppoli => {
            put("u", json!(cfg.u));
            put("caccioppoli", json!(cfg.caccioppoli));
            put("dictionary", json!(cfg.dictionary));
        }
    }
    v
}

fn single(name: &str, cols: &[(&str, &str)], row: Vec<Option<f64>>) -> Table {
    let mut t = Table::new(name, cols);
    t.push(row);
    t
}

fn solution_table(u: &SampledFunction) -> Table {
    let g = u.grid();
    let mut t = if g.dim() == 1 {
        Table::new("solution", &[("index", "1"), ("x", "length"), ("u", "1")])
    } else {
        Table::new(
            "solution",
            &[("index", "1"), ("x", "length"), ("y", "length"), ("u", "1")],
        )
    };
    for (i, &v) in u.values().iter().enumerate() {
        let pt = g.point(i);
        let mut row = vec![Some(i as f64), Some(pt[0])];
        if g.dim() == 2 {
            row.push(Some(pt[1]));
        }
        row.push(Some(v));
        t.push(row);
    }
    t
}

fn flag(b: bool) -> Fitted {
    Fitted::exact(if b { 1.0 } else { 0.0 })
}

pub fn execute(job: &Job) -> Result<ExperimentReport, Failure> {
    let cfg = &job.cfg;
    let grid = job.grid;
    let (s, p) = (cfg.params.s, cfg.params.p);
    let mut rep = match &job.kind {
        Kind::Seminorm { u, domain } => {
            let r = gagliardo_seminorm(u, domain, s, p)?;
            let mut rep = ExperimentReport::new("seminorm", &grid);
            rep.measurements.push(single(
                "seminorm",
                &[
                    ("s", "1"),
                    ("p", "1"),
                    ("value", "seminorm"),
                    ("pow_p", "seminorm^p"),
                ],
                vec![Some(s), Some(p), Some(r.value), Some(r.pow_p)],
            ));
            rep.fitted.insert("value".into(), Fitted::exact(r.value));
            rep
        }
        Kind::Pairing { u, phi, domain } => {
            let v = plap_pairing(u, phi, domain, s, p)?.value;
            let mut rep = ExperimentReport::new("pairing", &grid);
            rep.measurements.push(single(
                "pairing",
                &[("s", "1"), ("p", "1"), ("value", "pairing")],
                vec![Some(s), Some(p), Some(v)],
            ));
            rep.fitted.insert("value".into(), Fitted::exact(v));
            rep
        }
        Kind::Sweep {
            u,
            phi,
            domain,
            sweep,
        } => eps_sweep_experiment(u, phi, domain, sweep)?,
        Kind::Logpot { phi, kernel } => {
            let a = log_potential_a(phi, kernel, p)?;
            let sem = gagliardo_seminorm(phi, &Domain::full(&grid), kernel.s(), p)?.value;
            let ratio = (sem > 0.0).then(|| a / sem);
            let mut rep = ExperimentReport::new("logpot", &grid);
            rep.measurements.push(single(
                "logpot",
                &[
                    ("A", "seminorm"),
                    ("seminorm", "seminorm"),
                    ("ratio", "1"),
                    ("s", "1"),
                ],
                vec![Some(a), Some(sem), ratio, Some(kernel.s())],
            ));
            rep.fitted.insert("A".into(), Fitted::exact(a));
            rep.fitted.insert(
                "ratio".into(),
                ratio.map_or(Fitted::undefined(), Fitted::exact),
            );
            rep
        }
        Kind::LpEquiv { u } => {
            let bank = FilterBank::for_grid(&grid);
            let lp = lp_project(u, &bank);
            let mut levels = Table::new(
                "levels",
                &[("level", "1"), ("piece_norm", "Lp"), ("weighted", "Lp")],
            );
            for (&j, fj) in &lp.pieces {
                let nrm = fj.lp_norm(p);
                levels.push(vec![
                    Some(j as f64),
                    Some(nrm),
                    Some(2f64.powf(j as f64 * s) * nrm),
                ]);
            }
            let scale = u.l2_norm();
            let rec = lp.reconstruct().sub(u)?.l2_norm();
            let rec_rel = if scale > 0.0 { rec / scale } else { rec };
            let tri = triebel_norm(u, s, p, &bank)?;
            let gag = gagliardo_seminorm(u, &Domain::full(&grid), s, p)?.value;
            let ratio = (gag > 0.0).then(|| tri / gag);
            let mut rep = ExperimentReport::new("lp-equiv", &grid);
            rep.measurements.push(levels);
            rep.measurements.push(single(
                "equivalence",
                &[
                    ("triebel", "seminorm"),
                    ("gagliardo", "seminorm"),
                    ("ratio", "1"),
                    ("reconstruction_error", "1"),
                ],
                vec![Some(tri), Some(gag), ratio, Some(rec_rel)],
            ));
            rep.fitted.insert(
                "ratio".into(),
                ratio.map_or(Fitted::undefined(), Fitted::exact),
            );
            rep.fitted
                .insert("reconstruction_error".into(), Fitted::exact(rec_rel));
            rep
        }
        Kind::Solve { prob } => {
            let st = solve_with(prob, &solver_options(cfg))?;
            let mut rep = ExperimentReport::new("solve", &grid);
            rep.measurements.push(solution_table(&st.u));
            let mut hist = Table::new("energy", &[("step", "1"), ("energy", "energy")]);
            for (k, e) in st.energy_history.iter().enumerate() {
                hist.push(vec![Some(k as f64), Some(*e)]);
            }
            rep.measurements.push(hist);
            rep.fitted.insert("energy".into(), Fitted::exact(st.energy));
            rep.fitted
                .insert("dual_residual".into(), Fitted::exact(st.dual_residual));
            rep.fitted
                .insert("iterations".into(), Fitted::exact(st.iteration as f64));
            rep.fitted
                .insert("grad_norm".into(), Fitted::exact(st.grad_norm));
            rep.fitted.insert("converged".into(), flag(st.converged));
            rep
        }
        Kind::Probe { levels } => {
            let pr = &cfg.probe;
            let opts = solver_options(cfg);
            let mut reports = Vec::new();
            for (prob, inner) in levels {
                let st = solve_with(prob, &opts)?;
                let mut r =
                    differentiability_probe(prob, &st.u, inner, &pr.eps_list, &dict_space(cfg))?;
                r.fitted.insert("converged".into(), flag(st.converged));
                r.fitted
                    .insert("dual_residual".into(), Fitted::exact(st.dual_residual));
                reports.push(r);
            }
            let mut rep = reports[0].clone();
            if let Some(fine) = reports.get(1) {
                let t = compare_resolutions(&reports[0], fine, pr.threshold)?;
                rep.fitted
                    .insert("largest_stable_eps".into(), largest_stable_eps(&t));
                let mut ft = fine.table("probe").cloned().expect("probe table");
                ft.name = "probe_fine".into();
                rep.measurements.push(ft);
                rep.measurements.push(t);
                rep.fitted
                    .insert("converged_fine".into(), fine.fitted["converged"]);
            }
            rep
        }
        Kind::Poincare { u, b } => {
            let pc = &cfg.poincare;
            let r = poincare_check(u, b, pc.lambda, pc.t, p)?;
            let mut rep = ExperimentReport::new("poincare", &grid);
            rep.measurements.push(single(
                "poincare",
                &[
                    ("lambda", "1"),
                    ("t", "1"),
                    ("lhs", "Lp^p"),
                    ("rhs", "Lp^p"),
                    ("ratio", "1"),
                ],
                vec![
                    Some(pc.lambda),
                    Some(pc.t),
                    Some(r.lhs),
                    Some(r.rhs),
                    r.ratio,
                ],
            ));
            rep.fitted.insert(
                "ratio".into(),
                r.ratio.map_or(Fitted::undefined(), Fitted::exact),
            );
            rep
        }
        Kind::Caccioppoli { u, b } => {
            let delta = cfg.caccioppoli.delta;
            let r = caccioppoli_check(u, b, s, p, delta, &dict_space(cfg))?;
            let mut rep = ExperimentReport::new("caccioppoli", &grid);
            let [a, bb, cc] = r.rhs_parts;
            rep.measurements.push(single(
                "caccioppoli",
                &[
                    ("delta", "1"),
                    ("lhs", "seminorm^p"),
                    ("outer_term", "seminorm^p"),
                    ("pairing_term", "seminorm^p"),
                    ("oscillation_term", "seminorm^p"),
                    ("pairing_sup", "pairing"),
                    ("constant", "1"),
                ],
                vec![
                    Some(delta),
                    Some(r.lhs),
                    Some(a),
                    Some(bb),
                    Some(cc),
                    Some(r.pairing_sup),
                    r.satisfied_constant,
                ],
            ));
            rep.fitted.insert(
                "constant".into(),
                r.satisfied_constant
                    .map_or(Fitted::undefined(), Fitted::exact),
            );
            rep
        }
    };
    rep.command = job.exp.name().to_string();
    rep.config_echo = echo(job);
    rep.provenance.seed = Some(cfg.seed);
    if let Some(at) = rep.first_non_finite() {
        return Err(Failure::Numerical(at));
    }
    Ok(rep)
}
