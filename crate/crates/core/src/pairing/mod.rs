//! The fractional p-Laplacian as a distribution, and its generalization
//! with a pluggable nonlinearity and kernel.

mod dictionary;

pub use dictionary::{dictionary, dual_norm_estimate, dual_norm_of, TestSpace};

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, Point, SampledFunction};
use crate::kernel::{phi_p, weighted_pair_sum, PairKernel};
use crate::params::{check_p, check_s};

#[derive(Debug, Clone, Serialize)]
pub struct PairingValue {
    pub value: f64,
    pub u_id: Option<String>,
    pub phi_id: Option<String>,
    pub s: f64,
    pub p: f64,
    pub domain: Domain,
}

impl PairingValue {
    pub fn with_ids(mut self, u: impl Into<String>, phi: impl Into<String>) -> Self {
        self.u_id = Some(u.into());
        self.phi_id = Some(phi.into());
        self
    }
}

/// `Σ_{i ∈ rows, j ∈ cols, i ≠ j} φ_p(u_i - u_j) (φ_i - φ_j) K_ij h^{2 dim}`.
pub(crate) fn plap_sum(
    kernel: &PairKernel,
    u: &SampledFunction,
    phi: &SampledFunction,
    rows: &[usize],
    cols: &[usize],
    p: f64,
) -> f64 {
    let (v, w) = (u.values(), phi.values());
    kernel.pair_sum(rows, cols, |i, j| phi_p(v[i] - v[j], p) * (w[i] - w[j]))
}

/// `(-Δ_p)^s_D u[φ]`, the double sum over ordered pairs in `D` without the diagonal.
pub fn plap_pairing(
    u: &SampledFunction,
    phi: &SampledFunction,
    d: &Domain,
    s: f64,
    p: f64,
) -> Result<PairingValue> {
    check_s(s)?;
    check_p(p, 2.0)?;
    let kernel = PairKernel::gagliardo(u.grid(), s, p)?;
    plap_pairing_with(&kernel, u, phi, d, s, p)
}

/// [`plap_pairing`] with a prebuilt kernel of exponent `dim + s p`.
pub fn plap_pairing_with(
    kernel: &PairKernel,
    u: &SampledFunction,
    phi: &SampledFunction,
    d: &Domain,
    s: f64,
    p: f64,
) -> Result<PairingValue> {
    u.grid().ensure_same(phi.grid())?;
    u.grid().ensure_same(kernel.grid())?;
    let nodes = d.nodes(u.grid())?;
    if nodes.is_empty() {
        return Err(Error::EmptyDomain);
    }
    Ok(PairingValue {
        value: plap_sum(kernel, u, phi, &nodes, &nodes, p),
        u_id: None,
        phi_id: None,
        s,
        p,
        domain: d.clone(),
    })
}

pub type Nonlinearity = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type KernelFn = Arc<dyn Fn(&Point, &Point) -> f64 + Send + Sync>;

#[derive(Clone)]
enum SpecKernel {
    Table(PairKernel),
    /// Evaluated as `(K(x, y) + K(y, x)) / 2`.
    Pointwise(KernelFn),
}

/// Nonlinearity `Φ` and kernel `K` with comparability constant `c_op`:
/// `|Φ(t)| ≤ c_op |t|^{p-1}`, `Φ(t) t ≥ |t|^p` and
/// `c_op^{-1} d^{-n-sp} ≤ K ≤ c_op d^{-n-sp}`.
#[derive(Clone)]
pub struct OperatorSpec {
    grid: Grid,
    nonlinearity: Nonlinearity,
    kernel: SpecKernel,
    pub c_op: f64,
    pub s: f64,
    pub p: f64,
}

impl fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorSpec")
            .field("c_op", &self.c_op)
            .field("s", &self.s)
            .field("p", &self.p)
            .field(
                "kernel",
                &match self.kernel {
                    SpecKernel::Table(_) => "table",
                    SpecKernel::Pointwise(_) => "pointwise",
                },
            )
            .finish()
    }
}

const PROBE_T: [f64; 9] = [1e-3, 0.01, 0.1, 0.5, 1.0, 1.7, 3.0, 10.0, 100.0];
const PROBE_TOL: f64 = 1e-12;

impl OperatorSpec {
    pub fn new(
        grid: &Grid,
        s: f64,
        p: f64,
        c_op: f64,
        nonlinearity: impl Fn(f64) -> f64 + Send + Sync + 'static,
        kernel: impl Fn(&Point, &Point) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        check_s(s)?;
        check_p(p, 2.0)?;
        if !(c_op >= 1.0 && c_op.is_finite()) {
            return Err(crate::error::invalid(
                "c_op",
                c_op,
                "must be finite and >= 1",
            ));
        }
        Ok(Self {
            grid: *grid,
            nonlinearity: Arc::new(nonlinearity),
            kernel: SpecKernel::Pointwise(Arc::new(kernel)),
            c_op,
            s,
            p,
        })
    }

    /// `Φ(t) = |t|^{p-2} t` with the pair kernel of [`plap_pairing`];
    /// `c_op` is the largest ratio of that kernel to `d^{-n-sp}`.
    pub fn fractional_p_laplacian(grid: &Grid, s: f64, p: f64) -> Result<Self> {
        check_s(s)?;
        check_p(p, 2.0)?;
        let table = PairKernel::gagliardo(grid, s, p)?;
        let a = table.exponent();
        let c_op = (1..grid.len())
            .map(|d| table.table()[d] * grid.displacement_norm(d).powf(a))
            .fold(1.0, f64::max);
        Ok(Self {
            grid: *grid,
            nonlinearity: Arc::new(move |t| phi_p(t, p)),
            kernel: SpecKernel::Table(table),
            c_op,
            s,
            p,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn nonlinearity(&self, t: f64) -> f64 {
        (self.nonlinearity)(t)
    }

    /// Symmetrized kernel between nodes `i` and `j`.
    pub fn kernel(&self, i: usize, j: usize) -> f64 {
        match &self.kernel {
            SpecKernel::Table(k) => k.weight(i, j),
            SpecKernel::Pointwise(k) => {
                let (x, y) = (self.grid.point(i), self.grid.point(j));
                0.5 * (k(&x, &y) + k(&y, &x))
            }
        }
    }

    /// Checks the comparability bounds on a fixed probe set and reports the
    /// first violation with its sample.
    pub fn verify(&self) -> Result<()> {
        let (p, c) = (self.p, self.c_op);
        for &t0 in &PROBE_T {
            for t in [t0, -t0] {
                let v = self.nonlinearity(t);
                let bound = c * t.abs().powf(p - 1.0);
                if !v.is_finite() || v.abs() > bound * (1.0 + PROBE_TOL) {
                    return Err(Error::SpecProbe {
                        what: "growth |Φ(t)| ≤ C|t|^(p-1)".into(),
                        sample: format!("t = {t}, Φ(t) = {v}, bound = {bound}"),
                    });
                }
                let coercive = t.abs().powf(p);
                if v * t < coercive * (1.0 - PROBE_TOL) {
                    return Err(Error::SpecProbe {
                        what: "coercivity Φ(t) t ≥ |t|^p".into(),
                        sample: format!("t = {t}, Φ(t) t = {}, |t|^p = {coercive}", v * t),
                    });
                }
            }
        }
        if self.nonlinearity(0.0) != 0.0 {
            return Err(Error::SpecProbe {
                what: "Φ(0) = 0".into(),
                sample: format!("Φ(0) = {}", self.nonlinearity(0.0)),
            });
        }
        let g = &self.grid;
        let a = g.dim() as f64 + self.s * p;
        let bases = [0, g.len() / 2 + g.n_points() / 3];
        for &i in &bases {
            for j in 0..g.len() {
                if i == j {
                    continue;
                }
                let k = self.kernel(i, j);
                let d = g.displacement_norm(g.displacement(i, j));
                let reference = d.powf(-a);
                let ok = k.is_finite()
                    && k >= reference / c * (1.0 - PROBE_TOL)
                    && k <= reference * c * (1.0 + PROBE_TOL);
                if !ok {
                    return Err(Error::SpecProbe {
                        what: "kernel comparability C⁻¹ d^(-n-sp) ≤ K ≤ C d^(-n-sp)".into(),
                        sample: format!(
                            "x = {:?}, y = {:?}, K = {k}, d^(-n-sp) = {reference}",
                            g.point(i),
                            g.point(j)
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// `Σ_{i ≠ j ∈ D} K(x_i, x_j) Φ(u_i - u_j) (φ_i - φ_j) h^{2 dim}`.
pub fn general_pairing(
    u: &SampledFunction,
    phi: &SampledFunction,
    d: &Domain,
    spec: &OperatorSpec,
) -> Result<PairingValue> {
    u.grid().ensure_same(phi.grid())?;
    u.grid().ensure_same(&spec.grid)?;
    spec.verify()?;
    let nodes = d.nodes(u.grid())?;
    if nodes.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let (v, w) = (u.values(), phi.values());
    let value = match &spec.kernel {
        SpecKernel::Table(k) => k.pair_sum(&nodes, &nodes, |i, j| {
            (spec.nonlinearity)(v[i] - v[j]) * (w[i] - w[j])
        }),
        SpecKernel::Pointwise(_) => weighted_pair_sum(
            u.grid(),
            &nodes,
            &nodes,
            |i, j| spec.kernel(i, j),
            |i, j| (spec.nonlinearity)(v[i] - v[j]) * (w[i] - w[j]),
        ),
    };
    Ok(PairingValue {
        value,
        u_id: None,
        phi_id: None,
        s: spec.s,
        p: spec.p,
        domain: d.clone(),
    })
}
