use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub(crate) fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid("s", s, "must lie in (0, 1)"));
    }
    Ok(())
}

/// Seminorms accept `p >= 1`; pairings need `p >= 2`.
pub(crate) fn check_p(p: f64, min: f64) -> Result<()> {
    if !(p.is_finite() && p >= min) {
        return Err(invalid("p", p, format!("must be finite and >= {min}")));
    }
    Ok(())
}

/// Exponent bundle `(s, p, eps, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracParams {
    pub s: f64,
    pub p: f64,
    #[serde(default)]
    pub eps: f64,
    /// Internal Riesz exponent; `None` means the default `(dim - eps p) / 2`.
    #[serde(default)]
    pub t: Option<f64>,
}

impl FracParams {
    pub fn new(s: f64, p: f64) -> Self {
        Self {
            s,
            p,
            eps: 0.0,
            t: None,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn resolved_t(&self, dim: usize) -> f64 {
        self.t
            .unwrap_or_else(|| 0.5 * (dim as f64 - self.eps * self.p))
    }

    /// Every violated hypothesis, as human-readable lines. Empty when valid.
    pub fn violations(&self, dim: usize) -> Vec<String> {
        let mut out = Vec::new();
        let (s, p, eps) = (self.s, self.p, self.eps);
        if !(s > 0.0 && s < 1.0) {
            out.push(format!(
                "differentiability order: s = {s} must lie in (0, 1)"
            ));
        }
        if !(p.is_finite() && p >= 2.0) {
            out.push(format!("integrability: p = {p} must be finite and >= 2"));
        }
        if !(eps.is_finite() && eps >= 0.0) {
            out.push(format!("shift: eps = {eps} must be >= 0"));
        } else if eps > 0.0 && s + eps >= 1.0 {
            out.push(format!(
                "shifted order: s + eps = {} must stay below 1",
                s + eps
            ));
        }
        let n = dim as f64;
        let t = self.resolved_t(dim);
        if !(t > 0.0 && t < n) {
            out.push(format!(
                "commutator kernel admissibility: t = {t} must lie in (0, {n})"
            ));
        } else if t + eps * p >= n {
            out.push(format!(
                "commutator kernel admissibility: t + eps p = {} must stay below dim = {n}",
                t + eps * p
            ));
        }
        out
    }
}
