//! Experiment configuration: a TOML file with one level of sections.
//!
//! ```toml
//! seed = 7
//!
//! [grid]
//! dim = 1
//! n = 512
//!
//! [params]
//! s = 0.4
//! p = 3.0
//!
//! [u]
//! preset = "random_trig"
//! modes = 6
//! ```
//!
//! Random presets without their own `seed` take the global one, as do
//! dictionaries without a `seed`.

use std::collections::BTreeMap;

use fracp_core::commutator::CMode;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub domain: BoxSection,
    pub u: Option<FunctionSection>,
    pub phi: Option<FunctionSection>,
    pub forcing: Option<FunctionSection>,
    pub exterior: Option<FunctionSection>,
    #[serde(default)]
    pub commutator: CommutatorSection,
    #[serde(default)]
    pub logpot: LogpotSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub probe: ProbeSection,
    #[serde(default)]
    pub poincare: PoincareSection,
    #[serde(default)]
    pub caccioppoli: CaccioppoliSection,
    #[serde(default)]
    pub dictionary: DictionarySection,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "one")]
    pub dim: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "unit")]
    pub length: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            dim: 1,
            n: default_n(),
            length: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default = "half")]
    pub s: f64,
    #[serde(default = "two")]
    pub p: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self { s: 0.5, p: 2.0 }
    }
}

/// A box given by per-axis `lo` and `hi` coordinates; absent means the whole torus.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSection {
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
}

/// A preset id plus its numeric parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionSection {
    pub preset: String,
    #[serde(flatten)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutatorSection {
    #[serde(default = "default_sweep")]
    pub eps_list: Vec<f64>,
    #[serde(default = "calibrated")]
    pub c_mode: CMode,
    pub t: Option<f64>,
}

impl Default for CommutatorSection {
    fn default() -> Self {
        Self {
            eps_list: default_sweep(),
            c_mode: CMode::Calibrated,
            t: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogpotSection {
    #[serde(default = "alpha")]
    pub alpha: f64,
    #[serde(default = "beta")]
    pub beta: f64,
    #[serde(default = "gamma")]
    pub gamma: f64,
}

impl Default for LogpotSection {
    fn default() -> Self {
        Self {
            alpha: alpha(),
            beta: beta(),
            gamma: gamma(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "tol")]
    pub tol: f64,
    #[serde(default = "max_iter")]
    pub max_iter: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            tol: tol(),
            max_iter: max_iter(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    #[serde(default = "probe_eps")]
    pub eps_list: Vec<f64>,
    pub inner_lo: Option<Vec<f64>>,
    pub inner_hi: Option<Vec<f64>>,
    /// Also solve at twice the resolution and compare.
    #[serde(default)]
    pub refine: bool,
    #[serde(default = "threshold")]
    pub threshold: f64,
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self {
            eps_list: probe_eps(),
            inner_lo: None,
            inner_hi: None,
            refine: false,
            threshold: threshold(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoincareSection {
    pub box_lo: Option<Vec<f64>>,
    pub box_hi: Option<Vec<f64>>,
    #[serde(default = "two")]
    pub lambda: f64,
    #[serde(default = "half")]
    pub t: f64,
}

impl Default for PoincareSection {
    fn default() -> Self {
        Self {
            box_lo: None,
            box_hi: None,
            lambda: 2.0,
            t: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaccioppoliSection {
    pub box_lo: Option<Vec<f64>>,
    pub box_hi: Option<Vec<f64>>,
    #[serde(default = "half")]
    pub delta: f64,
}

impl Default for CaccioppoliSection {
    fn default() -> Self {
        Self {
            box_lo: None,
            box_hi: None,
            delta: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionarySection {
    #[serde(default = "dict_size")]
    pub size: usize,
    pub seed: Option<u64>,
}

impl Default for DictionarySection {
    fn default() -> Self {
        Self {
            size: dict_size(),
            seed: None,
        }
    }
}

fn one() -> usize {
    1
}
fn default_n() -> usize {
    256
}
fn unit() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn two() -> f64 {
    2.0
}
fn default_sweep() -> Vec<f64> {
    vec![0.01, 0.02, 0.04, 0.08]
}
fn calibrated() -> CMode {
    CMode::Calibrated
}
fn alpha() -> f64 {
    0.5
}
fn beta() -> f64 {
    0.6
}
fn gamma() -> f64 {
    0.4
}
fn tol() -> f64 {
    1e-8
}
fn max_iter() -> usize {
    20000
}
fn probe_eps() -> Vec<f64> {
    vec![0.02, 0.05]
}
fn threshold() -> f64 {
    0.1
}
fn dict_size() -> usize {
    32
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("config: {e}"))
    }

    /// Applies command-line overrides and fills seeds left to the global one.
    pub fn resolve(mut self, seed: Option<u64>, resolution: Option<usize>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(n) = resolution {
            self.grid.n = n;
        }
        let global = self.seed;
        for f in [
            &mut self.u,
            &mut self.phi,
            &mut self.forcing,
            &mut self.exterior,
        ]
        .into_iter()
        .flatten()
        {
            if f.preset == "random_trig" {
                f.params.entry("seed".into()).or_insert(global as f64);
            }
        }
        self.dictionary.seed.get_or_insert(global);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = Config::parse(
            r#"
            seed = 3
            [params]
            s = 0.3
            [u]
            preset = "random_trig"
            modes = 4
            [phi]
            preset = "random_trig"
            seed = 11
            "#,
        )
        .unwrap()
        .resolve(Some(9), Some(128));
        assert_eq!(cfg.grid.n, 128);
        assert_eq!(cfg.params.p, 2.0);
        assert_eq!(cfg.u.as_ref().unwrap().params["seed"], 9.0);
        assert_eq!(cfg.u.as_ref().unwrap().params["modes"], 4.0);
        assert_eq!(cfg.phi.as_ref().unwrap().params["seed"], 11.0);
        assert_eq!(cfg.dictionary.seed, Some(9));
        assert_eq!(cfg.commutator.c_mode, CMode::Calibrated);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Config::parse("[params]\nq = 1.0").is_err());
        assert!(Config::parse("bogus = 1").is_err());
    }
}
