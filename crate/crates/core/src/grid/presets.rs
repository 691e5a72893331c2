use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Grid, Point, SampledFunction};
use crate::error::{invalid, Error, Result};

/// Named numeric parameters of a preset (`k`, `seed`, `box_lo`, ...).
pub type PresetParams = BTreeMap<String, f64>;

/// Support box of a compactly supported preset, in real coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl SupportBox {
    fn mid(&self, k: usize) -> f64 {
        0.5 * (self.lo[k] + self.hi[k])
    }

    fn half(&self, k: usize) -> f64 {
        0.5 * (self.hi[k] - self.lo[k])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Preset {
    Constant {
        value: f64,
    },
    Sine {
        k: [f64; 2],
        amplitude: f64,
        phase: f64,
    },
    GaussianBump {
        support: SupportBox,
        center: [f64; 2],
        width: f64,
        amplitude: f64,
    },
    Hat {
        support: SupportBox,
        amplitude: f64,
    },
    RandomTrig {
        seed: u64,
        modes: usize,
        decay: f64,
        amplitude: f64,
    },
}

pub const PRESET_NAMES: [&str; 5] = ["constant", "sine", "gaussian_bump", "hat", "random_trig"];

/// Builds a [`PresetParams`] map from string literals.
pub fn preset_params(kv: &[(&str, f64)]) -> PresetParams {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn get(params: &PresetParams, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn support_box(grid: &Grid, params: &PresetParams) -> Result<SupportBox> {
    let l = grid.length();
    let mut b = SupportBox {
        lo: [0.25 * l, 0.25 * l],
        hi: [0.75 * l, 0.75 * l],
    };
    b.lo[0] = get(params, "box_lo", b.lo[0]);
    b.hi[0] = get(params, "box_hi", b.hi[0]);
    b.lo[1] = get(params, "box_lo_y", b.lo[1]);
    b.hi[1] = get(params, "box_hi_y", b.hi[1]);
    for k in 0..grid.dim() {
        if !(b.lo[k] >= 0.0 && b.hi[k] <= l && b.lo[k] < b.hi[k]) {
            return Err(Error::Geometry(format!(
                "support box [{}, {}) on axis {k} is not inside [0, {l})",
                b.lo[k], b.hi[k]
            )));
        }
    }
    Ok(b)
}

impl Preset {
    /// Resolves a preset id and its parameters against a grid.
    pub fn from_name(name: &str, grid: &Grid, params: &PresetParams) -> Result<Self> {
        let preset = match name {
            "constant" => Preset::Constant {
                value: get(params, "value", 0.0),
            },
            "sine" => Preset::Sine {
                k: [get(params, "k", 1.0), get(params, "ky", 0.0)],
                amplitude: get(params, "amplitude", 1.0),
                phase: get(params, "phase", 0.0),
            },
            "gaussian_bump" => {
                let support = support_box(grid, params)?;
                let center = [
                    get(params, "center", support.mid(0)),
                    get(params, "center_y", support.mid(1)),
                ];
                for k in 0..grid.dim() {
                    if !(center[k] > support.lo[k] && center[k] < support.hi[k]) {
                        return Err(Error::Geometry(format!(
                            "bump center {} outside its support box on axis {k}",
                            center[k]
                        )));
                    }
                }
                let width = get(params, "width", support.half(0) / 3.0);
                if !(width > 0.0) {
                    return Err(invalid("width", width, "must be > 0"));
                }
                Preset::GaussianBump {
                    support,
                    center,
                    width,
                    amplitude: get(params, "amplitude", 1.0),
                }
            }
            "hat" => Preset::Hat {
                support: support_box(grid, params)?,
                amplitude: get(params, "amplitude", 1.0),
            },
            "random_trig" => {
                let seed = params.get("seed").copied().ok_or_else(|| {
                    invalid("seed", f64::NAN, "random_trig needs an explicit seed")
                })?;
                if !(seed >= 0.0 && seed.fract() == 0.0) {
                    return Err(invalid("seed", seed, "must be a non-negative integer"));
                }
                let modes = get(params, "modes", 6.0);
                if !(modes >= 1.0 && modes.fract() == 0.0) {
                    return Err(invalid("modes", modes, "must be a positive integer"));
                }
                Preset::RandomTrig {
                    seed: seed as u64,
                    modes: modes as usize,
                    decay: get(params, "decay", 1.0),
                    amplitude: get(params, "amplitude", 1.0),
                }
            }
            other => return Err(Error::UnknownPreset(other.to_string())),
        };
        Ok(preset)
    }

    pub fn sample(&self, grid: &Grid) -> Result<SampledFunction> {
        let dim = grid.dim();
        let l = grid.length();
        match self {
            Preset::Constant { value } => Ok(SampledFunction::constant(*grid, *value)),
            Preset::Sine {
                k,
                amplitude,
                phase,
            } => SampledFunction::from_fn(*grid, |x| {
                let arg: f64 = (0..dim).map(|a| k[a] * x[a]).sum::<f64>() * 2.0 * PI / l;
                amplitude * (arg + phase).sin()
            }),
            Preset::GaussianBump {
                support,
                center,
                width,
                amplitude,
            } => SampledFunction::from_fn(*grid, |x| {
                let mut r2 = 0.0;
                let mut cut = 1.0;
                for a in 0..dim {
                    r2 += (x[a] - center[a]).powi(2);
                    cut *= smooth_cutoff((x[a] - support.mid(a)) / support.half(a));
                }
                amplitude * cut * (-r2 / (2.0 * width * width)).exp()
            }),
            Preset::Hat { support, amplitude } => SampledFunction::from_fn(*grid, |x| {
                let mut v = *amplitude;
                for a in 0..dim {
                    let r = (x[a] - support.mid(a)) / support.half(a);
                    v *= (1.0 - r.abs()).max(0.0);
                }
                v
            }),
            Preset::RandomTrig {
                seed,
                modes,
                decay,
                amplitude,
            } => {
                let terms = random_trig_terms(dim, *seed, *modes, *decay);
                SampledFunction::from_fn(*grid, |x: &Point| {
                    let mut acc = 0.0;
                    for t in &terms {
                        let arg = 2.0 * PI * (t.k[0] * x[0] + t.k[1] * x[1]) / l;
                        acc += t.a * arg.cos() + t.b * arg.sin();
                    }
                    amplitude * acc
                })
            }
        }
    }
}

/// `exp(1 - 1/(1 - r^2))` on `|r| < 1`, zero outside. Equals 1 at `r = 0`.
pub(crate) fn smooth_cutoff(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

struct TrigTerm {
    k: [f64; 2],
    a: f64,
    b: f64,
}

fn random_trig_terms(dim: usize, seed: u64, modes: usize, decay: f64) -> Vec<TrigTerm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    let m = modes as i64;
    if dim == 1 {
        for k in 1..=m {
            let w = (k as f64).powf(-decay);
            terms.push(TrigTerm {
                k: [k as f64, 0.0],
                a: w * rng.random_range(-1.0..1.0),
                b: w * rng.random_range(-1.0..1.0),
            });
        }
    } else {
        for kx in 0..=m {
            for ky in -m..=m {
                if kx == 0 && ky <= 0 {
                    continue;
                }
                let w = ((kx * kx + ky * ky) as f64).sqrt().powf(-decay);
                terms.push(TrigTerm {
                    k: [kx as f64, ky as f64],
                    a: w * rng.random_range(-1.0..1.0),
                    b: w * rng.random_range(-1.0..1.0),
                });
            }
        }
    }
    terms
}

/// Samples the preset `name` on `grid`.
pub fn make_preset(name: &str, grid: &Grid, params: &PresetParams) -> Result<SampledFunction> {
    Preset::from_name(name, grid, params)?.sample(grid)
}
