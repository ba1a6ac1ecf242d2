//! Generation configurations and the named dataset profiles.

use std::fmt;
use std::str::FromStr;

use lyapforge_core::backward::{BackwardConfig, GenMode};
use lyapforge_core::forward::{ForwardConfig, DEFAULT_EPS};
use lyapforge_core::sample::SampleConfig;
use lyapforge_core::tokenizer::MAX_VARS;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{PipelineError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForwardSpec {
    pub system: ForwardConfig,
    pub barrier: bool,
    /// Tried in order until one succeeds.
    pub degrees: Vec<u32>,
    pub eps: f64,
    /// Wall-clock budget per system, over all degrees.
    pub timeout_s: f64,
}

impl Default for ForwardSpec {
    fn default() -> Self {
        ForwardSpec {
            system: ForwardConfig::default(),
            barrier: false,
            degrees: vec![2, 4],
            eps: DEFAULT_EPS,
            timeout_s: 60.0,
        }
    }
}

/// Random systems with no known Lyapunov function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WildSpec {
    pub polynomial: bool,
    /// Used when `polynomial`.
    pub poly: ForwardConfig,
    /// Used otherwise; each equation is a random tree shifted to vanish at 0.
    pub expr: SampleConfig,
}

impl Default for WildSpec {
    fn default() -> Self {
        WildSpec {
            polynomial: true,
            poly: ForwardConfig::default(),
            expr: SampleConfig {
                min_dim: 2,
                max_dim: 3,
                ..SampleConfig::default()
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    Backward(BackwardConfig),
    Forward(ForwardSpec),
    Wild(WildSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    /// Profile name stored in every record.
    pub tag: String,
    pub generator: Generator,
    #[serde(default)]
    pub with_witness: bool,
    /// Groups per shard file.
    #[serde(default = "default_shard_size")]
    pub shard_size: u64,
}

fn default_shard_size() -> u64 {
    256
}

impl GenerationConfig {
    pub fn new(tag: &str, generator: Generator) -> Self {
        GenerationConfig {
            tag: tag.into(),
            generator,
            with_witness: false,
            shard_size: default_shard_size(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.shard_size == 0 {
            return bad("shard_size must be positive".into());
        }
        if self.tag.is_empty() || self.tag.contains(char::is_whitespace) {
            return bad("tag must be a nonempty word".into());
        }
        let dims = |lo: usize, hi: usize| {
            if lo < 1 || lo > hi || hi > MAX_VARS {
                bad(format!("dimension range {lo}..={hi} must lie within 1..={MAX_VARS}"))
            } else {
                Ok(())
            }
        };
        match &self.generator {
            Generator::Backward(c) => {
                c.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
                dims(c.base.min_dim, c.base.max_dim)
            }
            Generator::Forward(f) => {
                if f.degrees.is_empty() || f.degrees.iter().any(|d| *d < 2 || d % 2 == 1) {
                    return bad("forward degrees must be even and at least 2".into());
                }
                if !(f.eps.is_finite() && f.eps >= 0.0) {
                    return bad("eps must be finite and nonnegative".into());
                }
                if f.system.max_int < 1 || f.system.max_degree < 1 || f.system.max_n_term_fwd < 1 {
                    return bad("forward sampler bounds must be positive".into());
                }
                dims(f.system.min_dim, f.system.max_dim)
            }
            Generator::Wild(w) => {
                if w.polynomial {
                    if w.poly.max_int < 1 || w.poly.max_degree < 1 || w.poly.max_n_term_fwd < 1 {
                        return bad("polynomial sampler bounds must be positive".into());
                    }
                    dims(w.poly.min_dim, w.poly.max_dim)
                } else {
                    w.expr.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
                    dims(w.expr.min_dim, w.expr.max_dim)
                }
            }
        }
    }

    /// SHA-256 of the JSON serialization, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("configurations serialize");
        hex::encode(Sha256::digest(json))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    BPoly,
    BNonPoly,
    FLyap,
    FBarr,
    Poly3,
    Poly5,
    NonPoly,
}

impl Profile {
    pub const ALL: [Profile; 7] = [
        Profile::BPoly,
        Profile::BNonPoly,
        Profile::FLyap,
        Profile::FBarr,
        Profile::Poly3,
        Profile::Poly5,
        Profile::NonPoly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Profile::BPoly => "bpoly",
            Profile::BNonPoly => "bnonpoly",
            Profile::FLyap => "flyap",
            Profile::FBarr => "fbarr",
            Profile::Poly3 => "poly3",
            Profile::Poly5 => "poly5",
            Profile::NonPoly => "nonpoly",
        }
    }

    pub fn config(self) -> GenerationConfig {
        let backward = |mode, p| BackwardConfig {
            mode,
            p1c: p,
            p1m: p,
            p2: p,
            multigen: 5,
            ..BackwardConfig::default()
        };
        let forward = |barrier| ForwardSpec {
            barrier,
            ..ForwardSpec::default()
        };
        let poly = |max_dim| WildSpec {
            poly: ForwardConfig {
                max_dim,
                ..ForwardConfig::default()
            },
            ..WildSpec::default()
        };
        let gen = match self {
            Profile::BPoly => Generator::Backward(backward(GenMode::Polynomial, 0.0)),
            Profile::BNonPoly => Generator::Backward(backward(GenMode::NonPolynomial, 0.5)),
            Profile::FLyap => Generator::Forward(forward(false)),
            Profile::FBarr => Generator::Forward(forward(true)),
            Profile::Poly3 => Generator::Wild(poly(3)),
            Profile::Poly5 => Generator::Wild(poly(5)),
            Profile::NonPoly => Generator::Wild(WildSpec {
                polynomial: false,
                ..WildSpec::default()
            }),
        };
        GenerationConfig::new(self.name(), gen)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Profile::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = Profile::ALL.iter().map(|p| p.name()).collect();
                format!("unknown profile {s:?}; expected one of {}", names.join(", "))
            })
    }
}
