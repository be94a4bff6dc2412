//! Experiment configuration: one JSON document, validated before any work starts.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use semilab_core::entropy::CirclePartition;
use semilab_core::{ArcSet, SemigroupSystem, WalkLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Kac,
    CesaroKac,
    Recurrence,
    SetReturn,
    BallReturn,
    Rate,
    Dynball,
    Entropy,
    Lyapunov,
    Variational,
    Hitting,
    RotationBound,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Kac => "kac",
            Experiment::CesaroKac => "cesaro-kac",
            Experiment::Recurrence => "recurrence",
            Experiment::SetReturn => "set-return",
            Experiment::BallReturn => "ball-return",
            Experiment::Rate => "rate",
            Experiment::Dynball => "dynball",
            Experiment::Entropy => "entropy",
            Experiment::Lyapunov => "lyapunov",
            Experiment::Variational => "variational",
            Experiment::Hitting => "hitting",
            Experiment::RotationBound => "rotation-bound",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sample sizes. Absent fields fall back to per-experiment defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Samples {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_omega: Option<u64>,
    /// Number of shifts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    /// Orbit or join length.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
    /// Longest periodic word considered.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u64>,
    /// Starting-point grid size.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaGrid {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<u64>,
    /// Single radius for experiments that use one δ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Generator list, e.g. `"linear:2,linear:3"`.
    pub system: String,
    /// `bernoulli:…`, `cyclic:…` or `mixture:…`; defaults to the uniform walk.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk: Option<String>,
    pub seed: u64,
    /// Target set as `[start, end]` pieces, read mod 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub samples: Samples,
    #[serde(default)]
    pub delta: DeltaGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_n: Option<u32>,
    /// `dyadic` or `equal:q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Field { field: &'static str, message: String },
    #[error("capability error: {0}")]
    Capability(String),
}

fn field(field: &'static str, message: impl fmt::Display) -> ConfigError {
    ConfigError::Field {
        field,
        message: message.to_string(),
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path)
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Canonical JSON: sorted keys, no whitespace, output path dropped.
    pub fn canonical(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        let value = serde_json::to_value(&c).expect("config serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    /// SHA-256 of [`canonical`](Self::canonical), hex encoded.
    pub fn digest(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn validate(&self) -> Result<Validated, ConfigError> {
        let system = SemigroupSystem::parse(&self.system).map_err(|e| field("system", e))?;
        let law = match &self.walk {
            Some(w) => WalkLaw::parse(w).map_err(|e| field("walk", e))?,
            None => WalkLaw::Bernoulli(semilab_core::BernoulliWalk::uniform(system.p()).map_err(|e| field("walk", e))?),
        };
        if law.alphabet_bound() > system.p() {
            return Err(field(
                "walk",
                format!("uses symbol {} but the system has {} generators", law.alphabet_bound(), system.p()),
            ));
        }
        let s = &self.samples;
        for (name, v) in [
            ("samples.m", s.m),
            ("samples.m_omega", s.m_omega),
            ("samples.k", s.k),
            ("samples.n", s.n),
            ("samples.n_max", s.n_max),
            ("samples.l", s.l),
            ("samples.k_max", s.k_max),
            ("samples.grid", s.grid),
            ("delta.points", self.delta.points),
        ] {
            if v == Some(0) {
                return Err(ConfigError::Field {
                    field: name,
                    message: "must be positive".into(),
                });
            }
        }
        if let Some(d) = self.delta.delta0 {
            if !(d > 0.0 && d < 0.5) {
                return Err(field("delta.delta0", "must lie in (0, 1/2)"));
            }
        }
        if let Some(d) = self.delta.value {
            if !(d > 0.0 && d < 0.5) {
                return Err(field("delta.value", "must lie in (0, 1/2)"));
            }
        }
        if let Some(r) = self.delta.ratio {
            if !(r > 0.0 && r < 1.0) {
                return Err(field("delta.ratio", "must lie in (0, 1)"));
            }
        }
        if let Some(t) = self.tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(field("tolerance", "must be a finite non-negative number"));
            }
        }
        if self.dim == Some(0) {
            return Err(field("dim", "must be positive"));
        }
        if let Some(g) = &self.n_grid {
            if g.is_empty() || g.contains(&0) {
                return Err(field("n_grid", "must be a non-empty list of positive lengths"));
            }
        }
        let set = match &self.set {
            Some(pieces) => {
                if pieces.iter().any(|[a, b]| !(a.is_finite() && b.is_finite() && a <= b)) {
                    return Err(field("set", "pieces must be finite [start, end] pairs with start <= end"));
                }
                let set = ArcSet::from_pieces(pieces.iter().map(|[a, b]| (*a, *b)));
                if set.is_empty() {
                    return Err(field("set", "must have positive length"));
                }
                Some(set)
            }
            None => None,
        };
        let partition = match self.partition.as_deref() {
            None | Some("dyadic") => CirclePartition::dyadic(),
            Some(p) => match p.strip_prefix("equal:").and_then(|q| q.trim().parse::<u64>().ok()) {
                Some(q) => CirclePartition::equal(q).map_err(|e| field("partition", e))?,
                None => return Err(field("partition", format!("expected `dyadic` or `equal:q`, got `{p}`"))),
            },
        };
        let v = Validated {
            config: self.clone(),
            system,
            law,
            set,
            partition,
        };
        v.check_capability()?;
        Ok(v)
    }
}

/// A configuration whose strings have been parsed.
#[derive(Debug, Clone)]
pub struct Validated {
    pub config: ExperimentConfig,
    pub system: SemigroupSystem,
    pub law: WalkLaw,
    pub set: Option<ArcSet<f64>>,
    pub partition: CirclePartition,
}

impl Validated {
    fn check_capability(&self) -> Result<(), ConfigError> {
        use Experiment::*;
        let exp = self.config.experiment;
        let linear_only = matches!(
            exp,
            Kac | CesaroKac | Recurrence | SetReturn | BallReturn | Rate | Dynball | Entropy | Variational
        );
        if linear_only {
            self.system
                .degrees(exp.name())
                .map_err(|e| ConfigError::Capability(e.to_string()))?;
        }
        if exp == RotationBound && self.rotations().is_none() {
            return Err(ConfigError::Capability("rotation-bound needs a system of rotations only".into()));
        }
        if matches!(exp, Kac | CesaroKac | Recurrence | SetReturn) && self.set.is_none() {
            return Err(field("set", format!("required by {exp}")));
        }
        if matches!(exp, Entropy | Variational) && !matches!(self.law, WalkLaw::Bernoulli(_)) {
            return Err(ConfigError::Capability(format!("{exp} needs a Bernoulli walk")));
        }
        if matches!(exp, Entropy | Variational | Rate | Dynball | Lyapunov) {
            if let WalkLaw::Bernoulli(b) = &self.law {
                if b.p() != self.system.p() {
                    return Err(field("walk", "needs one weight per generator"));
                }
            }
        }
        Ok(())
    }

    pub fn rotations(&self) -> Option<Vec<(u64, u64)>> {
        self.system
            .generators()
            .iter()
            .map(|g| match g {
                semilab_core::GeneratorMap::Rotation { num, den } => Some((*num, *den)),
                _ => None,
            })
            .collect()
    }

    pub fn tolerance(&self, default: f64) -> f64 {
        self.config.tolerance.unwrap_or(default)
    }
}
