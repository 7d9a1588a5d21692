//! Run configuration: one TOML document covering data generation, training,
//! sampling and evaluation, plus a content hash for provenance checks.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::detector::TrainConfig;
use crate::error::{Error, Result};
use crate::evalbench::EvalConfig;
use crate::sampler::SampleConfig;
use crate::scenegen::{PairConfig, SceneConfig};

/// Top-level configuration for a full generate/train/evaluate run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scene: SceneConfig,
    pub pairs: PairConfig,
    pub train: TrainConfig,
    pub sample: SampleConfig,
    pub eval: EvalConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.pairs.validate()?;
        self.train.validate()?;
        self.sample.validate()?;
        self.eval.validate()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)
            .map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("RunConfig serializes")
    }

    pub fn hash(&self) -> String {
        hash_of(self)
    }
}

/// Hex SHA-256 of the canonical JSON encoding of any serializable config.
pub fn hash_of<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_string(value).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
