//! Experiment files.
//!
//! ```toml
//! scenario = "negative_transfer"   # preset name or path to a scenario file
//! seeds = [0, 1, 2]
//! samplers = ["mometas", "uniform"]
//! output_dir = "out"
//!
//! [meta]
//! meta_length = 100
//! beta = 0.1
//! lambda = 3.0
//! total_steps = 10000
//! reward = "relative_individual"
//! reward_clip = 5.0                # optional
//!
//! [compare]
//! reference = "uniform"
//! smoothing_window = 9
//! ```
//!
//! Every key is optional except `scenario`. Relative paths resolve against the
//! config file's directory.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use toml::Table;

use crate::error::{Error, Result};
use crate::meta_loop::{MetaConfig, SamplerKind};
use crate::rewards::RewardKind;
use crate::sim::Scenario;

/// Environment variable that replaces the seed list with a single seed.
pub const SEED_ENV_VAR: &str = "META_SCHED_SEED";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareSettings {
    /// Sampler the others are paired against. `None` means `uniform` if it is
    /// listed, otherwise the first sampler.
    pub reference: Option<SamplerKind>,
    pub smoothing_window: usize,
}

impl Default for CompareSettings {
    fn default() -> Self {
        Self {
            reference: None,
            smoothing_window: 9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    /// As written in the file.
    pub scenario: String,
    #[serde(skip)]
    pub resolved_scenario: Scenario,
    pub seeds: Vec<u64>,
    pub samplers: Vec<SamplerKind>,
    pub output_dir: PathBuf,
    /// Sampler and seed fields are overwritten per run.
    pub meta: MetaConfig,
    pub compare: CompareSettings,
}

fn take<T: DeserializeOwned>(table: &mut Table, key: &str, path: &str) -> Result<Option<T>> {
    match table.remove(key) {
        None => Ok(None),
        Some(value) => {
            let shown = value.to_string();
            value
                .try_into()
                .map(Some)
                .map_err(|e: toml::de::Error| Error::config(path, format!("{} (got {shown})", e.message())))
        }
    }
}

fn reject_unknown(table: &Table, prefix: &str) -> Result<()> {
    match table.keys().next() {
        Some(key) => Err(Error::config(format!("{prefix}{key}"), "unknown key")),
        None => Ok(()),
    }
}

fn parse_named<T: std::str::FromStr<Err = Error>>(raw: &str, key: &str) -> Result<T> {
    raw.parse().map_err(|e: Error| Error::config(key, e.to_string()))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut root: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("config", e.message().to_string()))?;

        let scenario: String =
            take(&mut root, "scenario", "scenario")?.ok_or_else(|| Error::config("scenario", "missing"))?;
        let seeds: Vec<u64> = take(&mut root, "seeds", "seeds")?.unwrap_or_else(|| vec![0]);
        let raw_samplers: Vec<String> =
            take(&mut root, "samplers", "samplers")?.unwrap_or_else(|| vec!["mometas".to_string()]);
        let output_dir: PathBuf = take(&mut root, "output_dir", "output_dir")?.unwrap_or_else(|| "out".into());

        let mut meta = MetaConfig::default();
        if let Some(mut t) = take::<Table>(&mut root, "meta", "meta")? {
            if let Some(v) = take(&mut t, "meta_length", "meta.meta_length")? {
                meta.meta_length = v;
            }
            if let Some(v) = take(&mut t, "beta", "meta.beta")? {
                meta.beta = v;
            }
            if let Some(v) = take(&mut t, "lambda", "meta.lambda")? {
                meta.lambda = v;
            }
            if let Some(v) = take(&mut t, "total_steps", "meta.total_steps")? {
                meta.total_steps = v;
            }
            if let Some(raw) = take::<String>(&mut t, "reward", "meta.reward")? {
                meta.reward = parse_named::<RewardKind>(&raw, "meta.reward")?;
            }
            meta.reward_clip = take(&mut t, "reward_clip", "meta.reward_clip")?;
            reject_unknown(&t, "meta.")?;
        }

        let mut compare = CompareSettings::default();
        if let Some(mut t) = take::<Table>(&mut root, "compare", "compare")? {
            if let Some(raw) = take::<String>(&mut t, "reference", "compare.reference")? {
                compare.reference = Some(parse_named(&raw, "compare.reference")?);
            }
            if let Some(v) = take(&mut t, "smoothing_window", "compare.smoothing_window")? {
                compare.smoothing_window = v;
            }
            reject_unknown(&t, "compare.")?;
        }
        reject_unknown(&root, "")?;

        let samplers = raw_samplers
            .iter()
            .enumerate()
            .map(|(i, raw)| parse_named(raw, &format!("samplers[{i}]")))
            .collect::<Result<Vec<SamplerKind>>>()?;

        let resolved_scenario = Scenario::resolve(&scenario, base_dir)?;
        let output_dir = match base_dir {
            Some(dir) if output_dir.is_relative() => dir.join(output_dir),
            _ => output_dir,
        };

        let config = Self {
            scenario,
            resolved_scenario,
            seeds,
            samplers,
            output_dir,
            meta,
            compare,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent())
    }

    fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "must not be empty"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::config("seeds", format!("seed {} is listed twice", w[0])));
        }
        if self.samplers.is_empty() {
            return Err(Error::config("samplers", "must not be empty"));
        }
        if self.compare.smoothing_window == 0 {
            return Err(Error::config("compare.smoothing_window", "must be at least 1"));
        }
        self.meta.validate().map_err(|e| match e {
            Error::Config { key, message } => Error::Config {
                key: format!("meta.{key}"),
                message,
            },
            other => other,
        })
    }

    /// Applies the seed environment variable, if set.
    pub fn apply_env_seed(&mut self) -> Result<()> {
        match std::env::var(SEED_ENV_VAR) {
            Ok(raw) => {
                let seed = raw
                    .trim()
                    .parse()
                    .map_err(|_| Error::config(SEED_ENV_VAR, format!("`{raw}` is not a 64-bit unsigned integer")))?;
                self.seeds = vec![seed];
                Ok(())
            }
            Err(_) => Ok(()),
        }
    }

    pub fn num_objectives(&self) -> usize {
        self.resolved_scenario.num_objectives()
    }

    /// The sampler every other sampler is compared against.
    pub fn reference_index(&self) -> Result<usize> {
        match self.compare.reference {
            Some(kind) => self.samplers.iter().position(|&s| s == kind).ok_or_else(|| {
                Error::config("compare.reference", format!("`{kind}` is not in the sampler list"))
            }),
            None => Ok(self
                .samplers
                .iter()
                .position(|&s| s == SamplerKind::Uniform)
                .unwrap_or(0)),
        }
    }

    pub fn meta_for(&self, sampler: SamplerKind, seed: u64) -> MetaConfig {
        MetaConfig {
            sampler,
            seed,
            ..self.meta.clone()
        }
    }
}
