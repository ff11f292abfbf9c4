//! Experiment configuration: one TOML document drives the whole pipeline.
//! Unknown keys are rejected, every knob has the documented default, and the
//! effective (post-override) document is hashed so artifacts can be traced
//! back to the configuration that produced them.

use anyhow::{Context, Result, anyhow, bail};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

use deltanas::dataset::FeatureMode;
use deltanas::predictor::{Backend, TrainConfig};
use deltanas::search::{Convergence, NeighborBudget, RegEvoConfig, SearchConfig};
use deltanas::space::{SearchSpaceSpec, SpaceKind};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: SpaceSection,
    pub oracle: OracleSection,
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictor: Option<PredictorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub kind: String,
    pub n: usize,
    pub r: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op_names: Option<Vec<String>>,
}

impl SpaceSection {
    pub fn build(&self) -> Result<SearchSpaceSpec> {
        let kind: SpaceKind = self.kind.parse().map_err(|e: String| anyhow!(e))?;
        let spec = match &self.op_names {
            Some(names) => SearchSpaceSpec::new(kind, self.n, self.r, names.clone())?,
            None => SearchSpaceSpec::new(
                kind,
                self.n,
                self.r,
                (0..self.r).map(|i| format!("op{i}")).collect(),
            )?,
        };
        Ok(spec)
    }
}

fn default_pair_weight() -> f64 {
    0.4
}

fn default_sigma() -> f64 {
    0.02
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    /// `synthetic` or `tabular`.
    pub kind: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_pair_weight")]
    pub pair_weight: f64,
    /// Noise std of one proxy delta measurement, in accuracy units.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub proxy_seed: u64,
    /// Benchmark file, `kind = "tabular"` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

fn default_samples_per_encoding() -> usize {
    4
}

fn default_k() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub num_anchors: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_samples_per_encoding")]
    pub samples_per_encoding: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub symmetrize: bool,
}

fn default_epochs() -> usize {
    200
}

fn default_batch_size() -> usize {
    64
}

fn default_learning_rate() -> f64 {
    1e-3
}

fn default_l2() -> f64 {
    1e-4
}

fn default_mode() -> String {
    "diff_only".into()
}

fn default_backend() -> String {
    "ridge".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictorSection {
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_backend")]
    pub backend: String,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_l2")]
    pub l2: f64,
    #[serde(default)]
    pub seed: u64,
}

impl PredictorSection {
    pub fn mode(&self) -> Result<FeatureMode> {
        self.mode.parse().map_err(|e: String| anyhow!(e))
    }

    pub fn backend(&self) -> Result<Backend> {
        self.backend.parse().map_err(|e: String| anyhow!(e))
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            l2: self.l2,
            seed: self.seed,
        }
    }
}

fn default_population_size() -> usize {
    256
}

fn default_max_iterations() -> usize {
    100
}

fn default_neighbor_budget() -> String {
    "all".into()
}

fn default_convergence() -> String {
    "no_member_improved".into()
}

fn default_tournament_size() -> usize {
    10
}

fn default_cycles() -> usize {
    1024
}

fn default_random_budget() -> usize {
    1024
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    /// `delta_nas`, `random` or `regularized_evolution`.
    pub algorithm: String,
    #[serde(default = "default_population_size")]
    pub population_size: usize,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// `all` or `sample`.
    #[serde(default = "default_neighbor_budget")]
    pub neighbor_budget: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighbor_sample_size: Option<usize>,
    /// `no_member_improved` or `iteration_cap`.
    #[serde(default = "default_convergence")]
    pub convergence: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_eval_budget: Option<usize>,
    #[serde(default)]
    pub restart_converged: bool,
    #[serde(default)]
    pub seed: u64,
    /// Random-search oracle budget.
    #[serde(default = "default_random_budget")]
    pub budget: usize,
    #[serde(default = "default_tournament_size")]
    pub tournament_size: usize,
    #[serde(default = "default_cycles")]
    pub cycles: usize,
    /// When set and the space fits, traces include the mean edit distance to
    /// the enumerated optimum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimum_enumeration_limit: Option<u64>,
}

impl SearchSection {
    pub fn search_config(&self) -> Result<SearchConfig> {
        let neighbor_budget = match self.neighbor_budget.as_str() {
            "all" => NeighborBudget::All,
            "sample" => NeighborBudget::Sample(self.neighbor_sample_size.ok_or_else(|| {
                anyhow!("neighbor_budget = \"sample\" needs neighbor_sample_size")
            })?),
            other => bail!("unknown neighbor_budget `{other}`"),
        };
        let convergence = match self.convergence.as_str() {
            "no_member_improved" => Convergence::NoMemberImproved,
            "iteration_cap" => Convergence::IterationCap,
            other => bail!("unknown convergence `{other}`"),
        };
        Ok(SearchConfig {
            population_size: self.population_size,
            max_iterations: self.max_iterations,
            neighbor_budget,
            convergence,
            final_eval_budget: self.final_eval_budget,
            restart_converged: self.restart_converged,
            seed: self.seed,
        })
    }

    pub fn regevo_config(&self) -> RegEvoConfig {
        RegEvoConfig {
            population_size: self.population_size,
            tournament_size: self.tournament_size,
            cycles: self.cycles,
            seed: self.seed,
        }
    }
}

fn default_epsilon_frac() -> f64 {
    0.001
}

fn default_enumeration_limit() -> u64 {
    1_000_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub methods: Vec<String>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_epsilon_frac")]
    pub epsilon_frac: f64,
    #[serde(default = "default_enumeration_limit")]
    pub enumeration_limit: u64,
}

fn default_train_fraction() -> f64 {
    0.8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub ks: Vec<usize>,
    pub anchors_per_k: usize,
    #[serde(default = "default_samples_per_encoding")]
    pub samples_per_encoding: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub seed: u64,
}

/// A configuration ready to run: the typed document, its canonical
/// serialization, and the SHA-256 of that serialization.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub canonical: String,
    pub hash: String,
}

impl LoadedConfig {
    /// Comment lines stamped into every artifact this configuration writes.
    pub fn stamp(&self) -> Vec<String> {
        vec![
            format!("config_hash={}", self.hash),
            format!("config {}", self.canonical.trim().replace('\n', "; ")),
        ]
    }
}

/// Reads a config file and applies `key.path=value` overrides before
/// validation; the hash covers the effective document.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file `{}`", path.display()))?;
    let mut table: toml::Table = text
        .parse()
        .with_context(|| format!("config file `{}` is not valid TOML", path.display()))?;
    for setting in overrides {
        apply_override(&mut table, setting)?;
    }
    let config: ExperimentConfig = table
        .try_into()
        .context("invalid experiment configuration")?;
    let canonical = toml::to_string(&config).context("cannot serialize configuration")?;
    let hash = hex::encode(Sha256::digest(canonical.as_bytes()));
    Ok(LoadedConfig { config, canonical, hash })
}

/// Applies one `section.key=value` override to the raw document. The value
/// is parsed as TOML when possible and falls back to a string.
fn apply_override(table: &mut toml::Table, setting: &str) -> Result<()> {
    let (path, raw_value) = setting
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{setting}` is not of the form key.path=value"))?;
    let value = parse_toml_value(raw_value);
    let parts: Vec<&str> = path.split('.').collect();
    if parts.is_empty() || parts.iter().any(|p| p.is_empty()) {
        bail!("override `{setting}` has an empty key path");
    }
    let mut current = table;
    for part in &parts[..parts.len() - 1] {
        current = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| anyhow!("override `{setting}` descends into a non-table value"))?;
    }
    current.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn parse_toml_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("just inserted"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}
