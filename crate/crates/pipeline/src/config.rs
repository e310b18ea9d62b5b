//! Declarative pipeline configuration (TOML). The grid runner needs
//! serializable, hashable configurations, so everything except paths and
//! one-off overrides lives in the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use i2i_core::bpr::BprConfig;
use i2i_core::discriminator::DiscriminatorConfig;
use i2i_core::generator::GeneratorConfig;
use i2i_core::index::Aggregation;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub data: DataConfig,
    #[serde(default)]
    pub long_tail: LongTailConfig,
    #[serde(default)]
    pub generator: GeneratorSection,
    #[serde(default)]
    pub discriminator: DiscriminatorSection,
    #[serde(default)]
    pub augmentation: AugmentationSection,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub topk: TopKConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub index: IndexConfig,
    #[serde(default)]
    pub llm: LlmConfig,
    #[serde(default)]
    pub serve: ServeConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub interactions: PathBuf,
    #[serde(default)]
    pub format: DataFormat,
    pub output_dir: PathBuf,
    /// Optional item metadata TSV: item_id \t title [\t category].
    #[serde(default)]
    pub item_text: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    #[default]
    Tsv,
    Jsonl,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LongTailConfig {
    pub fraction: f64,
}

impl Default for LongTailConfig {
    fn default() -> Self {
        LongTailConfig { fraction: 0.2 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorSection {
    pub dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
}

impl Default for GeneratorSection {
    fn default() -> Self {
        let c = GeneratorConfig::default();
        GeneratorSection {
            dim: c.dim,
            learning_rate: c.learning_rate,
            epochs: c.epochs,
            alpha: c.alpha,
            beta: c.beta,
            seed: c.seed,
        }
    }
}

impl From<&GeneratorSection> for GeneratorConfig {
    fn from(s: &GeneratorSection) -> Self {
        GeneratorConfig {
            dim: s.dim,
            learning_rate: s.learning_rate,
            epochs: s.epochs,
            alpha: s.alpha,
            beta: s.beta,
            seed: s.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DiscriminatorSection {
    pub dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub neg_ratio: usize,
    pub seed: u64,
}

impl Default for DiscriminatorSection {
    fn default() -> Self {
        let c = DiscriminatorConfig::default();
        DiscriminatorSection {
            dim: c.dim,
            learning_rate: c.learning_rate,
            epochs: c.epochs,
            neg_ratio: c.neg_ratio,
            seed: c.seed,
        }
    }
}

impl From<&DiscriminatorSection> for DiscriminatorConfig {
    fn from(s: &DiscriminatorSection) -> Self {
        DiscriminatorConfig {
            dim: s.dim,
            learning_rate: s.learning_rate,
            epochs: s.epochs,
            neg_ratio: s.neg_ratio,
            seed: s.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct AugmentationSection {
    pub recall_number: usize,
    pub confidence_threshold: f64,
    pub history_window: usize,
    pub seed: u64,
}

impl Default for AugmentationSection {
    fn default() -> Self {
        let c = i2i_core::AugmentationConfig::default();
        AugmentationSection {
            recall_number: c.recall_number,
            confidence_threshold: c.confidence_threshold,
            history_window: c.history_window,
            seed: c.seed,
        }
    }
}

impl From<&AugmentationSection> for i2i_core::AugmentationConfig {
    fn from(s: &AugmentationSection) -> Self {
        i2i_core::AugmentationConfig {
            recall_number: s.recall_number,
            confidence_threshold: s.confidence_threshold,
            history_window: s.history_window,
            seed: s.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Swing,
    Bm25,
    Bpr,
}

impl BackendKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BackendKind::Swing => "swing",
            BackendKind::Bm25 => "bm25",
            BackendKind::Bpr => "bpr",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub swing: SwingConfig,
    pub bm25: Bm25Config,
    pub bpr: BprSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SwingConfig {
    pub smoothing: f64,
    pub click_cap: usize,
}

impl Default for SwingConfig {
    fn default() -> Self {
        SwingConfig {
            smoothing: 1.0,
            click_cap: 1000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Bm25Config {
    pub k1: f64,
    pub b: f64,
    pub click_cap: usize,
}

impl Default for Bm25Config {
    fn default() -> Self {
        Bm25Config {
            k1: 20.0,
            b: 0.75,
            click_cap: 1000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BprSection {
    pub factors: usize,
    pub learning_rate: f64,
    pub regularization: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for BprSection {
    fn default() -> Self {
        let c = BprConfig::default();
        BprSection {
            factors: c.factors,
            learning_rate: c.learning_rate,
            regularization: c.regularization,
            epochs: c.epochs,
            seed: c.seed,
        }
    }
}

impl From<&BprSection> for BprConfig {
    fn from(s: &BprSection) -> Self {
        BprConfig {
            factors: s.factors,
            learning_rate: s.learning_rate,
            regularization: s.regularization,
            epochs: s.epochs,
            seed: s.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TopKConfig {
    pub k: usize,
}

impl Default for TopKConfig {
    fn default() -> Self {
        TopKConfig { k: 200 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub k_values: Vec<usize>,
    pub m: usize,
    pub n: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            k_values: vec![5, 10],
            m: 100,
            n: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct IndexConfig {
    pub k: usize,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig { k: 200 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum LlmMode {
    #[default]
    Local,
    Remote,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LlmConfig {
    pub mode: LlmMode,
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the API credential.
    pub credential_env: String,
    pub request_token_scores: bool,
    pub generation_template: Option<PathBuf>,
    pub discrimination_template: Option<PathBuf>,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            mode: LlmMode::Local,
            base_url: String::new(),
            model: String::new(),
            credential_env: "I2I_LLM_API_KEY".to_string(),
            request_token_scores: false,
            generation_template: None,
            discrimination_template: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum AggregationKind {
    #[default]
    Sum,
    Max,
}

impl From<AggregationKind> for Aggregation {
    fn from(k: AggregationKind) -> Self {
        match k {
            AggregationKind::Sum => Aggregation::Sum,
            AggregationKind::Max => Aggregation::Max,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ServeConfig {
    pub bind: String,
    pub aggregation: AggregationKind,
    pub m: usize,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            bind: "127.0.0.1:8080".to_string(),
            aggregation: AggregationKind::Sum,
            m: 100,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config at {field}: {message}")]
    Invalid { field: String, message: String },
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<PipelineConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: PipelineConfig = toml::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field: &str, message: &str| {
            Err(ConfigError::Invalid {
                field: field.to_string(),
                message: message.to_string(),
            })
        };
        if !(self.long_tail.fraction > 0.0 && self.long_tail.fraction <= 1.0) {
            return invalid("long_tail.fraction", "must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.augmentation.confidence_threshold) {
            return invalid("augmentation.confidence_threshold", "must be in [0, 1]");
        }
        if self.augmentation.recall_number < 1 {
            return invalid("augmentation.recall_number", "must be >= 1");
        }
        if self.backend.swing.smoothing <= 0.0 {
            return invalid("backend.swing.smoothing", "must be positive");
        }
        if !(0.0..=1.0).contains(&self.backend.bm25.b) {
            return invalid("backend.bm25.b", "must be in [0, 1]");
        }
        if self.backend.bm25.k1 <= 0.0 {
            return invalid("backend.bm25.k1", "must be positive");
        }
        if self.topk.k < 1 || self.index.k < 1 {
            return invalid("topk.k", "must be >= 1");
        }
        if self.eval.k_values.is_empty() || self.eval.k_values.iter().any(|&k| k < 1) {
            return invalid("eval.k_values", "must be non-empty, every k >= 1");
        }
        if self.eval.m < 1 || self.serve.m < 1 {
            return invalid("eval.m", "must be >= 1");
        }
        if self.llm.mode == LlmMode::Remote && self.llm.base_url.is_empty() {
            return invalid("llm.base_url", "required when llm.mode = \"remote\"");
        }
        Ok(())
    }

    /// Canonical serialized form used for hashing in manifests.
    pub fn canonical_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_toml() -> &'static str {
        "[data]\ninteractions = \"x.tsv\"\noutput_dir = \"out\"\n"
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg: PipelineConfig = toml::from_str(minimal_toml()).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.long_tail.fraction, 0.2);
        assert_eq!(cfg.generator.alpha, 4.0);
        assert_eq!(cfg.backend.bm25.k1, 20.0);
        assert_eq!(cfg.backend.bpr.factors, 100);
        assert_eq!(cfg.backend.swing.click_cap, 1000);
        assert_eq!(cfg.index.k, 200);
        assert_eq!(cfg.llm.mode, LlmMode::Local);
    }

    #[test]
    fn bad_threshold_names_field() {
        let text = format!(
            "{}[augmentation]\nconfidence_threshold = 1.5\n",
            minimal_toml()
        );
        let cfg: PipelineConfig = toml::from_str(&text).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("augmentation.confidence_threshold"));
    }

    #[test]
    fn remote_mode_requires_base_url() {
        let text = format!("{}[llm]\nmode = \"remote\"\n", minimal_toml());
        let cfg: PipelineConfig = toml::from_str(&text).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{}[nonsense]\nfoo = 1\n", minimal_toml());
        assert!(toml::from_str::<PipelineConfig>(&text).is_err());
    }
}
