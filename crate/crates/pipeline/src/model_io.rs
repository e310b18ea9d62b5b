//! Versioned JSON containers for the trainable models. Parameters round-trip
//! exactly (serde_json preserves every f64), and each format carries its own
//! tag so a file can never be loaded as the wrong model kind.

use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use i2i_core::bpr::{BprConfig, BprModel};
use i2i_core::discriminator::{DiscriminatorConfig, DiscriminatorModel};
use i2i_core::generator::{GeneratorConfig, GeneratorModel};

pub const GENERATOR_FORMAT: &str = "i2i-generator";
pub const DISCRIMINATOR_FORMAT: &str = "i2i-discriminator";
pub const BPR_FORMAT: &str = "i2i-bpr";
pub const MODEL_FILE_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelIoError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}: expected format {expected:?}, found {found:?}")]
    WrongFormat {
        path: String,
        expected: &'static str,
        found: String,
    },
    #[error("{path}: unsupported version {version}")]
    WrongVersion { path: String, version: u32 },
    #[error("{path}: inconsistent dimensions: {message}")]
    Shape { path: String, message: String },
}

#[derive(Debug, Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    version: u32,
    #[serde(flatten)]
    body: T,
}

fn save_envelope<T: Serialize>(
    path: &Path,
    format: &'static str,
    body: T,
) -> Result<(), ModelIoError> {
    let env = Envelope {
        format: format.to_string(),
        version: MODEL_FILE_VERSION,
        body,
    };
    let text = serde_json::to_string_pretty(&env).map_err(|source| ModelIoError::Json {
        path: path.display().to_string(),
        source,
    })?;
    std::fs::write(path, text).map_err(|source| ModelIoError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_envelope<T: DeserializeOwned>(
    path: &Path,
    format: &'static str,
) -> Result<T, ModelIoError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelIoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let env: Envelope<serde_json::Value> =
        serde_json::from_str(&text).map_err(|source| ModelIoError::Json {
            path: path.display().to_string(),
            source,
        })?;
    if env.format != format {
        return Err(ModelIoError::WrongFormat {
            path: path.display().to_string(),
            expected: format,
            found: env.format,
        });
    }
    if env.version != MODEL_FILE_VERSION {
        return Err(ModelIoError::WrongVersion {
            path: path.display().to_string(),
            version: env.version,
        });
    }
    serde_json::from_value(env.body).map_err(|source| ModelIoError::Json {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct GeneratorBody {
    dim: usize,
    learning_rate: f64,
    epochs: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
    item_ids: Vec<String>,
    embeddings: Vec<f64>,
    bias: Vec<f64>,
}

pub fn save_generator(path: &Path, model: &GeneratorModel) -> Result<(), ModelIoError> {
    save_envelope(
        path,
        GENERATOR_FORMAT,
        GeneratorBody {
            dim: model.config.dim,
            learning_rate: model.config.learning_rate,
            epochs: model.config.epochs,
            alpha: model.config.alpha,
            beta: model.config.beta,
            seed: model.config.seed,
            item_ids: model.item_ids.clone(),
            embeddings: model.embeddings.clone(),
            bias: model.bias.clone(),
        },
    )
}

pub fn load_generator(path: &Path) -> Result<GeneratorModel, ModelIoError> {
    let body: GeneratorBody = load_envelope(path, GENERATOR_FORMAT)?;
    if body.embeddings.len() != body.item_ids.len() * body.dim
        || body.bias.len() != body.item_ids.len()
    {
        return Err(ModelIoError::Shape {
            path: path.display().to_string(),
            message: format!(
                "{} items, dim {}, {} embedding values, {} biases",
                body.item_ids.len(),
                body.dim,
                body.embeddings.len(),
                body.bias.len()
            ),
        });
    }
    Ok(GeneratorModel {
        config: GeneratorConfig {
            dim: body.dim,
            learning_rate: body.learning_rate,
            epochs: body.epochs,
            alpha: body.alpha,
            beta: body.beta,
            seed: body.seed,
        },
        item_ids: body.item_ids,
        embeddings: body.embeddings,
        bias: body.bias,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct DiscriminatorBody {
    dim: usize,
    learning_rate: f64,
    epochs: usize,
    neg_ratio: usize,
    seed: u64,
    user_ids: Vec<String>,
    item_ids: Vec<String>,
    user_embeddings: Vec<f64>,
    item_embeddings: Vec<f64>,
    bias: f64,
}

pub fn save_discriminator(path: &Path, model: &DiscriminatorModel) -> Result<(), ModelIoError> {
    save_envelope(
        path,
        DISCRIMINATOR_FORMAT,
        DiscriminatorBody {
            dim: model.config.dim,
            learning_rate: model.config.learning_rate,
            epochs: model.config.epochs,
            neg_ratio: model.config.neg_ratio,
            seed: model.config.seed,
            user_ids: model.user_ids.clone(),
            item_ids: model.item_ids.clone(),
            user_embeddings: model.user_embeddings.clone(),
            item_embeddings: model.item_embeddings.clone(),
            bias: model.bias,
        },
    )
}

pub fn load_discriminator(path: &Path) -> Result<DiscriminatorModel, ModelIoError> {
    let body: DiscriminatorBody = load_envelope(path, DISCRIMINATOR_FORMAT)?;
    if body.user_embeddings.len() != body.user_ids.len() * body.dim
        || body.item_embeddings.len() != body.item_ids.len() * body.dim
    {
        return Err(ModelIoError::Shape {
            path: path.display().to_string(),
            message: format!(
                "{} users, {} items, dim {}, {} user values, {} item values",
                body.user_ids.len(),
                body.item_ids.len(),
                body.dim,
                body.user_embeddings.len(),
                body.item_embeddings.len()
            ),
        });
    }
    Ok(DiscriminatorModel {
        config: DiscriminatorConfig {
            dim: body.dim,
            learning_rate: body.learning_rate,
            epochs: body.epochs,
            neg_ratio: body.neg_ratio,
            seed: body.seed,
        },
        user_ids: body.user_ids,
        item_ids: body.item_ids,
        user_embeddings: body.user_embeddings,
        item_embeddings: body.item_embeddings,
        bias: body.bias,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct BprBody {
    factors: usize,
    learning_rate: f64,
    regularization: f64,
    epochs: usize,
    seed: u64,
    user_ids: Vec<String>,
    item_ids: Vec<String>,
    user_factors: Vec<f64>,
    item_factors: Vec<f64>,
}

pub fn save_bpr(path: &Path, model: &BprModel) -> Result<(), ModelIoError> {
    save_envelope(
        path,
        BPR_FORMAT,
        BprBody {
            factors: model.config.factors,
            learning_rate: model.config.learning_rate,
            regularization: model.config.regularization,
            epochs: model.config.epochs,
            seed: model.config.seed,
            user_ids: model.user_ids.clone(),
            item_ids: model.item_ids.clone(),
            user_factors: model.user_factors.clone(),
            item_factors: model.item_factors.clone(),
        },
    )
}

pub fn load_bpr(path: &Path) -> Result<BprModel, ModelIoError> {
    let body: BprBody = load_envelope(path, BPR_FORMAT)?;
    if body.user_factors.len() != body.user_ids.len() * body.factors
        || body.item_factors.len() != body.item_ids.len() * body.factors
    {
        return Err(ModelIoError::Shape {
            path: path.display().to_string(),
            message: "factor matrices do not match id lists".to_string(),
        });
    }
    Ok(BprModel {
        config: BprConfig {
            factors: body.factors,
            learning_rate: body.learning_rate,
            regularization: body.regularization,
            epochs: body.epochs,
            seed: body.seed,
        },
        user_ids: body.user_ids,
        item_ids: body.item_ids,
        user_factors: body.user_factors,
        item_factors: body.item_factors,
    })
}
