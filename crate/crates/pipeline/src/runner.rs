//! In-process pipeline steps shared by the CLI subcommands and the
//! experiment grid: dataset loading, model training, augmentation on the
//! train portion only, backend fitting, and evaluation.

use anyhow::{Context, Result};

use i2i_core::augment::{augment, AugmentedDataset, CandidateGenerator, CandidateJudge};
use i2i_core::bm25::bm25_similarity;
use i2i_core::bpr::train_bpr;
use i2i_core::data::{Dataset, Interaction};
use i2i_core::discriminator::DiscriminatorModel;
use i2i_core::generator::GeneratorModel;
use i2i_core::graph::build_graph;
use i2i_core::index::InvertedIndex;
use i2i_core::metrics::{evaluate, EvalParams, EvalReport};
use i2i_core::neighbors::{topk_neighbors, ItemNeighborList};
use i2i_core::split::{chronological_split, SplitSpec};
use i2i_core::swing::swing_similarity;

use crate::config::{BackendConfig, BackendKind, PipelineConfig};
use crate::ingest::load_dataset;

/// Loads the configured dataset with long-tail labels applied.
pub fn load_configured_dataset(cfg: &PipelineConfig) -> Result<Dataset> {
    load_dataset(
        &cfg.data.interactions,
        cfg.data.format,
        cfg.data.item_text.as_deref(),
        cfg.long_tail.fraction,
    )
    .context("loading dataset")
}

/// The dataset restricted to train-split interactions, so candidate
/// generation never sees held-out items. Long-tail labels are re-derived on
/// the train portion.
pub fn train_only_dataset(split: &SplitSpec, fraction: f64) -> Result<Dataset> {
    let mut ds = Dataset::from_interactions(split.train_interactions())
        .context("building train-only dataset")?;
    ds.label_long_tail(fraction)?;
    Ok(ds)
}

pub fn train_generator(
    dataset: &Dataset,
    split: &SplitSpec,
    cfg: &PipelineConfig,
) -> Result<(GeneratorModel, Vec<f64>)> {
    GeneratorModel::train(dataset, split, (&cfg.generator).into())
        .map_err(|e| anyhow::anyhow!("generator training: {e}"))
}

pub fn train_discriminator(
    dataset: &Dataset,
    split: &SplitSpec,
    cfg: &PipelineConfig,
) -> Result<(DiscriminatorModel, Vec<f64>)> {
    DiscriminatorModel::train(dataset, split, (&cfg.discriminator).into())
        .map_err(|e| anyhow::anyhow!("discriminator training: {e}"))
}

/// Runs generate/judge/filter over the train-only dataset.
pub fn augment_train(
    train_ds: &Dataset,
    gen: &dyn CandidateGenerator,
    judge: &dyn CandidateJudge,
    cfg: &PipelineConfig,
) -> Result<AugmentedDataset> {
    augment(train_ds, gen, judge, &(&cfg.augmentation).into())
        .map_err(|e| anyhow::anyhow!("augmentation: {e}"))
}

/// Fits the configured backend on an interaction stream and returns per-item
/// neighbor lists, each at most `topk` long.
pub fn backend_neighbors(
    stream: &[Interaction],
    backend: &BackendConfig,
    topk: usize,
) -> Result<Vec<ItemNeighborList>> {
    anyhow::ensure!(!stream.is_empty(), "backend input stream is empty");
    match backend.kind {
        BackendKind::Swing => {
            let graph = build_graph(stream, backend.swing.click_cap);
            let sim = swing_similarity(&graph, backend.swing.smoothing);
            Ok(topk_neighbors(&sim, &graph, topk))
        }
        BackendKind::Bm25 => {
            let graph = build_graph(stream, backend.bm25.click_cap);
            let sim = bm25_similarity(&graph, backend.bm25.k1, backend.bm25.b);
            Ok(topk_neighbors(&sim, &graph, topk))
        }
        BackendKind::Bpr => {
            let (model, _) = train_bpr(stream, (&backend.bpr).into())
                .map_err(|e| anyhow::anyhow!("bpr training: {e}"))?;
            Ok(model.neighbors(topk))
        }
    }
}

pub fn eval_params(cfg: &PipelineConfig) -> EvalParams {
    EvalParams {
        k_values: cfg.eval.k_values.clone(),
        m: cfg.eval.m,
        n: cfg.eval.n,
        aggregation: cfg.serve.aggregation.into(),
    }
}

/// Builds an index from neighbor lists and evaluates it against the split.
pub fn evaluate_lists(
    lists: &[ItemNeighborList],
    split: &SplitSpec,
    dataset: &Dataset,
    cfg: &PipelineConfig,
) -> Result<EvalReport> {
    let index = InvertedIndex::build(lists, cfg.index.k)
        .map_err(|e| anyhow::anyhow!("index build: {e}"))?;
    evaluate(&index, split, dataset, &eval_params(cfg))
        .map_err(|e| anyhow::anyhow!("evaluation: {e}"))
}

/// End-to-end baseline: backend on the raw train stream, evaluated on the
/// held-out items.
pub fn baseline_eval(cfg: &PipelineConfig, dataset: &Dataset) -> Result<EvalReport> {
    let split = chronological_split(dataset);
    let lists = backend_neighbors(&split.train_interactions(), &cfg.backend, cfg.topk.k)?;
    evaluate_lists(&lists, &split, dataset, cfg)
}

/// End-to-end enhanced run with local models: train generator and
/// discriminator, augment the train stream, refit the backend, evaluate.
pub fn enhanced_eval(cfg: &PipelineConfig, dataset: &Dataset) -> Result<EvalReport> {
    let split = chronological_split(dataset);
    let (gen, _) = train_generator(dataset, &split, cfg)?;
    let (disc, _) = train_discriminator(dataset, &split, cfg)?;
    let train_ds = train_only_dataset(&split, cfg.long_tail.fraction)?;
    let augmented = augment_train(&train_ds, &gen, &disc, cfg)?;
    let stream = augmented.merged_interactions();
    let lists = backend_neighbors(&stream, &cfg.backend, cfg.topk.k)?;
    evaluate_lists(&lists, &split, dataset, cfg)
}
