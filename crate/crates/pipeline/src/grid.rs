//! Experiment grid: ablation variants and parameter sweeps, all run
//! in-process from one base configuration.

use anyhow::Result;

use i2i_core::augment::{CandidateJudge, PortError};
use i2i_core::data::{Dataset, UserHistory};
use i2i_core::discriminator::Verdict;
use i2i_core::generator::HISTORY_WINDOW;
use i2i_core::metrics::{evaluate_predictions, EvalReport, RankedPrediction};
use i2i_core::prompt::Decision;
use i2i_core::split::chronological_split;

use crate::config::PipelineConfig;
use crate::report::{sweep_csv_header, sweep_csv_row, SweepRow};
use crate::runner::{
    augment_train, backend_neighbors, baseline_eval, enhanced_eval, evaluate_lists,
    train_discriminator, train_generator, train_only_dataset,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Full,
    WoAll,
    WoGenerator,
    WoLongTailLoss,
    WoDiscriminator,
    WoThresholdFilter,
    WoBackend,
}

pub const ABLATION_VARIANTS: [Variant; 7] = [
    Variant::Full,
    Variant::WoAll,
    Variant::WoGenerator,
    Variant::WoLongTailLoss,
    Variant::WoDiscriminator,
    Variant::WoThresholdFilter,
    Variant::WoBackend,
];

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Full => "llm_i2i",
            Variant::WoAll => "wo_all",
            Variant::WoGenerator => "wo_generator",
            Variant::WoLongTailLoss => "wo_long_tail_loss",
            Variant::WoDiscriminator => "wo_discriminator",
            Variant::WoThresholdFilter => "wo_threshold_filter",
            Variant::WoBackend => "wo_backend",
        }
    }
}

/// Judge that accepts everything at full confidence.
struct AcceptAll;

impl CandidateJudge for AcceptAll {
    fn judge(&self, history: &UserHistory, item_id: &str) -> Result<Verdict, PortError> {
        Ok(Verdict {
            user_id: history.user_id.clone(),
            item_id: item_id.to_string(),
            decision: Decision::Yes,
            confidence: 1.0,
        })
    }
}

pub fn run_variant(cfg: &PipelineConfig, dataset: &Dataset, variant: Variant) -> Result<EvalReport> {
    match variant {
        Variant::Full => enhanced_eval(cfg, dataset),
        Variant::WoAll => baseline_eval(cfg, dataset),
        Variant::WoLongTailLoss => {
            let mut cfg = cfg.clone();
            cfg.generator.alpha = 1.0;
            cfg.generator.beta = 1.0;
            enhanced_eval(&cfg, dataset)
        }
        Variant::WoThresholdFilter => {
            let mut cfg = cfg.clone();
            cfg.augmentation.confidence_threshold = 0.0;
            enhanced_eval(&cfg, dataset)
        }
        Variant::WoDiscriminator => {
            let split = chronological_split(dataset);
            let (gen, _) = train_generator(dataset, &split, cfg)?;
            let train_ds = train_only_dataset(&split, cfg.long_tail.fraction)?;
            let mut cfg = cfg.clone();
            cfg.augmentation.confidence_threshold = 0.0;
            let augmented = augment_train(&train_ds, &gen, &AcceptAll, &cfg)?;
            let stream = augmented.merged_interactions();
            let lists = backend_neighbors(&stream, &cfg.backend, cfg.topk.k)?;
            evaluate_lists(&lists, &split, dataset, &cfg)
        }
        Variant::WoGenerator => {
            // discriminator filters the raw train stream; no synthetic pairs
            let split = chronological_split(dataset);
            let (disc, _) = train_discriminator(dataset, &split, cfg)?;
            let train_ds = train_only_dataset(&split, cfg.long_tail.fraction)?;
            let mut kept = Vec::new();
            for user in train_ds.users() {
                let window = user.truncated(cfg.augmentation.history_window);
                for rec in &user.interactions {
                    match disc.score_pair(&window, &rec.item_id) {
                        Ok(v)
                            if v.decision == Decision::Yes
                                && v.confidence >= cfg.augmentation.confidence_threshold =>
                        {
                            kept.push(rec.clone())
                        }
                        _ => {}
                    }
                }
            }
            // a filter that empties the stream falls back to the raw data
            if kept.is_empty() {
                kept = split.train_interactions();
            }
            let lists = backend_neighbors(&kept, &cfg.backend, cfg.topk.k)?;
            evaluate_lists(&lists, &split, dataset, cfg)
        }
        Variant::WoBackend => {
            // the generator's ranking is served directly
            let split = chronological_split(dataset);
            let (gen, _) = train_generator(dataset, &split, cfg)?;
            let mut predictions = Vec::new();
            let mut excluded = 0usize;
            for us in &split.users {
                let Some(test) = &us.test else { continue };
                if us.train.is_empty() {
                    excluded += 1;
                    continue;
                }
                let history =
                    UserHistory::new(&us.user_id, us.train.clone()).truncated(HISTORY_WINDOW);
                let Ok(list) = gen.generate(&history, cfg.eval.n) else {
                    excluded += 1;
                    continue;
                };
                predictions.push(RankedPrediction {
                    user_id: us.user_id.clone(),
                    ranked_items: list.candidates.into_iter().map(|(id, _)| id).collect(),
                    ground_truth: test.item_id.clone(),
                });
            }
            evaluate_predictions(&predictions, dataset, &cfg.eval.k_values, excluded)
                .map_err(|e| anyhow::anyhow!("evaluation: {e}"))
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridCell {
    pub name: String,
    pub recall_number: usize,
    pub confidence_threshold: f64,
    pub alpha: f64,
    pub beta: f64,
    pub report: EvalReport,
}

pub const CONFIDENCE_SWEEP: [f64; 5] = [0.0, 0.5, 0.8, 0.9, 1.0];
pub const RECALL_NUMBER_SWEEP: [usize; 5] = [1, 3, 5, 10, 20];

#[derive(Debug, thiserror::Error)]
#[error("unknown grid preset {0:?}; expected ablation, confidence, or recall_number")]
pub struct UnknownPreset(pub String);

pub fn run_preset(cfg: &PipelineConfig, dataset: &Dataset, preset: &str) -> Result<Vec<GridCell>> {
    let mut cells = Vec::new();
    match preset {
        "ablation" => {
            for variant in ABLATION_VARIANTS {
                let effective = match variant {
                    Variant::WoLongTailLoss => (1.0, 1.0, cfg.augmentation.confidence_threshold),
                    Variant::WoDiscriminator | Variant::WoThresholdFilter => {
                        (cfg.generator.alpha, cfg.generator.beta, 0.0)
                    }
                    _ => (
                        cfg.generator.alpha,
                        cfg.generator.beta,
                        cfg.augmentation.confidence_threshold,
                    ),
                };
                cells.push(GridCell {
                    name: variant.name().to_string(),
                    recall_number: cfg.augmentation.recall_number,
                    confidence_threshold: effective.2,
                    alpha: effective.0,
                    beta: effective.1,
                    report: run_variant(cfg, dataset, variant)?,
                });
            }
        }
        "confidence" => {
            for threshold in CONFIDENCE_SWEEP {
                let mut cell_cfg = cfg.clone();
                cell_cfg.augmentation.confidence_threshold = threshold;
                cells.push(GridCell {
                    name: format!("confidence_{threshold}"),
                    recall_number: cell_cfg.augmentation.recall_number,
                    confidence_threshold: threshold,
                    alpha: cell_cfg.generator.alpha,
                    beta: cell_cfg.generator.beta,
                    report: enhanced_eval(&cell_cfg, dataset)?,
                });
            }
        }
        "recall_number" => {
            for n in RECALL_NUMBER_SWEEP {
                let mut cell_cfg = cfg.clone();
                cell_cfg.augmentation.recall_number = n;
                cells.push(GridCell {
                    name: format!("recall_{n}"),
                    recall_number: n,
                    confidence_threshold: cell_cfg.augmentation.confidence_threshold,
                    alpha: cell_cfg.generator.alpha,
                    beta: cell_cfg.generator.beta,
                    report: enhanced_eval(&cell_cfg, dataset)?,
                });
            }
        }
        other => return Err(UnknownPreset(other.to_string()).into()),
    }
    Ok(cells)
}

pub fn write_grid_csv(
    path: &std::path::Path,
    cfg: &PipelineConfig,
    cells: &[GridCell],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(sweep_csv_header(&cfg.eval.k_values))?;
    for cell in cells {
        w.write_record(sweep_csv_row(&SweepRow {
            cell: &cell.name,
            backend: cfg.backend.kind.as_str(),
            recall_number: cell.recall_number,
            confidence_threshold: cell.confidence_threshold,
            alpha: cell.alpha,
            beta: cell.beta,
            report: &cell.report,
        }))?;
    }
    w.flush()?;
    Ok(())
}
