//! Next-item candidate generation. The local model is a mean-of-history
//! embedding with a shared output embedding table and per-item bias, trained
//! with a softmax cross-entropy that upweights long-tail targets.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::data::{Dataset, UserHistory};
use crate::rng::SplitMix64;
use crate::split::SplitSpec;

pub const HISTORY_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Loss weight for long-tail targets.
    pub alpha: f64,
    /// Loss weight for everything else.
    pub beta: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            dim: 64,
            learning_rate: 0.05,
            epochs: 5,
            alpha: 4.0,
            beta: 1.0,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorError {
    UnknownItem(String),
    EmptyHistory,
    EmptyTrainSplit,
    BadWeights,
}

impl fmt::Display for GeneratorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorError::UnknownItem(id) => write!(f, "unknown item {id}"),
            GeneratorError::EmptyHistory => write!(f, "history is empty"),
            GeneratorError::EmptyTrainSplit => write!(f, "train split has no samples"),
            GeneratorError::BadWeights => write!(f, "alpha and beta must be positive"),
        }
    }
}

impl core::error::Error for GeneratorError {}

/// Ranked candidates for one user, best first. Never contains an item from
/// the (truncated) input history.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateList {
    pub user_id: String,
    pub candidates: Vec<(String, f64)>,
}

#[derive(Debug, Clone)]
pub struct GeneratorModel {
    pub config: GeneratorConfig,
    /// Sorted item ids; position is the embedding column.
    pub item_ids: Vec<String>,
    /// Row-major |items| x dim.
    pub embeddings: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Dense gradient of one weighted loss term, same layout as the model.
#[derive(Debug, Clone)]
pub struct GeneratorGradient {
    pub embeddings: Vec<f64>,
    pub bias: Vec<f64>,
}

impl GeneratorModel {
    pub fn init(mut item_ids: Vec<String>, config: GeneratorConfig) -> Self {
        item_ids.sort();
        item_ids.dedup();
        let n = item_ids.len();
        let d = config.dim;
        let mut rng = SplitMix64::new(config.seed);
        let embeddings = (0..n * d).map(|_| rng.uniform(-0.01, 0.01)).collect();
        let bias = vec![0.0; n];
        GeneratorModel {
            config,
            item_ids,
            embeddings,
            bias,
        }
    }

    pub fn item_index(&self, item_id: &str) -> Option<usize> {
        self.item_ids
            .binary_search_by(|id| id.as_str().cmp(item_id))
            .ok()
    }

    fn emb(&self, idx: usize) -> &[f64] {
        &self.embeddings[idx * self.config.dim..(idx + 1) * self.config.dim]
    }

    fn history_indices(&self, history: &UserHistory) -> Result<Vec<usize>, GeneratorError> {
        history
            .item_ids()
            .map(|id| {
                self.item_index(id)
                    .ok_or_else(|| GeneratorError::UnknownItem(id.to_owned()))
            })
            .collect()
    }

    fn mean_history(&self, hist: &[usize]) -> Vec<f64> {
        let d = self.config.dim;
        let mut h = vec![0.0; d];
        for &i in hist {
            let e = self.emb(i);
            for k in 0..d {
                h[k] += e[k];
            }
        }
        let inv = 1.0 / hist.len() as f64;
        for v in h.iter_mut() {
            *v *= inv;
        }
        h
    }

    /// Raw scores for every item given a history, score_j = e_j . h + b_j.
    pub fn scores(&self, hist: &[usize]) -> Vec<f64> {
        let h = self.mean_history(hist);
        let d = self.config.dim;
        let mut s = self.bias.clone();
        for (j, sj) in s.iter_mut().enumerate() {
            let e = self.emb(j);
            let mut dot = 0.0;
            for k in 0..d {
                dot += e[k] * h[k];
            }
            *sj += dot;
        }
        s
    }

    /// Weighted cross-entropy of the softmax over all items: w * (log Z - s_target)
    /// with w = alpha for long-tail targets, beta otherwise.
    pub fn weighted_loss(
        &self,
        history: &UserHistory,
        target: &str,
        is_long_tail: bool,
    ) -> Result<f64, GeneratorError> {
        if history.interactions.is_empty() {
            return Err(GeneratorError::EmptyHistory);
        }
        let hist = self.history_indices(history)?;
        let target_idx = self
            .item_index(target)
            .ok_or_else(|| GeneratorError::UnknownItem(target.to_owned()))?;
        let w = if is_long_tail {
            self.config.alpha
        } else {
            self.config.beta
        };
        let (loss, _) = self.loss_and_grad_indices(&hist, target_idx, w);
        Ok(loss)
    }

    /// Loss and full analytic gradient of one weighted sample.
    pub fn weighted_loss_grad(
        &self,
        history: &UserHistory,
        target: &str,
        is_long_tail: bool,
    ) -> Result<(f64, GeneratorGradient), GeneratorError> {
        if history.interactions.is_empty() {
            return Err(GeneratorError::EmptyHistory);
        }
        let hist = self.history_indices(history)?;
        let target_idx = self
            .item_index(target)
            .ok_or_else(|| GeneratorError::UnknownItem(target.to_owned()))?;
        let w = if is_long_tail {
            self.config.alpha
        } else {
            self.config.beta
        };
        Ok(self.loss_and_grad_indices(&hist, target_idx, w))
    }

    fn loss_and_grad_indices(
        &self,
        hist: &[usize],
        target: usize,
        w: f64,
    ) -> (f64, GeneratorGradient) {
        let d = self.config.dim;
        let n = self.item_ids.len();
        let h = self.mean_history(hist);
        // log-sum-exp with max subtraction
        let mut s = self.bias.clone();
        for (j, sj) in s.iter_mut().enumerate() {
            let e = self.emb(j);
            let mut dot = 0.0;
            for k in 0..d {
                dot += e[k] * h[k];
            }
            *sj += dot;
        }
        let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for &sj in &s {
            z += libm::exp(sj - max);
        }
        let log_z = libm::log(z) + max;
        let loss = w * (log_z - s[target]);

        // dL/ds_j = w (p_j - [j == target])
        let mut ds = vec![0.0; n];
        for j in 0..n {
            ds[j] = w * (libm::exp(s[j] - max) / z);
        }
        ds[target] -= w;

        let mut grad_emb = vec![0.0; n * d];
        let mut grad_bias = vec![0.0; n];
        // direct path: s_j depends on e_j via e_j . h, and on b_j
        for j in 0..n {
            grad_bias[j] = ds[j];
            let g = &mut grad_emb[j * d..(j + 1) * d];
            for k in 0..d {
                g[k] += ds[j] * h[k];
            }
        }
        // history path: h = mean of history embeddings, every s_j flows back
        let mut gh = vec![0.0; d]; // sum_j ds_j * e_j
        for j in 0..n {
            let e = self.emb(j);
            for k in 0..d {
                gh[k] += ds[j] * e[k];
            }
        }
        let inv = 1.0 / hist.len() as f64;
        for &i in hist {
            let g = &mut grad_emb[i * d..(i + 1) * d];
            for k in 0..d {
                g[k] += inv * gh[k];
            }
        }
        (
            loss,
            GeneratorGradient {
                embeddings: grad_emb,
                bias: grad_bias,
            },
        )
    }

    fn apply_gradient(&mut self, grad: &GeneratorGradient, lr: f64) {
        for (p, g) in self.embeddings.iter_mut().zip(&grad.embeddings) {
            *p -= lr * g;
        }
        for (p, g) in self.bias.iter_mut().zip(&grad.bias) {
            *p -= lr * g;
        }
    }

    /// Top-n candidates for a history, which is truncated to the most recent
    /// ten interactions before scoring. Items in the truncated history are
    /// excluded.
    pub fn generate(
        &self,
        history: &UserHistory,
        n: usize,
    ) -> Result<CandidateList, GeneratorError> {
        let truncated = history.truncated(HISTORY_WINDOW);
        if truncated.interactions.is_empty() {
            return Err(GeneratorError::EmptyHistory);
        }
        let hist = self.history_indices(&truncated)?;
        let exclude: BTreeSet<usize> = hist.iter().cloned().collect();
        let scores = self.scores(&hist);
        let mut ranked: Vec<(usize, f64)> = scores
            .into_iter()
            .enumerate()
            .filter(|(j, _)| !exclude.contains(j))
            .collect();
        ranked.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.item_ids[a.0].cmp(&self.item_ids[b.0]))
        });
        ranked.truncate(n);
        Ok(CandidateList {
            user_id: history.user_id.clone(),
            candidates: ranked
                .into_iter()
                .map(|(j, s)| (self.item_ids[j].clone(), s))
                .collect(),
        })
    }

    /// Trains on every (history-prefix, next-item) pair of the train split,
    /// one weighted SGD step per pair per epoch. Returns the model and the
    /// per-epoch mean losses.
    pub fn train(
        dataset: &Dataset,
        split: &SplitSpec,
        config: GeneratorConfig,
    ) -> Result<(GeneratorModel, Vec<f64>), GeneratorError> {
        if !(config.alpha > 0.0 && config.beta > 0.0) {
            return Err(GeneratorError::BadWeights);
        }
        let item_ids: Vec<String> = dataset.items().iter().map(|i| i.item_id.clone()).collect();
        let mut model = GeneratorModel::init(item_ids, config);
        let long_tail: Vec<bool> = model
            .item_ids
            .iter()
            .map(|id| dataset.is_long_tail(id))
            .collect();

        // (history item indices, target index) samples in canonical user order
        let mut samples: Vec<(Vec<usize>, usize)> = Vec::new();
        for us in &split.users {
            let idx: Vec<usize> = us
                .train
                .iter()
                .filter_map(|i| model.item_index(&i.item_id))
                .collect();
            for t in 1..idx.len() {
                samples.push((idx[..t].to_vec(), idx[t]));
            }
        }
        if samples.is_empty() {
            return Err(GeneratorError::EmptyTrainSplit);
        }

        let lr = model.config.learning_rate;
        let mut epoch_losses = Vec::with_capacity(model.config.epochs);
        for _ in 0..model.config.epochs {
            let mut total = 0.0;
            for (hist, target) in &samples {
                let w = if long_tail[*target] {
                    model.config.alpha
                } else {
                    model.config.beta
                };
                let (loss, grad) = model.loss_and_grad_indices(hist, *target, w);
                model.apply_gradient(&grad, lr);
                total += loss;
            }
            epoch_losses.push(total / samples.len() as f64);
        }
        Ok((model, epoch_losses))
    }
}
