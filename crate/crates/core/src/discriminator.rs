//! Confidence scoring of (user, item) pairs. The local model is a bilinear
//! user x item logistic scorer trained on observed positives against
//! globally sampled negatives.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::data::{Dataset, UserHistory};
use crate::prompt::Decision;
use crate::rng::SplitMix64;
use crate::split::SplitSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorConfig {
    pub dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Negatives sampled per positive.
    pub neg_ratio: usize,
    pub seed: u64,
}

impl Default for DiscriminatorConfig {
    fn default() -> Self {
        DiscriminatorConfig {
            dim: 32,
            learning_rate: 0.05,
            epochs: 5,
            neg_ratio: 1,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiscriminatorError {
    UnknownUser(String),
    UnknownItem(String),
    EmptyTrainSplit,
    NegativesUnsatisfiable { requested: usize, available: usize },
    BadNegRatio,
}

impl fmt::Display for DiscriminatorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiscriminatorError::UnknownUser(id) => write!(f, "unknown user {id}"),
            DiscriminatorError::UnknownItem(id) => write!(f, "unknown item {id}"),
            DiscriminatorError::EmptyTrainSplit => write!(f, "train split has no samples"),
            DiscriminatorError::NegativesUnsatisfiable {
                requested,
                available,
            } => write!(
                f,
                "requested {requested} negatives but only {available} items are available"
            ),
            DiscriminatorError::BadNegRatio => write!(f, "neg_ratio must be at least 1"),
        }
    }
}

impl core::error::Error for DiscriminatorError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledPair<'a> {
    pub user_id: &'a str,
    pub item_id: &'a str,
    pub label: u8,
}

/// A scored pair: yes iff confidence >= 0.5 for the local model.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub user_id: String,
    pub item_id: String,
    pub decision: Decision,
    pub confidence: f64,
}

/// Uniformly samples `count` items the user has not interacted with.
/// Deterministic under the seed, no duplicates.
pub fn sample_negatives(
    dataset: &Dataset,
    user_id: &str,
    count: usize,
    seed: u64,
) -> Result<Vec<String>, DiscriminatorError> {
    let user = dataset
        .user(user_id)
        .ok_or_else(|| DiscriminatorError::UnknownUser(user_id.to_owned()))?;
    let positives: BTreeSet<&str> = user.item_ids().collect();
    let mut pool: Vec<usize> = (0..dataset.items().len())
        .filter(|&i| !positives.contains(dataset.items()[i].item_id.as_str()))
        .collect();
    if count > pool.len() {
        return Err(DiscriminatorError::NegativesUnsatisfiable {
            requested: count,
            available: pool.len(),
        });
    }
    let mut rng = SplitMix64::new(seed);
    let picked = rng.sample_distinct(&mut pool, count);
    Ok(picked
        .into_iter()
        .map(|i| dataset.items()[i].item_id.clone())
        .collect())
}

#[derive(Debug, Clone)]
pub struct DiscriminatorModel {
    pub config: DiscriminatorConfig,
    pub user_ids: Vec<String>,
    pub item_ids: Vec<String>,
    /// Row-major |users| x dim.
    pub user_embeddings: Vec<f64>,
    /// Row-major |items| x dim.
    pub item_embeddings: Vec<f64>,
    pub bias: f64,
}

/// Gradient of one BCE term: the touched user row, item row, and bias.
#[derive(Debug, Clone)]
pub struct DiscriminatorGradient {
    pub user: Vec<f64>,
    pub item: Vec<f64>,
    pub bias: f64,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

impl DiscriminatorModel {
    pub fn init(
        mut user_ids: Vec<String>,
        mut item_ids: Vec<String>,
        config: DiscriminatorConfig,
    ) -> Self {
        user_ids.sort();
        user_ids.dedup();
        item_ids.sort();
        item_ids.dedup();
        let d = config.dim;
        let mut rng = SplitMix64::new(config.seed);
        let user_embeddings = (0..user_ids.len() * d).map(|_| rng.uniform(-0.01, 0.01)).collect();
        let item_embeddings = (0..item_ids.len() * d).map(|_| rng.uniform(-0.01, 0.01)).collect();
        DiscriminatorModel {
            config,
            user_ids,
            item_ids,
            user_embeddings,
            item_embeddings,
            bias: 0.0,
        }
    }

    pub fn user_index(&self, id: &str) -> Option<usize> {
        self.user_ids.binary_search_by(|u| u.as_str().cmp(id)).ok()
    }

    pub fn item_index(&self, id: &str) -> Option<usize> {
        self.item_ids.binary_search_by(|i| i.as_str().cmp(id)).ok()
    }

    fn user_emb(&self, idx: usize) -> &[f64] {
        &self.user_embeddings[idx * self.config.dim..(idx + 1) * self.config.dim]
    }

    fn item_emb(&self, idx: usize) -> &[f64] {
        &self.item_embeddings[idx * self.config.dim..(idx + 1) * self.config.dim]
    }

    fn raw_score(&self, user_vec: &[f64], item_idx: usize) -> f64 {
        let e = self.item_emb(item_idx);
        let mut dot = self.bias;
        for k in 0..self.config.dim {
            dot += user_vec[k] * e[k];
        }
        dot
    }

    /// Binary cross-entropy of sigma(u . v + b) against the label.
    pub fn loss(&self, pair: &LabeledPair) -> Result<f64, DiscriminatorError> {
        let u = self
            .user_index(pair.user_id)
            .ok_or_else(|| DiscriminatorError::UnknownUser(pair.user_id.to_owned()))?;
        let i = self
            .item_index(pair.item_id)
            .ok_or_else(|| DiscriminatorError::UnknownItem(pair.item_id.to_owned()))?;
        Ok(self.loss_indices(u, i, pair.label).0)
    }

    pub fn loss_grad(
        &self,
        pair: &LabeledPair,
    ) -> Result<(f64, DiscriminatorGradient), DiscriminatorError> {
        let u = self
            .user_index(pair.user_id)
            .ok_or_else(|| DiscriminatorError::UnknownUser(pair.user_id.to_owned()))?;
        let i = self
            .item_index(pair.item_id)
            .ok_or_else(|| DiscriminatorError::UnknownItem(pair.item_id.to_owned()))?;
        Ok(self.loss_indices(u, i, pair.label))
    }

    fn loss_indices(&self, u: usize, i: usize, label: u8) -> (f64, DiscriminatorGradient) {
        let d = self.config.dim;
        let s = self.raw_score(self.user_emb(u), i);
        let p = sigmoid(s);
        let y = label as f64;
        // numerically stable BCE: max(s,0) - s*y + ln(1 + e^{-|s|})
        let loss = if s > 0.0 { s } else { 0.0 } - s * y + libm::log(1.0 + libm::exp(-libm::fabs(s)));
        let ds = p - y;
        let ue = self.user_emb(u);
        let ie = self.item_emb(i);
        let mut gu = vec![0.0; d];
        let mut gi = vec![0.0; d];
        for k in 0..d {
            gu[k] = ds * ie[k];
            gi[k] = ds * ue[k];
        }
        (
            loss,
            DiscriminatorGradient {
                user: gu,
                item: gi,
                bias: ds,
            },
        )
    }

    fn sgd_step(&mut self, u: usize, i: usize, grad: &DiscriminatorGradient, lr: f64) {
        let d = self.config.dim;
        for k in 0..d {
            self.user_embeddings[u * d + k] -= lr * grad.user[k];
            self.item_embeddings[i * d + k] -= lr * grad.item[k];
        }
        self.bias -= lr * grad.bias;
    }

    /// Confidence for a (user, item) pair. Users unseen at training time fall
    /// back to the mean of their history's item embeddings.
    pub fn score_pair(
        &self,
        history: &UserHistory,
        item_id: &str,
    ) -> Result<Verdict, DiscriminatorError> {
        let i = self
            .item_index(item_id)
            .ok_or_else(|| DiscriminatorError::UnknownItem(item_id.to_owned()))?;
        let d = self.config.dim;
        let user_vec: Vec<f64> = match self.user_index(&history.user_id) {
            Some(u) => self.user_emb(u).to_vec(),
            None => {
                // cold user: mean of known history item embeddings
                let mut acc = vec![0.0; d];
                let mut n = 0usize;
                for id in history.item_ids() {
                    if let Some(j) = self.item_index(id) {
                        let e = self.item_emb(j);
                        for k in 0..d {
                            acc[k] += e[k];
                        }
                        n += 1;
                    }
                }
                if n > 0 {
                    let inv = 1.0 / n as f64;
                    for v in acc.iter_mut() {
                        *v *= inv;
                    }
                }
                acc
            }
        };
        let confidence = sigmoid(self.raw_score(&user_vec, i));
        let decision = if confidence >= 0.5 {
            Decision::Yes
        } else {
            Decision::No
        };
        Ok(Verdict {
            user_id: history.user_id.clone(),
            item_id: item_id.to_owned(),
            decision,
            confidence,
        })
    }

    /// Trains on every train-split interaction as a positive plus
    /// neg_ratio globally sampled negatives per positive.
    pub fn train(
        dataset: &Dataset,
        split: &SplitSpec,
        config: DiscriminatorConfig,
    ) -> Result<(DiscriminatorModel, Vec<f64>), DiscriminatorError> {
        if config.neg_ratio < 1 {
            return Err(DiscriminatorError::BadNegRatio);
        }
        let user_ids: Vec<String> = dataset.users().iter().map(|u| u.user_id.clone()).collect();
        let item_ids: Vec<String> = dataset.items().iter().map(|i| i.item_id.clone()).collect();
        let mut model = DiscriminatorModel::init(user_ids, item_ids, config);

        // (user idx, item idx, label) triples; negatives resampled per epoch
        let mut positives: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut total_pos = 0usize;
        for us in &split.users {
            let Some(u) = model.user_index(&us.user_id) else {
                continue;
            };
            let items: Vec<usize> = us
                .train
                .iter()
                .filter_map(|i| model.item_index(&i.item_id))
                .collect();
            if !items.is_empty() {
                total_pos += items.len();
                positives.push((u, items));
            }
        }
        if total_pos == 0 {
            return Err(DiscriminatorError::EmptyTrainSplit);
        }

        let lr = model.config.learning_rate;
        let base_rng = SplitMix64::new(model.config.seed ^ 0x6e67_5f73_616d_706c);
        let mut epoch_losses = Vec::with_capacity(model.config.epochs);
        for epoch in 0..model.config.epochs {
            let mut total = 0.0;
            let mut terms = 0usize;
            for (u, items) in &positives {
                let user_id = &model.user_ids[*u];
                let want = items.len() * model.config.neg_ratio;
                let seed = base_rng
                    .derive(epoch as u64)
                    .derive(*u as u64)
                    .next_u64();
                let negatives = match sample_negatives(dataset, user_id, want, seed) {
                    Ok(n) => n,
                    // tiny catalogs: take whatever is available
                    Err(DiscriminatorError::NegativesUnsatisfiable { available, .. }) => {
                        sample_negatives(dataset, user_id, available, seed)?
                    }
                    Err(e) => return Err(e),
                };
                for &i in items {
                    let (loss, grad) = model.loss_indices(*u, i, 1);
                    model.sgd_step(*u, i, &grad, lr);
                    total += loss;
                    terms += 1;
                }
                for neg in &negatives {
                    let i = model.item_index(neg).expect("negative from catalog");
                    let (loss, grad) = model.loss_indices(*u, i, 0);
                    model.sgd_step(*u, i, &grad, lr);
                    total += loss;
                    terms += 1;
                }
            }
            epoch_losses.push(total / terms as f64);
        }
        Ok((model, epoch_losses))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{EventType, Interaction};
    use crate::split::chronological_split;

    fn click(u: &str, i: &str, ts: i64) -> Interaction {
        Interaction::new(u, i, ts, EventType::Click)
    }

    fn small_dataset() -> Dataset {
        Dataset::from_interactions(alloc::vec![
            click("u1", "a", 1),
            click("u1", "b", 2),
            click("u2", "c", 1),
            click("u2", "d", 2),
            click("u2", "e", 3),
        ])
        .unwrap()
    }

    fn zero_model(ds: &Dataset) -> DiscriminatorModel {
        let mut m = DiscriminatorModel::init(
            ds.users().iter().map(|u| u.user_id.clone()).collect(),
            ds.items().iter().map(|i| i.item_id.clone()).collect(),
            DiscriminatorConfig {
                dim: 4,
                ..Default::default()
            },
        );
        m.user_embeddings.iter_mut().for_each(|v| *v = 0.0);
        m.item_embeddings.iter_mut().for_each(|v| *v = 0.0);
        m
    }

    #[test]
    fn negatives_exclude_positives() {
        let ds = small_dataset();
        let negs = sample_negatives(&ds, "u1", 3, 7).unwrap();
        let mut sorted = negs.clone();
        sorted.sort();
        assert_eq!(sorted, alloc::vec!["c", "d", "e"]);
    }

    #[test]
    fn negatives_shortfall_errors() {
        let ds = small_dataset();
        let err = sample_negatives(&ds, "u1", 4, 7).unwrap_err();
        assert_eq!(
            err,
            DiscriminatorError::NegativesUnsatisfiable {
                requested: 4,
                available: 3
            }
        );
    }

    #[test]
    fn negatives_deterministic_under_seed() {
        let ds = small_dataset();
        assert_eq!(
            sample_negatives(&ds, "u2", 2, 99).unwrap(),
            sample_negatives(&ds, "u2", 2, 99).unwrap()
        );
    }

    #[test]
    fn zero_model_loss_is_ln2() {
        let ds = small_dataset();
        let m = zero_model(&ds);
        for label in [0u8, 1u8] {
            let loss = m
                .loss(&LabeledPair {
                    user_id: "u1",
                    item_id: "c",
                    label,
                })
                .unwrap();
            assert!((loss - libm::log(2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_matches_hand_computed_bce() {
        let ds = small_dataset();
        let mut m = zero_model(&ds);
        let mut rng = SplitMix64::new(5);
        m.user_embeddings.iter_mut().for_each(|v| *v = rng.uniform(-1.0, 1.0));
        m.item_embeddings.iter_mut().for_each(|v| *v = rng.uniform(-1.0, 1.0));
        m.bias = rng.uniform(-1.0, 1.0);
        let u = m.user_index("u2").unwrap();
        let i = m.item_index("a").unwrap();
        let s = m.raw_score(m.user_emb(u), i);
        let p = sigmoid(s);
        for (label, expected) in [(1u8, -libm::log(p)), (0u8, -libm::log(1.0 - p))] {
            let loss = m
                .loss(&LabeledPair {
                    user_id: "u2",
                    item_id: "a",
                    label,
                })
                .unwrap();
            assert!((loss - expected).abs() < 1e-12, "{loss} vs {expected}");
        }
    }

    #[test]
    fn score_pair_zero_model_is_half_yes() {
        let ds = small_dataset();
        let m = zero_model(&ds);
        let v = m.score_pair(ds.user("u1").unwrap(), "c").unwrap();
        assert_eq!(v.confidence, 0.5);
        assert_eq!(v.decision, Decision::Yes);
    }

    #[test]
    fn score_pair_is_pure() {
        let ds = small_dataset();
        let (m, _) = DiscriminatorModel::train(
            &ds,
            &chronological_split(&ds),
            DiscriminatorConfig {
                dim: 4,
                epochs: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let h = ds.user("u2").unwrap();
        let a = m.score_pair(h, "a").unwrap();
        let b = m.score_pair(h, "a").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cold_user_scored_via_history_mean() {
        let ds = small_dataset();
        let (m, _) = DiscriminatorModel::train(
            &ds,
            &chronological_split(&ds),
            DiscriminatorConfig {
                dim: 4,
                epochs: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let cold = UserHistory::new("stranger", alloc::vec![click("stranger", "a", 1)]);
        let v = m.score_pair(&cold, "b").unwrap();
        assert!((0.0..=1.0).contains(&v.confidence));
    }

    #[test]
    fn epochs_zero_keeps_init() {
        let ds = small_dataset();
        let split = chronological_split(&ds);
        let cfg = DiscriminatorConfig {
            epochs: 0,
            ..Default::default()
        };
        let (m, _) = DiscriminatorModel::train(&ds, &split, cfg.clone()).unwrap();
        let init = DiscriminatorModel::init(
            ds.users().iter().map(|u| u.user_id.clone()).collect(),
            ds.items().iter().map(|i| i.item_id.clone()).collect(),
            cfg,
        );
        assert_eq!(m.user_embeddings, init.user_embeddings);
        assert_eq!(m.item_embeddings, init.item_embeddings);
    }

    #[test]
    fn training_reduces_loss_and_separates() {
        let ds = small_dataset();
        let split = chronological_split(&ds);
        let (m, losses) = DiscriminatorModel::train(
            &ds,
            &split,
            DiscriminatorConfig {
                dim: 8,
                epochs: 50,
                learning_rate: 0.2,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(losses.last().unwrap() < &losses[0]);
        // u2's positives should outscore a global negative on average
        let h = ds.user("u2").unwrap();
        let pos = m.score_pair(h, "c").unwrap().confidence;
        let neg = m.score_pair(h, "a").unwrap().confidence;
        assert!(pos > neg, "pos {pos} vs neg {neg}");
    }
}
