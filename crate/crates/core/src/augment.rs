//! The generate -> judge -> filter -> merge pipeline that turns a trained
//! generator and discriminator into extra training interactions.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::data::{Dataset, EventType, Interaction, UserHistory};
use crate::discriminator::{DiscriminatorModel, Verdict};
use crate::generator::{CandidateList, GeneratorModel};
use crate::prompt::Decision;

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationConfig {
    /// Candidates generated per user before filtering.
    pub recall_number: usize,
    /// Minimum discriminator confidence for acceptance.
    pub confidence_threshold: f64,
    /// History length fed to the generator and discriminator.
    pub history_window: usize,
    pub seed: u64,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        AugmentationConfig {
            recall_number: 3,
            confidence_threshold: 1.0,
            history_window: 10,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCandidate {
    pub user_id: String,
    pub item_id: String,
    pub generator_score: f64,
    pub decision: Decision,
    pub confidence: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AugmentationReport {
    pub users_processed: usize,
    pub candidates_generated: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub skipped_users: usize,
    /// Candidates dropped because the pair already exists in the original data.
    pub duplicates_dropped: usize,
}

/// The original dataset plus the accepted synthetic pairs.
#[derive(Debug, Clone)]
pub struct AugmentedDataset {
    pub original: Dataset,
    pub accepted: Vec<SyntheticCandidate>,
    pub report: AugmentationReport,
}

impl AugmentedDataset {
    /// Original interactions plus one synthetic interaction per accepted
    /// candidate, timestamped one past the user's last real interaction.
    pub fn merged_interactions(&self) -> Vec<Interaction> {
        merge(&self.original, &self.accepted).0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AugmentError {
    BadConfig(&'static str),
    UnknownUser(String),
    UnknownItem(String),
}

impl fmt::Display for AugmentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AugmentError::BadConfig(msg) => write!(f, "bad augmentation config: {msg}"),
            AugmentError::UnknownUser(id) => write!(f, "unknown user {id}"),
            AugmentError::UnknownItem(id) => write!(f, "unknown item {id}"),
        }
    }
}

impl core::error::Error for AugmentError {}

/// A per-user failure from a port (e.g. a remote endpoint error). The
/// pipeline skips the user and keeps going.
#[derive(Debug, Clone, PartialEq)]
pub struct PortError(pub String);

impl fmt::Display for PortError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "port failure: {}", self.0)
    }
}

impl core::error::Error for PortError {}

/// Candidate source: the local model or a remote endpoint client.
pub trait CandidateGenerator {
    fn generate(&self, history: &UserHistory, n: usize) -> Result<CandidateList, PortError>;
}

/// Candidate judge: the local model or a remote yes/no endpoint client.
pub trait CandidateJudge {
    fn judge(&self, history: &UserHistory, item_id: &str) -> Result<Verdict, PortError>;
}

impl CandidateGenerator for GeneratorModel {
    fn generate(&self, history: &UserHistory, n: usize) -> Result<CandidateList, PortError> {
        GeneratorModel::generate(self, history, n).map_err(|e| PortError(alloc::format!("{e}")))
    }
}

impl CandidateJudge for DiscriminatorModel {
    fn judge(&self, history: &UserHistory, item_id: &str) -> Result<Verdict, PortError> {
        self.score_pair(history, item_id)
            .map_err(|e| PortError(alloc::format!("{e}")))
    }
}

/// Keeps exactly the candidates with a yes decision and confidence at or
/// above the threshold, input order preserved.
pub fn filter_candidates(
    candidates: &[SyntheticCandidate],
    threshold: f64,
) -> Vec<SyntheticCandidate> {
    candidates
        .iter()
        .filter(|c| c.decision == Decision::Yes && c.confidence >= threshold)
        .cloned()
        .collect()
}

/// Runs the full per-user generate/judge/filter loop over the dataset.
pub fn augment(
    dataset: &Dataset,
    gen: &dyn CandidateGenerator,
    judge: &dyn CandidateJudge,
    config: &AugmentationConfig,
) -> Result<AugmentedDataset, AugmentError> {
    if config.recall_number < 1 {
        return Err(AugmentError::BadConfig("recall_number must be >= 1"));
    }
    if !(0.0..=1.0).contains(&config.confidence_threshold) {
        return Err(AugmentError::BadConfig(
            "confidence_threshold outside [0, 1]",
        ));
    }
    let mut report = AugmentationReport::default();
    let mut accepted = Vec::new();
    for user in dataset.users() {
        let window = user.truncated(config.history_window);
        if window.interactions.is_empty() {
            continue;
        }
        let positives: BTreeSet<&str> = user.item_ids().collect();
        let candidates = match gen.generate(&window, config.recall_number) {
            Ok(c) => c,
            Err(_) => {
                report.skipped_users += 1;
                continue;
            }
        };
        let mut user_failed = false;
        let mut scored: Vec<SyntheticCandidate> = Vec::new();
        for (item_id, gen_score) in &candidates.candidates {
            if positives.contains(item_id.as_str()) {
                report.duplicates_dropped += 1;
                continue;
            }
            match judge.judge(&window, item_id) {
                Ok(v) => scored.push(SyntheticCandidate {
                    user_id: user.user_id.clone(),
                    item_id: item_id.clone(),
                    generator_score: *gen_score,
                    decision: v.decision,
                    confidence: v.confidence,
                    accepted: false,
                }),
                Err(_) => {
                    user_failed = true;
                    break;
                }
            }
        }
        if user_failed {
            report.skipped_users += 1;
            continue;
        }
        report.users_processed += 1;
        report.candidates_generated += candidates.candidates.len();
        let mut kept = filter_candidates(&scored, config.confidence_threshold);
        kept.truncate(config.recall_number);
        report.accepted += kept.len();
        report.rejected += scored.len() - kept.len();
        for mut c in kept {
            c.accepted = true;
            accepted.push(c);
        }
    }
    // canonical output order regardless of processing order
    accepted.sort_by(|a, b| (&a.user_id, &a.item_id).cmp(&(&b.user_id, &b.item_id)));
    Ok(AugmentedDataset {
        original: dataset.clone(),
        accepted,
        report,
    })
}

/// Appends one synthetic interaction per accepted candidate to the original
/// stream. Pairs that duplicate an original interaction are dropped and
/// counted. Returns the merged stream and the dropped count.
pub fn merge(dataset: &Dataset, accepted: &[SyntheticCandidate]) -> (Vec<Interaction>, usize) {
    let mut stream: Vec<Interaction> = dataset.all_interactions().cloned().collect();
    let mut dropped = 0usize;
    for cand in accepted {
        let Some(user) = dataset.user(&cand.user_id) else {
            dropped += 1;
            continue;
        };
        if user.item_ids().any(|id| id == cand.item_id) {
            dropped += 1;
            continue;
        }
        let last_ts = user
            .interactions
            .last()
            .map(|i| i.timestamp)
            .unwrap_or(0);
        stream.push(Interaction {
            user_id: cand.user_id.clone(),
            item_id: cand.item_id.clone(),
            timestamp: last_ts + 1,
            event_type: EventType::Click,
        });
    }
    (stream, dropped)
}

/// Validates merge preconditions strictly: unknown user or item references
/// are errors rather than drops.
pub fn merge_strict(
    dataset: &Dataset,
    accepted: &[SyntheticCandidate],
) -> Result<(Vec<Interaction>, usize), AugmentError> {
    for cand in accepted {
        if dataset.user(&cand.user_id).is_none() {
            return Err(AugmentError::UnknownUser(cand.user_id.clone()));
        }
        if dataset.item(&cand.item_id).is_none() {
            return Err(AugmentError::UnknownItem(cand.item_id.clone()));
        }
    }
    Ok(merge(dataset, accepted))
}
