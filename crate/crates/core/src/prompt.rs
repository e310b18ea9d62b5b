//! Prompt rendering for remote endpoints and parsing of their responses.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::data::{Dataset, UserHistory};
use crate::generator::{CandidateList, HISTORY_WINDOW};

/// A prompt template with `{history}` and `{profile}` placeholders.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplate {
    pub id: String,
    pub text: String,
}

impl PromptTemplate {
    pub fn new(id: &str, text: &str) -> Self {
        PromptTemplate {
            id: id.to_owned(),
            text: text.to_owned(),
        }
    }

    pub fn default_generation() -> Self {
        PromptTemplate::new(
            "generation-default",
            "{profile}The user interacted with the following items, oldest first:\n{history}\nPredict item IDs this user is likely to interact with next. Output one item ID per line, nothing else.",
        )
    }

    pub fn default_discrimination() -> Self {
        PromptTemplate::new(
            "discrimination-default",
            "{profile}The user interacted with the following items, oldest first:\n{history}\nCandidate item:\n{candidate}\nWould this user interact with the candidate item? Answer Yes or No.",
        )
    }
}

/// A rendered generation prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationPrompt {
    pub template_id: String,
    pub rendered_text: String,
}

fn item_line(dataset: &Dataset, item_id: &str) -> String {
    match dataset.item(item_id).and_then(|r| r.title.as_deref()) {
        Some(title) => format!("{item_id} ({title})"),
        None => item_id.to_owned(),
    }
}

fn history_block(history: &UserHistory, dataset: &Dataset) -> String {
    let mut out = String::new();
    for (pos, item_id) in history.item_ids().enumerate() {
        if pos > 0 {
            out.push('\n');
        }
        out.push_str(&format!("{}. {}", pos + 1, item_line(dataset, item_id)));
    }
    out
}

fn profile_block(history: &UserHistory) -> String {
    if history.static_features.is_empty() {
        return String::new();
    }
    let mut out = String::from("User profile:\n");
    for (k, v) in &history.static_features {
        out.push_str(&format!("{k}: {v}\n"));
    }
    out
}

/// Renders a generation prompt from the user's most recent ten interactions.
pub fn build_generation_prompt(
    history: &UserHistory,
    dataset: &Dataset,
    template: &PromptTemplate,
) -> GenerationPrompt {
    let truncated = history.truncated(HISTORY_WINDOW);
    let rendered = template
        .text
        .replace("{profile}", &profile_block(&truncated))
        .replace("{history}", &history_block(&truncated, dataset));
    GenerationPrompt {
        template_id: template.id.clone(),
        rendered_text: rendered,
    }
}

/// Renders a yes/no judgment prompt for one candidate item.
pub fn build_discrimination_prompt(
    history: &UserHistory,
    candidate_item: &str,
    dataset: &Dataset,
    template: &PromptTemplate,
) -> String {
    let truncated = history.truncated(HISTORY_WINDOW);
    template
        .text
        .replace("{profile}", &profile_block(&truncated))
        .replace("{history}", &history_block(&truncated, dataset))
        .replace("{candidate}", &item_line(dataset, candidate_item))
}

/// Matches response lines against the catalog. Unknown (hallucinated) IDs
/// are dropped and counted; duplicates keep the first occurrence; scores are
/// 1/rank since the endpoint exposes no calibrated score.
pub fn parse_generation_response(
    text: &str,
    dataset: &Dataset,
    user_id: &str,
) -> (CandidateList, usize) {
    let mut seen: alloc::collections::BTreeSet<&str> = alloc::collections::BTreeSet::new();
    let mut candidates = Vec::new();
    let mut dropped = 0usize;
    for line in text.lines() {
        let id = line.trim();
        if id.is_empty() {
            continue;
        }
        if dataset.item(id).is_none() {
            dropped += 1;
            continue;
        }
        if !seen.insert(id) {
            continue;
        }
        let rank = candidates.len() + 1;
        candidates.push((id.to_owned(), 1.0 / rank as f64));
    }
    (
        CandidateList {
            user_id: user_id.to_owned(),
            candidates,
        },
        dropped,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Yes,
    No,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerdictParseError {
    pub text: String,
}

impl fmt::Display for VerdictParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "no yes/no verdict in response: {:?}", self.text)
    }
}

impl core::error::Error for VerdictParseError {}

/// Reads the leading yes/no token, case-insensitive. Confidence is the
/// token's probability when `token_scores` is present, else 1.0 for a bare
/// verdict.
pub fn parse_verdict(
    text: &str,
    token_scores: Option<&BTreeMap<String, f64>>,
) -> Result<(Decision, f64), VerdictParseError> {
    let head: String = text
        .trim_start()
        .chars()
        .take_while(|c| c.is_alphabetic())
        .collect();
    let decision = if head.eq_ignore_ascii_case("yes") {
        Decision::Yes
    } else if head.eq_ignore_ascii_case("no") {
        Decision::No
    } else {
        return Err(VerdictParseError {
            text: text.to_owned(),
        });
    };
    let confidence = token_scores
        .and_then(|scores| {
            scores
                .iter()
                .find(|(tok, _)| tok.eq_ignore_ascii_case(&head))
                .map(|(_, p)| *p)
        })
        .unwrap_or(1.0);
    Ok((decision, confidence.clamp(0.0, 1.0)))
}
