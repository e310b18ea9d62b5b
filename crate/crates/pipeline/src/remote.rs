//! Chat-completion HTTP clients that plug into the augmentation ports.
//! Request shape: {model, messages:[{role, content}]}; response shape:
//! {choices:[{message:{content}}]}. The credential is read from the
//! environment variable named in the config, never from the file itself.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use i2i_core::augment::{CandidateGenerator, CandidateJudge, PortError};
use i2i_core::data::{Dataset, UserHistory};
use i2i_core::discriminator::Verdict;
use i2i_core::generator::CandidateList;
use i2i_core::prompt::{
    build_discrimination_prompt, build_generation_prompt, parse_generation_response,
    parse_verdict, PromptTemplate,
};

use crate::config::LlmConfig;

#[derive(Debug, Clone)]
pub struct RemoteEndpoint {
    pub url: String,
    pub model: String,
    pub credential: Option<String>,
    pub request_token_scores: bool,
    pub timeout: Duration,
}

impl RemoteEndpoint {
    pub fn from_config(cfg: &LlmConfig) -> Self {
        RemoteEndpoint {
            url: format!("{}/chat/completions", cfg.base_url.trim_end_matches('/')),
            model: cfg.model.clone(),
            credential: std::env::var(&cfg.credential_env).ok(),
            request_token_scores: cfg.request_token_scores,
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    logprobs: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    top_logprobs: Option<u32>,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: MessageContent,
    #[serde(default)]
    logprobs: Option<Logprobs>,
}

#[derive(Deserialize)]
struct MessageContent {
    content: String,
}

#[derive(Deserialize)]
struct Logprobs {
    #[serde(default)]
    content: Vec<TokenLogprob>,
}

#[derive(Deserialize)]
struct TokenLogprob {
    #[serde(default)]
    top_logprobs: Vec<TopLogprob>,
}

#[derive(Deserialize)]
struct TopLogprob {
    token: String,
    logprob: f64,
}

struct Completion {
    content: String,
    /// First-token alternatives as probabilities, when the endpoint returned
    /// them.
    token_scores: Option<BTreeMap<String, f64>>,
}

fn complete(endpoint: &RemoteEndpoint, prompt: &str) -> Result<Completion, PortError> {
    let client = reqwest::blocking::Client::builder()
        .timeout(endpoint.timeout)
        .build()
        .map_err(|e| PortError(e.to_string()))?;
    let body = ChatRequest {
        model: &endpoint.model,
        messages: vec![ChatMessage {
            role: "user",
            content: prompt,
        }],
        logprobs: endpoint.request_token_scores.then_some(true),
        top_logprobs: endpoint.request_token_scores.then_some(5),
    };
    let mut req = client.post(&endpoint.url).json(&body);
    if let Some(cred) = &endpoint.credential {
        req = req.bearer_auth(cred);
    }
    let resp = req.send().map_err(|e| PortError(e.to_string()))?;
    let status = resp.status();
    if !status.is_success() {
        return Err(PortError(format!("endpoint returned {status}")));
    }
    let parsed: ChatResponse = resp.json().map_err(|e| PortError(e.to_string()))?;
    let choice = parsed
        .choices
        .into_iter()
        .next()
        .ok_or_else(|| PortError("response has no choices".to_string()))?;
    let token_scores = choice.logprobs.and_then(|lp| {
        lp.content.first().map(|t| {
            t.top_logprobs
                .iter()
                .map(|alt| (alt.token.clone(), alt.logprob.exp()))
                .collect()
        })
    });
    Ok(Completion {
        content: choice.message.content,
        token_scores,
    })
}

/// Remote candidate generator: renders the generation prompt, sends it, and
/// parses item ids back, dropping anything not in the catalog.
pub struct RemoteGenerator {
    pub endpoint: RemoteEndpoint,
    pub template: PromptTemplate,
    pub dataset: Dataset,
}

impl CandidateGenerator for RemoteGenerator {
    fn generate(&self, history: &UserHistory, n: usize) -> Result<CandidateList, PortError> {
        let prompt = build_generation_prompt(history, &self.dataset, &self.template);
        let completion = complete(&self.endpoint, &prompt.rendered_text)?;
        let (mut list, _dropped) =
            parse_generation_response(&completion.content, &self.dataset, &history.user_id);
        list.candidates.truncate(n);
        Ok(list)
    }
}

/// Remote judge: renders the yes/no prompt and converts the answer (and
/// first-token probabilities, when present) into a confidence-scored verdict.
pub struct RemoteJudge {
    pub endpoint: RemoteEndpoint,
    pub template: PromptTemplate,
    pub dataset: Dataset,
}

impl CandidateJudge for RemoteJudge {
    fn judge(&self, history: &UserHistory, item_id: &str) -> Result<Verdict, PortError> {
        let prompt = build_discrimination_prompt(history, item_id, &self.dataset, &self.template);
        let completion = complete(&self.endpoint, &prompt)?;
        let (decision, confidence) =
            parse_verdict(&completion.content, completion.token_scores.as_ref())
                .map_err(|e| PortError(e.to_string()))?;
        Ok(Verdict {
            user_id: history.user_id.clone(),
            item_id: item_id.to_string(),
            decision,
            confidence,
        })
    }
}
