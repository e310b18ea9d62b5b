//! Interaction records, user histories and the immutable dataset they roll
//! up into, plus long-tail labeling.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventType {
    Click,
    Purchase,
}

impl EventType {
    pub fn parse(s: &str) -> Option<EventType> {
        match s {
            "click" => Some(EventType::Click),
            "purchase" => Some(EventType::Purchase),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            EventType::Click => "click",
            EventType::Purchase => "purchase",
        }
    }
}

/// One (user, item, timestamp, event) record. The atomic unit of every
/// dataset in the pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interaction {
    pub user_id: String,
    pub item_id: String,
    pub timestamp: i64,
    pub event_type: EventType,
}

impl Interaction {
    pub fn new(user_id: &str, item_id: &str, timestamp: i64, event_type: EventType) -> Self {
        Interaction {
            user_id: user_id.to_owned(),
            item_id: item_id.to_owned(),
            timestamp,
            event_type,
        }
    }

    /// Parses one `user \t item \t timestamp \t event` line.
    pub fn parse_tsv(line: &str) -> Result<Interaction, RecordError> {
        let mut fields = line.split('\t');
        let user_id = fields.next().unwrap_or("");
        let item_id = fields.next().ok_or(RecordError::MissingField("item_id"))?;
        let ts = fields.next().ok_or(RecordError::MissingField("timestamp"))?;
        let ev = fields.next().ok_or(RecordError::MissingField("event_type"))?;
        if fields.next().is_some() {
            return Err(RecordError::ExtraFields);
        }
        if user_id.is_empty() {
            return Err(RecordError::EmptyField("user_id"));
        }
        if item_id.is_empty() {
            return Err(RecordError::EmptyField("item_id"));
        }
        let timestamp: i64 = ts
            .parse()
            .map_err(|_| RecordError::BadTimestamp)?;
        if timestamp < 0 {
            return Err(RecordError::BadTimestamp);
        }
        let event_type = EventType::parse(ev).ok_or(RecordError::BadEventType)?;
        Ok(Interaction::new(user_id, item_id, timestamp, event_type))
    }

    /// Canonical ordering: timestamp ascending, ties by item_id ascending.
    pub fn chrono_key(&self) -> (i64, &str) {
        (self.timestamp, &self.item_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordError {
    MissingField(&'static str),
    EmptyField(&'static str),
    ExtraFields,
    BadTimestamp,
    BadEventType,
}

impl fmt::Display for RecordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordError::MissingField(name) => write!(f, "missing field {name}"),
            RecordError::EmptyField(name) => write!(f, "empty field {name}"),
            RecordError::ExtraFields => write!(f, "too many fields"),
            RecordError::BadTimestamp => write!(f, "timestamp is not a non-negative integer"),
            RecordError::BadEventType => write!(f, "event_type must be click or purchase"),
        }
    }
}

impl core::error::Error for RecordError {}

/// A user's profile plus their interactions in chronological order
/// (timestamp ascending, ties by item_id).
#[derive(Debug, Clone, PartialEq)]
pub struct UserHistory {
    pub user_id: String,
    pub static_features: BTreeMap<String, String>,
    pub interactions: Vec<Interaction>,
}

impl UserHistory {
    pub fn new(user_id: &str, mut interactions: Vec<Interaction>) -> Self {
        interactions.sort_by(|a, b| a.chrono_key().cmp(&b.chrono_key()));
        UserHistory {
            user_id: user_id.to_owned(),
            static_features: BTreeMap::new(),
            interactions,
        }
    }

    /// Keeps only the `n` most recent interactions, order preserved.
    pub fn truncated(&self, n: usize) -> UserHistory {
        let start = self.interactions.len().saturating_sub(n);
        UserHistory {
            user_id: self.user_id.clone(),
            static_features: self.static_features.clone(),
            interactions: self.interactions[start..].to_vec(),
        }
    }

    pub fn item_ids(&self) -> impl Iterator<Item = &str> {
        self.interactions.iter().map(|i| i.item_id.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemRecord {
    pub item_id: String,
    pub title: Option<String>,
    pub category: Option<String>,
    pub popularity: u64,
    pub long_tail: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetSummary {
    pub users: usize,
    pub items: usize,
    pub interactions: usize,
    pub long_tail_items: usize,
    pub duplicates_dropped: usize,
}

/// Immutable interaction dataset: users sorted by user_id, items sorted by
/// item_id, popularity counts recomputable from the interactions.
#[derive(Debug, Clone)]
pub struct Dataset {
    users: Vec<UserHistory>,
    items: Vec<ItemRecord>,
    interaction_count: usize,
    duplicates_dropped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataError {
    Empty,
    BadFraction(f64),
    UnknownItem(String),
    UnknownUser(String),
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::Empty => write!(f, "dataset has no interactions"),
            DataError::BadFraction(v) => write!(f, "fraction {v} outside (0, 1]"),
            DataError::UnknownItem(id) => write!(f, "unknown item {id}"),
            DataError::UnknownUser(id) => write!(f, "unknown user {id}"),
        }
    }
}

impl core::error::Error for DataError {}

impl Dataset {
    /// Builds a dataset from raw records. Duplicate (user, item, timestamp)
    /// records are collapsed and counted, not errored.
    pub fn from_interactions(records: Vec<Interaction>) -> Result<Dataset, DataError> {
        if records.is_empty() {
            return Err(DataError::Empty);
        }
        let mut seen: BTreeSet<(String, String, i64)> = BTreeSet::new();
        let mut per_user: BTreeMap<String, Vec<Interaction>> = BTreeMap::new();
        let mut popularity: BTreeMap<String, u64> = BTreeMap::new();
        let mut duplicates = 0usize;
        let mut count = 0usize;
        for rec in records {
            let key = (rec.user_id.clone(), rec.item_id.clone(), rec.timestamp);
            if !seen.insert(key) {
                duplicates += 1;
                continue;
            }
            *popularity.entry(rec.item_id.clone()).or_insert(0) += 1;
            per_user.entry(rec.user_id.clone()).or_default().push(rec);
            count += 1;
        }
        let users = per_user
            .into_iter()
            .map(|(uid, ints)| UserHistory::new(&uid, ints))
            .collect();
        let items = popularity
            .into_iter()
            .map(|(id, pop)| ItemRecord {
                item_id: id,
                title: None,
                category: None,
                popularity: pop,
                long_tail: false,
            })
            .collect();
        Ok(Dataset {
            users,
            items,
            interaction_count: count,
            duplicates_dropped: duplicates,
        })
    }

    pub fn users(&self) -> &[UserHistory] {
        &self.users
    }

    pub fn items(&self) -> &[ItemRecord] {
        &self.items
    }

    pub fn interaction_count(&self) -> usize {
        self.interaction_count
    }

    pub fn item_index(&self, item_id: &str) -> Option<usize> {
        self.items
            .binary_search_by(|r| r.item_id.as_str().cmp(item_id))
            .ok()
    }

    pub fn item(&self, item_id: &str) -> Option<&ItemRecord> {
        self.item_index(item_id).map(|i| &self.items[i])
    }

    pub fn user(&self, user_id: &str) -> Option<&UserHistory> {
        self.users
            .binary_search_by(|u| u.user_id.as_str().cmp(user_id))
            .ok()
            .map(|i| &self.users[i])
    }

    /// Attaches title/category text to an item, for prompt rendering.
    pub fn set_item_text(&mut self, item_id: &str, title: Option<&str>, category: Option<&str>) {
        if let Some(idx) = self.item_index(item_id) {
            self.items[idx].title = title.map(|s| s.to_owned());
            self.items[idx].category = category.map(|s| s.to_owned());
        }
    }

    pub fn is_long_tail(&self, item_id: &str) -> bool {
        self.item(item_id).map(|r| r.long_tail).unwrap_or(false)
    }

    /// Flags exactly floor(fraction * |items|) items as long-tail, chosen by
    /// ascending popularity with ties broken by item_id ascending.
    /// Idempotent for a fixed fraction.
    pub fn label_long_tail(&mut self, fraction: f64) -> Result<usize, DataError> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(DataError::BadFraction(fraction));
        }
        let count = libm::floor(fraction * self.items.len() as f64) as usize;
        let mut order: Vec<usize> = (0..self.items.len()).collect();
        order.sort_by(|&a, &b| {
            (self.items[a].popularity, &self.items[a].item_id)
                .cmp(&(self.items[b].popularity, &self.items[b].item_id))
        });
        for item in self.items.iter_mut() {
            item.long_tail = false;
        }
        for &idx in order.iter().take(count) {
            self.items[idx].long_tail = true;
        }
        Ok(count)
    }

    pub fn summary(&self) -> DatasetSummary {
        DatasetSummary {
            users: self.users.len(),
            items: self.items.len(),
            interactions: self.interaction_count,
            long_tail_items: self.items.iter().filter(|i| i.long_tail).count(),
            duplicates_dropped: self.duplicates_dropped,
        }
    }

    /// All interactions in canonical order (user_id, then chrono key).
    pub fn all_interactions(&self) -> impl Iterator<Item = &Interaction> {
        self.users.iter().flat_map(|u| u.interactions.iter())
    }
}
