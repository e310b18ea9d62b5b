//! In-memory inverted index and the M x K lookup/aggregation that serving
//! and offline evaluation both route through.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::{HashMap, HashSet};

use crate::neighbors::ItemNeighborList;

pub const INDEX_VERSION: u8 = 1;
pub const DEFAULT_M: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Sum,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IndexError {
    DuplicateKey(String),
}

impl fmt::Display for IndexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexError::DuplicateKey(id) => write!(f, "duplicate item key {id}"),
        }
    }
}

impl core::error::Error for IndexError {}

/// Immutable (item -> top-K neighbors) lookup table.
#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    pub version: u8,
    pub k: u32,
    entries: BTreeMap<String, Vec<(String, f64)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LookupRequest {
    /// Most recent first.
    pub recent_item_ids: Vec<String>,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LookupStats {
    pub keys_hit: usize,
    pub keys_missed: usize,
    pub candidates_before_dedup: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LookupResponse {
    pub items: Vec<(String, f64)>,
    pub stats: LookupStats,
}

impl InvertedIndex {
    /// Builds the index, truncating each list to K. Duplicate keys are an
    /// error.
    pub fn build(lists: &[ItemNeighborList], k: usize) -> Result<InvertedIndex, IndexError> {
        let mut entries = BTreeMap::new();
        for list in lists {
            let mut neighbors = list.neighbors.clone();
            neighbors.truncate(k);
            if entries.insert(list.item_id.clone(), neighbors).is_some() {
                return Err(IndexError::DuplicateKey(list.item_id.clone()));
            }
        }
        Ok(InvertedIndex {
            version: INDEX_VERSION,
            k: k as u32,
            entries,
        })
    }

    pub fn from_entries(
        version: u8,
        k: u32,
        entries: BTreeMap<String, Vec<(String, f64)>>,
    ) -> InvertedIndex {
        InvertedIndex {
            version,
            k,
            entries,
        }
    }

    pub fn item_count(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &Vec<(String, f64)>)> {
        self.entries.iter()
    }

    pub fn get(&self, item_id: &str) -> Option<&[(String, f64)]> {
        self.entries.get(item_id).map(|v| v.as_slice())
    }

    /// Fetches the neighbor lists of the request's most recent items (at most
    /// `m_cap` keys), aggregates duplicate candidates, excludes the query
    /// items, and returns the top n by aggregated score.
    pub fn lookup(
        &self,
        request: &LookupRequest,
        aggregation: Aggregation,
        m_cap: usize,
    ) -> LookupResponse {
        let keys: Vec<&str> = request
            .recent_item_ids
            .iter()
            .take(m_cap)
            .map(|s| s.as_str())
            .collect();
        let exclude: HashSet<&str> = keys.iter().copied().collect();
        let mut stats = LookupStats::default();
        let mut scores: HashMap<&str, f64> =
            HashMap::with_capacity(keys.len().saturating_mul(self.k as usize));
        for key in &keys {
            let Some(neighbors) = self.get(key) else {
                stats.keys_missed += 1;
                continue;
            };
            stats.keys_hit += 1;
            stats.candidates_before_dedup += neighbors.len();
            for (cand, score) in neighbors {
                if exclude.contains(cand.as_str()) {
                    continue;
                }
                match aggregation {
                    Aggregation::Sum => {
                        *scores.entry(cand.as_str()).or_insert(0.0) += score;
                    }
                    Aggregation::Max => {
                        let e = scores.entry(cand.as_str()).or_insert(f64::NEG_INFINITY);
                        if *score > *e {
                            *e = *score;
                        }
                    }
                }
            }
        }
        let mut ranked: Vec<(&str, f64)> = scores.into_iter().collect();
        let order =
            |a: &(&str, f64), b: &(&str, f64)| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0));
        // partial selection first: only the returned prefix needs a full sort
        if ranked.len() > request.n && request.n > 0 {
            ranked.select_nth_unstable_by(request.n - 1, order);
            ranked.truncate(request.n);
        }
        ranked.sort_by(order);
        ranked.truncate(request.n);
        let items = ranked
            .into_iter()
            .map(|(id, s)| (id.to_owned(), s))
            .collect();
        LookupResponse { items, stats }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn list(id: &str, neighbors: &[(&str, f64)]) -> ItemNeighborList {
        ItemNeighborList {
            item_id: id.to_owned(),
            neighbors: neighbors
                .iter()
                .map(|(n, s)| ((*n).to_owned(), *s))
                .collect(),
        }
    }

    fn sample_index() -> InvertedIndex {
        InvertedIndex::build(
            &[
                list("A", &[("x", 0.9), ("y", 0.5), ("z", 0.4)]),
                list("B", &[("y", 0.8), ("w", 0.6), ("x", 0.1)]),
            ],
            200,
        )
        .unwrap()
    }

    #[test]
    fn build_truncates_to_k() {
        let neighbors: Vec<(String, f64)> = (0..350)
            .map(|i| (alloc::format!("n{i:03}"), 1.0 - i as f64 * 0.001))
            .collect();
        let lists = vec![ItemNeighborList {
            item_id: String::from("A"),
            neighbors,
        }];
        let idx = InvertedIndex::build(&lists, 200).unwrap();
        assert_eq!(idx.get("A").unwrap().len(), 200);
        let idx1 = InvertedIndex::build(&lists, 1).unwrap();
        assert_eq!(idx1.get("A").unwrap().len(), 1);
    }

    #[test]
    fn duplicate_keys_rejected() {
        let lists = vec![list("A", &[("x", 1.0)]), list("A", &[("y", 1.0)])];
        assert!(matches!(
            InvertedIndex::build(&lists, 10),
            Err(IndexError::DuplicateKey(_))
        ));
    }

    #[test]
    fn sum_aggregation_hand_merge() {
        let idx = sample_index();
        let resp = idx.lookup(
            &LookupRequest {
                recent_item_ids: vec![String::from("A"), String::from("B")],
                n: 4,
            },
            Aggregation::Sum,
            100,
        );
        assert_eq!(
            resp.items,
            vec![
                (String::from("y"), 1.3),
                (String::from("x"), 1.0),
                (String::from("w"), 0.6),
                (String::from("z"), 0.4),
            ]
        );
        assert_eq!(resp.stats.keys_hit, 2);
        assert_eq!(resp.stats.candidates_before_dedup, 6);
    }

    #[test]
    fn single_key_identity_path() {
        let idx = sample_index();
        let resp = idx.lookup(
            &LookupRequest {
                recent_item_ids: vec![String::from("A")],
                n: 100,
            },
            Aggregation::Sum,
            100,
        );
        assert_eq!(
            resp.items,
            vec![
                (String::from("x"), 0.9),
                (String::from("y"), 0.5),
                (String::from("z"), 0.4),
            ]
        );
    }

    #[test]
    fn query_items_excluded_from_results() {
        let idx = InvertedIndex::build(
            &[list("A", &[("B", 0.9), ("c", 0.5)]), list("B", &[("A", 0.9)])],
            200,
        )
        .unwrap();
        let resp = idx.lookup(
            &LookupRequest {
                recent_item_ids: vec![String::from("A"), String::from("B")],
                n: 10,
            },
            Aggregation::Sum,
            100,
        );
        assert_eq!(resp.items, vec![(String::from("c"), 0.5)]);
    }

    #[test]
    fn all_keys_missing_is_soft() {
        let idx = sample_index();
        let resp = idx.lookup(
            &LookupRequest {
                recent_item_ids: vec![String::from("nope"), String::from("nah")],
                n: 5,
            },
            Aggregation::Sum,
            100,
        );
        assert!(resp.items.is_empty());
        assert_eq!(resp.stats.keys_missed, 2);
    }

    #[test]
    fn m_cap_truncates_keys() {
        let idx = sample_index();
        let resp = idx.lookup(
            &LookupRequest {
                recent_item_ids: vec![String::from("A"), String::from("B")],
                n: 10,
            },
            Aggregation::Sum,
            1,
        );
        assert_eq!(resp.stats.keys_hit, 1);
        assert_eq!(resp.stats.candidates_before_dedup, 3);
    }

    #[test]
    fn max_aggregation_takes_best_source() {
        let idx = sample_index();
        let resp = idx.lookup(
            &LookupRequest {
                recent_item_ids: vec![String::from("A"), String::from("B")],
                n: 1,
            },
            Aggregation::Max,
            100,
        );
        assert_eq!(resp.items, vec![(String::from("x"), 0.9)]);
    }
}
