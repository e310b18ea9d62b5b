//! User-item bipartite graph with a per-user recency cap, the shared input
//! of the Swing and BM25 backends.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::data::Interaction;

#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    pub user_ids: Vec<String>,
    pub item_ids: Vec<String>,
    /// Per user, sorted distinct item indices.
    pub user_items: Vec<Vec<u32>>,
    /// Per item, sorted distinct user indices.
    pub item_users: Vec<Vec<u32>>,
}

impl BipartiteGraph {
    pub fn is_empty(&self) -> bool {
        self.item_ids.is_empty()
    }

    pub fn item_index(&self, id: &str) -> Option<usize> {
        self.item_ids.binary_search_by(|i| i.as_str().cmp(id)).ok()
    }
}

/// Builds the graph from an interaction stream, keeping only each user's
/// most recent `click_cap` interactions.
pub fn build_graph(stream: &[Interaction], click_cap: usize) -> BipartiteGraph {
    assert!(click_cap >= 1, "click_cap must be >= 1");
    let mut per_user: BTreeMap<&str, Vec<&Interaction>> = BTreeMap::new();
    for rec in stream {
        per_user.entry(&rec.user_id).or_default().push(rec);
    }

    let mut item_ids: Vec<String> = Vec::new();
    let mut capped: BTreeMap<&str, Vec<&Interaction>> = BTreeMap::new();
    for (uid, mut recs) in per_user {
        recs.sort_by(|a, b| a.chrono_key().cmp(&b.chrono_key()));
        let start = recs.len().saturating_sub(click_cap);
        let kept = recs.split_off(start);
        for r in &kept {
            item_ids.push(r.item_id.clone());
        }
        capped.insert(uid, kept);
    }
    item_ids.sort();
    item_ids.dedup();

    let user_ids: Vec<String> = capped.keys().map(|&u| String::from(u)).collect();
    let mut user_items: Vec<Vec<u32>> = Vec::with_capacity(user_ids.len());
    let mut item_users: Vec<Vec<u32>> = alloc::vec![Vec::new(); item_ids.len()];
    for (u_idx, recs) in capped.values().enumerate() {
        let mut items: Vec<u32> = recs
            .iter()
            .map(|r| {
                item_ids
                    .binary_search_by(|i| i.as_str().cmp(&r.item_id))
                    .unwrap() as u32
            })
            .collect();
        items.sort_unstable();
        items.dedup();
        for &i in &items {
            item_users[i as usize].push(u_idx as u32);
        }
        user_items.push(items);
    }
    BipartiteGraph {
        user_ids,
        item_ids,
        user_items,
        item_users,
    }
}
