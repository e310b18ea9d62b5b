//! Seeded synthetic interaction generators used by tests, the experiment
//! grid, and offline demos: planted item clusters with a controllable
//! long-tail skew and noise level.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::data::{EventType, Interaction};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    pub users: usize,
    pub items: usize,
    pub clusters: usize,
    /// Interactions drawn per user (inclusive range).
    pub min_history: usize,
    pub max_history: usize,
    /// Fraction of each cluster's items that are rare by construction.
    pub rare_fraction: f64,
    /// Sampling weight of a rare item relative to a popular one.
    pub rare_weight: f64,
    /// Probability that a draw ignores the user's cluster entirely.
    pub noise: f64,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            users: 5000,
            items: 500,
            clusters: 20,
            min_history: 4,
            max_history: 9,
            rare_fraction: 0.2,
            rare_weight: 0.05,
            noise: 0.05,
            seed: 42,
        }
    }
}

/// Item id for a cluster/slot position; zero-padded so lexicographic order
/// matches numeric order.
pub fn planted_item_id(item: usize) -> String {
    format!("i{item:05}")
}

pub fn planted_user_id(user: usize) -> String {
    format!("u{user:05}")
}

/// The cluster an item belongs to under `cfg` (round-robin assignment).
pub fn item_cluster(cfg: &PlantedConfig, item: usize) -> usize {
    item % cfg.clusters
}

/// Whether an item is rare by construction: the last `rare_fraction` slots
/// of each cluster.
pub fn is_planted_rare(cfg: &PlantedConfig, item: usize) -> bool {
    let per_cluster = cfg.items / cfg.clusters;
    let slot = item / cfg.clusters;
    let popular = per_cluster - libm::floor(cfg.rare_fraction * per_cluster as f64) as usize;
    slot >= popular
}

/// Draws a planted-cluster interaction log: each user belongs to one
/// cluster and samples items from it (rare items downweighted), with an
/// occasional uniform noise draw.
pub fn planted_clusters(cfg: &PlantedConfig) -> Vec<Interaction> {
    assert!(cfg.clusters >= 1 && cfg.items >= cfg.clusters);
    assert!(cfg.min_history >= 1 && cfg.max_history >= cfg.min_history);
    let mut rng = SplitMix64::new(cfg.seed);
    let mut out = Vec::new();
    for u in 0..cfg.users {
        let cluster = u % cfg.clusters;
        let len = cfg.min_history + rng.gen_range(cfg.max_history - cfg.min_history + 1);
        let mut drawn: Vec<usize> = Vec::with_capacity(len);
        let mut ts = 1i64;
        let mut attempts = 0;
        while drawn.len() < len && attempts < len * 50 {
            attempts += 1;
            let item = if rng.next_f64() < cfg.noise {
                rng.gen_range(cfg.items)
            } else {
                // sample within the cluster, rare items downweighted
                loop {
                    let slot = rng.gen_range(cfg.items / cfg.clusters);
                    let item = slot * cfg.clusters + cluster;
                    if !is_planted_rare(cfg, item) || rng.next_f64() < cfg.rare_weight {
                        break item;
                    }
                }
            };
            if drawn.contains(&item) {
                continue;
            }
            drawn.push(item);
            out.push(Interaction::new(
                &planted_user_id(u),
                &planted_item_id(item),
                ts,
                EventType::Click,
            ));
            ts += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;

    #[test]
    fn deterministic_under_seed() {
        let cfg = PlantedConfig {
            users: 50,
            items: 40,
            clusters: 4,
            ..Default::default()
        };
        assert_eq!(planted_clusters(&cfg), planted_clusters(&cfg));
    }

    #[test]
    fn users_mostly_stay_in_cluster() {
        let cfg = PlantedConfig {
            users: 200,
            items: 100,
            clusters: 10,
            noise: 0.0,
            ..Default::default()
        };
        for rec in planted_clusters(&cfg) {
            let u: usize = rec.user_id[1..].parse().unwrap();
            let i: usize = rec.item_id[1..].parse().unwrap();
            assert_eq!(u % cfg.clusters, item_cluster(&cfg, i));
        }
    }

    #[test]
    fn rare_items_are_less_popular() {
        let cfg = PlantedConfig {
            users: 2000,
            items: 100,
            clusters: 10,
            noise: 0.0,
            ..Default::default()
        };
        let ds = Dataset::from_interactions(planted_clusters(&cfg)).unwrap();
        let mut rare_total = 0u64;
        let mut rare_n = 0u64;
        let mut pop_total = 0u64;
        let mut pop_n = 0u64;
        for item in ds.items() {
            let idx: usize = item.item_id[1..].parse().unwrap();
            if is_planted_rare(&cfg, idx) {
                rare_total += item.popularity;
                rare_n += 1;
            } else {
                pop_total += item.popularity;
                pop_n += 1;
            }
        }
        assert!(rare_n > 0 && pop_n > 0);
        assert!((rare_total as f64 / rare_n as f64) < (pop_total as f64 / pop_n as f64));
    }
}
