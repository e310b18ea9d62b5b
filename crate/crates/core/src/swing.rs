//! Swing similarity over the user-item bipartite graph: for every pair of
//! users that co-clicked both items, add 1 / (smoothing + their item
//! overlap). Only co-clicked item pairs are ever touched.

use hashbrown::HashMap;

use crate::graph::BipartiteGraph;
use crate::similarity::{co_items_above, intersection_size, sorted_intersection, SimilarityMatrix};

pub const DEFAULT_SMOOTHING: f64 = 1.0;

pub fn swing_similarity(graph: &BipartiteGraph, smoothing: f64) -> SimilarityMatrix {
    assert!(smoothing > 0.0, "smoothing must be positive");
    let n = graph.item_ids.len();
    let mut sim = SimilarityMatrix::new(n);
    // user-pair overlaps are shared across many item pairs
    let mut overlap_cache: HashMap<(u32, u32), u32> = HashMap::new();
    for i in 0..n {
        let users_i = &graph.item_users[i];
        for j in co_items_above(graph, i) {
            let shared = sorted_intersection(users_i, &graph.item_users[j as usize]);
            if shared.len() < 2 {
                continue;
            }
            let mut score = 0.0;
            for a in 0..shared.len() {
                for b in (a + 1)..shared.len() {
                    let key = (shared[a], shared[b]);
                    let overlap = *overlap_cache.entry(key).or_insert_with(|| {
                        intersection_size(
                            &graph.user_items[key.0 as usize],
                            &graph.user_items[key.1 as usize],
                        )
                    });
                    score += 1.0 / (smoothing + overlap as f64);
                }
            }
            if score != 0.0 {
                sim.insert_pair(i as u32, j, score);
            }
        }
    }
    sim.finalize();
    sim
}
