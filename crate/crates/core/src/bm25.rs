//! BM25 item-item similarity. Each item is a document whose terms are the
//! users who clicked it (tf = 1). Item-user weights follow the BM25 formula
//! with idf over user frequency and length normalization against the mean
//! item degree; similarity is the dot product of the weighted vectors.

use crate::graph::BipartiteGraph;
use crate::similarity::{co_items_above, sorted_intersection, SimilarityMatrix};

pub const DEFAULT_K1: f64 = 20.0;
pub const DEFAULT_B: f64 = 0.75;

pub fn bm25_similarity(graph: &BipartiteGraph, k1: f64, b: f64) -> SimilarityMatrix {
    assert!(k1 > 0.0, "k1 must be positive");
    assert!((0.0..=1.0).contains(&b), "b must be in [0, 1]");
    let n = graph.item_ids.len();
    let mut sim = SimilarityMatrix::new(n);
    if n == 0 {
        return sim;
    }

    let avgdl = graph
        .item_users
        .iter()
        .map(|u| u.len() as f64)
        .sum::<f64>()
        / n as f64;
    // idf(u) = ln((N - n_u + 0.5) / (n_u + 0.5) + 1), n_u = items the user clicked
    let idf: alloc::vec::Vec<f64> = graph
        .user_items
        .iter()
        .map(|items| {
            let nu = items.len() as f64;
            libm::log((n as f64 - nu + 0.5) / (nu + 0.5) + 1.0)
        })
        .collect();
    // tf saturation with tf = 1: (k1 + 1) / (1 + k1 (1 - b + b dl/avgdl))
    let norm: alloc::vec::Vec<f64> = graph
        .item_users
        .iter()
        .map(|users| {
            let dl = users.len() as f64;
            (k1 + 1.0) / (1.0 + k1 * (1.0 - b + b * dl / avgdl))
        })
        .collect();

    for i in 0..n {
        for j in co_items_above(graph, i) {
            let shared = sorted_intersection(&graph.item_users[i], &graph.item_users[j as usize]);
            if shared.is_empty() {
                continue;
            }
            let mut idf_sq = 0.0;
            for &u in &shared {
                idf_sq += idf[u as usize] * idf[u as usize];
            }
            let score = norm[i] * norm[j as usize] * idf_sq;
            if score != 0.0 {
                sim.insert_pair(i as u32, j, score);
            }
        }
    }
    sim.finalize();
    sim
}
