//! Per-item top-K neighbor lists, the payload of the inverted index.

use alloc::string::String;
use alloc::vec::Vec;

use crate::graph::BipartiteGraph;
use crate::similarity::SimilarityMatrix;

pub const DEFAULT_TOP_K: usize = 200;

/// Ranked neighbors for one item: score descending, ties by item_id
/// ascending, no self entry, no duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemNeighborList {
    pub item_id: String,
    pub neighbors: Vec<(String, f64)>,
}

/// Extracts per-item top-K lists from a sparse symmetric similarity matrix.
pub fn topk_neighbors(
    sim: &SimilarityMatrix,
    graph: &BipartiteGraph,
    k: usize,
) -> Vec<ItemNeighborList> {
    let mut out = Vec::with_capacity(sim.len());
    for i in 0..sim.len() {
        let mut scored: Vec<(u32, f64)> = sim.row(i).to_vec();
        scored.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| graph.item_ids[a.0 as usize].cmp(&graph.item_ids[b.0 as usize]))
        });
        scored.truncate(k);
        out.push(ItemNeighborList {
            item_id: graph.item_ids[i].clone(),
            neighbors: scored
                .into_iter()
                .map(|(j, s)| (graph.item_ids[j as usize].clone(), s))
                .collect(),
        });
    }
    out
}
