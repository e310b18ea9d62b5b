//! Sparse symmetric item-item similarity storage shared by the Swing and
//! BM25 backends. Scores are computed once per unordered pair and mirrored,
//! so sim(i, j) and sim(j, i) are bit-identical.

use alloc::vec::Vec;
use hashbrown::HashSet;

use crate::graph::BipartiteGraph;

#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    /// Per item, (neighbor index, score) with score != 0, sorted by neighbor.
    rows: Vec<Vec<(u32, f64)>>,
}

impl SimilarityMatrix {
    pub fn new(n: usize) -> Self {
        SimilarityMatrix {
            rows: alloc::vec![Vec::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Records a score for the unordered pair {i, j}.
    pub fn insert_pair(&mut self, i: u32, j: u32, score: f64) {
        debug_assert_ne!(i, j);
        self.rows[i as usize].push((j, score));
        self.rows[j as usize].push((i, score));
    }

    pub fn finalize(&mut self) {
        for row in self.rows.iter_mut() {
            row.sort_unstable_by_key(|&(j, _)| j);
        }
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&(j as u32), |&(n, _)| n)
            .map(|pos| self.rows[i][pos].1)
            .unwrap_or(0.0)
    }
}

/// Distinct items j > i co-clicked with i through at least one shared user,
/// in ascending order.
pub(crate) fn co_items_above(graph: &BipartiteGraph, i: usize) -> Vec<u32> {
    let mut out: HashSet<u32> = HashSet::new();
    for &u in &graph.item_users[i] {
        for &j in &graph.user_items[u as usize] {
            if (j as usize) > i {
                out.insert(j);
            }
        }
    }
    let mut v: Vec<u32> = out.into_iter().collect();
    v.sort_unstable();
    v
}

/// Intersection of two sorted u32 slices.
pub(crate) fn sorted_intersection(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut x, mut y) = (0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            core::cmp::Ordering::Less => x += 1,
            core::cmp::Ordering::Greater => y += 1,
            core::cmp::Ordering::Equal => {
                out.push(a[x]);
                x += 1;
                y += 1;
            }
        }
    }
    out
}

pub(crate) fn intersection_size(a: &[u32], b: &[u32]) -> u32 {
    let mut count = 0;
    let (mut x, mut y) = (0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            core::cmp::Ordering::Less => x += 1,
            core::cmp::Ordering::Greater => y += 1,
            core::cmp::Ordering::Equal => {
                count += 1;
                x += 1;
                y += 1;
            }
        }
    }
    count
}
