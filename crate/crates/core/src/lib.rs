//! Item-to-item recommendation with synthetic-data enhancement: a trainable
//! next-item generator with a long-tail-weighted loss, a confidence-scoring
//! discriminator that filters its output, classical I2I backends (Swing,
//! BM25, BPR) trained on the merged stream, and the inverted-index lookup
//! that serves their neighbor lists.
//!
//! This crate is `no_std` (alloc required); file formats, the CLI, and the
//! HTTP service live in the companion `i2i-pipeline` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod augment;
pub mod bm25;
pub mod bpr;
pub mod data;
pub mod discriminator;
pub mod generator;
pub mod graph;
pub mod index;
pub mod metrics;
pub mod neighbors;
pub mod prompt;
pub mod rng;
pub mod similarity;
pub mod split;
pub mod swing;
pub mod synth;

pub use augment::{augment, filter_candidates, merge, AugmentationConfig, AugmentedDataset};
pub use data::{Dataset, EventType, Interaction, UserHistory};
pub use index::{Aggregation, InvertedIndex, LookupRequest, LookupResponse};
pub use metrics::{evaluate, ndcg_at_k, recall_at_k, EvalParams, EvalReport, RankedPrediction};
pub use neighbors::ItemNeighborList;
pub use split::{chronological_split, SplitSpec};
