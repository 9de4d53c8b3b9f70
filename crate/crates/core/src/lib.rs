//! Structural zero-shot event extraction.
//!
//! Event mentions (a trigger plus its AMR argument tuples) and event types
//! (a type plus its predefined roles) are encoded by one weight-sharing
//! convolutional network into a common space. Types, including ones never
//! seen in training, are ranked by cosine similarity.
//!
//! The crate is `no_std` and needs only `alloc`; file formats and the
//! command line live in the `eex` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod amr;
pub mod candidates;
pub mod corpus;
pub mod embedding;
pub mod eval;
pub mod inference;
pub mod linalg;
pub mod neural;
pub mod structures;
pub mod testing;
pub mod training;

pub use amr::{parse_penman, serialize_penman, AmrEdge, AmrGraph, AmrNode};
pub use embedding::EmbeddingTable;
pub use neural::ModelParams;
pub use structures::{Ontology, OTHER};
pub use training::TrainConfig;
