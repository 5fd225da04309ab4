//! Attributed network embedding.
//!
//! Node embeddings are learned by a shared encoder over a blend of the
//! adjacency matrix and attribute cosine similarities, trained jointly by
//! three heads: an autoencoder that reconstructs the blended rows, a
//! first-order edge likelihood, and a skip-gram model over random walks.
//!
//! The `parallel` feature (on by default) runs row-parallel kernels on
//! rayon; results are identical with the feature disabled.

pub mod error;
pub mod eval;
pub mod graph;
pub mod model;
pub mod par;
pub mod preprocess;
pub mod walks;

pub use error::{Error, Result};
