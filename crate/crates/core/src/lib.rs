//! Semi-supervised constrained clustering for generalized category discovery.
//!
//! The pipeline takes a matrix of unit-length embeddings plus a partial
//! labeling, collapses each labeled class into a proxy, and greedily
//! associates proxies and unlabeled instances into groups under the rule
//! that no group may ever hold two known classes. The groups then drive a
//! prototype-memory contrastive objective for representation learning.
//!
//! Modules:
//! - [`features`]: data model, PALF/CSV file formats, synthetic generator.
//! - [`distance`]: cosine and k-reciprocal Jaccard distance matrices.
//! - [`association`]: hybrid proxies, candidate pairs, greedy association.
//! - [`baselines`]: Semi-KMeans and (constrained) Semi-DBSCAN.
//! - [`prototype`]: proxy memory, contrastive loss, PK sampler, toy trainer.
//! - [`evaluation`]: Hungarian-matched clustering accuracy.
//! - [`bench`]: stage timings and log-log scaling fits.

pub mod association;
pub mod baselines;
pub mod bench;
pub mod distance;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod prototype;

mod util;

pub use error::{Error, Result};
