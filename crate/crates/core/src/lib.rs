//! Claim verification toolkit: check-worthiness ranking, web evidence
//! retrieval and a hierarchical, claim- and aspect-conditioned attention
//! classifier with evidence highlighting.

pub mod checkpoint;
pub mod claim;
pub mod metrics;
pub mod nn;
pub mod retrieval;
pub mod sadhan;
pub mod text;
pub mod train;
pub mod worthiness;

pub use claim::{AspectKind, Claim};
