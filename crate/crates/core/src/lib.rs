//! Proximity full-text search over additional indexes.
//!
//! Besides a plain positional inverted index, the engine builds three
//! families of auxiliary indexes keyed by lemma frequency band:
//!
//! - an ordinary index whose postings carry a near-stop-word (NSW) record,
//! - expanded `(w, v)` pair indexes for frequently used lemmas,
//! - expanded `(f, s, t)` triple indexes for stop lemmas.
//!
//! A query is lemmatized, split into single-type subqueries, and each
//! subquery is dispatched to a strategy that only reads short posting lists.
//! The baseline engine over the plain index returns the same results and is
//! kept for comparison.

pub mod bench;
pub mod corpus;
pub mod error;
pub mod exec;
pub mod index;
pub mod lexicon;
pub mod query;
pub mod rank;
pub mod synth;

pub use error::{Error, Result};

/// Ordinal of a document within the corpus.
pub type DocId = u32;

/// Ordinal of a word within its document.
pub type Position = u32;
