//! Index construction, encoding and on-disk storage.

pub mod build;
pub mod codec;
pub mod files;

pub use build::{
    build_baseline, build_indexes, build_ordinary_nsw, build_pair_index, build_triple_index, BuiltIndexes,
    IndexBuilder, IndexKinds,
};
pub use codec::{NswEntry, OrdinaryPosting, PairPosting, TriplePosting};
pub use files::{
    pair_key, triple_key, write_index_dir, write_index_dir_atomic, DictEntry, IndexKind, IndexSet, Manifest,
};
